#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "knet/analysis.hpp"
#include "knet/asymptotic.hpp"
#include "knet/coupling.hpp"
#include "knet/hermite.hpp"
#include "knet/kinetic.hpp"
#include "knet/spectral.hpp"

namespace knet::cli {

namespace {

void require_finite(const Mat& M, const std::string& what) {
  if (!M.allFinite()) throw NumericalFailure(what + ": non-finite values");
}

MomentSystem system_for(const RunConfig& c, Collision col) { return build_system(build_quadrature(c.N), col); }

InitialData bump_data(const RunConfig& c, const MomentSystem& sys) {
  InitialData d;
  d.center = c.center;
  d.width = c.width;
  d.correction = c.correction;
  if (!c.amplitude.empty()) {
    if (static_cast<int>(c.amplitude.size()) != sys.blockSize)
      throw ConfigError("amplitude needs " + std::to_string(sys.blockSize) + " entries");
    d.amplitude = Eigen::Map<const Vec>(c.amplitude.data(), c.amplitude.size());
  } else {
    d.amplitude = Vec::Zero(sys.blockSize);
    d.amplitude(0) = 1.0;
  }
  return d;
}

InitialData expansion_data(const RunConfig& c, const MomentSystem& sys) {
  if (c.profile == "zero-mode") {
    if (sys.collision != Collision::Q2) throw ConfigError("profile zero-mode needs a q2 case");
    return boundary_driving_data(sys);
  }
  return bump_data(c, sys);
}

std::vector<double> snapshot_times(const RunConfig& c) {
  if (!c.snapshots.empty()) return c.snapshots;
  return {0.0, 0.5 * c.T, c.T};
}

std::vector<double> edge_weights(const RunConfig& c) {
  if (!c.edgeAmplitudes.empty()) return c.edgeAmplitudes;
  std::vector<double> a(c.edges);
  for (int i = 0; i < c.edges; ++i) a[i] = std::ldexp(1.0, -i);
  return a;
}

int worker_count(const RunConfig& c) {
  const int cap = thread_cap();
  return c.threads > 0 ? std::min(c.threads, cap) : cap;
}

AsymptoticCase require_case(const RunConfig& c) {
  if (c.caseName.empty()) throw ConfigError("--case is required");
  try {
    return case_from_string(c.caseName);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::ordered_json diag_json(const ExpansionDiagnostics& d) {
  return {{"boundary_condition_number", d.boundaryCond}, {"boundary_residual", d.boundaryResidual},
          {"outer_constraint", d.outerConstraint},       {"layer_tail", d.layerTail},
          {"layer_ode_residual", d.layerOdeResidual},    {"heat_conservation", d.heatConservation},
          {"far_field", d.farField}};
}

std::string comp_name(int j, int i) { return "j" + std::to_string(j) + "_g" + std::to_string(i); }

}  // namespace

// ---------------------------------------------------------------------------

void cmd_quadrature(const RunConfig& c, Manifest* m) {
  const QuadratureSet q = build_quadrature(c.N);
  const double res = orthonormality_residual(q);
  auto emit = [&](Csv& csv) {
    csv.header({"k", "node", "weight", "orthonormality_residual"});
    for (int k = 0; k < q.size(); ++k) csv.cell(k).cell(q.nodes[k]).cell(q.node_weight(k)).cell(res).end_row();
  };
  if (m) {
    Csv csv(m->file("quadrature.csv"));
    emit(csv);
    m->doc["results"] = {{"orthonormality_residual", res}};
  } else {
    Csv csv(std::cout);
    emit(csv);
  }
  if (!(res <= 1e-10)) throw NumericalFailure("quadrature: orthonormality residual " + fmt17(res));
}

void cmd_check(const RunConfig& c, Manifest* m) {
  const QuadratureSet q = build_quadrature(c.N);
  const MomentSystem s1 = build_system(q, Collision::Q1);
  bool ok = true;
  auto emit = [&](Csv& csv) {
    csv.header({"check", "variant", "n", "N", "value", "strict", "pass"});
    auto row = [&](const std::string& name, double v, double tol) {
      const bool pass = std::fabs(v) <= tol;
      ok = ok && pass;
      csv.cell(name).cell("").cell("").cell(c.N).cell(v).cell("").cell(pass).end_row();
    };
    row("orthonormality", orthonormality_residual(q), 1e-10);
    row("completeness", completeness_residual(s1), 1e-10);
    row("spectral_identity", spectral_identity_residual(s1), 1e-9);
    const Mat id = s1.A12.transpose() * s1.A11.inverse() * s1.A12;
    row("q1_block_identity", id.size() ? id.cwiseAbs().maxCoeff() : 0.0, 1e-12);
    for (auto v : {BoundaryVariant::B1, BoundaryVariant::B2}) {
      const auto rep = dissipativity_report(build_boundary_matrix(v, s1, c.edges), s1);
      bool pass = rep.maxQuadForm <= 1e-10;
      if (v == BoundaryVariant::B1 || c.edges == 2) pass = pass && std::fabs(rep.maxQuadForm) <= 1e-10;
      else pass = pass && rep.strict;
      ok = ok && pass;
      csv.cell("dissipativity").cell(to_string(v)).cell(c.edges).cell(c.N).cell(rep.maxQuadForm).cell(rep.strict)
          .cell(pass).end_row();
    }
  };
  if (m) {
    Csv csv(m->file("check.csv"));
    emit(csv);
    m->doc["results"] = {{"all_pass", ok}};
  } else {
    Csv csv(std::cout);
    emit(csv);
  }
  if (!ok) throw NumericalFailure("check: a structure or dissipativity row failed");
}

void cmd_simulate(const RunConfig& c, Manifest& m) {
  const MomentSystem sys = system_for(c, collision_from_string(c.collision));
  const InitialData d = bump_data(c, sys);
  const double vmax = sys.quad.max_speed();
  const double L = c.L > 0.0 ? c.L : d.support_end() + vmax * c.T + 1.0;
  const double dx = c.dx > 0.0 ? c.dx : c.eps * c.dxPerEps;
  Grid g;
  try {
    g = make_grid(L, dx, c.T, c.cfl, vmax);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::vector<double> times = snapshot_times(c);

  Trajectory tr;
  std::string prefix;
  int edges = 1;
  if (c.boundary == "network") {
    NetworkProblem p;
    p.sys = &sys;
    p.eps = c.eps;
    p.grid = g;
    p.snapshotTimes = times;
    for (double a : edge_weights(c)) {
      InitialData e = d;
      e.amplitude *= a;
      p.initial.push_back(e);
    }
    tr = solve_network(p);
    prefix = "e";
    edges = c.edges;
  } else {
    IBVPProblem p;
    p.sys = &sys;
    p.boundary = boundary_from_string(c.boundary);
    p.n = c.edges;
    p.eps = c.eps;
    p.grid = g;
    p.initial = d;
    p.snapshotTimes = times;
    tr = solve_halfline(p);
    prefix = "u";
  }

  for (const auto& snap : tr.snapshots)
    for (const auto& field : snap) require_finite(field, "simulate");

  nlohmann::ordered_json snaps = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
    Csv csv(m.file(name));
    std::vector<std::string> head{"x"};
    for (int e = 0; e < edges; ++e)
      for (int i = 0; i < sys.dim(); ++i)
        head.push_back((edges > 1 ? prefix + std::to_string(e + 1) + "_g" : prefix + "_g") + std::to_string(i));
    csv.header(head);
    for (int j = 0; j < g.cells; ++j) {
      csv.cell(g.x(j));
      for (int e = 0; e < edges; ++e)
        for (int i = 0; i < sys.dim(); ++i) csv.cell(tr.snapshots[k][e](i, j));
      csv.end_row();
    }
    snaps.push_back({{"file", name}, {"t", tr.times[k]}});
  }
  m.doc["grid"] = {{"L", g.L}, {"cells", g.cells}, {"dx", g.dx}, {"dt", g.dt}, {"steps", g.steps}};
  m.doc["snapshots"] = snaps;
  m.doc["audit"] = {{"mass0", tr.mass0},
                    {"massT", tr.massT},
                    {"far_flux", tr.farFlux},
                    {"junction_flux", tr.junctionFlux},
                    {"max_boundary_residual", tr.maxBoundaryResidual}};
}

void cmd_asymptotic(const RunConfig& c, Manifest& m) {
  const AsymptoticCase ac = require_case(c);
  const MomentSystem sys = system_for(c, case_collision(ac));
  const InitialData d = expansion_data(c, sys);
  AsymptoticSettings s;
  s.n = c.edges;
  s.T = c.T;
  s.maxOrder = c.order;
  s.outputTimes = c.snapshots;
  s.allowBoundaryData = c.profile == "zero-mode";
  const auto t0 = std::chrono::steady_clock::now();
  const AsymptoticExpansion e = build_expansion(sys, ac, d, s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const double dx = c.dx > 0.0 ? c.dx : std::min(c.eps * c.dxPerEps, e.outer.h);
  const int nx = static_cast<int>(std::floor(e.outer.end() / dx + 1e-9)) + 1;
  std::vector<double> x(nx);
  for (int i = 0; i < nx; ++i) x[i] = i * dx;

  {
    Csv csv(m.file("expansion.csv"));
    std::vector<std::string> head{"t", "x"};
    for (int i = 0; i < sys.dim(); ++i) head.push_back("U_g" + std::to_string(i));
    csv.header(head);
    for (const auto& f : e.fields) {
      const Mat U = e.evaluate(x, f.t, c.eps);
      require_finite(U, "asymptotic");
      for (int k = 0; k < nx; ++k) {
        csv.cell(f.t).cell(x[k]);
        for (int i = 0; i < sys.dim(); ++i) csv.cell(U(i, k));
        csv.end_row();
      }
    }
  }
  const ExpansionFields& last = e.fields.back();
  if (e.hasViscous) {
    Csv csv(m.file("viscous_layer.csv"));
    std::vector<std::string> head{"z"};
    std::vector<int> orders;
    for (int j = 0; j <= e.maxOrder; ++j)
      if (last.viscous[j].size()) orders.push_back(j);
    for (int j : orders)
      for (int i = 0; i < sys.dim(); ++i) head.push_back(comp_name(j, i));
    csv.header(head);
    for (int k = 0; k < e.zPoints; ++k) {
      csv.cell(e.z(k));
      for (int j : orders)
        for (int i = 0; i < sys.dim(); ++i) csv.cell(last.viscous[j](i, k));
      csv.end_row();
    }
  }
  if (e.hasKinetic) {
    Csv csv(m.file("kinetic_layer.csv"));
    std::vector<std::string> head{"y"};
    std::vector<int> orders;
    for (int j = 0; j <= e.maxOrder; ++j)
      if (!last.kinetic[j].empty()) orders.push_back(j);
    for (int j : orders)
      for (int i = 0; i < sys.dim(); ++i) head.push_back(comp_name(j, i));
    csv.header(head);
    for (double y : e.y_grid()) {
      csv.cell(y);
      for (int j : orders) {
        const Vec v = last.kinetic[j].eval(y);
        for (int i = 0; i < sys.dim(); ++i) csv.cell(v(i));
      }
      csv.end_row();
    }
  }
  m.doc["expansion"] = {{"case", to_string(ac)},
                        {"max_half_order", e.maxOrder},
                        {"outer_h", e.outer.h},
                        {"outer_points", e.outer.points},
                        {"dz", e.dz},
                        {"z_points", e.zPoints},
                        {"tau", e.tau},
                        {"seconds", secs},
                        {"diagnostics", diag_json(e.diag)}};
}

void cmd_converge(const RunConfig& c, Manifest& m) {
  std::vector<AsymptoticCase> cases;
  bool pair = false;
  if (c.caseName == "q1" || c.caseName == "q2") {
    pair = true;
    const bool q1 = c.caseName == "q1";
    cases = {q1 ? AsymptoticCase::Q1_IBVP1 : AsymptoticCase::Q2_IBVP1,
             q1 ? AsymptoticCase::Q1_IBVP2 : AsymptoticCase::Q2_IBVP2};
  } else {
    cases = {require_case(c)};
  }
  if (c.epsList.size() < 3) throw ConfigError("--eps-list needs at least three values");
  StudyConfig sc;
  sc.N = c.N;
  sc.n = c.edges;
  sc.T = c.T;
  sc.cfl = c.cfl;
  sc.dxPerEps = c.dxPerEps;
  sc.center = c.center;
  sc.width = c.width;
  if (!c.amplitude.empty()) sc.amplitude = Eigen::Map<const Vec>(c.amplitude.data(), c.amplitude.size());
  sc.edgeAmplitudes = c.edgeAmplitudes;
  sc.K = c.order;
  sc.richardson = c.richardson;
  sc.threads = worker_count(c);

  std::vector<ConvergenceReport> reps;
  for (auto ac : cases) reps.push_back(convergence_study(ac, c.epsList, sc));
  for (const auto& r : reps)
    for (const auto& en : r.entries)
      if (!std::isfinite(en.err.h1) || !std::isfinite(en.err.linf)) throw NumericalFailure("converge: non-finite error");
  std::optional<EdgeErrorReport> edges;
  if (pair) edges = edge_errors(reps[0], reps[1], sc);

  {
    Csv csv(m.file("rates.csv"));
    std::vector<std::string> head{"case", "eps", "cells", "dx", "l2", "linf", "h1", "richardson"};
    if (edges) {
      for (int k = 0; k < c.edges; ++k) head.push_back("edge" + std::to_string(k + 1) + "_linf");
      head.push_back("edge1_bound");
    }
    csv.header(head);
    for (const auto& r : reps)
      for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& en = r.entries[i];
        csv.cell(to_string(r.tag)).cell(en.eps).cell(en.cells).cell(en.dx).cell(en.err.l2).cell(en.err.linf)
            .cell(en.err.h1).cell(en.richardson);
        if (edges) {
          for (double v : edges->edgeLinf[i]) csv.cell(v);
          csv.cell(edges->bound[i]);
        }
        csv.end_row();
      }
  }
  {
    Csv csv(m.file("fit.csv"));
    csv.header({"case", "norm", "range", "slope", "intercept", "residual", "monotone"});
    for (const auto& r : reps) {
      auto row = [&](const char* norm, const char* range, const SlopeFit& f) {
        csv.cell(to_string(r.tag)).cell(norm).cell(range).cell(f.slope).cell(f.intercept).cell(f.residual)
            .cell(r.monotone).end_row();
      };
      row("h1", "smallest3", r.h1);
      row("l2", "smallest3", r.l2);
      row("linf", "smallest3", r.linf);
      row("h1", "all", r.h1Full);
    }
  }
  if (c.gnuplot) {
    std::vector<PlotSeries> series;
    for (const auto& r : reps) series.push_back({"rates.csv", 2, 7, to_string(r.tag) + " H1", to_string(r.tag)});
    write_loglog_script(m.file("rates.gp"), "kinetic vs asymptotic error at T", "H1 error", series, {0.5, 0.25});
  }

  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : reps) {
    nlohmann::ordered_json secs = nlohmann::ordered_json::array();
    for (const auto& en : r.entries) secs.push_back(en.seconds);
    out.push_back({{"case", to_string(r.tag)},
                   {"h1_slope", r.h1.slope},
                   {"monotone", r.monotone},
                   {"expansion_seconds", r.expansionSeconds},
                   {"kinetic_seconds", secs},
                   {"diagnostics", diag_json(r.diag)}});
  }
  m.doc["studies"] = out;
  m.doc["threads"] = sc.threads;
  if (edges) m.doc["edges"] = {{"bound_holds", edges->boundHolds}, {"monotone", edges->monotone}};
}

void cmd_residual(const RunConfig& c, Manifest& m) {
  const AsymptoticCase ac = require_case(c);
  if (c.epsList.size() < 2) throw ConfigError("--eps-list needs at least two values");
  const MomentSystem sys = system_for(c, case_collision(ac));
  AsymptoticSettings s;
  s.n = c.edges;
  s.T = c.T;
  s.maxOrder = c.order;
  s.allowBoundaryData = c.profile == "zero-mode";
  const AsymptoticExpansion e = build_expansion(sys, ac, expansion_data(c, sys), s);
  const ResidualScaling sc = residual_scaling(e, c.epsList);
  {
    Csv csv(m.file("residual.csv"));
    csv.header({"eps", "E1", "dtE1", "E2", "dtE2", "E1_outer", "E1_viscous", "E2_viscous", "E2_kinetic", "snapshots",
                "snapshot_dt"});
    for (const auto& r : sc.reports)
      csv.cell(r.eps).cell(r.E1).cell(r.dtE1).cell(r.E2).cell(r.dtE2).cell(r.E1outer).cell(r.E1viscous)
          .cell(r.E2viscous).cell(r.E2kinetic).cell(r.snapshots).cell(r.snapshotDt).end_row();
  }
  {
    Csv csv(m.file("residual_fit.csv"));
    csv.header({"quantity", "slope", "intercept", "residual"});
    auto row = [&](const char* q, const SlopeFit& f) { csv.cell(q).cell(f.slope).cell(f.intercept).cell(f.residual).end_row(); };
    row("E1", sc.E1);
    row("E2", sc.E2);
    row("E1_viscous", sc.E1viscous);
    row("E1_plus_dtE1", sc.E1sum);
    row("E2_plus_dtE2", sc.E2sum);
  }
  if (c.gnuplot) {
    write_loglog_script(m.file("residual.gp"), "leftover terms of " + to_string(ac), "space-time L2 norm",
                        {{"residual.csv", 1, 2, "E1", ""}, {"residual.csv", 1, 4, "E2", ""},
                         {"residual.csv", 1, 7, "E1 viscous", ""}},
                        {1.0, 1.5, 0.75});
  }
  m.doc["residual"] = {{"case", to_string(ac)}, {"kappa", sc.kappa}, {"diagnostics", diag_json(e.diag)}};
}

// ---------------------------------------------------------------------------

namespace {

void dispatch(const std::string& sub, const RunConfig& c, Manifest& m) {
  m.doc["config"] = c.to_json();
  if (sub == "quadrature") cmd_quadrature(c, &m);
  else if (sub == "check") cmd_check(c, &m);
  else if (sub == "simulate") cmd_simulate(c, m);
  else if (sub == "asymptotic") cmd_asymptotic(c, m);
  else if (sub == "converge") cmd_converge(c, m);
  else if (sub == "residual") cmd_residual(c, m);
  else throw ConfigError("unknown subcommand '" + sub + "'");
  m.write();
}

}  // namespace

void replay(const std::string& manifestPath, const std::string& outDir) {
  std::ifstream f(manifestPath);
  if (!f) throw ConfigError("cannot read manifest '" + manifestPath + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (!j.contains("subcommand") || !j.contains("config")) throw ConfigError("manifest lacks subcommand or config");
  const std::string sub = j["subcommand"].get<std::string>();
  const RunConfig c = RunConfig::from_json(j["config"]);
  validate(c);
  std::vector<std::string> argv = {"replay", "--manifest", manifestPath, "--out", outDir};
  Manifest m(outDir, sub, argv);
  m.doc["replayed_from"] = manifestPath;
  dispatch(sub, c, m);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Kinetic models on star networks: reference solves, asymptotic expansions and rate studies",
               "kinetic_net"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", std::string(KNET_VERSION));

  // flag values; unset ones keep the config/default value
  std::optional<int> N, edges, order, threads;
  std::optional<double> eps, T, cfl, dx, L, center, width;
  std::optional<std::string> collision, boundary, caseName, epsList, profile, amplitude, snapshots;
  std::string config, out = ".", manifest;
  bool gnuplot = false, noRichardson = false;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", config, "INI file with [system], [grid], [initial], [study] sections")
        ->check(CLI::ExistingFile);
    s->add_option("--out", out, "output directory");
    s->add_option("--N", N, "quadrature half size");
    s->add_option("--T", T, "final time");
    s->add_option("--threads", threads, "worker threads (capped by KINETIC_NET_THREADS)");
    s->add_option("--center", center, "bump center");
    s->add_option("--width", width, "bump half width");
    s->add_option("--amplitude", amplitude, "equilibrium amplitudes, comma separated");
  };

  auto* quad = app.add_subcommand("quadrature", "Gauss-Hermite nodes and weights as CSV");
  quad->add_option("--N", N, "quadrature half size")->required();
  quad->add_option("--out", out, "write quadrature.csv and a manifest here instead of stdout");

  auto* check = app.add_subcommand("check", "structure and dissipativity checks as CSV");
  check->add_option("--N", N, "quadrature half size")->required();
  check->add_option("--edges", edges, "edges at the junction");
  check->add_option("--out", out, "write check.csv and a manifest here instead of stdout");

  auto* sim = app.add_subcommand("simulate", "kinetic reference solve of a network or half-line problem");
  common(sim);
  sim->get_option("--config")->required();
  sim->add_option("--eps", eps, "Knudsen number");
  sim->add_option("--edges", edges, "edges at the junction");
  sim->add_option("--collision", collision, "q1 or q2");
  sim->add_option("--boundary", boundary, "b1, b2 or network");
  sim->add_option("--cfl", cfl, "Courant number");
  sim->add_option("--dx", dx, "cell size (default eps/16)");
  sim->add_option("--L", L, "domain length");
  sim->add_option("--snapshots", snapshots, "snapshot times, comma separated");

  auto* asy = app.add_subcommand("asymptotic", "asymptotic expansion U_eps and layer profiles");
  common(asy);
  asy->add_option("--case", caseName, "q1-ibvp1 | q1-ibvp2 | q2-ibvp1 | q2-ibvp2")->required();
  asy->add_option("--eps", eps, "Knudsen number")->required();
  asy->add_option("--order", order, "expansion order K for q2-ibvp2 (0..3)");
  asy->add_option("--edges", edges, "edges entering the junction matrix");
  asy->add_option("--dx", dx, "spacing of the output grid");
  asy->add_option("--snapshots", snapshots, "output times, comma separated");
  asy->add_option("--profile", profile, "bump or zero-mode");

  auto* conv = app.add_subcommand("converge", "error of the expansion against the kinetic solve over an eps sweep");
  common(conv);
  conv->add_option("--case", caseName, "a case, or q1/q2 for both problems plus per-edge errors")->required();
  conv->add_option("--eps-list", epsList, "eps values, comma separated");
  conv->add_option("--order", order, "expansion order K for q2-ibvp2");
  conv->add_option("--edges", edges, "edges at the junction");
  conv->add_flag("--gnuplot", gnuplot, "also write rates.gp");
  conv->add_flag("--no-richardson", noRichardson, "skip the refinement check");

  auto* resid = app.add_subcommand("residual", "space-time norms of the leftover terms over an eps sweep");
  common(resid);
  resid->add_option("--case", caseName, "q1-ibvp1 | q1-ibvp2 | q2-ibvp1 | q2-ibvp2")->required();
  resid->add_option("--eps-list", epsList, "eps values, comma separated");
  resid->add_option("--order", order, "expansion order K for q2-ibvp2");
  resid->add_option("--edges", edges, "edges entering the junction matrix");
  resid->add_option("--profile", profile, "bump or zero-mode");
  resid->add_flag("--gnuplot", gnuplot, "also write residual.gp");

  auto* rep = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  rep->add_option("--manifest", manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", out, "output directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "replay") {
      replay(manifest, out);
      return kOk;
    }
    RunConfig c;
    if (!config.empty()) load_ini(config, c);
    if (N) c.N = *N;
    if (edges) c.edges = *edges;
    if (order) c.order = *order;
    if (threads) c.threads = *threads;
    if (eps) c.eps = *eps;
    if (T) c.T = *T;
    if (cfl) c.cfl = *cfl;
    if (dx) c.dx = *dx;
    if (L) c.L = *L;
    if (center) c.center = *center;
    if (width) c.width = *width;
    if (collision) c.collision = *collision;
    if (boundary) c.boundary = *boundary;
    if (caseName) c.caseName = *caseName;
    if (epsList) c.epsList = parse_list(*epsList);
    if (profile) c.profile = *profile;
    if (amplitude) c.amplitude = parse_list(*amplitude);
    if (snapshots) c.snapshots = parse_list(*snapshots);
    if (gnuplot) c.gnuplot = true;
    if (noRichardson) c.richardson = false;
    validate(c);

    if ((name == "quadrature" || name == "check") && !sub->get_option("--out")->count()) {
      if (name == "quadrature") cmd_quadrature(c, nullptr);
      else cmd_check(c, nullptr);
      return kOk;
    }
    Manifest m(out, name, args);
    dispatch(name, c, m);
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "kinetic_net: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "kinetic_net: invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "kinetic_net: numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace knet::cli
