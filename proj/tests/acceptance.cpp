// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "knet/analysis.hpp"
#include "knet/asymptotic.hpp"
#include "knet/coupling.hpp"
#include "knet/heat.hpp"
#include "knet/hermite.hpp"
#include "knet/kinetic.hpp"
#include "knet/spectral.hpp"

using namespace knet;
using json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  json data;
};

std::string sci(double v, int digits = 2) {
  char b[32];
  std::snprintf(b, sizeof b, "%.*e", digits, v);
  return b;
}

std::string fix(double v, int digits = 3) {
  char b[32];
  std::snprintf(b, sizeof b, "%.*f", digits, v);
  return b;
}

InitialData unit_bump(int b, double c = 1.5, double s = 1.0) {
  InitialData d;
  d.center = c;
  d.width = s;
  d.amplitude = Vec::Zero(b);
  d.amplitude(0) = 1.0;
  return d;
}

const std::vector<double> kEps{0.1, 0.05, 0.025, 0.0125};

// 1: quadrature and moment-system identities
Outcome structure_suite() {
  double orth = 0.0, completeness = 0.0, spectral = 0.0;
  for (int N = 1; N <= 10; ++N) {
    const auto q = build_quadrature(N);
    const auto sys = build_system(q, Collision::Q1);
    orth = std::max(orth, orthonormality_residual(q));
    completeness = std::max(completeness, completeness_residual(sys));
    spectral = std::max(spectral, spectral_identity_residual(sys));
  }
  Outcome o;
  o.pass = orth <= 1e-10 && completeness <= 1e-10 && spectral <= 1e-9;
  o.detail = "N=1..10: orthonormality " + sci(orth) + ", V diag(W,W) V^T - I " + sci(completeness) +
             ", A V - V diag(v) " + sci(spectral);
  o.data = {{"orthonormality", orth}, {"completeness", completeness}, {"spectral_identity", spectral}};
  return o;
}

// 2: quadratic form of A on the kernels of B1 and B2
Outcome dissipativity_suite() {
  double b1 = 0.0, b2n2 = 0.0, b2strict = -INFINITY;
  bool ok = true;
  for (int N = 1; N <= 6; ++N) {
    const auto sys = build_system(build_quadrature(N), Collision::Q1);
    for (int n = 2; n <= 6; ++n) {
      const auto r1 = dissipativity_report(build_boundary_matrix(BoundaryVariant::B1, sys, n), sys);
      const auto r2 = dissipativity_report(build_boundary_matrix(BoundaryVariant::B2, sys, n), sys);
      b1 = std::max(b1, std::fabs(r1.maxQuadForm));
      ok = ok && std::fabs(r1.maxQuadForm) <= 1e-10 && r2.maxQuadForm <= 1e-10;
      if (n == 2) {
        b2n2 = std::max(b2n2, std::fabs(r2.maxQuadForm));
        ok = ok && std::fabs(r2.maxQuadForm) <= 1e-10;
      } else {
        b2strict = std::max(b2strict, r2.maxQuadForm);
        ok = ok && r2.strict;
      }
    }
  }
  Outcome o;
  o.pass = ok;
  o.detail = "N=1..6, n=2..6: |max form| on ker B1 " + sci(b1) + ", ker B2 n=2 " + sci(b2n2) +
             ", ker B2 n>=3 max " + sci(b2strict) + " (strict)";
  o.data = {{"b1_max_abs", b1}, {"b2_n2_max_abs", b2n2}, {"b2_n3plus_max", b2strict}};
  return o;
}

// 3: kinetic solver oracles
Outcome solver_suite() {
  const auto sys = build_system(build_quadrature(3), Collision::Q1);
  const double vmax = sys.quad.max_speed();

  // homogeneous relaxation against (1 + dt/eps)^{-k}
  double relax = 0.0;
  {
    auto g = make_grid(1.0, 0.1, 1.0, 0.9, vmax);
    const double eps = 0.05;
    EdgeStepper st(sys, g, eps);
    Vec G0(6);
    G0 << 1.0, 0.3, 0.8, -0.5, 0.25, 0.1;
    Mat F = st.to_dvm(G0.replicate(1, g.cells));
    const int k = 7;
    for (int i = 0; i < k; ++i) st.relax(F);
    const Mat G = st.to_moments(F);
    const double f = std::pow(1.0 + g.dt / eps, -k);
    for (int j = 0; j < g.cells; ++j)
      for (int m = 0; m < 6; ++m) relax = std::max(relax, std::fabs(G(m, j) - G0(m) * (m < 2 ? 1.0 : f)));
  }

  // n = 2 network against the folded whole line
  double fold = 0.0;
  {
    const double eps = 0.05;
    auto g = make_grid(4.0, 0.02, 0.8, 0.9, vmax);
    InitialData d1 = unit_bump(2, 1.2, 0.6), d2 = unit_bump(2, 0.9, 0.5);
    d2.amplitude << 0.4, 0.3;
    NetworkProblem np;
    np.sys = &sys;
    np.eps = eps;
    np.grid = g;
    np.initial = {d1, d2};
    np.snapshotTimes = {g.T};
    const auto tr = solve_network(np);
    const int M = g.cells, dim = sys.dim();
    const Mat G1 = d1.cell_averages(sys, eps, g), G2 = d2.cell_averages(sys, eps, g);
    Mat whole(dim, 2 * M);
    for (int j = 0; j < M; ++j) {
      whole.col(M + j) = G1.col(j);
      for (int i = 0; i < dim; ++i) whole(i, M - 1 - j) = (i % 2 ? -1.0 : 1.0) * G2(i, j);
    }
    const Mat W = solve_wholeline(sys, g, eps, whole);
    const auto& e = tr.snapshots.back();
    for (int j = 0; j < M; ++j)
      for (int i = 0; i < dim; ++i) {
        fold = std::max(fold, std::fabs(e[0](i, j) - W(i, M + j)));
        fold = std::max(fold, std::fabs(e[1](i, j) - (i % 2 ? -1.0 : 1.0) * W(i, M - 1 - j)));
      }
  }

  // total mass changes only through the far end
  double mass = 0.0;
  {
    auto g = make_grid(3.0, 0.02, 1.5, 0.9, vmax);
    NetworkProblem np;
    np.sys = &sys;
    np.eps = 0.05;
    np.grid = g;
    np.initial = {unit_bump(2, 1.5, 1.0), unit_bump(2, 1.0, 0.4), unit_bump(2, 1.8, 0.7)};
    np.snapshotTimes = {g.T};
    const auto tr = solve_network(np);
    mass = std::fabs(tr.massT - tr.mass0 - tr.junctionFlux + tr.farFlux) / tr.mass0;
  }

  // linearity of the half-line solve
  double lin = 0.0;
  {
    auto g = make_grid(4.0, 0.02, 0.6, 0.9, vmax);
    IBVPProblem p;
    p.sys = &sys;
    p.boundary = BoundaryVariant::B2;
    p.n = 3;
    p.eps = 0.05;
    p.grid = g;
    p.initial = unit_bump(2, 1.0, 0.8);
    const Mat a = solve_halfline_final(p);
    IBVPProblem q = p;
    q.initial.center = 1.6;
    q.initial.amplitude << 0.2, -0.7;
    const Mat b = solve_halfline_final(q);
    EdgeStepper st(sys, g, p.eps);
    Mat F = st.to_dvm(2.0 * p.initial.cell_averages(sys, p.eps, g) - 3.0 * q.initial.cell_averages(sys, p.eps, g));
    for (int m = 0; m < g.steps; ++m) st.step(F, dvm_reflection(p.boundary, p.n, F.col(0).head(3)));
    lin = (st.to_moments(F) - (2.0 * a - 3.0 * b)).cwiseAbs().maxCoeff();
  }

  Outcome o;
  o.pass = relax <= 1e-12 && fold <= 1e-10 && mass <= 1e-10 && lin <= 1e-12;
  o.detail = "relaxation " + sci(relax) + ", n=2 fold " + sci(fold) + ", mass audit " + sci(mass) + " rel, linearity " +
             sci(lin);
  o.data = {{"relaxation", relax}, {"fold", fold}, {"mass_audit", mass}, {"linearity", lin}};
  return o;
}

// 4: solvability of the layer boundary systems
Outcome boundary_solvability() {
  double k1 = 0.0, k2 = 0.0, svmin = INFINITY;
  bool finite = true;
  json conds = json::object();
  for (int N = 3; N <= 6; ++N) {
    const auto q1 = build_system(build_quadrature(N), Collision::Q1);
    const auto q2 = build_system(build_quadrature(N), Collision::Q2);
    for (int n = 2; n <= 6; ++n) {
      if (n >= 3) {
        const double c = condition_number(q1_layer_boundary_matrix(q1, n));
        finite = finite && std::isfinite(c);
        k1 = std::max(k1, c);
        conds["q1_N" + std::to_string(N) + "_n" + std::to_string(n)] = c;
      }
      const double c = condition_number(q2_layer_boundary_matrix(q2, n));
      finite = finite && std::isfinite(c);
      k2 = std::max(k2, c);
      conds["q2_N" + std::to_string(N) + "_n" + std::to_string(n)] = c;
    }
    Eigen::JacobiSVD<Mat> svd(q2_even_stable_rows(q2));
    svmin = std::min(svmin, svd.singularValues().minCoeff());
  }
  const auto s3 = build_system(build_quadrature(3), Collision::Q2);
  const double det = q2_n2_leading_block(s3).determinant();
  const double detErr = std::fabs(det + 1.0 / std::sqrt(2.0));
  Outcome o;
  o.pass = finite && detErr <= 1e-12 && svmin > 0.0;
  o.detail = "cond Q1 (n=3..6) max " + fix(k1, 2) + ", Q2 (n=2..6) max " + fix(k2, 2) + " over N=3..6; n=2 det " +
             fix(det, 12) + " (err " + sci(detErr) + "); min sigma of even stable rows " + sci(svmin);
  o.data = {{"q1_cond_max", k1}, {"q2_cond_max", k2}, {"det", det}, {"even_rows_sigma_min", svmin}, {"conds", conds}};
  return o;
}

// 5: scaling of the leftover terms
Outcome residual_scaling_suite() {
  const auto q1 = build_system(build_quadrature(3), Collision::Q1);
  const auto q2 = build_system(build_quadrature(3), Collision::Q2);
  AsymptoticSettings s;
  const auto e11 = build_expansion(q1, AsymptoticCase::Q1_IBVP1, unit_bump(2), s);
  const auto e12 = build_expansion(q1, AsymptoticCase::Q1_IBVP2, unit_bump(2), s);
  const auto r11 = residual_scaling(e11, kEps);
  const auto r12 = residual_scaling(e12, kEps);

  // With compactly supported data off the boundary the zero-speed mode never
  // reaches x = 0 and the viscous layer of this problem vanishes; the scaling
  // is measured on data that drive it.
  const auto e21 = build_expansion(q2, AsymptoticCase::Q2_IBVP1, unit_bump(3), s);
  const auto r21default = residual_scaling(e21, kEps);
  AsymptoticSettings sd = s;
  sd.allowBoundaryData = true;
  const auto e21d = build_expansion(q2, AsymptoticCase::Q2_IBVP1, boundary_driving_data(q2), sd);
  const auto r21 = residual_scaling(e21d, kEps);

  const double a = r11.E1.slope, b = r12.E2.slope, c = r21.E1viscous.slope;
  const double defaultMag = r21default.reports.front().E1viscous;
  Outcome o;
  o.pass = std::fabs(a - 1.0) <= 0.15 && std::fabs(b - 1.5) <= 0.2 && std::fabs(c - 0.75) <= 0.15;
  o.detail = "Q1-I |E1| slope " + fix(a) + ", Q1-II |E2| slope " + fix(b) + ", Q2-I |E1 viscous| slope " + fix(c) +
             " (zero-mode data; bump data leave the layer at " + sci(defaultMag) + ")";
  o.data = {{"q1_ibvp1_E1_slope", a},
            {"q1_ibvp2_E2_slope", b},
            {"q2_ibvp1_E1viscous_slope", c},
            {"q2_ibvp1_bump_E1viscous_at_0.1", defaultMag},
            {"kappa", {{"q1_ibvp1", r11.kappa}, {"q1_ibvp2", r12.kappa}, {"q2_ibvp1", r21.kappa}}}};
  auto norms = [](const ResidualScaling& r) {
    json a = json::array();
    for (const auto& x : r.reports)
      a.push_back({{"eps", x.eps}, {"E1", x.E1}, {"dtE1", x.dtE1}, {"E2", x.E2}, {"dtE2", x.dtE2},
                   {"E1_viscous", x.E1viscous}});
    return a;
  };
  o.data["reports"] = {{"q1_ibvp1", norms(r11)}, {"q1_ibvp2", norms(r12)}, {"q2_ibvp1", norms(r21)}};
  return o;
}

// 6: convergence of the expansion to the kinetic solution
Outcome convergence_suite() {
  StudyConfig cfg;
  const AsymptoticCase cases[] = {AsymptoticCase::Q1_IBVP1, AsymptoticCase::Q1_IBVP2, AsymptoticCase::Q2_IBVP1,
                                  AsymptoticCase::Q2_IBVP2};
  const double need[] = {0.35, 0.35, 0.15, 0.35};
  std::vector<ConvergenceReport> reps;
  for (auto c : cases) reps.push_back(convergence_study(c, kEps, cfg));
  const auto edges1 = edge_errors(reps[0], reps[1], cfg);
  const auto edges2 = edge_errors(reps[2], reps[3], cfg);

  Outcome o;
  std::ostringstream d;
  json studies = json::array();
  for (int i = 0; i < 4; ++i) {
    const auto& r = reps[i];
    const bool ok = r.h1.slope >= need[i];
    o.pass = o.pass && ok;
    d << to_string(r.tag) << " " << fix(r.h1.slope) << (ok ? "" : "(low)") << ", ";
    json en = json::array();
    for (const auto& e : r.entries)
      en.push_back({{"eps", e.eps}, {"h1", e.err.h1}, {"l2", e.err.l2}, {"linf", e.err.linf}, {"richardson", e.richardson}});
    studies.push_back({{"case", to_string(r.tag)}, {"h1_slope", r.h1.slope}, {"h1_slope_all", r.h1Full.slope},
                       {"monotone", r.monotone}, {"entries", en}});
  }
  o.pass = o.pass && edges1.monotone && edges2.monotone && edges1.boundHolds && edges2.boundHolds;
  d << "per-edge Linf monotone Q1 " << (edges1.monotone ? "yes" : "no") << " Q2 " << (edges2.monotone ? "yes" : "no")
    << ", edge bound " << (edges1.boundHolds && edges2.boundHolds ? "holds" : "violated") << ", refinement check "
    << sci(std::max({reps[0].entries[0].richardson, reps[1].entries[0].richardson, reps[2].entries[0].richardson,
                     reps[3].entries[0].richardson}))
    << " rel";
  o.detail = "H1 slopes " + d.str();
  auto edgeJson = [](const EdgeErrorReport& e) {
    return json{{"eps", e.eps}, {"edge_linf", e.edgeLinf}, {"bound", e.bound}, {"monotone", e.monotone},
                {"bound_holds", e.boundHolds}};
  };
  o.data = {{"studies", studies}, {"edges_q1", edgeJson(edges1)}, {"edges_q2", edgeJson(edges2)}};
  return o;
}

// 7: similarity solution of the heat layer
Outcome heat_oracle() {
  const AsymptoticSettings s;
  HeatSolver H(15.0 * std::sqrt(s.T), s.dz);
  const double tau = 1.0 / s.stepsPerUnitTime;
  for (int k = 0; k < s.stepsPerUnitTime; ++k) H.step(tau, HeatSolver::Kind::Neumann, -1.0, -1.0, Vec(), Vec());
  const double exact = 2.0 / std::sqrt(std::numbers::pi);
  const double rel = std::fabs(H.state()(0) - exact) / exact;
  Outcome o;
  o.pass = rel <= 1e-3;
  o.detail = "h(0,1) = " + fix(H.state()(0), 8) + " vs 2/sqrt(pi) = " + fix(exact, 8) + ", rel err " + sci(rel) +
             " (dz " + fix(s.dz, 4) + ", dt " + fix(tau, 4) + ")";
  o.data = {{"h0", H.state()(0)}, {"exact", exact}, {"rel_err", rel}};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string jsonPath;
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--json", jsonPath, "write measured values here");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    double limit;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "structure suite", 1.0, structure_suite},
      {2, "dissipativity suite", 1.0, dissipativity_suite},
      {3, "solver oracle suite", 60.0, solver_suite},
      {4, "boundary solvability", 1.0, boundary_solvability},
      {5, "residual scaling", 600.0, residual_scaling_suite},
      {6, "convergence rates", 1800.0, convergence_suite},
      {7, "heat-layer oracle", 1.0, heat_oracle},
  };
  const std::set<int> pick(only.begin(), only.end());
  int failed = 0, ran = 0;
  json report = json::object();
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool inTime = secs <= c.limit;
    const bool pass = o.pass && inTime;
    if (!pass) ++failed;
    std::printf("%s criterion %d %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit, inTime ? "" : ", too slow");
    std::fflush(stdout);
    o.data["pass"] = pass;
    o.data["seconds"] = secs;
    report[std::to_string(c.id)] = o.data;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  if (!jsonPath.empty()) std::ofstream(jsonPath) << report.dump(2) << '\n';
  return failed ? 1 : 0;
}
