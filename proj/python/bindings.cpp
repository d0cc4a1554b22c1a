// Python bindings: thin wrappers returning numpy arrays and dicts.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "knet/analysis.hpp"
#include "knet/asymptotic.hpp"
#include "knet/coupling.hpp"
#include "knet/hermite.hpp"
#include "knet/kinetic.hpp"
#include "knet/spectral.hpp"

namespace py = pybind11;
using namespace knet;

namespace {

// Systems are cached so expansions can keep a pointer to theirs.
const MomentSystem& system_of(int N, const std::string& collision) {
  static std::map<std::pair<int, Collision>, std::unique_ptr<MomentSystem>> cache;
  const auto key = std::make_pair(N, collision_from_string(collision));
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<MomentSystem>(build_system(build_quadrature(N), key.second));
  return *slot;
}

InitialData make_data(const MomentSystem& sys, double center, double width, const std::vector<double>& amplitude) {
  InitialData d;
  d.center = center;
  d.width = width;
  d.amplitude = Vec::Zero(sys.blockSize);
  if (amplitude.empty()) {
    d.amplitude(0) = 1.0;
  } else {
    if (static_cast<int>(amplitude.size()) != sys.blockSize) throw std::invalid_argument("amplitude has the wrong length");
    for (int i = 0; i < sys.blockSize; ++i) d.amplitude(i) = amplitude[i];
  }
  return d;
}

py::dict diag_dict(const ExpansionDiagnostics& d) {
  py::dict o;
  o["boundary_cond"] = d.boundaryCond;
  o["boundary_residual"] = d.boundaryResidual;
  o["outer_constraint"] = d.outerConstraint;
  o["layer_tail"] = d.layerTail;
  o["layer_ode_residual"] = d.layerOdeResidual;
  o["heat_conservation"] = d.heatConservation;
  o["far_field"] = d.farField;
  return o;
}

struct PyExpansion {
  AsymptoticExpansion e;
};

}  // namespace

PYBIND11_MODULE(_knet, m) {
  m.doc() = "Moment models of kinetic equations on star networks";

  m.def(
      "quadrature",
      [](int N) {
        const auto q = build_quadrature(N);
        py::dict o;
        o["nodes"] = q.nodes;
        o["weights"] = q.weights;
        o["z"] = q.z;
        o["orthonormality_residual"] = orthonormality_residual(q);
        return o;
      },
      py::arg("N"));

  m.def(
      "structure_residuals",
      [](int N, const std::string& collision) {
        const auto& s = system_of(N, collision);
        py::dict o;
        o["orthonormality"] = orthonormality_residual(s.quad);
        o["completeness"] = completeness_residual(s);
        o["spectral_identity"] = spectral_identity_residual(s);
        return o;
      },
      py::arg("N"), py::arg("collision") = "q1");

  m.def(
      "moment_matrix",
      [](int N, const std::string& collision) { return system_of(N, collision).A; }, py::arg("N"),
      py::arg("collision") = "q1");

  m.def(
      "boundary_matrix",
      [](int N, const std::string& variant, int n) {
        return build_boundary_matrix(boundary_from_string(variant), system_of(N, "q1"), n).rows;
      },
      py::arg("N"), py::arg("variant"), py::arg("n") = 2);

  m.def(
      "dissipativity",
      [](int N, const std::string& variant, int n) {
        const auto& s = system_of(N, "q1");
        const auto r = dissipativity_report(build_boundary_matrix(boundary_from_string(variant), s, n), s);
        py::dict o;
        o["max_quad_form"] = r.maxQuadForm;
        o["strict"] = r.strict;
        o["kernel_dim"] = r.kernelDim;
        return o;
      },
      py::arg("N"), py::arg("variant"), py::arg("n") = 2);

  m.def(
      "layer_conditions",
      [](int N, int n) {
        py::dict o;
        if (n >= 3) o["q1"] = condition_number(q1_layer_boundary_matrix(system_of(N, "q1"), n));
        o["q2"] = condition_number(q2_layer_boundary_matrix(system_of(N, "q2"), n));
        return o;
      },
      py::arg("N"), py::arg("n"));

  m.def(
      "simulate_network",
      [](int N, int edges, double eps, double T, double dx, const std::string& collision, double center, double width,
         std::vector<double> edgeAmplitudes, double cfl, double L) {
        const auto& s = system_of(N, collision);
        if (edges < 2) throw std::invalid_argument("edges must be >= 2");
        if (edgeAmplitudes.empty())
          for (int k = 0; k < edges; ++k) edgeAmplitudes.push_back(std::pow(0.5, k));
        if (static_cast<int>(edgeAmplitudes.size()) != edges) throw std::invalid_argument("one amplitude per edge");
        NetworkProblem p;
        p.sys = &s;
        p.eps = eps;
        const double len = L > 0.0 ? L : center + width + s.quad.max_speed() * T + 1.0;
        p.grid = make_grid(len, dx > 0.0 ? dx : eps / 16.0, T, cfl, s.quad.max_speed());
        for (double a : edgeAmplitudes) {
          auto d = make_data(s, center, width, {});
          d.amplitude *= a;
          p.initial.push_back(d);
        }
        p.snapshotTimes = {T};
        Trajectory tr;
        {
          py::gil_scoped_release nogil;
          tr = solve_network(p);
        }
        std::vector<double> x(p.grid.cells);
        for (int j = 0; j < p.grid.cells; ++j) x[j] = p.grid.x(j);
        py::dict o;
        o["x"] = x;
        o["edges"] = tr.snapshots.back();
        o["mass0"] = tr.mass0;
        o["massT"] = tr.massT;
        o["junction_flux"] = tr.junctionFlux;
        o["far_flux"] = tr.farFlux;
        return o;
      },
      py::arg("N") = 3, py::arg("edges") = 3, py::arg("eps") = 0.1, py::arg("T") = 1.0, py::arg("dx") = 0.0,
      py::arg("collision") = "q1", py::arg("center") = 1.5, py::arg("width") = 1.0,
      py::arg("edge_amplitudes") = std::vector<double>{}, py::arg("cfl") = 0.9, py::arg("L") = 0.0);

  py::class_<PyExpansion>(m, "Expansion")
      .def(py::init([](const std::string& c, int N, int order, double T, double center, double width,
                       const std::vector<double>& amplitude, const std::string& profile, int n) {
             const auto tag = case_from_string(c);
             const auto& s = system_of(N, case_collision(tag) == Collision::Q1 ? "q1" : "q2");
             AsymptoticSettings st;
             st.T = T;
             st.maxOrder = order;
             st.n = n;
             InitialData d;
             if (profile == "zero-mode") {
               d = boundary_driving_data(s, center, width);
               st.allowBoundaryData = true;
             } else if (profile == "bump") {
               d = make_data(s, center, width, amplitude);
             } else {
               throw std::invalid_argument("profile must be bump or zero-mode");
             }
             py::gil_scoped_release nogil;
             return PyExpansion{build_expansion(s, tag, d, st)};
           }),
           py::arg("case"), py::arg("N") = 3, py::arg("order") = 3, py::arg("T") = 1.0, py::arg("center") = 1.5,
           py::arg("width") = 1.0, py::arg("amplitude") = std::vector<double>{}, py::arg("profile") = "bump",
           py::arg("n") = 3)
      .def("evaluate", [](const PyExpansion& p, const std::vector<double>& x, double t,
                          double eps) { return p.e.evaluate(x, t, eps); })
      .def("family", [](const PyExpansion& p, int family, const std::vector<double>& x, double t,
                        double eps) { return p.e.evaluate_family(family, x, t, eps); })
      .def_property_readonly("max_order", [](const PyExpansion& p) { return p.e.maxOrder; })
      .def_property_readonly("diagnostics", [](const PyExpansion& p) { return diag_dict(p.e.diag); })
      .def("residual_scaling", [](const PyExpansion& p, const std::vector<double>& eps) {
        ResidualScaling r;
        {
          py::gil_scoped_release nogil;
          r = residual_scaling(p.e, eps);
        }
        py::dict o;
        py::list rows;
        for (const auto& x : r.reports) {
          py::dict d;
          d["eps"] = x.eps;
          d["E1"] = x.E1;
          d["dtE1"] = x.dtE1;
          d["E2"] = x.E2;
          d["dtE2"] = x.dtE2;
          d["E1_viscous"] = x.E1viscous;
          rows.append(d);
        }
        o["reports"] = rows;
        o["E1_slope"] = r.E1.slope;
        o["E2_slope"] = r.E2.slope;
        o["E1_viscous_slope"] = r.E1viscous.slope;
        o["kappa"] = r.kappa;
        return o;
      });

  m.def(
      "convergence",
      [](const std::string& c, const std::vector<double>& eps, double T, int N, int order, bool richardson) {
        StudyConfig cfg;
        cfg.T = T;
        cfg.N = N;
        cfg.K = order;
        cfg.richardson = richardson;
        cfg.asymptotic.T = T;
        ConvergenceReport r;
        {
          py::gil_scoped_release nogil;
          r = convergence_study(case_from_string(c), eps, cfg);
        }
        py::list rows;
        for (const auto& e : r.entries) {
          py::dict d;
          d["eps"] = e.eps;
          d["l2"] = e.err.l2;
          d["linf"] = e.err.linf;
          d["h1"] = e.err.h1;
          d["cells"] = e.cells;
          d["richardson"] = e.richardson;
          rows.append(d);
        }
        py::dict o;
        o["entries"] = rows;
        o["h1_slope"] = r.h1.slope;
        o["l2_slope"] = r.l2.slope;
        o["linf_slope"] = r.linf.slope;
        o["monotone"] = r.monotone;
        o["diagnostics"] = diag_dict(r.diag);
        return o;
      },
      py::arg("case"), py::arg("eps"), py::arg("T") = 1.0, py::arg("N") = 3, py::arg("order") = 3,
      py::arg("richardson") = false);

  m.def("fit_slope", [](const std::vector<double>& eps, const std::vector<double>& err) {
    const auto f = fit_slope(eps, err);
    return py::make_tuple(f.slope, f.intercept);
  });
  m.def("thread_cap", &thread_cap);
}
