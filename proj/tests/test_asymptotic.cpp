#include <doctest.h>

#include <cmath>
#include <numbers>

#include "knet/asymptotic.hpp"
#include "knet/heat.hpp"

using namespace knet;

namespace {

MomentSystem sys_of(int N, Collision c) { return build_system(build_quadrature(N), c); }

InitialData rho_bump(int b, double c = 1.5, double s = 1.0) {
  InitialData d;
  d.center = c;
  d.width = s;
  d.amplitude = Vec::Zero(b);
  d.amplitude(0) = 1.0;
  return d;
}

double max_abs(const Mat& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

// A U' - Q U - r on a few points
double layer_residual(const MomentSystem& sys, const ExpSum& U, const ExpSum& r) {
  const ExpSum dU = U.derivative();
  double worst = 0.0;
  for (double y : {0.0, 0.1, 0.5, 1.3, 4.0, 9.0}) {
    Vec res = sys.A * dU.eval(y) - sys.Qdiag.cwiseProduct(U.eval(y)) - r.eval(y);
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("exp sums: derivative and tail integral are exact") {
  ExpSum f(2);
  f.add(0.8, 0, Vec::Constant(2, 1.0));
  f.add(0.8, 2, (Vec(2) << 0.5, -1.0).finished());
  f.add(2.5, 1, (Vec(2) << -0.3, 0.7).finished());
  CHECK(f.terms().size() == 3);
  f.add(0.8, 0, Vec::Constant(2, 1.0));  // merges
  CHECK(f.terms().size() == 3);

  const ExpSum d = f.derivative();
  const double h = 1e-5;
  for (double y : {0.0, 0.4, 2.0, 7.5}) {
    Vec fd = (f.eval(y + h) - f.eval(std::max(0.0, y - h))) / (y > 0 ? 2 * h : h);
    CHECK((d.eval(y) - fd).cwiseAbs().maxCoeff() < (y > 0 ? 1e-8 : 1e-4));
  }

  // Simpson on [y, 60] against the closed form
  const ExpSum I = f.tail_integral();
  for (double y0 : {0.0, 1.0, 3.0}) {
    const int n = 20000;
    const double b = 60.0, dy = (b - y0) / n;
    Vec s = f.eval(y0) + f.eval(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f.eval(y0 + i * dy);
    s *= dy / 3.0;
    CHECK((I.eval(y0) - s).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(f.max_rate() == 2.5);
  CHECK(f.min_rate() == 0.8);
  CHECK_THROWS(f.add(0.0, 0, Vec::Ones(2)));
  CHECK_THROWS(f.add(1.0, 0, Vec::Ones(3)));
}

TEST_CASE("decay rates of the Q1 layer for N = 2") {
  auto sys = sys_of(2, Collision::Q1);
  auto ss = stable_subspace(layer_matrix(sys));
  REQUIRE(ss.decayRates.size() == 1);
  CHECK(ss.decayRates(0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("particular kinetic layers solve the layer ODE") {
  for (auto c : {Collision::Q1, Collision::Q2}) {
    for (int N : {3, 5}) {
      auto sys = sys_of(N, c);
      auto ss = stable_subspace(layer_matrix(sys));
      const int m = sys.dim();
      ExpSum r(m);
      Vec a(m), b(m), d(m);
      for (int i = 0; i < m; ++i) {
        a(i) = std::sin(1.0 + i);
        b(i) = std::cos(0.3 * i) - 0.2;
        d(i) = 0.1 * (i % 3) - 0.05;
      }
      r.add(0.7, 0, a);
      r.add(2.3, 1, b);
      r.add(ss.decayRates(0), 0, d);  // resonant with the slowest mode
      const ExpSum U = kinetic_particular(sys, ss, r);
      CAPTURE(N);
      CHECK(layer_residual(sys, U, r) < 1e-9);
      CHECK(U.eval(80.0).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("homogeneous layers are decaying solutions") {
  auto sys = sys_of(4, Collision::Q1);
  auto ss = stable_subspace(layer_matrix(sys));
  Vec g = Vec::LinSpaced(ss.Rminus.cols(), 1.0, -0.5);
  ExpSum w = homogeneous_layer(ss, g);
  ExpSum dw = w.derivative();
  for (double y : {0.0, 0.7, 3.0}) {
    Vec res = ss.matrix * dw.eval(y) + w.eval(y);
    CHECK(res.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("heat solver: unit Neumann flux matches the similarity solution") {
  HeatSolver H(15.0, 0.01);
  const double tau = 1e-3;
  for (int k = 0; k < 1000; ++k) H.step(tau, HeatSolver::Kind::Neumann, -1.0, -1.0, Vec(), Vec());
  const double exact = 2.0 / std::sqrt(std::numbers::pi);
  CHECK(std::fabs(H.state()(0) - exact) / exact < 1e-3);
}

TEST_CASE("heat solver: Dirichlet data give the erfc profile") {
  HeatSolver H(15.0, 0.01);
  const double tau = 1e-3;
  for (int k = 0; k < 1000; ++k) H.step(tau, HeatSolver::Kind::Dirichlet, 1.0, 1.0, Vec(), Vec());
  double worst = 0.0;
  for (int i = 0; i < H.size(); i += 10) worst = std::max(worst, std::fabs(H.state()(i) - std::erfc(H.z(i) / 2.0)));
  CHECK(worst < 2e-3);
}

TEST_CASE("heat solver: manufactured forcing") {
  // h = t z^2 e^{-z}: zero data, h(0) = 0, f = h_t - h_zz
  const double tau = 1e-3;
  HeatSolver H(30.0, 0.01);
  auto exact = [](double z, double t) { return t * z * z * std::exp(-z); };
  auto forcing = [&](double t) {
    Vec f(H.size());
    for (int i = 0; i < H.size(); ++i) {
      const double z = H.z(i);
      f(i) = z * z * std::exp(-z) - t * std::exp(-z) * (2.0 - 4.0 * z + z * z);
    }
    return f;
  };
  Vec f0 = forcing(0.0);
  for (int k = 0; k < 1000; ++k) {
    Vec f1 = forcing((k + 1) * tau);
    H.step(tau, HeatSolver::Kind::Dirichlet, 0.0, 0.0, f0, f1);
    f0 = f1;
  }
  double worst = 0.0;
  for (int i = 0; i < H.size(); ++i) worst = std::max(worst, std::fabs(H.state()(i) - exact(H.z(i), 1.0)));
  CHECK(worst < 1e-4);
}

TEST_CASE("tridiagonal solver") {
  std::vector<double> sub{-1, -1, -1}, diag{4, 4, 4, 4}, sup{-1, -1, -1}, rhs{3, 2, 2, 3};
  solve_tridiagonal(sub, diag, sup, rhs);
  for (double v : rhs) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Q1 IBVP I outer solution equals the method of images") {
  auto sys = sys_of(3, Collision::Q1);
  auto init = rho_bump(2);
  AsymptoticSettings s;
  s.outputTimes = {0.4};
  auto e = solve_outer_q1_ibvp1(sys, init, s);
  CHECK(e.maxOrder == 2);
  CHECK_FALSE(e.hasViscous);
  CHECK_FALSE(e.hasKinetic);
  const double lam = 1.0;  // sound speed of the Q1 block
  for (double t : {0.4, 1.0}) {
    const Mat& u = e.at(t).outer[0];
    double worst = 0.0, wall = std::fabs(u(1, 0));
    for (int i = 0; i < e.outer.points; ++i) {
      const double x = e.outer.x(i);
      const double rho = 0.5 * (bump(std::fabs(x - lam * t), 1.5, 1.0) + bump(x + lam * t, 1.5, 1.0));
      const double q = 0.5 * (bump(std::fabs(x - lam * t), 1.5, 1.0) -
                              bump(x + lam * t, 1.5, 1.0));
      worst = std::max({worst, std::fabs(u(0, i) - rho), std::fabs(u(1, i) - q)});
    }
    CAPTURE(t);
    CHECK(worst < 1e-12);
    CHECK(wall < 1e-14);
  }
  CHECK(e.diag.outerConstraint < 1e-10);
}

TEST_CASE("Q1 IBVP II: solvable layer system and exact boundary matching") {
  for (int N = 2; N <= 6; ++N) {
    auto sys = sys_of(N, Collision::Q1);
    for (int n = 3; n <= 6; ++n) {
      const double k = condition_number(q1_layer_boundary_matrix(sys, n));
      CAPTURE(N);
      CAPTURE(n);
      CHECK(std::isfinite(k));
      CHECK(k < 1e6);
    }
  }
  auto sys = sys_of(3, Collision::Q1);
  AsymptoticSettings s;
  s.outputTimes = {0.4};
  auto e = solve_q1_ibvp2(sys, rho_bump(2), s);
  CHECK(e.hasKinetic);
  // nothing reaches the junction before t = 0.5
  CHECK(e.at(0.4).gamma[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(e.at(1.0).gamma[0].cwiseAbs().maxCoeff() > 1e-3);
  CHECK(e.diag.boundaryResidual < 1e-12);
  CHECK(e.diag.layerOdeResidual < 1e-8);
  CHECK(e.diag.layerTail < 1e-10);
  CHECK(e.diag.outerConstraint < 1e-10);

  const Mat B = build_boundary_matrix(BoundaryVariant::B2, sys, 3).rows;
  for (double eps : {0.1, 0.01}) {
    Mat U0 = e.evaluate({0.0}, 1.0, eps);
    CHECK((B * U0).cwiseAbs().maxCoeff() < 1e-12);
  }
  // layers are gone at the far end
  const double X = e.outer.end();
  CHECK(max_abs(e.evaluate_family(2, {X}, 1.0, 0.01)) < 1e-10);
}

TEST_CASE("Q2 IBVP I: Neumann closure matrix and flux-driven layer") {
  auto sys = sys_of(3, Collision::Q2);
  Mat M = q2_neumann_boundary_matrix(sys);
  REQUIRE(M.rows() == 2);
  CHECK(std::fabs(M(1, 0)) < 1e-14);
  CHECK(std::fabs(std::fabs(M(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-14);
  const double a1 = 1.0, a3 = std::sqrt(3.0), lam = std::sqrt(3.0);
  CHECK(std::fabs(std::fabs(M(1, 1)) - a1 * a3 / lam) < 1e-14);

  AsymptoticSettings s;
  s.outputTimes = {0.2};
  auto e = solve_q2_ibvp1(sys, rho_bump(3), s);
  CHECK(e.hasViscous);
  CHECK_FALSE(e.hasKinetic);
  // layer identically zero while the data are away from the boundary
  for (const Mat& v : e.at(0.2).viscous) CHECK(max_abs(v) == 0.0);
  CHECK(e.diag.boundaryResidual < 1e-12);

  // stationary-mode data overlapping x = 0 drive a genuine layer
  InitialData d = boundary_driving_data(sys);
  CHECK_THROWS(solve_q2_ibvp1(sys, d, s));
  s.allowBoundaryData = true;
  auto f = solve_q2_ibvp1(sys, d, s);
  CHECK(max_abs(f.at(1.0).viscous[1]) > 1e-2);
  CHECK(f.diag.heatConservation < 1e-2);
  const Mat B = build_boundary_matrix(BoundaryVariant::B1, sys).rows;
  Mat U0 = f.evaluate({0.0}, 1.0, 0.01);
  CHECK((B * U0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Q2 IBVP II: n = 2 invertibility chain") {
  auto sys = sys_of(3, Collision::Q2);
  CHECK(q2_n2_leading_block(sys).determinant() == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  for (int N = 3; N <= 6; ++N) {
    auto sN = sys_of(N, Collision::Q2);
    Eigen::JacobiSVD<Mat> svd(q2_even_stable_rows(sN));
    CAPTURE(N);
    CHECK(svd.singularValues().minCoeff() > 1e-6);
    for (int n = 2; n <= 6; ++n) {
      const double k = condition_number(q2_layer_boundary_matrix(sN, n));
      CAPTURE(n);
      CHECK(std::isfinite(k));
      CHECK(k < 1e6);
    }
  }
}

TEST_CASE("Q2 IBVP II: K = 0 at small t is the outer solution") {
  auto sys = sys_of(3, Collision::Q2);
  AsymptoticSettings s;
  s.T = 0.2;
  auto e = solve_q2_ibvp2(sys, rho_bump(3), 0, s);
  CHECK(e.maxOrder == 0);
  std::vector<double> x;
  for (int i = 0; i < 50; ++i) x.push_back(0.05 * i);
  CHECK(max_abs(e.evaluate_family(1, x, 0.2, 0.05)) == 0.0);
  CHECK(max_abs(e.evaluate_family(2, x, 0.2, 0.05)) == 0.0);
  CHECK(max_abs(e.evaluate(x, 0.2, 0.05) - e.evaluate_family(0, x, 0.2, 0.05)) == 0.0);
}

TEST_CASE("Q2 IBVP II: full recursion matches at the boundary and converges in dz") {
  auto sys = sys_of(3, Collision::Q2);
  AsymptoticSettings s;
  auto e = solve_q2_ibvp2(sys, rho_bump(3), 3, s);
  CHECK(e.maxOrder == 3);
  CHECK(e.diag.boundaryResidual < 1e-10);
  CHECK(e.diag.layerOdeResidual < 1e-8);
  CHECK(e.diag.layerTail < 1e-10);
  CHECK(e.diag.heatConservation < 2e-3);
  const Mat B = build_boundary_matrix(BoundaryVariant::B2, sys, 3).rows;
  CHECK((B * e.evaluate({0.0}, 1.0, 0.05)).cwiseAbs().maxCoeff() < 1e-10);

  AsymptoticSettings fine = s;
  fine.dz = 0.5 * s.dz;
  auto f = solve_q2_ibvp2(sys, rho_bump(3), 3, fine);
  std::vector<double> x;
  for (int i = 0; i <= 400; ++i) x.push_back(0.005 * i);
  const double diff = max_abs(e.evaluate(x, 1.0, 0.05) - f.evaluate(x, 1.0, 0.05));
  MESSAGE("layer grid self-refinement: " << diff);
  CHECK(diff < 1e-6);
  CHECK(max_abs(e.evaluate_family(1, {e.outer.end()}, 1.0, 0.05)) < 1e-10);
}

TEST_CASE("expansion inputs are validated") {
  auto q1 = sys_of(3, Collision::Q1);
  auto q2 = sys_of(3, Collision::Q2);
  CHECK_THROWS(solve_q1_ibvp2(q2, rho_bump(3)));
  CHECK_THROWS(solve_q1_ibvp2(q1, rho_bump(3)));
  AsymptoticSettings s;
  CHECK_THROWS(solve_q2_ibvp2(q2, rho_bump(3), 4, s));
  auto e = solve_outer_q1_ibvp1(q1, rho_bump(2), s);
  CHECK_THROWS(e.at(0.5));
  CHECK_THROWS(e.evaluate({0.0}, 1.0, 0.0));
  CHECK(case_from_string("q2-ibvp2") == AsymptoticCase::Q2_IBVP2);
  CHECK(to_string(AsymptoticCase::Q1_IBVP2) == "q1-ibvp2");
  CHECK_THROWS(case_from_string("q3"));
}
