#include <doctest.h>

#include <cmath>
#include <random>

#include "knet/coupling.hpp"

using namespace knet;

TEST_CASE("boundary matrices for N = 1") {
  auto s = build_system(build_quadrature(1), Collision::Q1);
  auto B1 = build_boundary_matrix(BoundaryVariant::B1, s);
  CHECK(std::fabs(B1.rows(0, 0)) < 1e-15);
  CHECK(B1.rows(0, 1) == doctest::Approx(-2.0));
  auto B2 = build_boundary_matrix(BoundaryVariant::B2, s, 2);
  CHECK(B2.rows(0, 0) == doctest::Approx(2.0));
  CHECK(std::fabs(B2.rows(0, 1)) < 1e-15);
}

TEST_CASE("block and Phi constructions agree") {
  for (int N = 1; N <= 6; ++N) {
    auto s = build_system(build_quadrature(N), Collision::Q1);
    auto B1 = build_boundary_matrix(BoundaryVariant::B1, s);
    CHECK((B1.rows - boundary_matrix_phi_form(BoundaryVariant::B1, s)).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::FullPivLU<Mat> lu(B1.rows);
    CHECK(lu.rank() == N);
    for (int n = 2; n <= 6; ++n) {
      auto B2 = build_boundary_matrix(BoundaryVariant::B2, s, n);
      CHECK((B2.rows - boundary_matrix_phi_form(BoundaryVariant::B2, s, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("dissipativity of the boundary conditions") {
  for (int N = 1; N <= 6; ++N)
    for (int n = 2; n <= 6; ++n) {
      CAPTURE(N);
      CAPTURE(n);
      auto s = build_system(build_quadrature(N), Collision::Q1);
      auto r1 = dissipativity_report(build_boundary_matrix(BoundaryVariant::B1, s), s);
      CHECK(std::fabs(r1.maxQuadForm) < 1e-10);
      CHECK_FALSE(r1.strict);
      auto r2 = dissipativity_report(build_boundary_matrix(BoundaryVariant::B2, s, n), s);
      if (n == 2) {
        CHECK(std::fabs(r2.maxQuadForm) < 1e-10);
      } else {
        CHECK(r2.strict);
      }
    }
}

TEST_CASE("kernel quadratic form of B2 through the explicit parameterization") {
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int N : {2, 4}) {
    auto s = build_system(build_quadrature(N), Collision::Q1);
    for (int n = 2; n <= 5; ++n) {
      auto B2 = build_boundary_matrix(BoundaryVariant::B2, s, n);
      for (int t = 0; t < 100; ++t) {
        Vec x(N);
        for (int i = 0; i < N; ++i) x(i) = nd(rng);
        Vec F(2 * N);
        F << -(n - 1.0) * x, x;
        Vec U = s.V * F;
        CHECK((B2.rows * U).cwiseAbs().maxCoeff() < 1e-10);
        double form = U.transpose() * s.A * U;
        double expected = 0.0;
        for (int k = 0; k < N; ++k) expected += x(k) * x(k) * s.quad.z[k] / s.W(k);
        expected *= -(double(n) * n - 2.0 * n);
        CHECK(std::fabs(form - expected) <= 1e-10 * (1.0 + std::fabs(expected)));
      }
    }
  }
}

TEST_CASE("network variables") {
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  EdgeFields G(2, Mat::Constant(3, 5, 0.7));
  auto U = to_network_vars(G);
  CHECK((U[0] - 2 * G[0]).norm() == 0.0);
  CHECK(U[1].norm() == 0.0);
  EdgeFields R(4);
  for (auto& r : R) r = Mat::NullaryExpr(4, 7, [&] { return nd(rng); });
  auto back = from_network_vars(to_network_vars(R));
  for (int i = 0; i < 4; ++i) CHECK((back[i] - R[i]).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS(to_network_vars(EdgeFields{Mat::Zero(2, 3), Mat::Zero(2, 4)}));
}

TEST_CASE("junction exchange") {
  const int N = 2;
  Mat tr = Mat::Zero(3, 2 * N);
  tr(0, 0) = 1.0;  // edge 1 at -z_1
  Mat in = junction_exchange(tr);
  CHECK(in(0, 0) == 0.0);
  CHECK(in(1, 0) == 0.5);
  CHECK(in(2, 0) == 0.5);

  Mat two(2, 2 * N);
  two << 1, 2, 3, 4, 5, 6, 7, 8;
  Mat in2 = junction_exchange(two);
  CHECK(in2(0, 0) == 5);
  CHECK(in2(1, 1) == 2);

  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (int n = 2; n <= 6; ++n) {
    Mat t = Mat::NullaryExpr(n, 2 * N, [&] { return nd(rng); });
    Mat inc = junction_exchange(t);
    for (int k = 0; k < N; ++k) {
      // total incoming equals total outgoing at every node pair
      CHECK(std::fabs(inc.col(k).sum() - t.col(k).sum()) < 1e-12);
      // (n-1) f(v) + f(-v) is the same on every edge
      double ref = (n - 1) * inc(0, k) + t(0, k);
      for (int i = 1; i < n; ++i) CHECK(std::fabs((n - 1) * inc(i, k) + t(i, k) - ref) < 1e-12);
    }
  }
  Mat even = Mat::Constant(3, 2 * N, 1.5);
  CHECK((junction_exchange(even) - Mat::Constant(3, N, 1.5)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(junction_exchange(Mat::Zero(1, 4)));
}

TEST_CASE("reflection rules put the boundary trace in ker B") {
  Vec out(2);
  out << 1.0, 0.0;
  Vec in = dvm_reflection(BoundaryVariant::B2, 3, out);
  CHECK(in(0) == -0.5);
  CHECK(in(1) == 0.0);
  out << 0.3, -1.2;
  CHECK((dvm_reflection(BoundaryVariant::B1, 2, out) - out).norm() == 0.0);
  CHECK((dvm_reflection(BoundaryVariant::B2, 2, out) + out).norm() == 0.0);
  CHECK((dvm_reflection(BoundaryVariant::B1, 2, dvm_reflection(BoundaryVariant::B1, 2, out)) - out).norm() == 0.0);

  std::mt19937 rng(9);
  std::normal_distribution<double> nd;
  for (int N = 1; N <= 5; ++N) {
    auto s = build_system(build_quadrature(N), Collision::Q1);
    for (int n = 2; n <= 5; ++n)
      for (auto var : {BoundaryVariant::B1, BoundaryVariant::B2}) {
        auto B = build_boundary_matrix(var, s, n);
        Vec o = Vec::NullaryExpr(N, [&] { return nd(rng); });
        Vec F(2 * N);
        F << o, dvm_reflection(var, n, o);
        CHECK((B.rows * moments_from_dvm(F, s)).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}
