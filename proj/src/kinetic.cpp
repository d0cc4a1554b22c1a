#include "knet/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace knet {

Grid make_grid(double L, double dxTarget, double T, double cfl, double vmax) {
  if (!(L > 0) || !(dxTarget > 0) || !(T > 0)) throw std::invalid_argument("make_grid: L, dx and T must be positive");
  if (!(cfl > 0) || cfl > 1.0) throw std::invalid_argument("make_grid: CFL must lie in (0, 1]");
  Grid g;
  g.L = L;
  g.T = T;
  g.cells = std::max(1, static_cast<int>(std::lround(L / dxTarget)));
  g.dx = L / g.cells;
  g.steps = static_cast<int>(std::ceil(T / (cfl * g.dx / vmax) - 1e-12));
  g.dt = T / g.steps;
  return g;
}

Grid refine(const Grid& g, int level) {
  Grid f = g;
  const int m = 1 << level;
  f.cells = g.cells * m;
  f.dx = g.L / f.cells;
  f.steps = g.steps * m;
  f.dt = g.T / f.steps;
  return f;
}

// Taylor coefficients of the bump at x up to order K.
static std::vector<double> bump_jet(int K, double x, double c, double s) {
  std::vector<double> e(K + 1, 0.0);
  const double r0 = (x - c) / s;
  if (std::fabs(r0) >= 1.0) return e;
  std::vector<double> u(K + 1, 0.0), inv(K + 1, 0.0), gser(K + 1, 0.0);
  u[0] = 1.0 - r0 * r0;
  if (K >= 1) u[1] = -2.0 * r0 / s;
  if (K >= 2) u[2] = -1.0 / (s * s);
  inv[0] = 1.0 / u[0];
  for (int k = 1; k <= K; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= std::min(k, 2); ++j) acc += u[j] * inv[k - j];
    inv[k] = -acc / u[0];
  }
  for (int k = 0; k <= K; ++k) gser[k] = (k == 0 ? 1.0 : 0.0) - inv[k];
  e[0] = std::exp(gser[0]);
  for (int k = 1; k <= K; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += j * gser[j] * e[k - j];
    e[k] = acc / k;
  }
  return e;
}

double bump(double x, double c, double s) {
  const double r = (x - c) / s;
  if (std::fabs(r) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double bump_derivative(int k, double x, double c, double s) {
  if (k < 0 || k > 8) throw std::invalid_argument("bump_derivative: order out of range");
  if (k == 0) return bump(x, c, s);
  auto e = bump_jet(k, x, c, s);
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f * e[k];
}

Vec InitialData::moments(const MomentSystem& sys, double eps, double x) const {
  const int b = sys.blockSize;
  if (amplitude.size() != b) throw std::invalid_argument("InitialData: amplitude size must equal the block size");
  Vec G = Vec::Zero(sys.dim());
  G.head(b) = amplitude * bump(x, center, width);
  if (correction) G.tail(sys.dim() - b) = -eps * sys.A12.transpose() * amplitude * bump_derivative(1, x, center, width);
  return G;
}

Mat InitialData::cell_averages(const MomentSystem& sys, double eps, const Grid& g) const {
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  Mat out = Mat::Zero(sys.dim(), g.cells);
  for (int j = 0; j < g.cells; ++j)
    for (int q = 0; q < 4; ++q) out.col(j) += 0.5 * gw[q] * moments(sys, eps, g.x(j) + 0.5 * g.dx * gx[q]);
  return out;
}

EdgeStepper::EdgeStepper(const MomentSystem& sys, const Grid& g, double eps) : sys_(sys), g_(g) {
  if (!(eps > 0)) throw std::invalid_argument("EdgeStepper: epsilon must be positive");
  if (g.dt * sys.quad.max_speed() > g.dx * (1.0 + 1e-12)) throw std::invalid_argument("EdgeStepper: CFL condition violated");
  r_ = g.dt / eps;
  Vb_ = sys.V.topRows(sys.blockSize);
  PbW_ = Vb_ * sys.Wnode.asDiagonal();
}

void EdgeStepper::transport(Mat& F, const Vec& leftGhost) const {
  const int M = static_cast<int>(F.cols());
  const double dtdx = g_.dt / g_.dx;
  for (int k = 0; k < sys_.dim(); ++k) {
    const double c = sys_.quad.nodes[k] * dtdx;
    if (c > 0) {
      for (int j = M - 1; j >= 1; --j) F(k, j) -= c * (F(k, j) - F(k, j - 1));
      F(k, 0) -= c * (F(k, 0) - leftGhost(k));
    } else {
      for (int j = 0; j < M - 1; ++j) F(k, j) -= c * (F(k, j + 1) - F(k, j));
      // outflow end: constant extrapolation ghost contributes nothing
    }
  }
}

void EdgeStepper::relax(Mat& F) const {
  Mat G = PbW_ * F;
  F.noalias() += r_ * Vb_.transpose() * G;
  F *= 1.0 / (1.0 + r_);
}

std::pair<double, double> EdgeStepper::step(Mat& F, const Vec& incoming) const {
  const int N = sys_.N();
  const int M = static_cast<int>(F.cols());
  Vec ghost = Vec::Zero(sys_.dim());
  ghost.tail(N) = incoming;
  double in = 0.0, out = 0.0;
  for (int k = 0; k < sys_.dim(); ++k) {
    const double v = sys_.quad.nodes[k];
    const double w = sys_.Wnode(k);
    in += w * v * (v > 0 ? ghost(k) : F(k, 0));
    out += w * v * F(k, M - 1);
  }
  transport(F, ghost);
  relax(F);
  return {in * g_.dt, out * g_.dt};
}

double EdgeStepper::mass(const Mat& F) const { return (sys_.Wnode.transpose() * F).sum() * g_.dx; }

static std::vector<int> snapshot_steps(const std::vector<double>& times, const Grid& g) {
  std::vector<int> s;
  for (double t : times) {
    if (t < -1e-12 || t > g.T + 1e-12) throw std::invalid_argument("snapshot time outside [0, T]");
    s.push_back(static_cast<int>(std::lround(t / g.dt)));
  }
  return s;
}

Trajectory solve_halfline(const IBVPProblem& p) {
  const MomentSystem& sys = *p.sys;
  const int N = sys.N();
  EdgeStepper st(sys, p.grid, p.eps);
  Mat F = st.to_dvm(p.initial.cell_averages(sys, p.eps, p.grid));
  BoundaryMatrix B = build_boundary_matrix(p.boundary, sys, p.n);
  auto snaps = snapshot_steps(p.snapshotTimes, p.grid);

  Trajectory tr;
  tr.mass0 = st.mass(F);
  auto record = [&](int m) {
    for (size_t i = 0; i < snaps.size(); ++i)
      if (snaps[i] == m) {
        tr.times.push_back(m * p.grid.dt);
        tr.snapshots.push_back({st.to_moments(F)});
      }
  };
  record(0);
  for (int m = 0; m < p.grid.steps; ++m) {
    Vec out = F.col(0).head(N);
    Vec in = dvm_reflection(p.boundary, p.n, out);
    Vec trace(2 * N);
    trace << out, in;
    Vec U0 = moments_from_dvm(trace, sys);
    tr.maxBoundaryResidual = std::max(tr.maxBoundaryResidual, (B.rows * U0).cwiseAbs().maxCoeff());
    auto [fin, fout] = st.step(F, in);
    tr.junctionFlux += fin;
    tr.farFlux += fout;
    record(m + 1);
  }
  tr.massT = st.mass(F);
  return tr;
}

Mat solve_halfline_final(const IBVPProblem& p) {
  const MomentSystem& sys = *p.sys;
  const int N = sys.N();
  EdgeStepper st(sys, p.grid, p.eps);
  Mat F = st.to_dvm(p.initial.cell_averages(sys, p.eps, p.grid));
  for (int m = 0; m < p.grid.steps; ++m) {
    Vec in = dvm_reflection(p.boundary, p.n, F.col(0).head(N));
    st.step(F, in);
  }
  return st.to_moments(F);
}

Trajectory solve_network(const NetworkProblem& p) {
  const MomentSystem& sys = *p.sys;
  const int N = sys.N();
  const int n = static_cast<int>(std::max(p.initial.size(), p.initialMoments.size()));
  if (n < 2) throw std::invalid_argument("solve_network: need at least two edges");
  EdgeStepper st(sys, p.grid, p.eps);
  std::vector<Mat> F(n);
  for (int i = 0; i < n; ++i) {
    Mat G0 = p.initialMoments.empty() ? p.initial[i].cell_averages(sys, p.eps, p.grid) : p.initialMoments[i];
    if (G0.cols() != p.grid.cells || G0.rows() != sys.dim()) throw std::invalid_argument("solve_network: grid mismatch");
    F[i] = st.to_dvm(G0);
  }
  auto snaps = snapshot_steps(p.snapshotTimes, p.grid);
  Trajectory tr;
  auto total_mass = [&] {
    double s = 0.0;
    for (const auto& f : F) s += st.mass(f);
    return s;
  };
  auto record = [&](int m) {
    for (size_t i = 0; i < snaps.size(); ++i)
      if (snaps[i] == m) {
        tr.times.push_back(m * p.grid.dt);
        EdgeFields e;
        for (const auto& f : F) e.push_back(st.to_moments(f));
        tr.snapshots.push_back(std::move(e));
      }
  };
  tr.mass0 = total_mass();
  record(0);
  Mat traces(n, 2 * N);
  for (int m = 0; m < p.grid.steps; ++m) {
    for (int i = 0; i < n; ++i) traces.row(i) = F[i].col(0).transpose();
    Mat in = junction_exchange(traces);
    for (int i = 0; i < n; ++i) {
      auto [fin, fout] = st.step(F[i], in.row(i).transpose());
      tr.junctionFlux += fin;
      tr.farFlux += fout;
    }
    record(m + 1);
  }
  tr.massT = total_mass();
  return tr;
}

Mat solve_wholeline(const MomentSystem& sys, const Grid& halfGrid, double eps, const Mat& G0) {
  Grid g = halfGrid;
  g.cells = 2 * halfGrid.cells;
  g.L = 2 * halfGrid.L;
  EdgeStepper st(sys, g, eps);
  if (G0.cols() != g.cells) throw std::invalid_argument("solve_wholeline: grid mismatch");
  Mat F = st.to_dvm(G0);
  const int dim = sys.dim();
  for (int m = 0; m < g.steps; ++m) {
    Vec ghost(dim);
    for (int k = 0; k < dim; ++k) ghost(k) = F(k, 0);  // extrapolation at x = -L
    st.step(F, ghost.tail(sys.N()));
  }
  return st.to_moments(F);
}

}  // namespace knet
