#include "knet/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "knet/tridiag.hpp"

namespace knet {

std::string to_string(Collision c) { return c == Collision::Q1 ? "Q1" : "Q2"; }

Collision collision_from_string(const std::string& s) {
  if (s == "Q1" || s == "q1") return Collision::Q1;
  if (s == "Q2" || s == "q2") return Collision::Q2;
  throw std::invalid_argument("unknown collision variant '" + s + "'");
}

double MomentSystem::alpha(int p) const {
  if (p <= 0 || p >= dim()) return 0.0;
  return std::sqrt(double(p));
}

MomentSystem build_system(const QuadratureSet& quad, Collision collision) {
  MomentSystem s;
  s.quad = quad;
  s.collision = collision;
  const int m = 2 * quad.N;
  s.A = Mat::Zero(m, m);
  for (int p = 1; p < m; ++p) s.A(p - 1, p) = s.A(p, p - 1) = std::sqrt(double(p));
  s.blockSize = collision == Collision::Q1 ? 2 : 3;
  if (s.blockSize > m) throw std::invalid_argument("build_system: Q2 needs N >= 2");
  s.Qdiag = Vec::Constant(m, -1.0);
  s.Qdiag.head(s.blockSize).setZero();
  s.V.resize(m, m);
  for (int k = 0; k < m; ++k) {
    auto phi = eval_basis(m - 1, quad.nodes[k]);
    for (int i = 0; i < m; ++i) s.V(i, k) = phi[i];
  }
  s.W = Eigen::Map<const Vec>(quad.weights.data(), quad.N);
  s.Wnode.resize(m);
  s.Wnode << s.W, s.W;
  const int b = s.blockSize;
  s.A11 = s.A.topLeftCorner(b, b);
  s.A12 = s.A.topRightCorner(b, m - b);
  s.A22 = s.A.bottomRightCorner(m - b, m - b);
  return s;
}

Vec moments_from_dvm(const Vec& F, const MomentSystem& sys) {
  if (F.size() != sys.dim()) throw std::invalid_argument("moments_from_dvm: size mismatch");
  return sys.V * sys.Wnode.cwiseProduct(F);
}

Vec dvm_from_moments(const Vec& G, const MomentSystem& sys) {
  if (G.size() != sys.dim()) throw std::invalid_argument("dvm_from_moments: size mismatch");
  return sys.V.transpose() * G;
}

CharDecomposition char_decomposition(const MomentSystem& sys) {
  CharDecomposition c;
  const double a1 = sys.alpha(1);
  if (sys.blockSize == 2) {
    c.lambda = a1;
    c.Pplus = Vec(2);
    c.Pplus << 1.0, 1.0;
    c.Pminus = Vec(2);
    c.Pminus << 1.0, -1.0;
    c.Pplus /= std::sqrt(2.0);
    c.Pminus /= std::sqrt(2.0);
  } else if (sys.blockSize == 3) {
    const double a2 = sys.alpha(2);
    const double lam = std::sqrt(a1 * a1 + a2 * a2);
    c.lambda = lam;
    c.Pplus = Vec(3);
    c.Pplus << a1, lam, a2;
    c.Pminus = Vec(3);
    c.Pminus << a1, -lam, a2;
    c.Pplus /= std::sqrt(2.0) * lam;
    c.Pminus /= std::sqrt(2.0) * lam;
    c.Pzero = Vec(3);
    c.Pzero << a2, 0.0, -a1;
    c.Pzero /= lam;
  } else {
    throw std::invalid_argument("char_decomposition: block size must be 2 or 3");
  }
  c.P1.resize(c.Pplus.size(), 2);
  c.P1.col(0) = c.Pplus;
  c.P1.col(1) = c.Pminus;
  c.Lambda1 << c.lambda, -c.lambda;
  return c;
}

Mat layer_matrix(const MomentSystem& sys) {
  if (sys.collision == Collision::Q1) return sys.A22;
  const int m = sys.dim();
  if (m < 6) throw std::invalid_argument("layer_matrix: Q2 layers need N >= 3");
  return sys.A.bottomRightCorner(m - 4, m - 4);
}

StableSubspace stable_subspace(const Mat& M) {
  const int n = static_cast<int>(M.rows());
  if (n == 0 || M.cols() != n) throw std::invalid_argument("stable_subspace: matrix must be square and nonempty");
  std::vector<double> diag(n), off(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) {
    diag[i] = M(i, i);
    if (i + 1 < n) off[i] = M(i, i + 1);
    for (int j = i + 2; j < n; ++j)
      if (M(i, j) != 0.0 || M(j, i) != 0.0) throw std::invalid_argument("stable_subspace: matrix is not tridiagonal");
  }
  TridiagEigen e = tridiag_eigen(diag, off);
  StableSubspace s;
  s.matrix = M;
  s.S.resize(n, n);
  s.eig.resize(n);
  int npos = 0;
  for (int k = 0; k < n; ++k) {
    if (std::fabs(e.values[k]) < 1e-12) throw std::runtime_error("stable_subspace: layer matrix is singular");
    Vec v = Eigen::Map<const Vec>(e.vectors[k].data(), n);
    for (int i = 0; i < n; ++i)
      if (std::fabs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    s.S.col(k) = v;
    s.eig(k) = e.values[k];
    if (e.values[k] > 0) ++npos;
  }
  s.Rminus.resize(n, npos);
  s.mu.resize(npos);
  s.decayRates.resize(npos);
  for (int j = 0, k = n - npos; k < n; ++k, ++j) {
    s.Rminus.col(j) = s.S.col(k);
    s.mu(j) = s.eig(k);
    s.decayRates(j) = 1.0 / s.eig(k);
  }
  return s;
}

Macroscopic macroscopic(const Vec& G) {
  if (G.size() < 3) throw std::invalid_argument("macroscopic: need at least three moments");
  Macroscopic m;
  m.rho = G(0);
  m.q = G(1);
  m.S = std::sqrt(2.0) * G(2) + G(0);
  return m;
}

double completeness_residual(const MomentSystem& sys) {
  Mat I = sys.V * sys.Wnode.asDiagonal() * sys.V.transpose();
  return (I - Mat::Identity(sys.dim(), sys.dim())).cwiseAbs().maxCoeff();
}

double spectral_identity_residual(const MomentSystem& sys) {
  Vec v = Eigen::Map<const Vec>(sys.quad.nodes.data(), sys.dim());
  return (sys.A * sys.V - sys.V * v.asDiagonal()).cwiseAbs().maxCoeff();
}

}  // namespace knet
