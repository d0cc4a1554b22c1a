#include "knet/coupling.hpp"

#include <stdexcept>

namespace knet {

std::string to_string(BoundaryVariant b) { return b == BoundaryVariant::B1 ? "B1" : "B2"; }

BoundaryVariant boundary_from_string(const std::string& s) {
  if (s == "B1" || s == "b1") return BoundaryVariant::B1;
  if (s == "B2" || s == "b2") return BoundaryVariant::B2;
  throw std::invalid_argument("unknown boundary variant '" + s + "'");
}

static void check_edges(BoundaryVariant v, int n) {
  if (v == BoundaryVariant::B2 && n < 2) throw std::invalid_argument("B2 needs n >= 2 edges");
}

BoundaryMatrix build_boundary_matrix(BoundaryVariant variant, const MomentSystem& sys, int n) {
  check_edges(variant, n);
  const int N = sys.N();
  Mat S(N, 2 * N);
  S.leftCols(N).setIdentity();
  S.rightCols(N) = Mat::Identity(N, N) * (variant == BoundaryVariant::B1 ? -1.0 : double(n - 1));
  return {variant, n, S * sys.V.transpose()};
}

Mat boundary_matrix_phi_form(BoundaryVariant variant, const MomentSystem& sys, int n) {
  check_edges(variant, n);
  const int N = sys.N();
  Mat B = Mat::Zero(N, 2 * N);
  for (int i = 0; i < 2 * N; ++i) {
    double scale;
    if (variant == BoundaryVariant::B1)
      scale = (i % 2 == 1) ? -2.0 : 0.0;
    else
      scale = (i % 2 == 0) ? double(n) : double(n - 2);
    for (int k = 0; k < N; ++k) B(k, i) = scale * sys.V(i, N + k);
  }
  return B;
}

Mat kernel_basis(const Mat& B) {
  Eigen::ColPivHouseholderQR<Mat> qr(B.transpose());
  const int m = static_cast<int>(B.cols());
  const int r = static_cast<int>(qr.rank());
  Mat Q = qr.householderQ() * Mat::Identity(m, m);
  return Q.rightCols(m - r);
}

DissipativityReport dissipativity_report(const BoundaryMatrix& B, const MomentSystem& sys) {
  Mat K = kernel_basis(B.rows);
  DissipativityReport rep;
  rep.kernelDim = static_cast<int>(K.cols());
  if (rep.kernelDim != sys.N()) throw std::runtime_error("dissipativity_report: kernel dimension differs from N");
  Mat form = K.transpose() * sys.A * K;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (form + form.transpose()), Eigen::EigenvaluesOnly);
  rep.maxQuadForm = es.eigenvalues().maxCoeff();
  rep.strict = rep.maxQuadForm < -1e-12;
  return rep;
}

static void check_fields(const EdgeFields& G) {
  if (G.size() < 2) throw std::invalid_argument("network fields need at least two edges");
  for (const auto& g : G)
    if (g.rows() != G[0].rows() || g.cols() != G[0].cols())
      throw std::invalid_argument("network fields on mismatched grids");
}

EdgeFields to_network_vars(const EdgeFields& G) {
  check_fields(G);
  EdgeFields U(G.size());
  U[0] = G[0];
  for (size_t i = 1; i < G.size(); ++i) {
    U[0] += G[i];
    U[i] = G[i] - G[0];
  }
  return U;
}

EdgeFields from_network_vars(const EdgeFields& U) {
  check_fields(U);
  const double n = double(U.size());
  Mat G1 = U[0];
  for (size_t k = 1; k < U.size(); ++k) G1 -= U[k];
  G1 /= n;
  EdgeFields G(U.size());
  G[0] = G1;
  for (size_t i = 1; i < U.size(); ++i) G[i] = U[i] + G1;
  return G;
}

Mat junction_exchange(const Mat& traces) {
  const int n = static_cast<int>(traces.rows());
  if (n < 2) throw std::invalid_argument("junction_exchange: n must be at least 2");
  const int N = static_cast<int>(traces.cols()) / 2;
  Mat in(n, N);
  for (int k = 0; k < N; ++k) {
    double total = traces.col(k).sum();
    for (int i = 0; i < n; ++i) in(i, k) = (total - traces(i, k)) / double(n - 1);
  }
  return in;
}

Vec dvm_reflection(BoundaryVariant variant, int n, const Vec& outgoing) {
  check_edges(variant, n);
  if (variant == BoundaryVariant::B1) return outgoing;
  return -outgoing / double(n - 1);
}

}  // namespace knet
