#include "knet/hermite.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "knet/tridiag.hpp"

namespace knet {

double eval_phi(int k, double v) {
  if (k < 0) throw std::invalid_argument("eval_phi: negative degree");
  double p0 = 1.0;
  if (k == 0) return p0;
  double p1 = v;
  for (int j = 1; j < k; ++j) {
    double p2 = (v * p1 - std::sqrt(double(j)) * p0) / std::sqrt(double(j + 1));
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> eval_basis(int k, double v) {
  std::vector<double> out(k + 1);
  out[0] = 1.0;
  if (k >= 1) out[1] = v;
  for (int j = 1; j < k; ++j)
    out[j + 1] = (v * out[j] - std::sqrt(double(j)) * out[j - 1]) / std::sqrt(double(j + 1));
  return out;
}

double maxwellian(double v) {
  return std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
}

QuadratureSet build_quadrature(int N) {
  if (N < 1 || N > kMaxQuadratureN)
    throw std::invalid_argument("build_quadrature: N must lie in [1, " + std::to_string(kMaxQuadratureN) + "]");
  const int m = 2 * N;
  std::vector<double> diag(m, 0.0), off(m - 1);
  for (int p = 1; p < m; ++p) off[p - 1] = std::sqrt(double(p));
  TridiagEigen eig = tridiag_eigen(diag, off);

  QuadratureSet q;
  q.N = N;
  q.z.resize(N);
  q.weights.resize(N);
  // eigenvalues ascending: the upper half are the positive nodes
  for (int k = 0; k < N; ++k) {
    int idx = N + k;
    double z = eig.values[idx];
    double zm = -eig.values[N - 1 - k];
    // Newton on phi_{2N} sharpens the eigenvalue to full relative accuracy
    double x = 0.5 * (z + zm);
    for (int it = 0; it < 3; ++it) {
      auto b = eval_basis(m, x);
      double d = std::sqrt(double(m)) * b[m - 1];
      if (d == 0.0) break;
      x -= b[m] / d;
    }
    q.z[k] = x;
    double wp = eig.vectors[idx][0] * eig.vectors[idx][0];
    double wm = eig.vectors[N - 1 - k][0] * eig.vectors[N - 1 - k][0];
    q.weights[k] = 0.5 * (wp + wm);
  }
  q.nodes.resize(m);
  for (int k = 0; k < N; ++k) {
    q.nodes[k] = -q.z[k];
    q.nodes[N + k] = q.z[k];
  }
  return q;
}

double orthonormality_residual(const QuadratureSet& q) {
  const int m = q.size();
  std::vector<std::vector<double>> phi(m);
  for (int k = 0; k < m; ++k) phi[k] = eval_basis(m - 1, q.nodes[k]);
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += q.node_weight(k) * phi[k][i] * phi[k][j];
      worst = std::max(worst, std::fabs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace knet
