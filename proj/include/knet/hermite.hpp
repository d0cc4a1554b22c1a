#pragma once

#include <vector>

namespace knet {

constexpr int kMaxQuadratureN = 16;

// Gauss nodes for the standard Gaussian weight. nodes = (-z_1..-z_N, z_1..z_N)
// with z ascending; weights[k] belongs to both +z_k and -z_k.
struct QuadratureSet {
  int N = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> z;

  int size() const { return 2 * N; }
  // weight of the node at position k in `nodes`
  double node_weight(int k) const { return weights[k % N]; }
  double max_speed() const { return z.back(); }
};

// Orthonormal probabilists' Hermite polynomial phi_k(v).
double eval_phi(int k, double v);
// phi_0..phi_k at v.
std::vector<double> eval_basis(int k, double v);
double maxwellian(double v);

QuadratureSet build_quadrature(int N);

// max_{i,j<2N} |sum_k w_k phi_i(v_k) phi_j(v_k) - delta_ij|
double orthonormality_residual(const QuadratureSet& q);

}  // namespace knet
