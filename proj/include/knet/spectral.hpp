#pragma once

#include <Eigen/Dense>
#include <string>

#include "knet/hermite.hpp"

namespace knet {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class Collision { Q1, Q2 };

std::string to_string(Collision c);
Collision collision_from_string(const std::string& s);

struct MomentSystem {
  QuadratureSet quad;
  Collision collision = Collision::Q1;
  Mat A;
  Vec Qdiag;   // diagonal of the collision matrix
  Mat V;       // V(i,k) = phi_i(v_k)
  Vec W;       // N weights
  Vec Wnode;   // 2N weights, one per node
  int blockSize = 2;
  Mat A11, A12, A22;

  int N() const { return quad.N; }
  int dim() const { return 2 * quad.N; }
  double alpha(int p) const;  // sqrt(p), zero beyond the truncation
};

MomentSystem build_system(const QuadratureSet& quad, Collision collision);

// G = V diag(W,W) F and the inverse F = V^T G.
Vec moments_from_dvm(const Vec& F, const MomentSystem& sys);
Vec dvm_from_moments(const Vec& G, const MomentSystem& sys);

struct CharDecomposition {
  double lambda = 1.0;
  Vec Pplus, Pminus, Pzero;  // Pzero is empty for Q1
  Mat P1;                    // columns (Pplus, Pminus)
  Eigen::Vector2d Lambda1;   // (lambda, -lambda)
};

CharDecomposition char_decomposition(const MomentSystem& sys);

struct StableSubspace {
  Mat matrix;
  Mat Rminus;        // decaying eigenvectors (columns), ordered by ascending mu
  Vec mu;            // positive eigenvalues
  Vec decayRates;    // 1/mu
  // complete eigen-decomposition, ascending eigenvalues
  Mat S;
  Vec eig;
};

// Layer matrix: A22 for Q1, the tridiagonal block of A on moments 4..2N-1 for Q2.
Mat layer_matrix(const MomentSystem& sys);
StableSubspace stable_subspace(const Mat& layerMatrix);

struct Macroscopic {
  double rho = 0.0, q = 0.0, S = 0.0;
};
Macroscopic macroscopic(const Vec& G);

// Diagnostics used by the structure suite.
double completeness_residual(const MomentSystem& sys);   // |V W V^T - I|_max
double spectral_identity_residual(const MomentSystem& sys);  // |A V - V diag(v)|_max

}  // namespace knet
