#pragma once

#include <string>
#include <vector>

#include "knet/spectral.hpp"

namespace knet {

enum class BoundaryVariant { B1, B2 };

std::string to_string(BoundaryVariant b);
BoundaryVariant boundary_from_string(const std::string& s);

struct BoundaryMatrix {
  BoundaryVariant variant = BoundaryVariant::B1;
  int n = 2;
  Mat rows;  // N x 2N
};

// Block route: (I, -I) V^T or (I, (n-1) I) V^T.
BoundaryMatrix build_boundary_matrix(BoundaryVariant variant, const MomentSystem& sys, int n = 2);
// Column route through Phi_k = (phi_k(z_1), ..., phi_k(z_N)).
Mat boundary_matrix_phi_form(BoundaryVariant variant, const MomentSystem& sys, int n = 2);

struct DissipativityReport {
  double maxQuadForm = 0.0;
  bool strict = false;
  int kernelDim = 0;
};

// Orthonormal basis of ker B (2N x N) from a pivoted QR of B^T.
Mat kernel_basis(const Mat& B);
DissipativityReport dissipativity_report(const BoundaryMatrix& B, const MomentSystem& sys);

// Network fields: one (dim x cells) matrix per edge.
using EdgeFields = std::vector<Mat>;

EdgeFields to_network_vars(const EdgeFields& G);
EdgeFields from_network_vars(const EdgeFields& U);

// traces: n x 2N DVM boundary values (node ordering of the quadrature).
// Returns n x N incoming values at +z_k.
Mat junction_exchange(const Mat& traces);

// outgoing: values at -z_k; returns the incoming values at +z_k that put
// the completed boundary vector in ker B.
Vec dvm_reflection(BoundaryVariant variant, int n, const Vec& outgoing);

}  // namespace knet
