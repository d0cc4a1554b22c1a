#pragma once

#include <vector>

namespace knet {

// Symmetric tridiagonal eigenproblem by implicit-shift QL.
// diag has size n, off has size n-1 (off[i] couples i and i+1).
// On return values are ascending and vectors[k] is the unit eigenvector
// belonging to values[k]. Throws std::runtime_error if QL stalls.
struct TridiagEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

TridiagEigen tridiag_eigen(const std::vector<double>& diag, const std::vector<double>& off);

}  // namespace knet
