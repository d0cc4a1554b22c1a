#pragma once

#include <vector>

#include "knet/spectral.hpp"

namespace knet {

// Vector-valued function of y >= 0 written as a finite sum of
// coef * y^power * exp(-rate * y), rate > 0. Kinetic layers of every order
// stay inside this class, so derivatives, tail integrals and the decaying
// solutions of the layer ODEs are exact.
struct ExpTerm {
  double rate = 1.0;
  int power = 0;
  Vec coef;
};

class ExpSum {
 public:
  ExpSum() = default;
  explicit ExpSum(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  const std::vector<ExpTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Merges with an existing term of the same rate and power.
  void add(double rate, int power, const Vec& coef);
  ExpSum& operator+=(const ExpSum& o);
  ExpSum operator+(const ExpSum& o) const;
  ExpSum operator*(double s) const;

  Vec eval(double y) const;
  ExpSum derivative() const;
  // y -> integral of the sum over [y, inf).
  ExpSum tail_integral() const;
  // M * f(y) for a matrix with dim() columns.
  ExpSum map(const Mat& M) const;
  ExpSum component(int i) const;
  double max_rate() const;
  double min_rate() const;

 private:
  int dim_ = 0;
  std::vector<ExpTerm> terms_;
};

// Decaying particular solution of M w' = -w + rhs for symmetric tridiagonal
// M given by its full eigen-decomposition. Resonant terms (rate = 1/mu)
// pick up an extra power of y; homogeneous modes are not added.
ExpSum solve_layer_ode(const StableSubspace& ss, const ExpSum& rhs);

// sum_j exp(-y / mu_j) R_j gamma_j
ExpSum homogeneous_layer(const StableSubspace& ss, const Vec& gamma);

}  // namespace knet
