#pragma once

#include <vector>

#include "knet/spectral.hpp"

namespace knet {

// h_t = h_zz + f on [0, Z], h(Z) = 0, uniform nodes z_i = i dz.
// Crank-Nicolson; the first `rannacherSteps` steps are replaced by two
// backward Euler half steps each to damp the start-up transient.
class HeatSolver {
 public:
  enum class Kind { Dirichlet, Neumann };

  HeatSolver(double zMax, double dz, int rannacherSteps = 2);

  int size() const { return static_cast<int>(h_.size()); }
  double dz() const { return dz_; }
  double z(int i) const { return i * dz_; }
  const Vec& state() const { return h_; }
  void reset() { h_.setZero(); steps_ = 0; }

  // Advances by dt. bc is h(0, t+dt) (Dirichlet) or dh/dz(0, t+dt) (Neumann);
  // bcOld is the same quantity at t. fOld/fNew may be empty (no forcing).
  void step(double dt, Kind kind, double bcOld, double bcNew, const Vec& fOld, const Vec& fNew);

  // -h_z(0) from the one-sided fourth-order stencil; used by conservation audits.
  double boundary_flux() const;

 private:
  void theta_step(double dt, double theta, Kind kind, double bcOld, double bcNew, const Vec& fOld, const Vec& fNew);

  double dz_;
  int rannacher_;
  int steps_ = 0;
  Vec h_;
};

// Thomas algorithm; sub/sup have n-1 entries. rhs is overwritten.
void solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                       const std::vector<double>& sup, std::vector<double>& rhs);

}  // namespace knet
