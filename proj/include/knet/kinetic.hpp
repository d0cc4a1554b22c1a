#pragma once

#include <vector>

#include "knet/coupling.hpp"
#include "knet/spectral.hpp"

namespace knet {

struct Grid {
  double L = 0.0;
  int cells = 0;
  double dx = 0.0;
  double dt = 0.0;
  int steps = 0;
  double T = 0.0;

  double x(int j) const { return (j + 0.5) * dx; }
};

// Uniform cell-centred grid on [0, L] with dx close to dxTarget and
// dt = T / ceil(T / (cfl dx / vmax)).
Grid make_grid(double L, double dxTarget, double T, double cfl, double vmax);
// Same grid refined by 2^level in both dx and dt (fixed Courant number).
Grid refine(const Grid& g, int level);

// Smooth compactly supported bump exp(1 - 1/(1 - r^2)), r = (x - c)/s.
double bump(double x, double c, double s);
// d^k/dx^k of the bump for k <= 4.
double bump_derivative(int k, double x, double c, double s);

// Equilibrium bump for the first blockSize moments; optionally with the
// first-order nonequilibrium correction -eps A12^T d/dx u0 so that the
// data start on the slow manifold.
struct InitialData {
  double center = 1.5;
  double width = 1.0;
  Vec amplitude;  // blockSize entries
  bool correction = true;

  Vec moments(const MomentSystem& sys, double eps, double x) const;
  // Cell averages by 4-point Gauss-Legendre per cell; dim x cells.
  Mat cell_averages(const MomentSystem& sys, double eps, const Grid& g) const;
  double support_end() const { return center + width; }
};

struct IBVPProblem {
  const MomentSystem* sys = nullptr;
  BoundaryVariant boundary = BoundaryVariant::B1;
  int n = 2;
  double eps = 0.1;
  Grid grid;
  InitialData initial;
  std::vector<double> snapshotTimes;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<EdgeFields> snapshots;  // moment fields per edge
  double mass0 = 0.0;
  double massT = 0.0;
  double farFlux = 0.0;       // accumulated outflow through x = L (all edges)
  double junctionFlux = 0.0;  // accumulated inflow through x = 0 (all edges)
  double maxBoundaryResidual = 0.0;
};

// Explicit upwind transport + closed-form implicit relaxation on one edge.
// F is 2N x cells in DVM variables (node ordering of the quadrature).
class EdgeStepper {
 public:
  EdgeStepper(const MomentSystem& sys, const Grid& g, double eps);

  // Sets F to the transported and relaxed state. incoming holds the junction
  // ghost values at +z_k (N entries). Returns (junction inflow, far outflow).
  std::pair<double, double> step(Mat& F, const Vec& incoming) const;
  void relax(Mat& F) const;
  void transport(Mat& F, const Vec& leftGhost) const;

  Mat to_moments(const Mat& F) const { return sys_.V * sys_.Wnode.asDiagonal() * F; }
  Mat to_dvm(const Mat& G) const { return sys_.V.transpose() * G; }
  double mass(const Mat& F) const;

 private:
  const MomentSystem& sys_;
  Grid g_;
  double r_;
  Mat Vb_;   // first blockSize rows of V
  Mat PbW_;  // Vb diag(Wnode)
};

Trajectory solve_halfline(const IBVPProblem& p);
// Final state only (moments, dim x cells), used by the reference solves.
Mat solve_halfline_final(const IBVPProblem& p);

// All edges share sys, grid and eps; initial holds one entry per edge.
struct NetworkProblem {
  const MomentSystem* sys = nullptr;
  double eps = 0.1;
  Grid grid;
  std::vector<InitialData> initial;
  std::vector<Mat> initialMoments;  // optional explicit cell data, overrides `initial`
  std::vector<double> snapshotTimes;
};

Trajectory solve_network(const NetworkProblem& p);

// Whole line [-L, L] with 2*cells cells, extrapolation at both ends.
// G0 is dim x (2 cells). Returns moments at T.
Mat solve_wholeline(const MomentSystem& sys, const Grid& halfGrid, double eps, const Mat& G0);

}  // namespace knet
