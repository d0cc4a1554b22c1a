#pragma once

#include <string>
#include <vector>

#include "knet/coupling.hpp"
#include "knet/expsum.hpp"
#include "knet/kinetic.hpp"
#include "knet/spectral.hpp"

namespace knet {

// The four half-line problems: collision Q1/Q2 with the reflecting (B1)
// or junction (B2) boundary matrix.
enum class AsymptoticCase { Q1_IBVP1, Q1_IBVP2, Q2_IBVP1, Q2_IBVP2 };

std::string to_string(AsymptoticCase c);
AsymptoticCase case_from_string(const std::string& s);
Collision case_collision(AsymptoticCase c);
BoundaryVariant case_boundary(AsymptoticCase c);

struct AsymptoticSettings {
  int n = 3;               // edge count entering B2
  double T = 1.0;
  double X = 0.0;          // outer domain; 0 picks support_end + lambda T + 1
  int stepsPerUnitTime = 1000;
  int auditStride = 10;    // residual snapshots every auditStride steps
  int auditCoarsen = 4;    // outer residual fields stored on every 4th node
  int maxOrder = 3;        // Q2 IBVP II only, 0..3
  double zMax = 0.0;       // 0 picks 15 sqrt(T)
  double dz = 0.002;
  std::vector<double> outputTimes;  // T is always added
  // Data overlapping x = 0 break the boundary compatibility of the kinetic
  // problem; they are still useful for driving the layers in audits.
  bool allowBoundaryData = false;
};

// Uniform outer and layer grids used by one build.
struct OuterGrid {
  double h = 0.0;
  int points = 0;
  double x(int i) const { return i * h; }
  double end() const { return (points - 1) * h; }
};

// Fields at one output time. Entry j of each list is the coefficient of
// eps^{j/2}; inactive families hold empty matrices.
struct ExpansionFields {
  double t = 0.0;
  std::vector<Mat> outer;       // 2N x outer points: (u_bar; v_bar)
  std::vector<Mat> viscous;     // 2N x z points: (u_hat; v_hat)
  std::vector<ExpSum> kinetic;  // 2N-vector profiles in y
  std::vector<Vec> gamma;       // stable-subspace coefficients
};

// Leftover terms of the truncated expansion at one audit time, stored in
// eps-independent form.
struct ResidualSnapshot {
  double t = 0.0;
  std::vector<int> outerOrders;
  std::vector<Mat> outer;         // d_t v_j + A12^T d_x u_j + A22 d_x v_j (coarse outer grid)
  Mat viscousV;                   // same combination for the top viscous order, in z
  Mat viscousDt;                  // d_t U_hat of the top order, in z
  std::vector<int> kineticOrders;
  std::vector<ExpSum> kineticDt;  // d_t U_tilde
};

struct ExpansionDiagnostics {
  double boundaryCond = 0.0;         // condition number of the order-k boundary matrix
  double boundaryResidual = 0.0;     // max |B (known + solved)| over all steps and orders
  double outerConstraint = 0.0;      // max |v_bar_2 + A12^T d_x u_bar_0| at output times
  double layerTail = 0.0;            // max |kinetic profile| at the truncation point
  double layerOdeResidual = 0.0;     // max ODE residual of the kinetic profiles on the y grid
  double heatConservation = 0.0;     // max |d/dt int h - flux - int f| over the largest flux of that order
  double farField = 0.0;             // max |outer fields| at the far end
};

class AsymptoticExpansion {
 public:
  AsymptoticCase tag = AsymptoticCase::Q1_IBVP1;
  const MomentSystem* sys = nullptr;
  AsymptoticSettings settings;
  InitialData initial;
  int maxOrder = 0;  // highest half-order j
  OuterGrid outer;
  double dz = 0.0;
  int zPoints = 0;
  double tau = 0.0;
  int steps = 0;
  bool hasViscous = false;
  bool hasKinetic = false;
  StableSubspace layer;
  Mat layerEmbed;  // 2N x dim(layer): full kinetic vector from the layer unknowns

  std::vector<ExpansionFields> fields;
  std::vector<ResidualSnapshot> audit;
  ExpansionDiagnostics diag;

  static double scale(int j, double eps);
  const ExpansionFields& at(double t) const;

  // Composite U_eps at points x (2N x len).
  Mat evaluate(const std::vector<double>& x, double t, double eps) const;
  // Per-family parts: 0 outer, 1 viscous, 2 kinetic.
  Mat evaluate_family(int family, const std::vector<double>& x, double t, double eps) const;
  // Cell averages on a kinetic grid by 3-point Gauss-Legendre per cell.
  Mat cell_averages(const Grid& g, double t, double eps) const;

  // Leftover fields of audit snapshot s on physical points x: E1 lives in the
  // nonequilibrium moments (2N-b rows), E2 in all 2N moments. family
  // restricts to one contribution (0 outer, 1 viscous, 2 kinetic); -1 sums.
  Mat residual_E1(int s, const std::vector<double>& x, double eps, int family = -1) const;
  Mat residual_E2(int s, const std::vector<double>& x, double eps, int family = -1) const;

  // y grid used for kinetic profile output: geometric, 2048 points up to
  // 40 decay lengths of the slowest mode.
  std::vector<double> y_grid(int points = 2048) const;
  double z(int i) const { return i * dz; }
};

// Zero-speed mode of the Q2 acoustic block on a bump overlapping x = 0. The
// zero-speed mode never moves, so data supported away from the boundary leave
// the reflecting problem without a viscous layer at order sqrt(eps); this
// profile drives one from t = 0. Needs allowBoundaryData.
InitialData boundary_driving_data(const MomentSystem& sys, double center = 0.5, double width = 1.5);

AsymptoticExpansion build_expansion(const MomentSystem& sys, AsymptoticCase c, const InitialData& initial,
                                    const AsymptoticSettings& s = {});

AsymptoticExpansion solve_outer_q1_ibvp1(const MomentSystem& sys, const InitialData& initial,
                                         const AsymptoticSettings& s = {});
AsymptoticExpansion solve_q1_ibvp2(const MomentSystem& sys, const InitialData& initial,
                                   const AsymptoticSettings& s = {});
AsymptoticExpansion solve_q2_ibvp1(const MomentSystem& sys, const InitialData& initial,
                                   const AsymptoticSettings& s = {});
AsymptoticExpansion solve_q2_ibvp2(const MomentSystem& sys, const InitialData& initial, int K,
                                   const AsymptoticSettings& s = {});

// Kinetic-layer embedding: full 2N moment vector of a homogeneous layer
// from the layer unknowns (Q1: v tilde, Q2: v tilde_H).
Mat layer_embedding(const MomentSystem& sys);
// Decaying particular solution of A U' = Q U + r.
ExpSum kinetic_particular(const MomentSystem& sys, const StableSubspace& ss, const ExpSum& r);

// Boundary systems. Q1 with B2: unknowns (beta_+, gamma). Q2 with B2:
// unknowns (beta_+, h(0), gamma). Q2 with B1 at first order: the 2x2 system
// for (beta_+, dh/dz(0)) written in the odd-moment coordinates 1 and 3.
Mat q1_layer_boundary_matrix(const MomentSystem& sys, int n);
Mat q2_layer_boundary_matrix(const MomentSystem& sys, int n);
Mat q2_neumann_boundary_matrix(const MomentSystem& sys);
// n = 2: leading 2x2 block of the boundary matrix in the even Hermite
// coordinates, and the even rows of the stable eigenvectors.
Mat q2_n2_leading_block(const MomentSystem& sys);
Mat q2_even_stable_rows(const MomentSystem& sys);
double condition_number(const Mat& M);

}  // namespace knet
