#pragma once

#include <functional>
#include <string>
#include <vector>

#include "knet/asymptotic.hpp"
#include "knet/kinetic.hpp"

namespace knet {

struct NormSuite {
  double l2 = 0.0;
  double linf = 0.0;
  double h1 = 0.0;
};

// Columns are cells, rows are components; pointwise values use the
// Euclidean norm over components. h1 adds the L2 norm of the forward
// difference quotient.
NormSuite norms(const Mat& field, double dx);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log-log fit residuals
};

// Least-squares fit of log(err) = slope log(eps) + intercept.
SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& err);
// Fit over the smallest `count` eps values.
SlopeFit fit_slope_tail(const std::vector<double>& eps, const std::vector<double>& err, int count = 3);

// Space-time L2 norms over [0,T] x R+ of the leftover terms.
struct ResidualReport {
  AsymptoticCase tag = AsymptoticCase::Q1_IBVP1;
  double eps = 0.0;
  double E1 = 0.0, dtE1 = 0.0, E2 = 0.0, dtE2 = 0.0;
  double E1outer = 0.0, E1viscous = 0.0;  // outer and viscous parts of E1
  double E2viscous = 0.0, E2kinetic = 0.0;
  int snapshots = 0;
  double snapshotDt = 0.0;
};

ResidualReport residual_audit(const AsymptoticExpansion& e, double eps);

struct ResidualScaling {
  AsymptoticCase tag = AsymptoticCase::Q1_IBVP1;
  std::vector<ResidualReport> reports;
  SlopeFit E1, E2, E1viscous, E1sum, E2sum;  // E?sum fits ||E|| + ||d_t E||
  double kappa = 0.0;                        // implied exponent of the energy estimate
};

ResidualScaling residual_scaling(const AsymptoticExpansion& e, const std::vector<double>& epsList);

// Shared setup of a convergence sweep.
struct StudyConfig {
  int N = 3;
  int n = 3;
  double T = 1.0;
  double cfl = 0.9;
  double dxPerEps = 1.0 / 16.0;
  double center = 1.5;
  double width = 1.0;
  Vec amplitude;                       // empty: unit first moment
  std::vector<double> edgeAmplitudes;  // network weights, empty: 1, 1/2, 1/4, ...
  int K = 3;
  bool richardson = true;              // refinement check at the largest eps
  int threads = 0;                     // 0: thread_cap()
  AsymptoticSettings asymptotic;

  std::vector<double> edge_amplitudes() const;
  InitialData shape(const MomentSystem& sys) const;
  double domain_length(const MomentSystem& sys) const;
};

struct ConvergenceEntry {
  double eps = 0.0;
  NormSuite err;
  int cells = 0;
  double dx = 0.0;
  double seconds = 0.0;
  double richardson = -1.0;  // |raw - refined| in H1 relative to err.h1; -1 if not computed
  Mat errorField;            // U - U_eps at T (cell averages)
};

struct ConvergenceReport {
  AsymptoticCase tag = AsymptoticCase::Q1_IBVP1;
  std::vector<ConvergenceEntry> entries;  // eps decreasing
  SlopeFit h1, l2, linf;                  // smallest three eps
  SlopeFit h1Full;
  bool monotone = true;                   // every norm decreases along the sweep
  double expansionSeconds = 0.0;
  ExpansionDiagnostics diag;
};

ConvergenceReport convergence_study(AsymptoticCase c, const std::vector<double>& epsList, const StudyConfig& cfg);

// Per-edge L_inf errors of the star network rebuilt from the IBVP I
// (sum variable) and IBVP II (differences) studies of one collision type.
struct EdgeErrorReport {
  std::vector<double> eps;
  std::vector<std::vector<double>> edgeLinf;  // [eps][edge]
  std::vector<double> bound;                  // (|e_1| + sum_k |e_k|) / n for edge 1
  bool boundHolds = true;
  bool monotone = true;
};

EdgeErrorReport edge_errors(const ConvergenceReport& sum, const ConvergenceReport& diff, const StudyConfig& cfg);

// Worker count: KINETIC_NET_THREADS if set and positive, else the hardware
// concurrency (at least 1).
int thread_cap();

// Runs f(0..count-1) on up to `threads` workers; exceptions propagate.
void parallel_for(int count, int threads, const std::function<void(int)>& f);

}  // namespace knet
