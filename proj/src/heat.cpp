#include "knet/heat.hpp"

#include <cmath>
#include <stdexcept>

namespace knet {

void solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                       const std::vector<double>& sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  std::vector<double> c(n, 0.0);
  double beta = diag[0];
  if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i] = sup[i - 1] / beta;
    beta = diag[i] - sub[i - 1] * c[i];
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    rhs[i] = (rhs[i] - sub[i - 1] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
}

HeatSolver::HeatSolver(double zMax, double dz, int rannacherSteps) : dz_(dz), rannacher_(rannacherSteps) {
  if (!(dz > 0.0) || !(zMax > 4 * dz)) throw std::invalid_argument("HeatSolver: bad grid");
  const int n = static_cast<int>(std::lround(zMax / dz)) + 1;
  h_ = Vec::Zero(n);
}

void HeatSolver::step(double dt, Kind kind, double bcOld, double bcNew, const Vec& fOld, const Vec& fNew) {
  if (steps_ < rannacher_) {
    const double bcMid = 0.5 * (bcOld + bcNew);
    Vec fMid;
    if (fOld.size() && fNew.size()) fMid = 0.5 * (fOld + fNew);
    theta_step(0.5 * dt, 1.0, kind, bcOld, bcMid, fMid, fMid);
    theta_step(0.5 * dt, 1.0, kind, bcMid, bcNew, fMid, fNew.size() ? fNew : fMid);
  } else {
    theta_step(dt, 0.5, kind, bcOld, bcNew, fOld, fNew);
  }
  ++steps_;
}

void HeatSolver::theta_step(double dt, double theta, Kind kind, double bcOld, double bcNew, const Vec& fOld,
                            const Vec& fNew) {
  const int n = size();
  const double r = dt / (dz_ * dz_);
  const int first = kind == Kind::Dirichlet ? 1 : 0;
  const int m = n - 1 - first;  // unknowns first..n-2
  std::vector<double> sub(m - 1), diag(m), sup(m - 1), rhs(m);

  // explicit part: h + (1-theta) dt (D h + f_old)
  auto lap = [&](int i, double bc) {
    if (i == 0) return (2.0 * h_(1) - 2.0 * h_(0) - 2.0 * dz_ * bc) / (dz_ * dz_);
    return (h_(i + 1) - 2.0 * h_(i) + h_(i - 1)) / (dz_ * dz_);
  };
  for (int k = 0; k < m; ++k) {
    const int i = first + k;
    double v = h_(i);
    if (theta < 1.0) v += (1.0 - theta) * dt * lap(i, bcOld);
    if (fOld.size()) v += (1.0 - theta) * dt * fOld(i);
    if (fNew.size()) v += theta * dt * fNew(i);
    rhs[k] = v;
    diag[k] = 1.0 + 2.0 * theta * r;
    if (k > 0) sub[k - 1] = -theta * r;
    if (k + 1 < m) sup[k] = -theta * r;
  }
  if (kind == Kind::Dirichlet) {
    rhs[0] += theta * r * bcNew;
  } else {
    // node 0 couples to the ghost h_{-1} = h_1 - 2 dz g
    sup[0] = -2.0 * theta * r;
    rhs[0] -= theta * r * 2.0 * dz_ * bcNew;
  }
  solve_tridiagonal(sub, diag, sup, rhs);
  for (int k = 0; k < m; ++k) h_(first + k) = rhs[k];
  if (kind == Kind::Dirichlet) h_(0) = bcNew;
  h_(n - 1) = 0.0;
}

double HeatSolver::boundary_flux() const {
  const Vec& h = h_;
  const double d = (-25.0 * h(0) + 48.0 * h(1) - 36.0 * h(2) + 16.0 * h(3) - 3.0 * h(4)) / (12.0 * dz_);
  return -d;
}

}  // namespace knet
