#include "knet/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace knet {

NormSuite norms(const Mat& f, double dx) {
  if (f.cols() == 0 || f.rows() == 0) throw std::invalid_argument("norms: empty field");
  if (!(dx > 0.0)) throw std::invalid_argument("norms: dx must be positive");
  NormSuite n;
  double s2 = 0.0, d2 = 0.0;
  for (int j = 0; j < f.cols(); ++j) {
    s2 += f.col(j).squaredNorm();
    n.linf = std::max(n.linf, f.col(j).norm());
    if (j + 1 < f.cols()) d2 += (f.col(j + 1) - f.col(j)).squaredNorm();
  }
  n.l2 = std::sqrt(s2 * dx);
  n.h1 = std::sqrt(s2 * dx + d2 / dx);
  return n;
}

SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size() || eps.size() < 2) throw std::invalid_argument("fit_slope: need matching lists of length >= 2");
  const int n = static_cast<int>(eps.size());
  Mat A(n, 2);
  Vec b(n);
  for (int i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(err[i] > 0.0)) throw std::invalid_argument("fit_slope: values must be positive");
    A(i, 0) = std::log(eps[i]);
    A(i, 1) = 1.0;
    b(i) = std::log(err[i]);
  }
  const Vec c = A.colPivHouseholderQr().solve(b);
  SlopeFit f;
  f.slope = c(0);
  f.intercept = c(1);
  f.residual = std::sqrt((A * c - b).squaredNorm() / n);
  return f;
}

SlopeFit fit_slope_tail(const std::vector<double>& eps, const std::vector<double>& err, int count) {
  std::vector<std::size_t> idx(eps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return eps[a] < eps[b]; });
  const std::size_t k = std::min<std::size_t>(count, idx.size());
  std::vector<double> e, r;
  for (std::size_t i = 0; i < k; ++i) {
    e.push_back(eps[idx[i]]);
    r.push_back(err[idx[i]]);
  }
  return fit_slope(e, r);
}

// ---------------------------------------------------------------------------
// Residual audit

namespace {

// Physical points resolving the outer grid and both stretched layers.
std::vector<double> audit_points(const AsymptoticExpansion& e, double eps) {
  std::vector<double> x;
  const double hc = e.outer.h * e.settings.auditCoarsen;
  const int nc = (e.outer.points - 1) / e.settings.auditCoarsen + 1;
  for (int i = 0; i < nc; ++i) x.push_back(i * hc);
  if (e.hasViscous)
    for (int i = 0; i < e.zPoints; ++i) x.push_back(e.z(i) * std::sqrt(eps));
  if (e.hasKinetic)
    for (double y : e.y_grid()) x.push_back(y * eps);
  std::sort(x.begin(), x.end());
  std::vector<double> u;
  for (double v : x)
    if (u.empty() || v - u.back() > 1e-13) u.push_back(v);
  return u;
}

double space_l2sq(const Mat& f, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (f.col(i).squaredNorm() + f.col(i + 1).squaredNorm()) * (x[i + 1] - x[i]);
  return s;
}

// Space-time norms of a snapshot series and of its time derivative. The
// interval [0, t_1] uses the value at t_1.
std::pair<double, double> spacetime(const std::vector<Mat>& F, const std::vector<double>& t,
                                    const std::vector<double>& x) {
  const int S = static_cast<int>(F.size());
  std::vector<double> n(S), d(S);
  for (int s = 0; s < S; ++s) {
    n[s] = space_l2sq(F[s], x);
    Mat D;
    if (S == 1)
      D = F[s] * 0.0;
    else if (s == 0)
      D = (F[1] - F[0]) / (t[1] - t[0]);
    else if (s == S - 1)
      D = (F[s] - F[s - 1]) / (t[s] - t[s - 1]);
    else
      D = (F[s + 1] - F[s - 1]) / (t[s + 1] - t[s - 1]);
    d[s] = space_l2sq(D, x);
  }
  double a = n[0] * t[0], b = d[0] * t[0];
  for (int s = 0; s + 1 < S; ++s) {
    a += 0.5 * (n[s] + n[s + 1]) * (t[s + 1] - t[s]);
    b += 0.5 * (d[s] + d[s + 1]) * (t[s + 1] - t[s]);
  }
  return {std::sqrt(a), std::sqrt(b)};
}

}  // namespace

ResidualReport residual_audit(const AsymptoticExpansion& e, double eps) {
  if (e.audit.empty()) throw std::invalid_argument("residual_audit: expansion has no audit snapshots");
  if (!(eps > 0.0)) throw std::invalid_argument("residual_audit: eps must be positive");
  ResidualReport r;
  r.tag = e.tag;
  r.eps = eps;
  const std::vector<double> x = audit_points(e, eps);
  const int S = static_cast<int>(e.audit.size());
  std::vector<double> t(S);
  std::vector<Mat> e1(S), e2(S), e1o(S), e1v(S), e2v(S), e2k(S);
  for (int s = 0; s < S; ++s) {
    t[s] = e.audit[s].t;
    e1o[s] = e.residual_E1(s, x, eps, 0);
    e1v[s] = e.residual_E1(s, x, eps, 1);
    e2v[s] = e.residual_E2(s, x, eps, 1);
    e2k[s] = e.residual_E2(s, x, eps, 2);
    e1[s] = e1o[s] + e1v[s];
    e2[s] = e2v[s] + e2k[s];
  }
  std::tie(r.E1, r.dtE1) = spacetime(e1, t, x);
  std::tie(r.E2, r.dtE2) = spacetime(e2, t, x);
  r.E1outer = spacetime(e1o, t, x).first;
  r.E1viscous = spacetime(e1v, t, x).first;
  r.E2viscous = spacetime(e2v, t, x).first;
  r.E2kinetic = spacetime(e2k, t, x).first;
  r.snapshots = S;
  r.snapshotDt = S > 1 ? t[1] - t[0] : t[0];
  return r;
}

ResidualScaling residual_scaling(const AsymptoticExpansion& e, const std::vector<double>& epsList) {
  ResidualScaling out;
  out.tag = e.tag;
  std::vector<double> E1, E2, E1v, E1s, E2s;
  for (double eps : epsList) {
    out.reports.push_back(residual_audit(e, eps));
    const auto& r = out.reports.back();
    E1.push_back(r.E1);
    E2.push_back(r.E2);
    E1v.push_back(r.E1viscous);
    E1s.push_back(r.E1 + r.dtE1);
    E2s.push_back(r.E2 + r.dtE2);
  }
  auto fit = [&](const std::vector<double>& v) {
    for (double a : v)
      if (!(a > 0.0)) return SlopeFit{};
    return fit_slope(epsList, v);
  };
  out.E1 = fit(E1);
  out.E2 = fit(E2);
  out.E1viscous = fit(E1v);
  out.E1sum = fit(E1s);
  out.E2sum = fit(E2s);
  // ||E1|| + ||d_t E1|| <= C eps^{1/2 + kappa}, ||E2|| + ||d_t E2|| <= C eps^{1 + kappa}
  double k = INFINITY;
  if (E1s.front() > 0.0) k = std::min(k, out.E1sum.slope - 0.5);
  if (E2s.front() > 0.0) k = std::min(k, out.E2sum.slope - 1.0);
  out.kappa = k;
  return out;
}

// ---------------------------------------------------------------------------
// Convergence studies

std::vector<double> StudyConfig::edge_amplitudes() const {
  if (!edgeAmplitudes.empty()) {
    if (static_cast<int>(edgeAmplitudes.size()) != n) throw std::invalid_argument("edge amplitudes must have n entries");
    return edgeAmplitudes;
  }
  std::vector<double> a(n);
  for (int i = 0; i < n; ++i) a[i] = std::ldexp(1.0, -i);
  return a;
}

InitialData StudyConfig::shape(const MomentSystem& sys) const {
  InitialData d;
  d.center = center;
  d.width = width;
  d.correction = true;
  if (amplitude.size()) {
    if (amplitude.size() != sys.blockSize) throw std::invalid_argument("amplitude must have one entry per equilibrium moment");
    d.amplitude = amplitude;
  } else {
    d.amplitude = Vec::Zero(sys.blockSize);
    d.amplitude(0) = 1.0;
  }
  return d;
}

double StudyConfig::domain_length(const MomentSystem& sys) const {
  return center + width + sys.quad.max_speed() * T + 1.0;
}

int thread_cap() {
  if (const char* s = std::getenv("KINETIC_NET_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& f) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i; (i = next++) < count;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace {

// Averages 2^level fine cells onto each coarse cell.
Mat coarsen(const Mat& fine, int level) {
  const int m = 1 << level;
  Mat c(fine.rows(), fine.cols() / m);
  for (int j = 0; j < c.cols(); ++j) c.col(j) = fine.middleCols(j * m, m).rowwise().mean();
  return c;
}

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

ConvergenceReport convergence_study(AsymptoticCase c, const std::vector<double>& epsListIn, const StudyConfig& cfg) {
  if (epsListIn.size() < 3) throw std::invalid_argument("convergence_study: need at least three eps values");
  std::vector<double> epsList = epsListIn;
  std::sort(epsList.begin(), epsList.end(), std::greater<>());
  for (std::size_t i = 1; i < epsList.size(); ++i)
    if (!(epsList[i] < epsList[i - 1])) throw std::invalid_argument("convergence_study: eps values must be distinct");

  const MomentSystem sys = build_system(build_quadrature(cfg.N), case_collision(c));
  const InitialData shape = cfg.shape(sys);
  AsymptoticSettings as = cfg.asymptotic;
  as.n = cfg.n;
  as.T = cfg.T;
  as.maxOrder = cfg.K;

  ConvergenceReport rep;
  rep.tag = c;
  const auto t0 = std::chrono::steady_clock::now();
  const AsymptoticExpansion E = build_expansion(sys, c, shape, as);
  rep.expansionSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.diag = E.diag;

  const double L = cfg.domain_length(sys);
  rep.entries.resize(epsList.size());
  parallel_for(static_cast<int>(epsList.size()), cfg.threads > 0 ? cfg.threads : thread_cap(), [&](int i) {
    const double eps = epsList[i];
    try {
      const auto t1 = std::chrono::steady_clock::now();
      IBVPProblem p;
      p.sys = &sys;
      p.boundary = case_boundary(c);
      p.n = cfg.n;
      p.eps = eps;
      p.initial = shape;
      p.grid = make_grid(L, eps * cfg.dxPerEps, cfg.T, cfg.cfl, sys.quad.max_speed());
      const Mat G = solve_halfline_final(p);
      const Mat Ue = E.cell_averages(p.grid, cfg.T, eps);
      ConvergenceEntry& en = rep.entries[i];
      en.eps = eps;
      en.errorField = G - Ue;
      en.err = norms(en.errorField, p.grid.dx);
      en.cells = p.grid.cells;
      en.dx = p.grid.dx;
      if (cfg.richardson && i == 0) {
        IBVPProblem q = p;
        q.grid = refine(p.grid, 1);
        const Mat Gf = coarsen(solve_halfline_final(q), 1);
        en.richardson = norms(G - Gf, p.grid.dx).h1 / en.err.h1;
      }
      en.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    } catch (const std::exception& ex) {
      throw std::runtime_error("convergence_study(" + to_string(c) + ", eps=" + std::to_string(eps) + "): " + ex.what());
    }
  });

  std::vector<double> h1, l2, li;
  for (const auto& en : rep.entries) {
    h1.push_back(en.err.h1);
    l2.push_back(en.err.l2);
    li.push_back(en.err.linf);
  }
  rep.h1 = fit_slope_tail(epsList, h1);
  rep.l2 = fit_slope_tail(epsList, l2);
  rep.linf = fit_slope_tail(epsList, li);
  rep.h1Full = fit_slope(epsList, h1);
  rep.monotone = decreasing(h1) && decreasing(l2) && decreasing(li);
  return rep;
}

EdgeErrorReport edge_errors(const ConvergenceReport& sum, const ConvergenceReport& diff, const StudyConfig& cfg) {
  if (case_boundary(sum.tag) != BoundaryVariant::B1 || case_boundary(diff.tag) != BoundaryVariant::B2 ||
      case_collision(sum.tag) != case_collision(diff.tag))
    throw std::invalid_argument("edge_errors: need the IBVP I and IBVP II studies of one collision type");
  if (sum.entries.size() != diff.entries.size()) throw std::invalid_argument("edge_errors: eps lists differ");
  const std::vector<double> a = cfg.edge_amplitudes();
  const int n = static_cast<int>(a.size());
  double total = 0.0;
  for (double v : a) total += v;

  EdgeErrorReport out;
  for (std::size_t i = 0; i < sum.entries.size(); ++i) {
    const auto& s = sum.entries[i];
    const auto& d = diff.entries[i];
    if (std::fabs(s.eps - d.eps) > 1e-15 || s.cells != d.cells) throw std::invalid_argument("edge_errors: grids differ");
    // both studies use one shape, so the network data are multiples of it
    const Mat eU1 = total * s.errorField;
    Mat sumK = Mat::Zero(eU1.rows(), eU1.cols());
    double boundSum = eU1.colwise().norm().maxCoeff();
    for (int k = 1; k < n; ++k) {
      sumK += (a[k] - a[0]) * d.errorField;
      boundSum += std::fabs(a[k] - a[0]) * d.errorField.colwise().norm().maxCoeff();
    }
    const Mat eG1 = (eU1 - sumK) / double(n);
    std::vector<double> li{eG1.colwise().norm().maxCoeff()};
    for (int k = 1; k < n; ++k) li.push_back(((a[k] - a[0]) * d.errorField + eG1).colwise().norm().maxCoeff());
    out.eps.push_back(s.eps);
    out.bound.push_back(boundSum / n);
    if (li[0] > boundSum / n * (1.0 + 1e-12)) out.boundHolds = false;
    if (!out.edgeLinf.empty())
      for (int k = 0; k < n; ++k)
        if (!(li[k] < out.edgeLinf.back()[k])) out.monotone = false;
    out.edgeLinf.push_back(li);
  }
  return out;
}

}  // namespace knet
