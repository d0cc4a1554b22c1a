#include "knet/asymptotic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "knet/heat.hpp"

namespace knet {

std::string to_string(AsymptoticCase c) {
  switch (c) {
    case AsymptoticCase::Q1_IBVP1: return "q1-ibvp1";
    case AsymptoticCase::Q1_IBVP2: return "q1-ibvp2";
    case AsymptoticCase::Q2_IBVP1: return "q2-ibvp1";
    case AsymptoticCase::Q2_IBVP2: return "q2-ibvp2";
  }
  return "?";
}

AsymptoticCase case_from_string(const std::string& s) {
  for (auto c : {AsymptoticCase::Q1_IBVP1, AsymptoticCase::Q1_IBVP2, AsymptoticCase::Q2_IBVP1, AsymptoticCase::Q2_IBVP2})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown case '" + s + "'");
}

Collision case_collision(AsymptoticCase c) {
  return (c == AsymptoticCase::Q1_IBVP1 || c == AsymptoticCase::Q1_IBVP2) ? Collision::Q1 : Collision::Q2;
}

BoundaryVariant case_boundary(AsymptoticCase c) {
  return (c == AsymptoticCase::Q1_IBVP1 || c == AsymptoticCase::Q2_IBVP1) ? BoundaryVariant::B1 : BoundaryVariant::B2;
}

double condition_number(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : INFINITY;
}

// ---------------------------------------------------------------------------
// Kinetic layers

Mat layer_embedding(const MomentSystem& sys) {
  const int m = sys.dim();
  if (sys.collision == Collision::Q1) {
    Mat E(m, m - 2);
    E.topRows(2) = -sys.A11.inverse() * sys.A12;
    E.bottomRows(m - 2).setIdentity();
    return E;
  }
  if (m < 6) throw std::invalid_argument("layer_embedding: Q2 layers need N >= 3");
  const double a1 = sys.alpha(1), a2 = sys.alpha(2), a3 = sys.alpha(3), a4 = sys.alpha(4);
  Mat E = Mat::Zero(m, m - 4);
  E.bottomRows(m - 4).setIdentity();
  E(2, 0) = -a4 / a3;
  E(0, 0) = a2 * a4 / (a1 * a3);
  return E;
}

ExpSum kinetic_particular(const MomentSystem& sys, const StableSubspace& ss, const ExpSum& r) {
  const int m = sys.dim();
  if (r.dim() != m) throw std::invalid_argument("kinetic_particular: dimension mismatch");
  if (r.empty()) return ExpSum(m);
  auto rows = [&](int first, int count) {
    Mat S = Mat::Zero(count, m);
    for (int i = 0; i < count; ++i) S(i, first + i) = 1.0;
    return S;
  };
  auto place = [&](const ExpSum& f, int first) {
    Mat P = Mat::Zero(m, f.dim());
    for (int i = 0; i < f.dim(); ++i) P(first + i, i) = 1.0;
    return f.map(P);
  };

  if (sys.collision == Collision::Q1) {
    const Mat A11inv = sys.A11.inverse();
    const ExpSum ru = r.map(rows(0, 2));
    const ExpSum rv = r.map(rows(2, m - 2));
    const Mat C = sys.A12.transpose() * A11inv;
    const ExpSum v = solve_layer_ode(ss, rv + ru.map(-C));
    const ExpSum u = (v.map(sys.A12) + ru.tail_integral()).map(-A11inv);
    return place(u, 0) + place(v, 2);
  }

  // Q2: rows 0..3 integrate directly, the rest is a layer ODE for moments 4..
  const double a1 = sys.alpha(1), a2 = sys.alpha(2), a3 = sys.alpha(3), a4 = sys.alpha(4);
  auto comp = [&](int i) { return r.component(i); };
  const ExpSum U1 = comp(0).tail_integral() * (-1.0 / a1);
  const ExpSum I1 = comp(1).tail_integral() * -1.0;
  const ExpSum U3 = (comp(2).tail_integral() * -1.0 + U1 * (-a2)) * (1.0 / a3);
  ExpSum s = r.map(rows(4, m - 4));
  {
    Mat e0 = Mat::Zero(m - 4, 1);
    e0(0, 0) = 1.0;
    s += U3.derivative().map(e0 * (-a4));
  }
  const ExpSum vH = solve_layer_ode(ss, s);
  const ExpSum U4 = vH.component(0);
  const ExpSum I3 = (U3 + comp(3) * -1.0).tail_integral();
  const ExpSum U2 = (I3 + U4 * (-a4)) * (1.0 / a3);
  const ExpSum U0 = (I1 + U2 * (-a2)) * (1.0 / a1);
  return place(U0, 0) + place(U1, 1) + place(U2, 2) + place(U3, 3) + place(vH, 4);
}

// ---------------------------------------------------------------------------
// Boundary matrices

namespace {

Vec embed_top(const Vec& top, int m) {
  Vec e = Vec::Zero(m);
  e.head(top.size()) = top;
  return e;
}

Vec neumann_column(const MomentSystem& sys, const CharDecomposition& cd) {
  // (u_hat; v_hat) at z = 0 per unit dh/dz(0) of the lower order
  const int m = sys.dim();
  Vec col(m);
  Vec Linv(2);
  Linv << 1.0 / cd.Lambda1(0), 1.0 / cd.Lambda1(1);
  col.head(3) = cd.P1 * Linv.asDiagonal() * cd.P1.transpose() * sys.A12 * sys.A12.transpose() * cd.Pzero;
  col.tail(m - 3) = -sys.A12.transpose() * cd.Pzero;
  return col;
}

}  // namespace

Mat q1_layer_boundary_matrix(const MomentSystem& sys, int n) {
  if (sys.collision != Collision::Q1) throw std::invalid_argument("q1_layer_boundary_matrix: needs Q1");
  const int m = sys.dim();
  const CharDecomposition cd = char_decomposition(sys);
  const StableSubspace ss = stable_subspace(layer_matrix(sys));
  Mat C(m, 1 + ss.Rminus.cols());
  C.col(0) = embed_top(cd.Pplus, m);
  C.rightCols(ss.Rminus.cols()) = layer_embedding(sys) * ss.Rminus;
  return build_boundary_matrix(BoundaryVariant::B2, sys, n).rows * C;
}

Mat q2_layer_boundary_matrix(const MomentSystem& sys, int n) {
  if (sys.collision != Collision::Q2) throw std::invalid_argument("q2_layer_boundary_matrix: needs Q2");
  const int m = sys.dim();
  const CharDecomposition cd = char_decomposition(sys);
  const StableSubspace ss = stable_subspace(layer_matrix(sys));
  Mat C(m, 2 + ss.Rminus.cols());
  C.col(0) = embed_top(cd.Pplus, m);
  C.col(1) = embed_top(cd.Pzero, m);
  C.rightCols(ss.Rminus.cols()) = layer_embedding(sys) * ss.Rminus;
  return build_boundary_matrix(BoundaryVariant::B2, sys, n).rows * C;
}

Mat q2_neumann_boundary_matrix(const MomentSystem& sys) {
  if (sys.collision != Collision::Q2) throw std::invalid_argument("q2_neumann_boundary_matrix: needs Q2");
  const CharDecomposition cd = char_decomposition(sys);
  const Vec bp = embed_top(cd.Pplus, sys.dim());
  const Vec g = neumann_column(sys, cd);
  Mat M(2, 2);
  M << bp(1), g(1), bp(3), g(3);
  return M;
}

Mat q2_n2_leading_block(const MomentSystem& sys) {
  const CharDecomposition cd = char_decomposition(sys);
  Mat M(2, 2);
  M << cd.Pplus(0), cd.Pzero(0), cd.Pplus(2), cd.Pzero(2);
  return M;
}

Mat q2_even_stable_rows(const MomentSystem& sys) {
  const StableSubspace ss = stable_subspace(layer_matrix(sys));
  const int rows = static_cast<int>(ss.Rminus.rows());
  Mat E((rows + 1) / 2, ss.Rminus.cols());
  for (int i = 0, r = 0; i < rows; i += 2, ++r) E.row(r) = ss.Rminus.row(i);
  return E;
}

// ---------------------------------------------------------------------------
// Grid helpers

namespace {

// Fourth-order first derivative along rows, one-sided near both ends.
Mat ddx(const Mat& f, double h) {
  const int n = static_cast<int>(f.cols());
  Mat d(f.rows(), n);
  if (n < 5) throw std::invalid_argument("ddx: need at least five points");
  const double c = 1.0 / (12.0 * h);
  d.col(0) = c * (-25.0 * f.col(0) + 48.0 * f.col(1) - 36.0 * f.col(2) + 16.0 * f.col(3) - 3.0 * f.col(4));
  d.col(1) = c * (-3.0 * f.col(0) - 10.0 * f.col(1) + 18.0 * f.col(2) - 6.0 * f.col(3) + f.col(4));
  d.middleCols(2, n - 4) = c * (f.middleCols(0, n - 4) - 8.0 * f.middleCols(1, n - 4) + 8.0 * f.middleCols(3, n - 4) -
                               f.middleCols(4, n - 4));
  d.col(n - 2) = -c * (-3.0 * f.col(n - 1) - 10.0 * f.col(n - 2) + 18.0 * f.col(n - 3) - 6.0 * f.col(n - 4) + f.col(n - 5));
  d.col(n - 1) =
      -c * (-25.0 * f.col(n - 1) + 48.0 * f.col(n - 2) - 36.0 * f.col(n - 3) + 16.0 * f.col(n - 4) - 3.0 * f.col(n - 5));
  return d;
}

// int_z^Z f by the trapezoid rule with the Euler-Maclaurin end correction.
Mat tail_integral(const Mat& f, double h) {
  const int n = static_cast<int>(f.cols());
  const Mat df = ddx(f, h);
  Mat t(f.rows(), n);
  t.col(n - 1).setZero();
  for (int i = n - 2; i >= 0; --i) t.col(i) = t.col(i + 1) + 0.5 * h * (f.col(i) + f.col(i + 1));
  for (int i = 0; i < n; ++i) t.col(i) -= h * h / 12.0 * (df.col(n - 1) - df.col(i));
  return t;
}

// Cubic Lagrange interpolation of the columns of F on the uniform grid i*h.
// Zero at and beyond the last node.
Vec interp(const Mat& F, double h, double x) {
  const int n = static_cast<int>(F.cols());
  if (x >= (n - 1) * h) return Vec::Zero(F.rows());
  if (x < 0.0) throw std::invalid_argument("interp: negative abscissa");
  int i = static_cast<int>(std::floor(x / h));
  int i0 = std::clamp(i - 1, 0, n - 4);
  const double s = x / h - i0;  // position inside the stencil i0..i0+3
  const double w0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  const double w1 = s * (s - 2) * (s - 3) / 2.0;
  const double w2 = -s * (s - 1) * (s - 3) / 2.0;
  const double w3 = s * (s - 1) * (s - 2) / 6.0;
  return w0 * F.col(i0) + w1 * F.col(i0 + 1) + w2 * F.col(i0 + 2) + w3 * F.col(i0 + 3);
}

// Three stored time levels, newest first.
template <class T>
struct Levels {
  std::array<T, 3> v;
  int filled = 0;
  void push(const T& x) {
    v[2] = v[1];
    v[1] = v[0];
    v[0] = x;
    filled = std::min(filled + 1, 3);
  }
  T& now() { return v[0]; }
  const T& now() const { return v[0]; }
  // Backward difference: BDF2 once three levels exist, Euler with two, zero before.
  T ddt(double tau) const {
    if (filled >= 3) return (3.0 * v[0] - 4.0 * v[1] + v[2]) / (2.0 * tau);
    if (filled == 2) return (v[0] - v[1]) / tau;
    return v[0] * 0.0;
  }
};

enum class Closure { Reflect, ReflectNeumann, Layer, LayerHeat };

struct OrderState {
  Vec bp, bm, b0;  // characteristic variables
  Mat u;           // b x nx
  Levels<Mat> v;   // (m-b) x nx
  Mat F;           // forcing at the current level
  // viscous
  std::unique_ptr<HeatSolver> heat;
  Levels<Mat> U;   // 2N x nz
  Mat vh, p;
  Vec fhat, fhatOld;
  double bcOld = 0.0;
  double fluxScale = 0.0;  // running max of |flux| + int |f|
  // kinetic
  Levels<Vec> gamma;
  Levels<Vec> gammaDot;
  ExpSum part;
};

class Builder {
 public:
  Builder(const MomentSystem& sys, AsymptoticCase c, const InitialData& init, const AsymptoticSettings& s)
      : sys_(sys), cd_(char_decomposition(sys)) {
    if (case_collision(c) != sys.collision) throw std::invalid_argument("build_expansion: collision does not match case");
    if (init.amplitude.size() != sys.blockSize) throw std::invalid_argument("build_expansion: amplitude size");
    if (!s.allowBoundaryData && init.center - init.width < 0.0) throw std::invalid_argument("build_expansion: initial data touch the boundary");
    if (s.stepsPerUnitTime < 10 || s.T <= 0.0 || s.auditStride < 1 || s.auditCoarsen < 1)
      throw std::invalid_argument("build_expansion: bad time settings");
    E_.tag = c;
    E_.sys = &sys;
    E_.settings = s;
    E_.initial = init;
    m_ = sys.dim();
    b_ = sys.blockSize;
    boundary_ = build_boundary_matrix(case_boundary(c), sys, s.n).rows;

    switch (c) {
      case AsymptoticCase::Q1_IBVP1: J_ = 2; break;
      case AsymptoticCase::Q1_IBVP2: J_ = 2; E_.hasKinetic = true; break;
      case AsymptoticCase::Q2_IBVP1: J_ = 2; E_.hasViscous = true; break;
      case AsymptoticCase::Q2_IBVP2:
        if (s.maxOrder < 0 || s.maxOrder > 3) throw std::invalid_argument("build_expansion: order K must be in 0..3");
        J_ = s.maxOrder;
        E_.hasViscous = E_.hasKinetic = true;
        break;
    }
    E_.maxOrder = J_;

    // grids
    E_.steps = static_cast<int>(std::ceil(s.T * s.stepsPerUnitTime - 1e-9));
    E_.tau = s.T / E_.steps;
    tau_ = E_.tau;
    E_.outer.h = cd_.lambda * tau_;
    const double X = s.X > 0.0 ? s.X : init.support_end() + cd_.lambda * s.T + 1.0;
    E_.outer.points = static_cast<int>(std::ceil(X / E_.outer.h)) + 1;
    nx_ = E_.outer.points;
    E_.dz = s.dz;
    const double zMax = s.zMax > 0.0 ? s.zMax : 15.0 * std::sqrt(s.T);
    if (E_.hasViscous) E_.zPoints = static_cast<int>(std::lround(zMax / s.dz)) + 1;
    nz_ = E_.zPoints;
    if (E_.hasKinetic) {
      E_.layer = stable_subspace(layer_matrix(sys));
      E_.layerEmbed = layer_embedding(sys);
      R_ = E_.layerEmbed * E_.layer.Rminus;
    }
    if (E_.hasViscous) {
      Vec Linv(2);
      Linv << 1.0 / cd_.Lambda1(0), 1.0 / cd_.Lambda1(1);
      Lam1inv_ = Linv.asDiagonal();
    }

    for (double t : s.outputTimes) {
      if (t < 0.0 || t > s.T + 1e-12) throw std::invalid_argument("build_expansion: output time outside [0, T]");
      outputSteps_.push_back(static_cast<int>(std::lround(t / tau_)));
    }
    outputSteps_.push_back(E_.steps);
    std::sort(outputSteps_.begin(), outputSteps_.end());
    outputSteps_.erase(std::unique(outputSteps_.begin(), outputSteps_.end()), outputSteps_.end());

    closure_.resize(J_ + 1);
    for (int j = 0; j <= J_; ++j) {
      switch (c) {
        case AsymptoticCase::Q1_IBVP1: closure_[j] = Closure::Reflect; break;
        case AsymptoticCase::Q1_IBVP2: closure_[j] = Closure::Layer; break;
        case AsymptoticCase::Q2_IBVP1: closure_[j] = j == 2 ? Closure::ReflectNeumann : Closure::Reflect; break;
        case AsymptoticCase::Q2_IBVP2: closure_[j] = Closure::LayerHeat; break;
      }
    }
    columns_.resize(J_ + 1);
    for (int j = 0; j <= J_; ++j) {
      std::vector<Vec> cols{embed_top(cd_.Pplus, m_)};
      if (closure_[j] == Closure::LayerHeat) cols.push_back(embed_top(cd_.Pzero, m_));
      if (closure_[j] == Closure::ReflectNeumann) cols.push_back(neumann_column(sys, cd_));
      Mat C(m_, cols.size() + (E_.hasKinetic ? R_.cols() : 0));
      for (std::size_t k = 0; k < cols.size(); ++k) C.col(k) = cols[k];
      if (E_.hasKinetic) C.rightCols(R_.cols()) = R_;
      columns_[j] = C;
      const Mat M = boundary_ * C;
      E_.diag.boundaryCond = std::max(E_.diag.boundaryCond, condition_number(M));
      solvers_.emplace_back(M);
      if (closure_[j] != Closure::Reflect && solvers_.back().rank() < M.cols())
        throw std::runtime_error("build_expansion: singular boundary system (condition " +
                                 std::to_string(condition_number(M)) + ")");
    }
  }

  AsymptoticExpansion run() {
    init();
    if (outputSteps_.front() == 0) store_fields(0);
    int nextOut = outputSteps_.front() == 0 ? 1 : 0;
    for (int step = 1; step <= E_.steps; ++step) {
      advance(step);
      if (step % E_.settings.auditStride == 0) store_audit(step);
      if (nextOut < static_cast<int>(outputSteps_.size()) && outputSteps_[nextOut] == step) {
        store_fields(step);
        ++nextOut;
      }
    }
    return std::move(E_);
  }

 private:
  void init() {
    st_.resize(J_ + 1);
    Mat u0(b_, nx_);
    for (int i = 0; i < nx_; ++i)
      u0.col(i) = E_.initial.amplitude * bump(E_.outer.x(i), E_.initial.center, E_.initial.width);
    for (int j = 0; j <= J_; ++j) {
      auto& S = st_[j];
      const Mat u = j == 0 ? u0 : Mat::Zero(b_, nx_);
      S.bp = (cd_.Pplus.transpose() * u).transpose();
      S.bm = (cd_.Pminus.transpose() * u).transpose();
      S.b0 = b_ == 3 ? Vec((cd_.Pzero.transpose() * u).transpose()) : Vec::Zero(nx_);
      S.u = u;
      S.v.push(outer_v(j));
      S.F = -sys_.A12 * ddx(S.v.now(), E_.outer.h);
      if (E_.hasViscous) {
        S.heat = std::make_unique<HeatSolver>((nz_ - 1) * E_.dz, E_.dz);
        S.U.push(Mat::Zero(m_, nz_));
        S.vh = Mat::Zero(m_ - 3, nz_);
        S.p = Mat::Zero(2, nz_);
        S.fhat = S.fhatOld = Vec::Zero(nz_);
      }
      if (E_.hasKinetic) {
        const int k = static_cast<int>(R_.cols());
        S.gamma.push(Vec::Zero(k));
        S.gammaDot.push(Vec::Zero(k));
        S.part = ExpSum(m_);
      }
    }
  }

  // v_bar_j from the lower orders at the newest level.
  Mat outer_v(int j) {
    if (j < 2) return Mat::Zero(m_ - b_, nx_);
    const auto& L = st_[j - 2];
    const double h = E_.outer.h;
    return -L.v.ddt(tau_) - sys_.A12.transpose() * ddx(L.u, h) - sys_.A22 * ddx(L.v.now(), h);
  }

  void advance_outer(int j) {
    auto& S = st_[j];
    S.v.push(outer_v(j));
    const Mat Fnew = -sys_.A12 * ddx(S.v.now(), E_.outer.h);
    const Vec fpO = (cd_.Pplus.transpose() * S.F).transpose(), fpN = (cd_.Pplus.transpose() * Fnew).transpose();
    const Vec fmO = (cd_.Pminus.transpose() * S.F).transpose(), fmN = (cd_.Pminus.transpose() * Fnew).transpose();
    const double ht = 0.5 * tau_;
    Vec bp(nx_), bm(nx_);
    for (int i = 1; i < nx_; ++i) bp(i) = S.bp(i - 1) + ht * (fpO(i - 1) + fpN(i));
    bp(0) = 0.0;  // set by the boundary solve
    for (int i = 0; i + 1 < nx_; ++i) bm(i) = S.bm(i + 1) + ht * (fmO(i + 1) + fmN(i));
    bm(nx_ - 1) = 0.0;
    S.bp = bp;
    S.bm = bm;
    if (b_ == 3) {
      const Vec f0O = (cd_.Pzero.transpose() * S.F).transpose(), f0N = (cd_.Pzero.transpose() * Fnew).transpose();
      S.b0 += ht * (f0O + f0N);
    }
    S.F = Fnew;
  }

  void assemble_outer(int j) {
    auto& S = st_[j];
    S.u = cd_.Pplus * S.bp.transpose() + cd_.Pminus * S.bm.transpose();
    if (b_ == 3) S.u += cd_.Pzero * S.b0.transpose();
  }

  // v_hat_j, P1^T u_hat_j and the heat forcing from the lower orders.
  void viscous_fields(int j) {
    auto& S = st_[j];
    const double dz = E_.dz;
    const int mv = m_ - 3;
    Mat vh = Mat::Zero(mv, nz_);
    Mat p = Mat::Zero(2, nz_);
    if (j >= 2) vh -= st_[j - 2].U.ddt(tau_).bottomRows(mv);
    if (j >= 1) {
      const auto& L = st_[j - 1];
      const Mat dU = ddx(L.U.now(), dz);
      vh -= sys_.A12.transpose() * dU.topRows(3) + sys_.A22 * dU.bottomRows(mv);
      const Mat du = L.U.ddt(tau_).topRows(3);
      p = Lam1inv_ * cd_.P1.transpose() * tail_integral(du, dz);
    }
    p -= Lam1inv_ * cd_.P1.transpose() * sys_.A12 * vh;
    Mat inner = sys_.A12.transpose() * cd_.P1 * ddx(p, dz) + sys_.A22 * ddx(vh, dz);
    if (j >= 1) inner += st_[j - 1].U.ddt(tau_).bottomRows(mv);
    S.vh = vh;
    S.p = p;
    S.fhatOld = S.fhat;
    S.fhat = (cd_.Pzero.transpose() * sys_.A12 * ddx(inner, dz)).transpose();
  }

  void assemble_viscous(int j, bool push) {
    auto& S = st_[j];
    Mat U(m_, nz_);
    U.topRows(3) = cd_.P1 * S.p + cd_.Pzero * S.heat->state().transpose();
    U.bottomRows(m_ - 3) = S.vh;
    if (push)
      S.U.push(U);
    else
      S.U.now() = U;
  }

  ExpSum kinetic_hom(const Vec& gamma) const { return homogeneous_layer(E_.layer, gamma).map(E_.layerEmbed); }

  // -d_t U_tilde_{j-2} at the newest level (orders <= 3 only need the
  // homogeneous part of the lower layer).
  ExpSum kinetic_forcing(int j, int derivative) const {
    if (j < 2) return ExpSum(m_);
    const auto& L = st_[j - 2];
    const Vec g = derivative == 1 ? L.gamma.ddt(tau_) : L.gammaDot.ddt(tau_);
    return kinetic_hom(g) * -1.0;
  }

  void advance(int /*step*/) {
    for (int j = 0; j <= J_; ++j) {
      auto& S = st_[j];
      advance_outer(j);
      if (E_.hasViscous && closure_[j] != Closure::ReflectNeumann) viscous_fields(j);
      if (E_.hasKinetic) S.part = kinetic_particular(sys_, E_.layer, kinetic_forcing(j, 1));

      // known part of the boundary trace
      Vec known = Vec::Zero(m_);
      known.head(b_) = cd_.Pminus * S.bm(0);
      if (b_ == 3) known.head(3) += cd_.Pzero * S.b0(0);
      known.tail(m_ - b_) = S.v.now().col(0);
      if (E_.hasViscous && closure_[j] != Closure::ReflectNeumann) {
        known.head(3) += cd_.P1 * S.p.col(0);
        if (closure_[j] != Closure::LayerHeat) known.head(3) += cd_.Pzero * S.heat->state()(0);
        known.tail(m_ - 3) += S.vh.col(0);
      }
      if (E_.hasKinetic) known += S.part.eval(0.0);

      const Vec rhs = -boundary_ * known;
      const Vec x = solvers_[j].solve(rhs);
      const double res = (boundary_ * (known + columns_[j] * x)).cwiseAbs().maxCoeff();
      E_.diag.boundaryResidual = std::max(E_.diag.boundaryResidual, res);

      S.bp(0) = x(0);
      assemble_outer(j);
      int next = 1;
      if (closure_[j] == Closure::LayerHeat) {
        const double hb = x(next++);
        heat_step(S, HeatSolver::Kind::Dirichlet, hb, S.fhatOld, S.fhat);
        assemble_viscous(j, true);
      } else if (closure_[j] == Closure::ReflectNeumann) {
        // the Neumann datum closes the heat equation of the previous order
        const double g = x(next++);
        auto& P = st_[j - 1];
        heat_step(P, HeatSolver::Kind::Neumann, g, Vec(), Vec());
        assemble_viscous(j - 1, false);
        viscous_fields(j);
        assemble_viscous(j, true);
      } else if (E_.hasViscous) {
        assemble_viscous(j, true);
      }
      if (E_.hasKinetic) {
        S.gamma.push(x.tail(R_.cols()));
        S.gammaDot.push(S.gamma.ddt(tau_));
      }
    }
  }

  void heat_step(OrderState& S, HeatSolver::Kind kind, double bcNew, const Vec& fOld, const Vec& fNew) {
    const double dz = E_.dz;
    auto integral = [&](const Vec& f) { return dz * (f.sum() - 0.5 * f(0) - 0.5 * f(f.size() - 1)); };
    const double massOld = integral(S.heat->state());
    const double fluxOld = kind == HeatSolver::Kind::Neumann ? -S.bcOld : S.heat->boundary_flux();
    const bool forced = fOld.size() && (fOld.cwiseAbs().maxCoeff() > 0.0 || fNew.cwiseAbs().maxCoeff() > 0.0);
    S.heat->step(tau_, kind, S.bcOld, bcNew, forced ? fOld : Vec(), forced ? fNew : Vec());
    S.bcOld = bcNew;
    const double fluxNew = kind == HeatSolver::Kind::Neumann ? -bcNew : S.heat->boundary_flux();
    double rhs = 0.5 * (fluxOld + fluxNew);
    if (forced) rhs += 0.5 * (integral(fOld) + integral(fNew));
    // relative to the running flux scale of this order; the Rannacher start is skipped
    S.fluxScale = std::max(S.fluxScale, std::fabs(fluxNew) + (forced ? integral(fNew.cwiseAbs()) : 0.0));
    if (stepCount_++ > 4 * (J_ + 1) && S.fluxScale > 1e-12) {
      const double err = std::fabs((integral(S.heat->state()) - massOld) / tau_ - rhs);
      E_.diag.heatConservation = std::max(E_.diag.heatConservation, err / S.fluxScale);
    }
  }

  void store_audit(int step) {
    ResidualSnapshot R;
    R.t = step * tau_;
    const int c = E_.settings.auditCoarsen;
    const double h = E_.outer.h;
    for (int j = std::max(J_ - 1, 0); j <= J_; ++j) {
      const auto& S = st_[j];
      const Mat full = S.v.ddt(tau_) + sys_.A12.transpose() * ddx(S.u, h) + sys_.A22 * ddx(S.v.now(), h);
      const int nc = (nx_ - 1) / c + 1;
      Mat coarse(full.rows(), nc);
      for (int i = 0; i < nc; ++i) coarse.col(i) = full.col(i * c);
      R.outerOrders.push_back(j);
      R.outer.push_back(coarse);
    }
    if (E_.hasViscous) {
      const int mv = m_ - 3;
      const auto& S = st_[J_];
      const Mat dU = ddx(S.U.now(), E_.dz);
      R.viscousV = sys_.A12.transpose() * dU.topRows(3) + sys_.A22 * dU.bottomRows(mv);
      if (J_ >= 1) R.viscousV += st_[J_ - 1].U.ddt(tau_).bottomRows(mv);
      R.viscousDt = S.U.ddt(tau_);
    }
    if (E_.hasKinetic) {
      for (int j = std::max(J_ - 1, 0); j <= J_; ++j) {
        ExpSum d = kinetic_hom(st_[j].gammaDot.now());
        if (j >= 2) d += kinetic_particular(sys_, E_.layer, kinetic_forcing(j, 2));
        R.kineticOrders.push_back(j);
        R.kineticDt.push_back(d);
      }
    }
    E_.audit.push_back(std::move(R));
  }

  void store_fields(int step) {
    ExpansionFields F;
    F.t = step * tau_;
    const double h = E_.outer.h;
    for (int j = 0; j <= J_; ++j) {
      const auto& S = st_[j];
      Mat o(m_, nx_);
      o.topRows(b_) = S.u;
      o.bottomRows(m_ - b_) = S.v.now();
      E_.diag.farField = std::max(E_.diag.farField, o.col(nx_ - 1).cwiseAbs().maxCoeff());
      F.outer.push_back(o);
      F.viscous.push_back(E_.hasViscous ? S.U.now() : Mat());
      if (E_.hasKinetic) {
        const ExpSum prof = kinetic_hom(S.gamma.now()) + S.part;
        F.kinetic.push_back(prof);
        F.gamma.push_back(S.gamma.now());
        // layer ODE residual A U' - Q U - r on the output y grid
        const ExpSum r = kinetic_forcing(j, 1);
        const ExpSum dprof = prof.derivative();
        double res = 0.0;
        const double ymax = 40.0 * E_.layer.mu.maxCoeff();
        for (int k = 0; k <= 400; ++k) {
          const double y = ymax * k / 400.0;
          const Vec e = sys_.A * dprof.eval(y) - sys_.Qdiag.cwiseProduct(prof.eval(y)) - r.eval(y);
          res = std::max(res, e.cwiseAbs().maxCoeff());
        }
        E_.diag.layerOdeResidual = std::max(E_.diag.layerOdeResidual, res);
        E_.diag.layerTail = std::max(E_.diag.layerTail, prof.eval(ymax).cwiseAbs().maxCoeff());
      } else {
        F.kinetic.push_back(ExpSum(m_));
        F.gamma.push_back(Vec());
      }
    }
    if (J_ >= 2) {
      const Mat c = st_[2].v.now() + sys_.A12.transpose() * ddx(st_[0].u, h);
      E_.diag.outerConstraint = std::max(E_.diag.outerConstraint, c.cwiseAbs().maxCoeff());
    }
    E_.fields.push_back(std::move(F));
  }

  const MomentSystem& sys_;
  CharDecomposition cd_;
  AsymptoticExpansion E_;
  int m_ = 0, b_ = 0, J_ = 0, nx_ = 0, nz_ = 0;
  double tau_ = 0.0;
  Mat boundary_;
  Mat R_;
  Mat Lam1inv_;
  std::vector<Closure> closure_;
  std::vector<Mat> columns_;
  std::vector<Eigen::ColPivHouseholderQR<Mat>> solvers_;
  std::vector<int> outputSteps_;
  std::vector<OrderState> st_;
  int stepCount_ = 0;
};

}  // namespace

InitialData boundary_driving_data(const MomentSystem& sys, double center, double width) {
  if (sys.collision != Collision::Q2) throw std::invalid_argument("boundary_driving_data: needs Q2");
  InitialData d;
  d.center = center;
  d.width = width;
  d.amplitude = char_decomposition(sys).Pzero;
  return d;
}

AsymptoticExpansion build_expansion(const MomentSystem& sys, AsymptoticCase c, const InitialData& initial,
                                    const AsymptoticSettings& s) {
  return Builder(sys, c, initial, s).run();
}

AsymptoticExpansion solve_outer_q1_ibvp1(const MomentSystem& sys, const InitialData& initial,
                                         const AsymptoticSettings& s) {
  return build_expansion(sys, AsymptoticCase::Q1_IBVP1, initial, s);
}

AsymptoticExpansion solve_q1_ibvp2(const MomentSystem& sys, const InitialData& initial, const AsymptoticSettings& s) {
  return build_expansion(sys, AsymptoticCase::Q1_IBVP2, initial, s);
}

AsymptoticExpansion solve_q2_ibvp1(const MomentSystem& sys, const InitialData& initial, const AsymptoticSettings& s) {
  return build_expansion(sys, AsymptoticCase::Q2_IBVP1, initial, s);
}

AsymptoticExpansion solve_q2_ibvp2(const MomentSystem& sys, const InitialData& initial, int K,
                                   const AsymptoticSettings& s) {
  AsymptoticSettings t = s;
  t.maxOrder = K;
  return build_expansion(sys, AsymptoticCase::Q2_IBVP2, initial, t);
}

// ---------------------------------------------------------------------------
// Evaluation

double AsymptoticExpansion::scale(int j, double eps) { return std::pow(eps, 0.5 * j); }

const ExpansionFields& AsymptoticExpansion::at(double t) const {
  for (const auto& f : fields)
    if (std::fabs(f.t - t) <= 0.5 * tau) return f;
  throw std::out_of_range("AsymptoticExpansion: no stored fields at t = " + std::to_string(t));
}

Mat AsymptoticExpansion::evaluate_family(int family, const std::vector<double>& x, double t, double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("evaluate: eps must be positive");
  const ExpansionFields& F = at(t);
  const int m = sys->dim();
  Mat out = Mat::Zero(m, static_cast<int>(x.size()));
  for (int j = 0; j <= maxOrder; ++j) {
    const double s = scale(j, eps);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double xi = x[k];
      if (family == 0) {
        out.col(k) += s * interp(F.outer[j], outer.h, xi);
      } else if (family == 1 && hasViscous) {
        out.col(k) += s * interp(F.viscous[j], dz, xi / std::sqrt(eps));
      } else if (family == 2 && hasKinetic) {
        out.col(k) += s * F.kinetic[j].eval(xi / eps);
      }
    }
  }
  return out;
}

Mat AsymptoticExpansion::evaluate(const std::vector<double>& x, double t, double eps) const {
  return evaluate_family(0, x, t, eps) + evaluate_family(1, x, t, eps) + evaluate_family(2, x, t, eps);
}

Mat AsymptoticExpansion::cell_averages(const Grid& g, double t, double eps) const {
  const double r = std::sqrt(0.6) * 0.5 * g.dx;
  std::vector<double> pts;
  pts.reserve(3 * g.cells);
  for (int j = 0; j < g.cells; ++j) {
    const double c = g.x(j);
    pts.push_back(c - r);
    pts.push_back(c);
    pts.push_back(c + r);
  }
  const Mat U = evaluate(pts, t, eps);
  Mat out(U.rows(), g.cells);
  for (int j = 0; j < g.cells; ++j)
    out.col(j) = (5.0 * U.col(3 * j) + 8.0 * U.col(3 * j + 1) + 5.0 * U.col(3 * j + 2)) / 18.0;
  return out;
}

Mat AsymptoticExpansion::residual_E1(int s, const std::vector<double>& x, double eps, int family) const {
  const ResidualSnapshot& R = audit.at(s);
  const int mv = sys->dim() - sys->blockSize;
  const double hc = outer.h * settings.auditCoarsen;
  Mat out = Mat::Zero(mv, static_cast<int>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (family < 0 || family == 0)
      for (std::size_t o = 0; o < R.outer.size(); ++o)
        out.col(k) += scale(R.outerOrders[o], eps) * interp(R.outer[o], hc, x[k]);
    if (hasViscous && (family < 0 || family == 1)) out.col(k) += scale(maxOrder - 1, eps) * interp(R.viscousV, dz, x[k] / std::sqrt(eps));
  }
  return out;
}

Mat AsymptoticExpansion::residual_E2(int s, const std::vector<double>& x, double eps, int family) const {
  const ResidualSnapshot& R = audit.at(s);
  Mat out = Mat::Zero(sys->dim(), static_cast<int>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (hasViscous && (family < 0 || family == 1)) out.col(k) += scale(maxOrder, eps) * interp(R.viscousDt, dz, x[k] / std::sqrt(eps));
    if (family < 0 || family == 2)
      for (std::size_t o = 0; o < R.kineticDt.size(); ++o)
        out.col(k) += scale(R.kineticOrders[o], eps) * R.kineticDt[o].eval(x[k] / eps);
  }
  return out;
}

std::vector<double> AsymptoticExpansion::y_grid(int points) const {
  const double ymax = hasKinetic ? 40.0 * layer.mu.maxCoeff() : 40.0;
  const double a = std::log(1e4);
  std::vector<double> y(points);
  for (int i = 0; i < points; ++i) y[i] = ymax * std::expm1(a * i / (points - 1)) / std::expm1(a);
  return y;
}

}  // namespace knet
