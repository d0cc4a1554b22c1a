#include "knet/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace knet {

namespace {

bool same_rate(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), std::fabs(b)); }

}  // namespace

void ExpSum::add(double rate, int power, const Vec& coef) {
  if (coef.size() != dim_) throw std::invalid_argument("ExpSum::add: dimension mismatch");
  if (!(rate > 0.0)) throw std::invalid_argument("ExpSum::add: rates must be positive");
  for (auto& t : terms_)
    if (t.power == power && same_rate(t.rate, rate)) {
      t.coef += coef;
      return;
    }
  terms_.push_back({rate, power, coef});
}

ExpSum& ExpSum::operator+=(const ExpSum& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("ExpSum: dimension mismatch");
  for (const auto& t : o.terms_) add(t.rate, t.power, t.coef);
  return *this;
}

ExpSum ExpSum::operator+(const ExpSum& o) const {
  ExpSum r = *this;
  r += o;
  return r;
}

ExpSum ExpSum::operator*(double s) const {
  ExpSum r = *this;
  for (auto& t : r.terms_) t.coef *= s;
  return r;
}

Vec ExpSum::eval(double y) const {
  Vec out = Vec::Zero(dim_);
  for (const auto& t : terms_) out += t.coef * (std::pow(y, t.power) * std::exp(-t.rate * y));
  return out;
}

ExpSum ExpSum::derivative() const {
  ExpSum r(dim_);
  for (const auto& t : terms_) {
    r.add(t.rate, t.power, -t.rate * t.coef);
    if (t.power > 0) r.add(t.rate, t.power - 1, double(t.power) * t.coef);
  }
  return r;
}

ExpSum ExpSum::tail_integral() const {
  // int_y^inf s^p e^{-k s} ds = e^{-k y} sum_{i<=p} p!/i! y^i / k^{p-i+1}
  ExpSum r(dim_);
  for (const auto& t : terms_) {
    double c = 1.0 / t.rate;  // p!/p! / k
    for (int i = t.power; i >= 0; --i) {
      r.add(t.rate, i, c * t.coef);
      c *= double(i) / t.rate;
    }
  }
  return r;
}

ExpSum ExpSum::map(const Mat& M) const {
  if (M.cols() != dim_) throw std::invalid_argument("ExpSum::map: dimension mismatch");
  ExpSum r(static_cast<int>(M.rows()));
  for (const auto& t : terms_) r.add(t.rate, t.power, M * t.coef);
  return r;
}

ExpSum ExpSum::component(int i) const {
  ExpSum r(1);
  for (const auto& t : terms_) r.add(t.rate, t.power, Vec::Constant(1, t.coef(i)));
  return r;
}

double ExpSum::max_rate() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, t.rate);
  return m;
}

double ExpSum::min_rate() const {
  double m = terms_.empty() ? 0.0 : terms_.front().rate;
  for (const auto& t : terms_) m = std::min(m, t.rate);
  return m;
}

ExpSum solve_layer_ode(const StableSubspace& ss, const ExpSum& rhs) {
  const int n = static_cast<int>(ss.S.rows());
  if (rhs.dim() != n) throw std::invalid_argument("solve_layer_ode: dimension mismatch");
  // Modal form: mu c' + c = g. For g = y^p e^{-k y}, c = sum_i a_i y^i e^{-k y} with
  // (1 - mu k) a_i + mu (i+1) a_{i+1} = delta_ip.
  ExpSum modal(n);
  const Mat St = ss.S.transpose();
  for (const auto& t : rhs.terms()) {
    const Vec g = St * t.coef;
    for (int m = 0; m < n; ++m) {
      if (g(m) == 0.0) continue;
      const double mu = ss.eig(m);
      const double d = 1.0 - mu * t.rate;
      Vec e = Vec::Zero(n);
      if (std::fabs(d) < 1e-10) {
        e(m) = g(m) / (mu * (t.power + 1));
        modal.add(t.rate, t.power + 1, e);
        continue;
      }
      double a = g(m) / d;
      for (int i = t.power; i >= 0; --i) {
        e(m) = a;
        modal.add(t.rate, i, e);
        a = -mu * i * a / d;
      }
    }
  }
  return modal.map(ss.S);
}

ExpSum homogeneous_layer(const StableSubspace& ss, const Vec& gamma) {
  if (gamma.size() != ss.Rminus.cols()) throw std::invalid_argument("homogeneous_layer: gamma size mismatch");
  ExpSum r(static_cast<int>(ss.Rminus.rows()));
  for (int j = 0; j < gamma.size(); ++j) r.add(ss.decayRates(j), 0, gamma(j) * ss.Rminus.col(j));
  return r;
}

}  // namespace knet
