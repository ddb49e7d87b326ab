#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hft {

/**
 * Truncated Taylor expansion of a scalar function at a base point.
 *
 * coef[k] holds f^(k)(x0)/k!.  Every jet carries a `cap`: the highest
 * coefficient index that is actually known.  Polynomial jets (cap() ==
 * kPolyCap) represent a genuine polynomial, so all higher coefficients are
 * exactly zero and products may extend the stored degree.  AD jets seeded by
 * Jet::variable(x0, m) know nothing beyond index m; arithmetic propagates the
 * weaker cap, which makes order bookkeeping explicit: multiplying two jets
 * keeps the smaller cap, differentiating drops it by one.
 */
class Jet {
 public:
  static constexpr int kPolyCap = 1 << 20;

  Jet() : base_(0.0), cap_(kPolyCap) {}

  Jet(double x0, std::vector<double> coef, int cap)
      : base_(x0), coef_(std::move(coef)), cap_(cap) {
    if (cap_ < 0) throw std::invalid_argument("Jet: negative cap");
    clip();
  }

  /// Constant function (knows all coefficients).
  static Jet constant(double x0, double value) {
    return Jet(x0, {value}, kPolyCap);
  }

  /// Seed for Taylor-mode differentiation: identity truncated at `order`.
  static Jet variable(double x0, int order) {
    if (order < 0) throw std::invalid_argument("Jet::variable: negative order");
    std::vector<double> c(static_cast<size_t>(order) + 1, 0.0);
    c[0] = x0;
    if (order >= 1) c[1] = 1.0;
    return Jet(x0, std::move(c), order);
  }

  /// Exact polynomial with Taylor coefficients `coef` about x0.
  static Jet polynomial(double x0, std::vector<double> coef) {
    return Jet(x0, std::move(coef), kPolyCap);
  }

  /// From derivative values f, f', f'', ... (divides by k!).
  static Jet from_derivatives(double x0, const std::vector<double>& derivs,
                              int cap) {
    std::vector<double> c(derivs.size());
    double fact = 1.0;
    for (size_t k = 0; k < derivs.size(); ++k) {
      if (k > 1) fact *= static_cast<double>(k);
      c[k] = derivs[k] / fact;
    }
    return Jet(x0, std::move(c), cap);
  }

  double base() const { return base_; }
  int cap() const { return cap_; }
  bool is_polynomial() const { return cap_ == kPolyCap; }

  /// Highest stored coefficient index.
  int order() const { return static_cast<int>(coef_.size()) - 1; }

  double value() const { return coef_.empty() ? 0.0 : coef_[0]; }

  double coef(int k) const {
    if (k < 0) throw std::invalid_argument("Jet::coef: negative index");
    if (k > cap_) throw std::invalid_argument("Jet::coef: index beyond cap");
    return k <= order() ? coef_[static_cast<size_t>(k)] : 0.0;
  }

  /// k-th derivative value at the base point, k! * coef(k).
  double derivative(int k) const {
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= static_cast<double>(j);
    return fact * coef(k);
  }

  /// Restricts knowledge to indices <= new_cap.
  Jet truncated(int new_cap) const {
    Jet r = *this;
    r.cap_ = new_cap;
    r.clip();
    return r;
  }

  /// Reinterprets the stored coefficients as an exact polynomial.
  Jet as_polynomial() const {
    Jet r = *this;
    r.cap_ = kPolyCap;
    return r;
  }

  /// d/dx; the cap drops by one (polynomials stay fully known).
  Jet derivative_jet() const {
    if (cap_ == 0)
      throw std::invalid_argument("Jet::derivative_jet: cap exhausted");
    std::vector<double> c;
    if (coef_.size() > 1) {
      c.resize(coef_.size() - 1);
      for (size_t k = 0; k + 1 < coef_.size(); ++k)
        c[k] = static_cast<double>(k + 1) * coef_[k + 1];
    } else {
      c = {0.0};
    }
    return Jet(base_, std::move(c), dec(cap_));
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    check_base(a, b);
    std::vector<double> c(std::max(a.coef_.size(), b.coef_.size()), 0.0);
    for (size_t k = 0; k < c.size(); ++k) {
      if (k < a.coef_.size()) c[k] += a.coef_[k];
      if (k < b.coef_.size()) c[k] += b.coef_[k];
    }
    return Jet(a.base_, std::move(c), std::min(a.cap_, b.cap_));
  }

  friend Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

  Jet operator-() const {
    Jet r = *this;
    for (double& c : r.coef_) c = -c;
    return r;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    check_base(a, b);
    int cap = std::min(a.cap_, b.cap_);
    size_t n = a.coef_.size() + b.coef_.size();
    n = std::min(n, static_cast<size_t>(cap) + 2);
    std::vector<double> c(n == 0 ? 1 : n - 1, 0.0);
    for (size_t i = 0; i < a.coef_.size(); ++i) {
      if (a.coef_[i] == 0.0) continue;
      for (size_t j = 0; j < b.coef_.size() && i + j < c.size(); ++j)
        c[i + j] += a.coef_[i] * b.coef_[j];
    }
    return Jet(a.base_, std::move(c), cap);
  }

  friend Jet operator*(double s, const Jet& a) {
    Jet r = a;
    for (double& c : r.coef_) c *= s;
    return r;
  }
  friend Jet operator*(const Jet& a, double s) { return s * a; }
  friend Jet operator/(const Jet& a, double s) { return (1.0 / s) * a; }
  friend Jet operator+(const Jet& a, double s) {
    Jet r = a;
    if (r.coef_.empty()) r.coef_.push_back(0.0);
    r.coef_[0] += s;
    return r;
  }
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }

  /// Multiplicative inverse 1/u; requires u(x0) != 0.
  Jet reciprocal() const {
    require_finite_cap("Jet::reciprocal");
    double u0 = value();
    if (u0 == 0.0) throw std::domain_error("Jet::reciprocal: zero constant term");
    int m = order() == 0 && cap_ == kPolyCap ? 0 : cap_;
    std::vector<double> w(static_cast<size_t>(m) + 1, 0.0);
    w[0] = 1.0 / u0;
    for (int k = 1; k <= m; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j)
        s += (j <= order() ? coef_[static_cast<size_t>(j)] : 0.0) * w[static_cast<size_t>(k - j)];
      w[static_cast<size_t>(k)] = -s / u0;
    }
    return Jet(base_, std::move(w), cap_);
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }
  friend Jet operator/(double s, const Jet& b) { return s * b.reciprocal(); }

 private:
  static void check_base(const Jet& a, const Jet& b) {
    if (!(a.base_ == b.base_) && !a.coef_.empty() && !b.coef_.empty()) {
      // constants are base-agnostic
      if (a.order() > 0 && b.order() > 0 && a.base_ != b.base_)
        throw std::invalid_argument("Jet: mixed base points");
    }
  }

  static int dec(int cap) { return cap == kPolyCap ? kPolyCap : cap - 1; }

  void require_finite_cap(const char* who) const {
    if (cap_ == kPolyCap && order() > 0)
      throw std::logic_error(std::string(who) +
                             ": nonpolynomial result of an exact polynomial jet; truncate first");
  }

  void clip() {
    size_t keep = std::min(coef_.size(),
                           static_cast<size_t>(std::min(cap_, kPolyCap)) + 1);
    coef_.resize(std::max<size_t>(keep, 1), 0.0);
    if (coef_.empty()) coef_.push_back(0.0);
  }

  friend Jet exp(const Jet&);
  friend Jet log(const Jet&);
  friend Jet sqrt(const Jet&);
  friend Jet sin(const Jet&);
  friend Jet cos(const Jet&);
  friend Jet tanh(const Jet&);

  double base_;
  std::vector<double> coef_;
  int cap_;
};

namespace detail {
/// Series order for a transcendental applied to `u`; constants stay constants.
inline int series_order(const Jet& u, const char* who) {
  if (u.cap() != Jet::kPolyCap) return u.cap();
  if (u.order() == 0) return 0;
  throw std::logic_error(std::string(who) +
                         ": exact polynomial jet must be truncated before composition");
}
}  // namespace detail

inline Jet exp(const Jet& u) {
  int m = detail::series_order(u, "exp(Jet)");
  std::vector<double> v(static_cast<size_t>(m) + 1, 0.0);
  v[0] = std::exp(u.value());
  for (int k = 1; k <= m; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j)
      s += static_cast<double>(j) * u.coef(j) * v[static_cast<size_t>(k - j)];
    v[static_cast<size_t>(k)] = s / static_cast<double>(k);
  }
  return Jet(u.base(), std::move(v), u.cap() == Jet::kPolyCap ? Jet::kPolyCap : m);
}

inline Jet log(const Jet& u) {
  int m = detail::series_order(u, "log(Jet)");
  if (u.value() <= 0.0) throw std::domain_error("log(Jet): nonpositive constant term");
  std::vector<double> v(static_cast<size_t>(m) + 1, 0.0);
  v[0] = std::log(u.value());
  for (int k = 1; k <= m; ++k) {
    double s = static_cast<double>(k) * u.coef(k);
    for (int j = 1; j < k; ++j)
      s -= static_cast<double>(j) * v[static_cast<size_t>(j)] * u.coef(k - j);
    v[static_cast<size_t>(k)] = s / (static_cast<double>(k) * u.value());
  }
  return Jet(u.base(), std::move(v), u.cap() == Jet::kPolyCap ? Jet::kPolyCap : m);
}

inline Jet sqrt(const Jet& u) {
  int m = detail::series_order(u, "sqrt(Jet)");
  if (u.value() <= 0.0) throw std::domain_error("sqrt(Jet): nonpositive constant term");
  std::vector<double> v(static_cast<size_t>(m) + 1, 0.0);
  v[0] = std::sqrt(u.value());
  for (int k = 1; k <= m; ++k) {
    double s = u.coef(k);
    for (int j = 1; j < k; ++j) s -= v[static_cast<size_t>(j)] * v[static_cast<size_t>(k - j)];
    v[static_cast<size_t>(k)] = s / (2.0 * v[0]);
  }
  return Jet(u.base(), std::move(v), u.cap() == Jet::kPolyCap ? Jet::kPolyCap : m);
}

inline Jet sin(const Jet& u) {
  int m = detail::series_order(u, "sin(Jet)");
  std::vector<double> s(static_cast<size_t>(m) + 1, 0.0), c(static_cast<size_t>(m) + 1, 0.0);
  s[0] = std::sin(u.value());
  c[0] = std::cos(u.value());
  for (int k = 1; k <= m; ++k) {
    double as = 0.0, ac = 0.0;
    for (int j = 1; j <= k; ++j) {
      double ju = static_cast<double>(j) * u.coef(j);
      as += ju * c[static_cast<size_t>(k - j)];
      ac -= ju * s[static_cast<size_t>(k - j)];
    }
    s[static_cast<size_t>(k)] = as / static_cast<double>(k);
    c[static_cast<size_t>(k)] = ac / static_cast<double>(k);
  }
  return Jet(u.base(), std::move(s), u.cap() == Jet::kPolyCap ? Jet::kPolyCap : m);
}

inline Jet cos(const Jet& u) {
  int m = detail::series_order(u, "cos(Jet)");
  std::vector<double> s(static_cast<size_t>(m) + 1, 0.0), c(static_cast<size_t>(m) + 1, 0.0);
  s[0] = std::sin(u.value());
  c[0] = std::cos(u.value());
  for (int k = 1; k <= m; ++k) {
    double as = 0.0, ac = 0.0;
    for (int j = 1; j <= k; ++j) {
      double ju = static_cast<double>(j) * u.coef(j);
      as += ju * c[static_cast<size_t>(k - j)];
      ac -= ju * s[static_cast<size_t>(k - j)];
    }
    s[static_cast<size_t>(k)] = as / static_cast<double>(k);
    c[static_cast<size_t>(k)] = ac / static_cast<double>(k);
  }
  return Jet(u.base(), std::move(c), u.cap() == Jet::kPolyCap ? Jet::kPolyCap : m);
}

inline Jet tanh(const Jet& u) {
  int m = detail::series_order(u, "tanh(Jet)");
  std::vector<double> v(static_cast<size_t>(m) + 1, 0.0), w(static_cast<size_t>(m) + 1, 0.0);
  v[0] = std::tanh(u.value());
  w[0] = 1.0 - v[0] * v[0];  // w = 1 - v^2
  for (int k = 1; k <= m; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j)
      s += static_cast<double>(j) * u.coef(j) * w[static_cast<size_t>(k - j)];
    v[static_cast<size_t>(k)] = s / static_cast<double>(k);
    double q = 0.0;
    for (int i = 0; i <= k; ++i) q += v[static_cast<size_t>(i)] * v[static_cast<size_t>(k - i)];
    w[static_cast<size_t>(k)] = -q;
  }
  return Jet(u.base(), std::move(v), u.cap() == Jet::kPolyCap ? Jet::kPolyCap : m);
}

inline Jet pow(const Jet& u, double alpha) { return exp(alpha * log(u)); }

}  // namespace hft
