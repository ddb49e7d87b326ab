#include "hft/potential.hpp"

#include <algorithm>
#include <stdexcept>

namespace hft {

std::string Potential::kind_name() const {
  switch (kind_) {
    case Kind::kZero: return "zero";
    case Kind::kLinear: return "linear";
    case Kind::kSqrt: return "sqrt";
    case Kind::kTable: return "table";
    case Kind::kCustom: return "custom";
  }
  return "unknown";
}

double Potential::V(double x) const {
  switch (kind_) {
    case Kind::kZero: return shift_;
    case Kind::kLinear: return param_ * x + shift_;
    case Kind::kSqrt: return 2.0 * param_ * std::sqrt(x) + shift_;
    case Kind::kCustom: return v_fn_(x) + shift_;
    case Kind::kTable: break;
  }
  double c[4];
  const size_t i = table_interval(x);
  table_piece(i, c);
  const double t = x - xs_[i];
  return ((c[3] * t + c[2]) * t + c[1]) * t + c[0] + shift_;
}

double Potential::dV(double x) const {
  switch (kind_) {
    case Kind::kZero: return 0.0;
    case Kind::kLinear: return param_;
    case Kind::kSqrt:
      if (x <= 0.0)
        throw std::domain_error("Potential::dV: sqrt potential needs x > 0");
      return param_ / std::sqrt(x);
    case Kind::kCustom: return dv_fn_(x);
    case Kind::kTable: break;
  }
  double c[4];
  const size_t i = table_interval(x);
  table_piece(i, c);
  const double t = x - xs_[i];
  return (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1];
}

Jet Potential::V_jet(const Jet& x) const {
  switch (kind_) {
    case Kind::kZero: return Jet::constant(x.base(), shift_);
    case Kind::kLinear: return param_ * x + shift_;
    case Kind::kSqrt: return 2.0 * param_ * sqrt(x) + shift_;
    case Kind::kCustom: return vjet_fn_(x) + shift_;
    case Kind::kTable: break;
  }
  double c[4];
  const size_t i = table_interval(x.value());
  table_piece(i, c);
  const Jet t = x - xs_[i];
  return ((c[3] * t + c[2]) * t + c[1]) * t + (c[0] + shift_);
}

Potential Potential::with_shift(double extra_shift) const {
  Potential p = *this;
  p.shift_ += extra_shift;
  return p;
}

Potential Potential::with_certified_k(double k) const {
  Potential p = *this;
  p.certified_k_ = k;
  return p;
}

Potential Potential::zero() {
  Potential p;
  p.kind_ = Kind::kZero;
  p.certified_k_ = 0.0;
  return p;
}

Potential Potential::linear(double K) {
  Potential p;
  p.kind_ = Kind::kLinear;
  p.param_ = K;
  return p;
}

Potential Potential::sqrt_slope(double c) {
  Potential p;
  p.kind_ = Kind::kSqrt;
  p.param_ = c;
  return p;
}

Potential Potential::tabulated(std::vector<double> xs, std::vector<double> vs) {
  if (xs.size() != vs.size() || xs.size() < 2)
    throw std::invalid_argument("Potential::tabulated: need >= 2 matching samples");
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i] < xs[i + 1]))
      throw std::invalid_argument("Potential::tabulated: abscissae not increasing");

  // Fritsch-Carlson monotone cubic slopes
  const size_t n = xs.size();
  std::vector<double> h(n - 1), delta(n - 1), m(n);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs[i + 1] - xs[i];
    delta[i] = (vs[i + 1] - vs[i]) / h[i];
  }
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  for (size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      m[i] = 0.0;
      m[i + 1] = 0.0;
      continue;
    }
    const double alpha = m[i] / delta[i], beta = m[i + 1] / delta[i];
    const double r = alpha * alpha + beta * beta;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      m[i] = tau * alpha * delta[i];
      m[i + 1] = tau * beta * delta[i];
    }
  }

  Potential p;
  p.kind_ = Kind::kTable;
  p.xs_ = std::move(xs);
  p.vs_ = std::move(vs);
  p.slopes_ = std::move(m);
  return p;
}

Potential Potential::custom(std::function<double(double)> v,
                            std::function<double(double)> dv,
                            std::function<Jet(const Jet&)> vjet) {
  Potential p;
  p.kind_ = Kind::kCustom;
  p.v_fn_ = std::move(v);
  p.dv_fn_ = std::move(dv);
  p.vjet_fn_ = std::move(vjet);
  return p;
}

size_t Potential::table_interval(double x) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.begin()) return 0;
  size_t i = static_cast<size_t>(it - xs_.begin()) - 1;
  return std::min(i, xs_.size() - 2);
}

void Potential::table_piece(size_t i, double coef[4]) const {
  // Hermite cubic on [x_i, x_{i+1}] in local coordinate t = x - x_i
  const double h = xs_[i + 1] - xs_[i];
  const double v0 = vs_[i], v1 = vs_[i + 1], m0 = slopes_[i], m1 = slopes_[i + 1];
  coef[0] = v0;
  coef[1] = m0;
  coef[2] = (3.0 * (v1 - v0) / h - 2.0 * m0 - m1) / h;
  coef[3] = (2.0 * (v0 - v1) / h + m0 + m1) / (h * h);
}

double certify_lipschitz(const Generator1D& gen, const Potential& pot, int n) {
  if (n < 2) throw std::invalid_argument("certify_lipschitz: n < 2");
  const double zlo = gen.metric_coord(gen.quad_lo());
  const double zhi = gen.metric_coord(gen.quad_hi());
  double sup = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = zlo + (zhi - zlo) * i / (n - 1);
    const double x = gen.from_metric_coord(z);
    const double g = gen.sqrt_a(x) * std::abs(pot.dV(x));
    if (std::isfinite(g)) sup = std::max(sup, g);
  }
  return sup;
}

Potential normalize_potential(const Generator1D& gen, const Potential& pot,
                              double tol) {
  const double mass =
      gen.integrate_mu([&pot](double x) { return std::exp(-pot.V(x)); },
                       0.1 * tol);
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::runtime_error("normalize_potential: e^{-V} not integrable against mu");
  Potential out = pot.with_shift(std::log(mass));
  const double check =
      gen.integrate_mu([&out](double x) { return std::exp(-out.V(x)); },
                       0.1 * tol);
  if (std::abs(check - 1.0) > 1e-6)
    throw std::runtime_error("normalize_potential: normalization residual " +
                             std::to_string(check - 1.0));
  return out;
}

}  // namespace hft
