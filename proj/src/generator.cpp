#include "hft/generator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hft/quadrature.hpp"

namespace hft {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string Generator1D::kind_name() const {
  switch (kind_) {
    case Kind::kOu: return "ou";
    case Kind::kLaguerre: return "laguerre";
    case Kind::kCustom: return "custom";
  }
  return "unknown";
}

double Generator1D::a(double x) const {
  switch (kind_) {
    case Kind::kOu: return 1.0;
    case Kind::kLaguerre: return x;
    case Kind::kCustom: return a_fn_(x);
  }
  return 0.0;
}

double Generator1D::b(double x) const {
  switch (kind_) {
    case Kind::kOu: return -x;
    case Kind::kLaguerre: return p_ - x;
    case Kind::kCustom: return b_fn_(x);
  }
  return 0.0;
}

double Generator1D::sqrt_a(double x) const {
  const double ax = a(x);
  if (ax < 0.0)
    throw std::domain_error("Generator1D: a(x) < 0 at x=" + std::to_string(x));
  return std::sqrt(ax);
}

double Generator1D::log_density(double x) const {
  switch (kind_) {
    case Kind::kOu:
      return -0.5 * x * x - 0.5 * std::log(2.0 * kPi);
    case Kind::kLaguerre:
      if (x <= 0.0) return -std::numeric_limits<double>::infinity();
      return (p_ - 1.0) * std::log(x) - x - std::lgamma(p_);
    case Kind::kCustom:
      return logd_fn_(x) - log_norm_;
  }
  return 0.0;
}

double Generator1D::density(double x) const { return std::exp(log_density(x)); }

Jet Generator1D::a_jet(double x) const {
  switch (kind_) {
    case Kind::kOu: return Jet::polynomial(x, {1.0});
    case Kind::kLaguerre: return Jet::polynomial(x, {x, 1.0});
    case Kind::kCustom: break;
  }
  // order-4 finite-difference Taylor expansion
  const double h = 1e-2 * std::max(1.0, std::abs(x));
  auto& f = a_fn_;
  const double f0 = f(x), f1 = f(x + h), f_1 = f(x - h), f2 = f(x + 2 * h),
               f_2 = f(x - 2 * h);
  const double d1 = (-f2 + 8 * f1 - 8 * f_1 + f_2) / (12 * h);
  const double d2 = (-f2 + 16 * f1 - 30 * f0 + 16 * f_1 - f_2) / (12 * h * h);
  const double d3 = (f2 - 2 * f1 + 2 * f_1 - f_2) / (2 * h * h * h);
  const double d4 = (f2 - 4 * f1 + 6 * f0 - 4 * f_1 + f_2) / (h * h * h * h);
  return Jet::from_derivatives(x, {f0, d1, d2, d3, d4}, 4);
}

Jet Generator1D::b_jet(double x) const {
  switch (kind_) {
    case Kind::kOu: return Jet::polynomial(x, {-x, -1.0});
    case Kind::kLaguerre: return Jet::polynomial(x, {p_ - x, -1.0});
    case Kind::kCustom: break;
  }
  const double h = 1e-2 * std::max(1.0, std::abs(x));
  auto& f = b_fn_;
  const double f0 = f(x), f1 = f(x + h), f_1 = f(x - h), f2 = f(x + 2 * h),
               f_2 = f(x - 2 * h);
  const double d1 = (-f2 + 8 * f1 - 8 * f_1 + f_2) / (12 * h);
  const double d2 = (-f2 + 16 * f1 - 30 * f0 + 16 * f_1 - f_2) / (12 * h * h);
  const double d3 = (f2 - 2 * f1 + 2 * f_1 - f_2) / (2 * h * h * h);
  const double d4 = (f2 - 4 * f1 + 6 * f0 - 4 * f_1 + f_2) / (h * h * h * h);
  return Jet::from_derivatives(x, {f0, d1, d2, d3, d4}, 4);
}

Jet Generator1D::apply(const Jet& fjet) const {
  if (fjet.cap() < 2)
    throw std::invalid_argument(
        "Generator1D::apply: jet order must be at least 2 to form a f'' + b f'");
  const Jet f1 = fjet.derivative_jet();
  const Jet f2 = f1.derivative_jet();
  return a_jet(fjet.base()) * f2 + b_jet(fjet.base()) * f1;
}

double Generator1D::carre_du_champ(const Jet& fjet) const {
  if (fjet.cap() < 1)
    throw std::invalid_argument("Generator1D::carre_du_champ: jet order < 1");
  const double d = fjet.derivative(1);
  return a(fjet.base()) * d * d;
}

double Generator1D::metric_coord(double x) const {
  switch (kind_) {
    case Kind::kOu: return x;
    case Kind::kLaguerre:
      if (x < 0.0) throw std::domain_error("metric_coord: x < 0 on half-line");
      return 2.0 * std::sqrt(x);
    case Kind::kCustom:
      return adaptive_quad([this](double s) { return 1.0 / sqrt_a(s); },
                           quad_lo_, x, 1e-12);
  }
  return x;
}

double Generator1D::from_metric_coord(double zeta) const {
  switch (kind_) {
    case Kind::kOu: return zeta;
    case Kind::kLaguerre: return 0.25 * zeta * zeta;
    case Kind::kCustom: break;
  }
  // invert by bisection on the monotone map metric_coord
  double lo = quad_lo_, hi = quad_hi_;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (metric_coord(mid) < zeta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double Generator1D::metric_distance(double x, double y) const {
  return std::abs(metric_coord(y) - metric_coord(x));
}

double Generator1D::integrate_mu(const std::function<double(double)>& f,
                                 double abs_tol) const {
  if (kind_ == Kind::kLaguerre) {
    // integrate in z = sqrt(x); removes the sqrt branch of typical integrands
    const double zlo = std::sqrt(quad_lo_), zhi = std::sqrt(quad_hi_);
    return adaptive_quad(
        [this, &f](double z) {
          const double x = z * z;
          return f(x) * density(x) * 2.0 * z;
        },
        zlo, zhi, abs_tol);
  }
  return adaptive_quad([this, &f](double x) { return f(x) * density(x); },
                       quad_lo_, quad_hi_, abs_tol);
}

double Generator1D::integrate_mu_oracle(
    const std::function<double(double)>& f) const {
  if (kind_ == Kind::kLaguerre) {
    const double zlo = std::sqrt(quad_lo_), zhi = std::sqrt(quad_hi_);
    return composite_gl(
        [this, &f](double z) {
          const double x = z * z;
          return f(x) * density(x) * 2.0 * z;
        },
        zlo, zhi, 96, 32);
  }
  return composite_gl([this, &f](double x) { return f(x) * density(x); },
                      quad_lo_, quad_hi_, 96, 32);
}

Generator1D Generator1D::ou() {
  Generator1D g;
  g.kind_ = Kind::kOu;
  g.rho1_ = 1.0;
  g.rho2_ = 1.0;
  g.domain_lo_ = -std::numeric_limits<double>::infinity();
  g.domain_hi_ = std::numeric_limits<double>::infinity();
  g.quad_lo_ = -12.0;
  g.quad_hi_ = 12.0;
  return g;
}

Generator1D Generator1D::laguerre(double p) {
  if (!(p >= 1.5))
    throw std::invalid_argument(
        "make_laguerre: p = " + std::to_string(p) +
        " rejected; the construction requires p >= 3/2, below which the "
        "Laguerre operator is not essentially self-adjoint on the half-line "
        "and the semigroup used here is not the unique Markov extension");
  Generator1D g;
  g.kind_ = Kind::kLaguerre;
  g.p_ = p;
  g.rho1_ = 0.5;
  g.rho2_ = 0.5;
  g.domain_lo_ = 0.0;
  g.domain_hi_ = std::numeric_limits<double>::infinity();
  g.quad_lo_ = 1e-10;
  g.quad_hi_ = std::max(80.0, 20.0 * p);
  return g;
}

Generator1D Generator1D::custom(std::function<double(double)> a,
                                std::function<double(double)> b,
                                std::function<double(double)> log_density_unnorm,
                                double lo, double hi, double rho1, double rho2) {
  Generator1D g;
  g.kind_ = Kind::kCustom;
  g.rho1_ = rho1;
  g.rho2_ = rho2;
  g.domain_lo_ = lo;
  g.domain_hi_ = hi;
  g.quad_lo_ = lo;
  g.quad_hi_ = hi;
  g.a_fn_ = std::move(a);
  g.b_fn_ = std::move(b);
  g.logd_fn_ = std::move(log_density_unnorm);
  const double mass = adaptive_quad(
      [&g](double x) { return std::exp(g.logd_fn_(x)); }, lo, hi, 1e-12);
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("Generator1D::custom: density not integrable");
  g.log_norm_ = std::log(mass);
  return g;
}

Generator1D make_ou() { return Generator1D::ou(); }
Generator1D make_laguerre(double p) { return Generator1D::laguerre(p); }

}  // namespace hft
