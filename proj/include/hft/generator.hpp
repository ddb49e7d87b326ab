#pragma once

#include <functional>
#include <string>

#include "hft/jet.hpp"

namespace hft {

/**
 * One-dimensional diffusion generator L f = a f'' + b f' with an invariant
 * probability measure mu.  The intrinsic metric is ds = a^{-1/2} dx, under
 * which the carre du champ is Gamma(f) = a (f')^2.
 *
 * Built-in model spaces:
 *   OU        a = 1, b = -x         mu = N(0,1)       rho1 = rho2 = 1
 *   LAGUERRE  a = x, b = p - x      mu = gamma(p)     rho1 = rho2 = 1/2
 *
 * Custom generators supply a, b and an unnormalized log-density; their
 * coefficient jets come from finite differences and the metric from numeric
 * integration of a^{-1/2}.
 */
class Generator1D {
 public:
  enum class Kind { kOu, kLaguerre, kCustom };

  Kind kind() const { return kind_; }
  std::string kind_name() const;

  /// Laguerre parameter; 0 for other kinds.
  double p() const { return p_; }

  /// Curvature constants: Gamma2 >= rho1 Gamma1 and Gamma3 >= rho2 Gamma2.
  double rho1() const { return rho1_; }
  double rho2() const { return rho2_; }

  /// Support of the invariant measure.
  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }

  /// Truncated quadrature window covering all but <= 1e-10 of the mass.
  double quad_lo() const { return quad_lo_; }
  double quad_hi() const { return quad_hi_; }

  double a(double x) const;
  double b(double x) const;
  double sqrt_a(double x) const;

  /// log of the normalized invariant density w.r.t. Lebesgue.
  double log_density(double x) const;
  double density(double x) const;

  /// Taylor jets of the coefficient functions about x.  Closed-form
  /// polynomials for the built-in spaces; finite differences (order 4) for
  /// custom generators.
  Jet a_jet(double x) const;
  Jet b_jet(double x) const;

  /// L f as a jet; an order-m input yields an order-(m-2) result.
  Jet apply(const Jet& fjet) const;

  /// Gamma(f)(x) = a(x) f'(x)^2 for a jet of order >= 1.
  double carre_du_champ(const Jet& fjet) const;

  /// Intrinsic distance |int_x^y a(s)^{-1/2} ds|.
  double metric_distance(double x, double y) const;

  /// Metric coordinate zeta with d zeta = a^{-1/2} dx (OU: x, Laguerre: 2 sqrt x).
  double metric_coord(double x) const;
  double from_metric_coord(double zeta) const;

  /// Integral of f against mu over the truncated window (adaptive rule).
  double integrate_mu(const std::function<double(double)>& f,
                      double abs_tol = 1e-11) const;

  /// Same integral with an independent fixed composite rule (oracle path).
  double integrate_mu_oracle(const std::function<double(double)>& f) const;

  static Generator1D ou();
  static Generator1D laguerre(double p);
  static Generator1D custom(std::function<double(double)> a,
                            std::function<double(double)> b,
                            std::function<double(double)> log_density_unnorm,
                            double lo, double hi, double rho1, double rho2);

 private:
  Generator1D() = default;

  Kind kind_ = Kind::kOu;
  double p_ = 0.0;
  double rho1_ = 1.0, rho2_ = 1.0;
  double domain_lo_ = 0.0, domain_hi_ = 0.0;
  double quad_lo_ = 0.0, quad_hi_ = 0.0;
  double log_norm_ = 0.0;  // additive normalization for custom densities
  std::function<double(double)> a_fn_, b_fn_, logd_fn_;
};

/// Generator1D::ou / laguerre / custom aliases matching the operation names.
Generator1D make_ou();
Generator1D make_laguerre(double p);

}  // namespace hft
