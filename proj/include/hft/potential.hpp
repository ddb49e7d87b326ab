#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hft/generator.hpp"
#include "hft/jet.hpp"

namespace hft {

/**
 * Perturbation potential defining the target measure d nu = e^{-V} d mu.
 *
 * The stored shift folds the normalization constant into V, so after
 * normalize_potential the density e^{-V} integrates to 1 against mu.
 * certified_k caches the metric Lipschitz constant sup sqrt(a) |dV| once
 * certify_lipschitz has run; it is NaN before that.
 */
class Potential {
 public:
  enum class Kind { kZero, kLinear, kSqrt, kTable, kCustom };

  Kind kind() const { return kind_; }
  std::string kind_name() const;
  double parameter() const { return param_; }
  double shift() const { return shift_; }
  double certified_k() const { return certified_k_; }
  bool is_certified() const { return !std::isnan(certified_k_); }

  double V(double x) const;
  double dV(double x) const;

  /// Composition on a jet seed; exact for closed-form kinds, local cubic for
  /// tabulated data.
  Jet V_jet(const Jet& x) const;

  Potential with_shift(double extra_shift) const;
  Potential with_certified_k(double k) const;

  /// V = 0 (nu = mu).
  static Potential zero();
  /// V = K x.
  static Potential linear(double K);
  /// V = 2 c sqrt(x); metric-Lipschitz constant c on the half-line.
  static Potential sqrt_slope(double c);
  /// Monotone cubic (Fritsch-Carlson) interpolation of sample points.
  static Potential tabulated(std::vector<double> xs, std::vector<double> vs);
  static Potential custom(std::function<double(double)> v,
                          std::function<double(double)> dv,
                          std::function<Jet(const Jet&)> vjet);

 private:
  Potential() = default;

  Kind kind_ = Kind::kZero;
  double param_ = 0.0;
  double shift_ = 0.0;
  double certified_k_ = std::numeric_limits<double>::quiet_NaN();
  // tabulated data
  std::vector<double> xs_, vs_, slopes_;
  std::function<double(double)> v_fn_, dv_fn_;
  std::function<Jet(const Jet&)> vjet_fn_;

  size_t table_interval(double x) const;
  void table_piece(size_t i, double coef[4]) const;
};

/**
 * Certified metric Lipschitz constant of V: sup over an n-point grid of
 * sqrt(a(x)) |dV(x)|.  The grid spans the truncated quadrature window,
 * uniformly in the metric coordinate.
 */
double certify_lipschitz(const Generator1D& gen, const Potential& pot,
                         int n = 4096);

/// Shifts V so that int e^{-V} d mu = 1 within tol.
Potential normalize_potential(const Generator1D& gen, const Potential& pot,
                              double tol = 1e-9);

}  // namespace hft
