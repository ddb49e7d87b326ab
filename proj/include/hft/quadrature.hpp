#pragma once

#include <functional>
#include <vector>

namespace hft {

/// Nodes and weights of a quadrature rule, already in measure coordinates.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  double apply(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// Gauss-Legendre rule for weight 1 on [-1, 1].
QuadRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [lo, hi].
QuadRule gauss_legendre(int n, double lo, double hi);

/// Gauss-Hermite rule for the standard normal probability measure on R.
QuadRule gauss_hermite_prob(int n);

/// Gauss rule for the gamma(p) probability measure x^{p-1} e^{-x} / Gamma(p).
QuadRule gauss_laguerre_gamma(int n, double p);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated local error estimates
  long evaluations = 0;
};

/**
 * Adaptive bisection quadrature on [lo, hi].
 *
 * Each interval is estimated with nested Gauss-Legendre 15/31 rules; the
 * difference drives refinement.  Tolerances are absolute; callers supply a
 * scale when they want a relative criterion.
 */
QuadResult adaptive_quad_full(const std::function<double(double)>& f, double lo,
                              double hi, double abs_tol, int max_depth = 48);

double adaptive_quad(const std::function<double(double)>& f, double lo,
                     double hi, double abs_tol);

/// Fixed composite Gauss-Legendre rule: `panels` equal panels of `n` points.
double composite_gl(const std::function<double(double)>& f, double lo,
                    double hi, int panels, int n = 32);

}  // namespace hft
