#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hft/generator.hpp"
#include "hft/potential.hpp"

namespace hft {

/**
 * Distribution function of a one-dimensional measure with a continuous
 * density on [lo, hi].  The CDF caches integrals at uniform breakpoints so a
 * pointwise evaluation only quadratures the final partial segment; the
 * quantile inverts it with bracketed Newton iterations.
 *
 * Two independent discretizations are available so that measure-level
 * oracles can be cross-checked against themselves: an adaptive rule and a
 * fixed composite Gauss rule of a different order.
 */
enum class CdfRule { kAdaptive, kComposite };

struct CdfOptions {
  int breakpoints = 513;
  CdfRule rule = CdfRule::kAdaptive;
  double quad_tol = 1e-12;  // per-segment tolerance for the adaptive rule
};

class MeasureCDF {
 public:
  MeasureCDF(std::function<double(double)> density, double lo, double hi,
             CdfOptions opt = {});

  /// CDF of the invariant measure mu of a generator on its quadrature window.
  static MeasureCDF from_generator(const Generator1D& gen,
                                   CdfOptions opt = {});

  /// CDF of d nu = e^{-V} d mu; pot should be normalized beforehand.
  static MeasureCDF perturbed(const Generator1D& gen, const Potential& pot,
                              CdfOptions opt = {});

  double density(double x) const { return density_(x); }
  double cdf(double x) const;

  /// Inverse CDF; u outside [0, total_mass] beyond 1e-6 is a bracketing
  /// failure and throws.
  double quantile(double u) const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double total_mass() const { return table_.back(); }

 private:
  double segment_integral(double a, double b) const;

  std::function<double(double)> density_;
  double lo_, hi_;
  CdfOptions opt_;
  std::vector<double> points_;
  std::vector<double> table_;  // cdf at points_
};

/// The monotone rearrangement F_nu^{-1}(F_mu(x)), the unique increasing map
/// with pushforward nu; in one dimension this is the optimal (Monge) map.
double monge_quantile_map(const MeasureCDF& mu, const MeasureCDF& nu, double x);

/**
 * Shape-preserving cubic through strictly increasing (x, y) samples
 * (Fritsch-Carlson limited slopes).  Monotone data yields a monotone
 * interpolant, which makes it safe for inverting grid maps.
 */
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> xs, std::vector<double> ys);
  double operator()(double x) const;

 private:
  std::vector<double> xs_, ys_, slopes_;
};

/**
 * Kolmogorov-Smirnov distance between the pushforward of mu under the grid
 * map (xs -> ts) and nu: sup_y |F_mu(T^{-1}(y)) - F_nu(y)| over a refinement
 * of the map's range, with T^{-1} realized by monotone cubic inversion.
 */
double pushforward_ks_distance(const std::vector<double>& xs,
                               const std::vector<double>& ts,
                               const MeasureCDF& mu, const MeasureCDF& nu,
                               int refine = 8);

}  // namespace hft
