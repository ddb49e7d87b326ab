#include "hft/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hft/quadrature.hpp"

namespace hft {

MeasureCDF::MeasureCDF(std::function<double(double)> density, double lo,
                       double hi, CdfOptions opt)
    : density_(std::move(density)), lo_(lo), hi_(hi), opt_(opt) {
  if (!(hi_ > lo_)) throw std::invalid_argument("MeasureCDF: empty support");
  if (opt_.breakpoints < 2)
    throw std::invalid_argument("MeasureCDF: need at least 2 breakpoints");
  const int m = opt_.breakpoints;
  points_.resize(static_cast<size_t>(m));
  table_.resize(static_cast<size_t>(m));
  const double h = (hi_ - lo_) / (m - 1);
  for (int i = 0; i < m; ++i) points_[static_cast<size_t>(i)] = lo_ + i * h;
  points_.back() = hi_;
  table_[0] = 0.0;
  for (int i = 1; i < m; ++i)
    table_[static_cast<size_t>(i)] =
        table_[static_cast<size_t>(i - 1)] +
        segment_integral(points_[static_cast<size_t>(i - 1)],
                         points_[static_cast<size_t>(i)]);
}

double MeasureCDF::segment_integral(double a, double b) const {
  if (!(b > a)) return 0.0;
  if (opt_.rule == CdfRule::kAdaptive)
    return adaptive_quad(density_, a, b, opt_.quad_tol);
  // substituting x = a + z^2 keeps the fixed rule accurate when the density
  // has a half-power corner at a segment edge (gamma density near 0)
  const auto& f = density_;
  return composite_gl([&f, a](double z) { return 2.0 * z * f(a + z * z); },
                      0.0, std::sqrt(b - a), 3, 20);
}

double MeasureCDF::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return table_.back();
  const auto it = std::upper_bound(points_.begin(), points_.end(), x);
  const size_t i = static_cast<size_t>(it - points_.begin()) - 1;
  return table_[i] + segment_integral(points_[i], x);
}

double MeasureCDF::quantile(double u) const {
  const double mass = table_.back();
  if (u < -1e-6 || u > mass + 1e-6)
    throw std::runtime_error("MeasureCDF::quantile: u outside total mass");
  if (u <= 0.0) return lo_;
  if (u >= mass) return hi_;
  const auto it = std::upper_bound(table_.begin(), table_.end(), u);
  size_t i = static_cast<size_t>(it - table_.begin());
  if (i == 0) i = 1;
  if (i >= table_.size()) i = table_.size() - 1;
  double blo = points_[i - 1], bhi = points_[i];
  double x = 0.5 * (blo + bhi);
  for (int iter = 0; iter < 80; ++iter) {
    const double r = cdf(x) - u;
    if (r > 0.0)
      bhi = x;
    else
      blo = x;
    const double d = density_(x);
    double step = d > 0.0 ? r / d : 0.0;
    double next = x - step;
    if (!(next > blo) || !(next < bhi)) next = 0.5 * (blo + bhi);
    const double dx = std::abs(next - x);
    x = next;
    if (std::abs(r) < 1e-14 && dx < 1e-12 * (1.0 + std::abs(x))) break;
    if (bhi - blo < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

MeasureCDF MeasureCDF::from_generator(const Generator1D& gen, CdfOptions opt) {
  return MeasureCDF([gen](double x) { return gen.density(x); }, gen.quad_lo(),
                    gen.quad_hi(), opt);
}

MeasureCDF MeasureCDF::perturbed(const Generator1D& gen, const Potential& pot,
                                 CdfOptions opt) {
  return MeasureCDF(
      [gen, pot](double x) { return std::exp(-pot.V(x)) * gen.density(x); },
      gen.quad_lo(), gen.quad_hi(), opt);
}

double monge_quantile_map(const MeasureCDF& mu, const MeasureCDF& nu,
                          double x) {
  return nu.quantile(mu.cdf(x));
}

MonotoneCubic::MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const size_t n = xs_.size();
  if (n < 2 || ys_.size() != n)
    throw std::invalid_argument("MonotoneCubic: need matching samples, n >= 2");
  for (size_t i = 0; i + 1 < n; ++i)
    if (!(xs_[i + 1] > xs_[i]))
      throw std::invalid_argument("MonotoneCubic: abscissae not increasing");
  std::vector<double> sec(n - 1);
  for (size_t i = 0; i + 1 < n; ++i)
    sec[i] = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
  slopes_.resize(n);
  slopes_.front() = sec.front();
  slopes_.back() = sec.back();
  for (size_t i = 1; i + 1 < n; ++i) {
    if (sec[i - 1] * sec[i] <= 0.0) {
      slopes_[i] = 0.0;
      continue;
    }
    double d = 0.5 * (sec[i - 1] + sec[i]);
    const double cap = 3.0 * std::min(std::abs(sec[i - 1]), std::abs(sec[i]));
    if (std::abs(d) > cap) d = std::copysign(cap, d);
    slopes_[i] = d;
  }
}

double MonotoneCubic::operator()(double x) const {
  const size_t n = xs_.size();
  size_t i;
  if (x <= xs_.front())
    i = 0;
  else if (x >= xs_[n - 2])
    i = n - 2;
  else
    i = static_cast<size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) -
                            xs_.begin()) -
        1;
  const double h = xs_[i + 1] - xs_[i];
  const double s = (x - xs_[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * ys_[i] + h10 * h * slopes_[i] + h01 * ys_[i + 1] +
         h11 * h * slopes_[i + 1];
}

double pushforward_ks_distance(const std::vector<double>& xs,
                               const std::vector<double>& ts,
                               const MeasureCDF& mu, const MeasureCDF& nu,
                               int refine) {
  if (xs.size() != ts.size() || xs.size() < 2)
    throw std::invalid_argument("pushforward_ks_distance: bad grid");
  if (refine < 1) refine = 1;
  const MonotoneCubic inverse(ts, xs);
  double worst = 0.0;
  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    for (int j = 0; j <= refine; ++j) {
      if (j == refine && i + 2 < ts.size()) continue;  // shared endpoint
      const double y =
          ts[i] + (ts[i + 1] - ts[i]) * static_cast<double>(j) / refine;
      const double x = inverse(y);
      worst = std::max(worst, std::abs(mu.cdf(x) - nu.cdf(y)));
    }
  }
  return worst;
}

}  // namespace hft
