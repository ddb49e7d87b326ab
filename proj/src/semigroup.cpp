#include "hft/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "hft/quadrature.hpp"
#include "semigroup_backend.hpp"

namespace hft {

namespace {

void validate_point(double t, double x) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup: negative time");
  if (!std::isfinite(x))
    throw std::invalid_argument("semigroup: non-finite evaluation point");
}

std::shared_ptr<const detail::SemigroupBackend> build_backend(
    const Generator1D& gen, const SemigroupConfig& cfg) {
  switch (cfg.backend) {
    case Backend::kMehler:
      return detail::make_mehler_backend(gen, cfg.quadrature_order);
    case Backend::kSpectral:
      return detail::make_spectral_backend(gen, cfg.truncation);
    case Backend::kFiniteDifference:
      return detail::make_fd_backend(gen, cfg.fd_points, cfg.fd_dt,
                                     cfg.fd_richardson);
  }
  throw std::logic_error("semigroup: unknown backend");
}

}  // namespace

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::kMehler: return "mehler";
    case Backend::kSpectral: return "spectral";
    case Backend::kFiniteDifference: return "fd";
  }
  return "unknown";
}

SemigroupEvaluator::SemigroupEvaluator(const Generator1D& gen,
                                       const SemigroupConfig& cfg)
    : gen_(gen), cfg_(cfg), impl_(build_backend(gen, cfg)) {}

SemigroupEvaluator SemigroupEvaluator::mehler(int quadrature_order) {
  SemigroupConfig cfg;
  cfg.backend = Backend::kMehler;
  cfg.quadrature_order = quadrature_order;
  return SemigroupEvaluator(Generator1D::ou(), cfg);
}

SemigroupEvaluator SemigroupEvaluator::spectral(double p, int truncation) {
  SemigroupConfig cfg;
  cfg.backend = Backend::kSpectral;
  cfg.truncation = truncation;
  return SemigroupEvaluator(Generator1D::laguerre(p), cfg);
}

SemigroupEvaluator SemigroupEvaluator::finite_difference(
    const Generator1D& gen, int points, double dt, bool richardson) {
  SemigroupConfig cfg;
  cfg.backend = Backend::kFiniteDifference;
  cfg.fd_points = points;
  cfg.fd_dt = dt;
  cfg.fd_richardson = richardson;
  return SemigroupEvaluator(gen, cfg);
}

double SemigroupEvaluator::pt(const SmoothFn& f, double t, double x) const {
  validate_point(t, x);
  return impl_->eval(f, t, x, 0);
}

double SemigroupEvaluator::grad_pt(const SmoothFn& f, double t,
                                   double x) const {
  validate_point(t, x);
  return impl_->eval(f, t, x, 1);
}

double SemigroupEvaluator::deriv_pt(const SmoothFn& f, double t, double x,
                                    int k) const {
  validate_point(t, x);
  return impl_->eval(f, t, x, k);
}

double SemigroupEvaluator::pt_of_values(const std::function<double(double)>& f,
                                        double t, double x) const {
  validate_point(t, x);
  return impl_->eval_values(f, t, x);
}

int SemigroupEvaluator::max_derivative_order() const {
  return impl_->max_derivative_order();
}

double ou_pt(const SmoothFn& f, double t, double x, int quadrature_order) {
  const auto backend =
      detail::make_mehler_backend(Generator1D::ou(), quadrature_order);
  return backend->eval(f, t, x, 0);
}

double laguerre_pt(const SmoothFn& f, double t, double x, double p,
                   int truncation) {
  // the spectral setup (Gauss rule + basis table) is heavy, so the free
  // operation keeps one instance per (p, N) alive
  static std::mutex mu;
  static std::map<std::pair<double, int>,
                  std::shared_ptr<const detail::SemigroupBackend>>
      registry;
  std::shared_ptr<const detail::SemigroupBackend> backend;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = registry[{p, truncation}];
    if (!slot)
      slot = detail::make_spectral_backend(Generator1D::laguerre(p),
                                           truncation);
    backend = slot;
  }
  return backend->eval(f, t, x, 0);
}

const std::vector<double>& default_time_schedule() {
  static const std::vector<double> schedule{0.05, 0.1, 0.25, 0.5,
                                            1.0,  2.0, 4.0};
  return schedule;
}

std::vector<double> central_mass_lattice(const Generator1D& gen, int n) {
  if (n < 2) throw std::invalid_argument("central_mass_lattice: n < 2");
  // invert the CDF at 0.5% and 99.5% by bisection on the quadrature window
  auto cdf = [&gen](double x) {
    if (x <= gen.quad_lo()) return 0.0;
    return adaptive_quad([&gen](double y) { return gen.density(y); },
                         gen.quad_lo(), x, 1e-10);
  };
  auto quantile = [&](double q) {
    double lo = gen.quad_lo(), hi = gen.quad_hi();
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double a = quantile(0.005), b = quantile(0.995);
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = a + (b - a) * i / (n - 1);
  return xs;
}

ErgodicReport ergodic_limit_check(const SemigroupEvaluator& ev,
                                  const SmoothFn& f,
                                  const std::vector<double>& schedule) {
  const Generator1D& gen = ev.generator();
  ErgodicReport rep;
  rep.mean = gen.integrate_mu([&f](double x) { return f.value(x); });
  const std::vector<double> probes = central_mass_lattice(gen, 9);
  rep.times = schedule;
  for (const double t : schedule) {
    double dev = 0.0;
    for (const double x : probes)
      dev = std::max(dev, std::abs(ev.pt(f, t, x) - rep.mean));
    rep.deviations.push_back(dev);
  }
  // least-squares slope of log(deviation) vs t over usable points
  double st = 0, sd = 0, stt = 0, std_ = 0;
  int m = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (rep.deviations[i] < 1e-12) continue;
    const double ld = std::log(rep.deviations[i]);
    st += schedule[i];
    sd += ld;
    stt += schedule[i] * schedule[i];
    std_ += schedule[i] * ld;
    ++m;
  }
  if (m < 2) {
    rep.trivial = true;
    rep.pass = true;
    rep.fitted_rate = 0.0;
    return rep;
  }
  rep.fitted_rate = -(m * std_ - st * sd) / (m * stt - st * st);
  rep.pass = rep.fitted_rate >= gen.rho1() - 0.05;
  return rep;
}

double symmetry_check(const SemigroupEvaluator& ev, const SmoothFn& f,
                      const SmoothFn& h, double t) {
  const Generator1D& gen = ev.generator();
  const double lhs = gen.integrate_mu(
      [&](double x) { return f.value(x) * ev.pt(h, t, x); }, 1e-10);
  const double rhs = gen.integrate_mu(
      [&](double x) { return h.value(x) * ev.pt(f, t, x); }, 1e-10);
  return std::abs(lhs - rhs);
}

double semigroup_property_check(const SemigroupEvaluator& ev, const SmoothFn& f,
                                double t, double s,
                                const std::vector<double>& xs) {
  double worst = 0.0;
  auto inner = [&](double y) { return ev.pt(f, s, y); };
  for (const double x : xs) {
    const double direct = ev.pt(f, t + s, x);
    const double composed = ev.pt_of_values(inner, t, x);
    worst = std::max(worst, std::abs(direct - composed));
  }
  return worst;
}

double conservativeness_check(const SemigroupEvaluator& ev,
                              const std::vector<double>& schedule,
                              const std::vector<double>& xs) {
  const SmoothFn one = constant_one();
  double worst = 0.0;
  for (const double t : schedule)
    for (const double x : xs)
      worst = std::max(worst, std::abs(ev.pt(one, t, x) - 1.0));
  return worst;
}

double mass_invariance_check(const SemigroupEvaluator& ev, const SmoothFn& f,
                             double t) {
  const Generator1D& gen = ev.generator();
  const double before =
      gen.integrate_mu([&f](double x) { return f.value(x); }, 1e-10);
  const double after =
      gen.integrate_mu([&](double x) { return ev.pt(f, t, x); }, 1e-10);
  return std::abs(after - before);
}

}  // namespace hft
