#include "hft/verification.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hft/gamma.hpp"
#include "hft/jet.hpp"

namespace hft {

namespace {

std::string generator_name(const Generator1D& gen) {
  std::ostringstream os;
  switch (gen.kind()) {
    case Generator1D::Kind::kOu:
      os << "ou";
      break;
    case Generator1D::Kind::kLaguerre:
      os << "laguerre(p=" << gen.p() << ")";
      break;
    case Generator1D::Kind::kCustom:
      os << "custom";
      break;
  }
  return os.str();
}

std::string evaluator_fingerprint(const SemigroupEvaluator& ev) {
  const SemigroupConfig& cfg = ev.config();
  std::ostringstream os;
  os << generator_name(ev.generator()) << ";backend="
     << backend_name(cfg.backend);
  switch (cfg.backend) {
    case Backend::kMehler:
      os << ";Q=" << cfg.quadrature_order;
      break;
    case Backend::kSpectral:
      os << ";N=" << cfg.truncation;
      break;
    case Backend::kFiniteDifference:
      os << ";points=" << cfg.fd_points << ";dt=" << cfg.fd_dt;
      break;
  }
  return os.str();
}

std::string schedule_fingerprint(const std::vector<double>& ts,
                                 const std::vector<double>& xs) {
  std::ostringstream os;
  os << std::setprecision(12) << ";times=" << ts.size();
  if (!ts.empty()) os << "[" << ts.front() << "," << ts.back() << "]";
  os << ";points=" << xs.size();
  if (!xs.empty()) os << "[" << xs.front() << "," << xs.back() << "]";
  return os.str();
}

// jet order the Gamma recursion needs: the 4th coefficient of an order-4
// input never reaches Gamma_3, so a zero pad is exact
int gamma_input_order(int n) { return n == 3 ? 4 : std::max(n, 0); }

}  // namespace

double transfer_constant(double rho1, double rho2, double K) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0))
    throw std::invalid_argument(
        "transfer_constant: curvature constants must be positive");
  if (K < 0.0) throw std::invalid_argument("transfer_constant: K < 0");
  if (K == 0.0) return 1.0;
  return std::exp(2.0 * std::sqrt(2.0 * M_PI / rho2) * K *
                  std::exp(K * K / (2.0 * rho1)));
}

double gamma_n_of_pt(const SemigroupEvaluator& ev, const SmoothFn& f, double t,
                     double x, int n) {
  if (n < 0 || n > 3)
    throw std::invalid_argument("gamma_n_of_pt: n must be in [0, 3]");
  const int order = gamma_input_order(n);
  std::vector<double> derivs(static_cast<size_t>(order) + 1, 0.0);
  for (int k = 0; k <= std::min(order, 3); ++k)
    derivs[static_cast<size_t>(k)] = ev.deriv_pt(f, t, x, k);
  const Jet jet = Jet::from_derivatives(x, derivs, order);
  return gamma_n_recursive(ev.generator(), jet, n);
}

double gamma_n_of_fn(const Generator1D& gen, const SmoothFn& f, double x,
                     int n) {
  if (n < 0 || n > 3)
    throw std::invalid_argument("gamma_n_of_fn: n must be in [0, 3]");
  const Jet jet = f.jet(Jet::variable(x, gamma_input_order(n)));
  return gamma_n_recursive(gen, jet, n);
}

VerificationReport semigroup_inequality_suite(const SemigroupEvaluator& ev,
                                              const std::vector<SmoothFn>& fns,
                                              const std::vector<double>& ts,
                                              const std::vector<double>& xs) {
  constexpr double kTol = 1e-7;
  const Generator1D& gen = ev.generator();
  VerificationReport rep;
  rep.name = "semigroup_inequality_suite";
  rep.margin = std::numeric_limits<double>::infinity();
  rep.fingerprint = evaluator_fingerprint(ev) + schedule_fingerprint(ts, xs) +
                    ";fns=" + std::to_string(fns.size());

  const char* labels[3] = {"exponential-contraction", "1/(2t)-regularization",
                           "hybrid-regularization"};
  for (const SmoothFn& f : fns) {
    for (int n = 1; n <= 2; ++n) {
      const double rho_n = n == 1 ? gen.rho1() : gen.rho2();
      auto g_n = [&](double y) { return gamma_n_of_fn(gen, f, y, n); };
      auto g_nm1 = [&](double y) { return gamma_n_of_fn(gen, f, y, n - 1); };
      for (double t : ts) {
        for (double x : xs) {
          const double lhs = gamma_n_of_pt(ev, f, t, x, n);
          const double pg_n = ev.pt_of_values(g_n, t, x);
          const double pg_nm1 = ev.pt_of_values(g_nm1, t, x);
          const double rhs[3] = {
              std::exp(-2.0 * rho_n * t) * pg_n,
              (0.5 / t) * pg_nm1,
              (1.0 / t) * std::exp(-rho_n * t) * pg_nm1,
          };
          for (int i = 0; i < 3; ++i) {
            const double slack = rhs[i] - lhs;
            if (slack < rep.margin) {
              rep.margin = slack;
              std::ostringstream os;
              os << std::setprecision(6) << labels[i] << " n=" << n
                 << " f=" << f.name() << " t=" << t << " x=" << x;
              rep.worst_witness = os.str();
            }
          }
        }
      }
    }
  }
  rep.pass = rep.margin >= -kTol;
  return rep;
}

VerificationReport interpolant_derivative_check(const SemigroupEvaluator& ev,
                                                const SmoothFn& f, int n,
                                                double t,
                                                const std::vector<double>& ss,
                                                const std::vector<double>& xs) {
  constexpr double kRelTol = 1e-4;
  if (n < 0 || n > 2)
    throw std::invalid_argument(
        "interpolant_derivative_check: n must be in [0, 2]");
  if (!(t > 0.0))
    throw std::invalid_argument("interpolant_derivative_check: t must be > 0");
  for (double s : ss)
    if (!(s > 0.0) || !(s < t))
      throw std::invalid_argument(
          "interpolant_derivative_check: schedule must lie inside (0, t)");

  VerificationReport rep;
  rep.name = "interpolant_derivative_check";
  rep.margin = std::numeric_limits<double>::infinity();
  {
    std::ostringstream os;
    os << evaluator_fingerprint(ev) << ";f=" << f.name() << ";n=" << n
       << ";t=" << t << schedule_fingerprint(ss, xs);
    rep.fingerprint = os.str();
  }

  auto lambda_n = [&](int order, double s, double x) {
    return ev.pt_of_values(
        [&](double y) { return gamma_n_of_pt(ev, f, t - s, y, order); }, s, x);
  };

  bool monotone = true;
  double worst_rel = 0.0;
  std::vector<double> sorted = ss;
  std::sort(sorted.begin(), sorted.end());
  for (double x : xs) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double s : sorted) {
      const double here = lambda_n(n, s, x);
      if (here < prev - 1e-9 * (1.0 + std::abs(here))) {
        monotone = false;
        std::ostringstream os;
        os << std::setprecision(6) << "monotonicity broken at s=" << s
           << " x=" << x;
        rep.worst_witness = os.str();
      }
      prev = here;

      const double h = std::min({1e-3 * std::max(1.0, t), 0.4 * s,
                                 0.4 * (t - s)});
      const double fd =
          (lambda_n(n, s + h, x) - lambda_n(n, s - h, x)) / (2.0 * h);
      const double target = 2.0 * lambda_n(n + 1, s, x);
      const double rel = std::abs(fd - target) /
                         std::max(std::abs(target), 1e-12);
      if (rel > worst_rel) {
        worst_rel = rel;
        rep.margin = kRelTol - rel;
        std::ostringstream os;
        os << std::setprecision(6) << "derivative mismatch " << rel
           << " at s=" << s << " x=" << x;
        rep.worst_witness = os.str();
      }
    }
  }
  if (!std::isfinite(rep.margin)) rep.margin = kRelTol;
  rep.pass = monotone && worst_rel <= kRelTol;
  return rep;
}

VerificationReport herbst_moment_check(const SemigroupEvaluator& ev,
                                       const SmoothFn& g, double lip, double p,
                                       double q, const std::vector<double>& ts,
                                       const std::vector<double>& xs) {
  constexpr double kTol = 1e-8;
  if (!(q < p) || !(q > 0.0))
    throw std::invalid_argument("herbst_moment_check: need 0 < q < p");
  if (lip < 0.0)
    throw std::invalid_argument("herbst_moment_check: negative Lipschitz");
  const double rho1 = ev.generator().rho1();

  VerificationReport rep;
  rep.name = "herbst_moment_check";
  rep.margin = std::numeric_limits<double>::infinity();
  {
    std::ostringstream os;
    os << evaluator_fingerprint(ev) << ";g=" << g.name() << ";lip=" << lip
       << ";p=" << p << ";q=" << q << schedule_fingerprint(ts, xs);
    rep.fingerprint = os.str();
  }

  auto exp_moment = [&](double power, double t, double x) {
    return ev.pt_of_values(
        [&](double y) { return std::exp(power * g.value(y)); }, t, x);
  };
  for (double t : ts) {
    const double lambda = (1.0 - std::exp(-2.0 * rho1 * t)) / rho1;
    const double shift = lip * lip * (p - q) * lambda / 2.0;
    for (double x : xs) {
      const double log_lhs = std::log(exp_moment(p, t, x)) / p;
      const double log_rhs = std::log(exp_moment(q, t, x)) / q + shift;
      const double slack = log_rhs - log_lhs;
      if (slack < rep.margin) {
        rep.margin = slack;
        std::ostringstream os;
        os << std::setprecision(6) << "t=" << t << " x=" << x;
        rep.worst_witness = os.str();
      }
    }
  }
  rep.pass = rep.margin >= -kTol;
  return rep;
}

VerificationReport poincare_transfer_check(const Generator1D& gen,
                                           const Potential& pot_in,
                                           double transfer,
                                           const std::vector<SmoothFn>& fns) {
  constexpr double kTol = 1e-8;
  if (fns.size() < 10)
    throw std::invalid_argument(
        "poincare_transfer_check: need at least 10 test functions");
  if (!(transfer >= 1.0))
    throw std::invalid_argument("poincare_transfer_check: constant below 1");
  const Potential pot = normalize_potential(gen, pot_in);
  const double cp = transfer / gen.rho1();   // Poincare constant
  const double cls = 2.0 * cp;               // log-Sobolev constant

  VerificationReport rep;
  rep.name = "poincare_transfer_check";
  rep.margin = std::numeric_limits<double>::infinity();
  {
    std::ostringstream os;
    os << std::setprecision(12) << generator_name(gen)
       << ";transfer=" << transfer << ";fns=" << fns.size();
    rep.fingerprint = os.str();
  }

  auto nu = [&](const std::function<double(double)>& h) {
    return gen.integrate_mu(
        [&](double y) { return h(y) * std::exp(-pot.V(y)); });
  };
  for (const SmoothFn& g : fns) {
    const double mean = nu([&](double y) { return g.value(y); });
    // centered and Bregman forms keep both integrands pointwise nonnegative,
    // so roundoff cannot manufacture a violation for near-constant g
    const double var = nu([&](double y) {
      const double d = g.value(y) - mean;
      return d * d;
    });
    const double ubar = nu([&](double y) {
      const double v = g.value(y);
      return v * v;
    });
    const double energy =
        nu([&](double y) { return gamma_n_of_fn(gen, g, y, 1); });
    const double ent =
        ubar > 1e-300 ? nu([&](double y) {
          const double u = g.value(y) * g.value(y);
          if (u < 1e-300) return ubar;
          const double d = u - ubar;
          // near u = ubar the three Bregman terms cancel to O(d^2/ubar);
          // route through log1p so roundoff stays proportional to d
          if (std::abs(d) <= 0.5 * ubar) return u * std::log1p(d / ubar) - d;
          return u * std::log(u / ubar) - u + ubar;
        })
                      : 0.0;

    const struct {
      const char* label;
      double lhs, rhs;
    } checks[2] = {{"poincare", var, cp * energy},
                   {"log-sobolev", ent, cls * energy}};
    for (const auto& c : checks) {
      const double scale = std::max({std::abs(c.rhs), std::abs(c.lhs), 1e-12});
      const double slack = (c.rhs - c.lhs) / scale;
      if (slack < rep.margin) {
        rep.margin = slack;
        std::ostringstream os;
        os << std::setprecision(6) << c.label << " g=" << g.name()
           << " lhs=" << c.lhs << " rhs=" << c.rhs;
        rep.worst_witness = os.str();
      }
    }
  }
  rep.pass = rep.margin >= -kTol;
  return rep;
}

VerificationReport growth_check(const TransportMapGrid& map,
                                const Generator1D& gen) {
  if (gen.kind() != Generator1D::Kind::kLaguerre)
    throw std::invalid_argument("growth_check: gamma-only check");
  if (map.points.size() != map.derivative.size() || map.points.empty())
    throw std::invalid_argument("growth_check: map lacks derivative data");

  double global = 0.0, global_at = map.points.front();
  double restricted = 0.0, restricted_at = map.points.front();
  bool has_restricted = false;
  for (size_t i = 0; i < map.points.size(); ++i) {
    const double ratio =
        std::abs(map.derivative[i]) / std::sqrt(map.points[i]);
    if (ratio > global) {
      global = ratio;
      global_at = map.points[i];
    }
    if (map.points[i] >= 1.0) {
      has_restricted = true;
      if (ratio > restricted) {
        restricted = ratio;
        restricted_at = map.points[i];
      }
    }
  }
  if (!has_restricted)
    throw std::invalid_argument("growth_check: grid has no points >= 1");

  VerificationReport rep;
  rep.name = "growth_check";
  rep.margin = map.lipschitz * (1.0 + 1e-6) - restricted;
  rep.pass = rep.margin >= 0.0;
  {
    std::ostringstream os;
    os << std::setprecision(6) << "sup |T'|/sqrt(x): global " << global
       << " at x=" << global_at << "; x>=1 restriction " << restricted
       << " at x=" << restricted_at << "; lipschitz " << map.lipschitz;
    rep.worst_witness = os.str();
  }
  {
    std::ostringstream os;
    os << std::setprecision(12) << generator_name(gen)
       << ";grid=" << map.points.size() << "[" << map.points.front() << ","
       << map.points.back() << "]";
    rep.fingerprint = os.str();
  }
  return rep;
}

VerificationReport compare_transport_to_monge(const TransportMapGrid& map,
                                              const MeasureCDF& mu,
                                              const MeasureCDF& nu,
                                              const Generator1D& gen,
                                              double tol) {
  VerificationReport rep;
  rep.name = "compare_transport_to_monge";
  const double lo = mu.quantile(0.005), hi = mu.quantile(0.995);
  double sup = 0.0, sup_metric = 0.0, at = lo;
  bool any = false;
  for (size_t i = 0; i < map.points.size(); ++i) {
    const double x = map.points[i];
    if (x < lo || x > hi) continue;
    any = true;
    const double m = monge_quantile_map(mu, nu, x);
    const double d = std::abs(map.values[i] - m);
    if (d > sup) {
      sup = d;
      at = x;
    }
    sup_metric = std::max(sup_metric, gen.metric_distance(map.values[i], m));
  }
  if (!any)
    throw std::invalid_argument(
        "compare_transport_to_monge: no grid point in the 99%-mass window");
  rep.margin = tol - std::max(sup, sup_metric);
  rep.pass = rep.margin >= 0.0;
  {
    std::ostringstream os;
    os << std::setprecision(6) << "sup |T-monge| " << sup << " at x=" << at
       << "; metric sup " << sup_metric;
    rep.worst_witness = os.str();
  }
  {
    std::ostringstream os;
    os << std::setprecision(12) << generator_name(gen) << ";tol=" << tol
       << ";window=[" << lo << "," << hi << "]";
    rep.fingerprint = os.str();
  }
  return rep;
}

}  // namespace hft
