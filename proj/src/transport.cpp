#include "hft/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hft {

double theorem_bound(double rho1, double rho2, double K) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0))
    throw std::invalid_argument("theorem_bound: curvature constants must be positive");
  if (K < 0.0) throw std::invalid_argument("theorem_bound: K < 0");
  if (K == 0.0) return 1.0;
  return std::exp(std::sqrt(2.0 * M_PI / rho2) * K *
                  std::exp(K * K / (2.0 * rho1)));
}

double choose_t_max(double K, double rho1, double eps) {
  if (!(rho1 > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("choose_t_max: rho1 and eps must be positive");
  if (K < 0.0) throw std::invalid_argument("choose_t_max: K < 0");
  if (K == 0.0) return 0.0;
  return std::max(0.0, std::log(K / (rho1 * eps)) / rho1);
}

namespace detail {

const std::array<double, 7>& dopri5_c() {
  static const std::array<double, 7> c = {0.0,       1.0 / 5.0, 3.0 / 10.0,
                                          4.0 / 5.0, 8.0 / 9.0, 1.0,
                                          1.0};
  return c;
}

const std::array<std::array<double, 7>, 7>& dopri5_a() {
  static const std::array<std::array<double, 7>, 7> a = {{
      {},
      {1.0 / 5.0},
      {3.0 / 40.0, 9.0 / 40.0},
      {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
      {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
      {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
       -5103.0 / 18656.0},
      {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
       11.0 / 84.0},
  }};
  return a;
}

const std::array<double, 7>& dopri5_b() {
  static const std::array<double, 7> b = {
      35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
      11.0 / 84.0,  0.0};
  return b;
}

const std::array<double, 7>& dopri5_bhat() {
  static const std::array<double, 7> bh = {
      5179.0 / 57600.0,    0.0,           7571.0 / 16695.0, 393.0 / 640.0,
      -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};
  return bh;
}

OdeResult dopri5(const std::function<double(double, double)>& rhs, double s0,
                 double s1, double y0, double tol,
                 const std::function<double(double)>& max_step,
                 const std::function<double(double)>& clamp) {
  OdeResult out;
  out.y = y0;
  if (!(s1 > s0)) return out;
  if (!(tol > 0.0)) throw std::invalid_argument("dopri5: tol must be positive");
  const auto& a = dopri5_a();
  const auto& b = dopri5_b();
  const auto& bh = dopri5_bhat();
  const auto& c = dopri5_c();

  double s = s0, y = y0;
  double k[7];
  k[0] = rhs(s, y);
  double h = std::min(s1 - s0, 0.1);
  if (max_step) h = std::min(h, max_step(s));

  const double s_end_eps = 1e-14 * (1.0 + std::abs(s1));
  for (int guard = 0; guard < 1000000; ++guard) {
    if (s >= s1 - s_end_eps) break;
    h = std::min(h, s1 - s);
    if (max_step) h = std::min(h, max_step(s));
    if (!(h > 1e-14)) throw std::runtime_error("dopri5: step size underflow");

    for (int i = 1; i < 7; ++i) {
      double yi = y;
      for (int j = 0; j < i; ++j) yi += h * a[static_cast<size_t>(i)][static_cast<size_t>(j)] * k[j];
      k[i] = rhs(s + c[static_cast<size_t>(i)] * h, yi);
    }
    double y5 = y, y4 = y;
    for (int j = 0; j < 7; ++j) {
      y5 += h * b[static_cast<size_t>(j)] * k[j];
      y4 += h * bh[static_cast<size_t>(j)] * k[j];
    }
    const double err = std::abs(y5 - y4);
    const double sc = tol * (1.0 + std::max(std::abs(y), std::abs(y5)));
    const double ratio = err / sc;
    if (ratio <= 1.0) {
      s += h;
      out.steps += 1;
      out.err_sum += err;
      double ynew = y5;
      if (clamp) {
        const double yc = clamp(ynew);
        if (yc != ynew) {
          out.clamped += 1;
          ynew = yc;
        }
      }
      if (ynew == y5) {
        k[0] = k[6];  // FSAL: last stage sits at (s, y5)
      } else {
        k[0] = rhs(s, ynew);
      }
      y = ynew;
    } else {
      out.rejected += 1;
    }
    const double factor =
        ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
  }
  out.y = y;
  return out;
}

std::vector<double> fornberg_weights(double x0, const std::vector<double>& xs,
                                     int m) {
  const int n = static_cast<int>(xs.size()) - 1;
  if (n < m) throw std::invalid_argument("fornberg_weights: too few nodes");
  std::vector<std::vector<double>> d(
      static_cast<size_t>(n + 1), std::vector<double>(static_cast<size_t>(m + 1), 0.0));
  d[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[static_cast<size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[static_cast<size_t>(i)] - xs[static_cast<size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int kk = mn; kk >= 1; --kk)
          d[static_cast<size_t>(i)][static_cast<size_t>(kk)] =
              c1 * (kk * d[static_cast<size_t>(i - 1)][static_cast<size_t>(kk - 1)] -
                    c5 * d[static_cast<size_t>(i - 1)][static_cast<size_t>(kk)]) /
              c2;
        d[static_cast<size_t>(i)][0] = -c1 * c5 * d[static_cast<size_t>(i - 1)][0] / c2;
      }
      for (int kk = mn; kk >= 1; --kk)
        d[static_cast<size_t>(j)][static_cast<size_t>(kk)] =
            (c4 * d[static_cast<size_t>(j)][static_cast<size_t>(kk)] -
             kk * d[static_cast<size_t>(j)][static_cast<size_t>(kk - 1)]) /
            c3;
      d[static_cast<size_t>(j)][0] = c4 * d[static_cast<size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<size_t>(n + 1));
  for (int i = 0; i <= n; ++i) w[static_cast<size_t>(i)] = d[static_cast<size_t>(i)][static_cast<size_t>(m)];
  return w;
}

namespace {

double floored_pt(const SemigroupEvaluator& ev, const SmoothFn& f, double t,
                  double x) {
  const double v = ev.pt(f, t, x);
  if (!(v > 0.0))
    throw std::domain_error(
        "velocity: P_t f evaluated to a nonpositive value; domain or "
        "quadrature misconfiguration");
  return std::max(v, 1e-300);
}

/// Velocity through the evaluator, one semigroup call per query.
class EvaluatorVelocity final : public VelocityField {
 public:
  EvaluatorVelocity(SemigroupEvaluator ev, SmoothFn f, double zlo, double zhi)
      : ev_(std::move(ev)), f_(std::move(f)), zlo_(zlo), zhi_(zhi) {}

  double dx_v(double t, double x) const override {
    const double v = floored_pt(ev_, f_, t, x);
    return -ev_.grad_pt(f_, t, x) / v;
  }
  double zeta_lo() const override { return zlo_; }
  double zeta_hi() const override { return zhi_; }

 private:
  SemigroupEvaluator ev_;
  SmoothFn f_;
  double zlo_, zhi_;
};

double lagrange4(const double* xs, const double* ys, double x) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    double li = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      li *= (x - xs[j]) / (xs[i] - xs[j]);
    }
    acc += li * ys[i];
  }
  return acc;
}

/**
 * Velocity for the finite-difference backend: one marching pass fills a
 * (time slice) x (metric lattice) table of dV_t/dx, and queries interpolate
 * with cubic Lagrange in each direction.  Slices align with the backend's
 * snapshot times, so the fill costs a single sweep of the heat equation.
 */
class GridVelocity final : public VelocityField {
 public:
  GridVelocity(const SemigroupEvaluator& ev, const SmoothFn& f, double t_max) {
    gen_ = ev.generator();
    const std::vector<double> mesh = fd_grid(gen_, ev.config().fd_points);
    const size_t stride =
        std::max<size_t>(1, (mesh.size() - 1) / 512);
    for (size_t i = 0; i < mesh.size(); i += stride) xs_.push_back(mesh[i]);
    if (xs_.back() != mesh.back()) xs_.push_back(mesh.back());
    for (double x : xs_) zetas_.push_back(gen_.metric_coord(x));

    const double cap = std::min(4.0, t_max);
    const double step = std::min(0.05, t_max / 8.0);
    for (double t = 0.0; t < cap - 1e-12; t += step) times_.push_back(t);
    if (t_max > 4.0)
      for (double t = 4.0; t < t_max - 1e-12; t += 0.5) times_.push_back(t);
    times_.push_back(t_max);

    vals_.resize(times_.size());
    for (size_t j = 0; j < times_.size(); ++j) {
      vals_[j].resize(xs_.size());
      for (size_t i = 0; i < xs_.size(); ++i) {
        const double v = floored_pt(ev, f, times_[j], xs_[i]);
        vals_[j][i] = -ev.grad_pt(f, times_[j], xs_[i]) / v;
      }
    }
  }

  double dx_v(double t, double x) const override {
    t = std::clamp(t, times_.front(), times_.back());
    const double z =
        std::clamp(gen_.metric_coord(x), zetas_.front(), zetas_.back());
    const size_t jt = window_start(times_, t);
    const size_t ix = window_start(zetas_, z);
    double col[4];
    for (int r = 0; r < 4; ++r)
      col[r] = lagrange4(&zetas_[ix], &vals_[jt + static_cast<size_t>(r)][ix], z);
    return lagrange4(&times_[jt], col, t);
  }
  double zeta_lo() const override { return zetas_.front(); }
  double zeta_hi() const override { return zetas_.back(); }

 private:
  static size_t window_start(const std::vector<double>& v, double x) {
    size_t i = static_cast<size_t>(
        std::upper_bound(v.begin(), v.end(), x) - v.begin());
    if (i > 0) --i;
    const size_t last = v.size() - 4;
    if (i > 0) --i;  // center the 4-point window
    return std::min(i, last);
  }

  Generator1D gen_ = Generator1D::ou();
  std::vector<double> times_, xs_, zetas_;
  std::vector<std::vector<double>> vals_;
};

std::vector<double> metric_uniform_grid(const Generator1D& gen, double lo,
                                        double hi, int n) {
  const double zlo = gen.metric_coord(lo), zhi = gen.metric_coord(hi);
  std::vector<double> xs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    xs[static_cast<size_t>(i)] =
        gen.from_metric_coord(zlo + (zhi - zlo) * i / (n - 1));
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

}  // namespace
}  // namespace detail

HeatFlowProblem make_problem(const Generator1D& gen, const Potential& pot_in,
                             const SemigroupConfig& cfg,
                             const TransportOptions& opt) {
  Potential pot = normalize_potential(gen, pot_in);
  const double K = certify_lipschitz(gen, pot);
  pot = pot.with_certified_k(K);
  SemigroupEvaluator ev(gen, cfg);
  const SmoothFn f = SmoothFn::make(
      "exp_neg_potential",
      [pot](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>) {
          return std::exp(-pot.V(x));
        } else {
          return exp(-pot.V_jet(x));
        }
      },
      /*positive=*/true);
  const double t_max = choose_t_max(K, gen.rho1(), opt.eps_horizon);

  std::vector<double> grid = opt.grid;
  if (grid.empty()) {
    const int n = std::max(opt.grid_points, 9);
    if (gen.kind() == Generator1D::Kind::kLaguerre)
      grid = detail::metric_uniform_grid(gen, std::max(0.01, gen.quad_lo()),
                                         std::min(50.0, gen.quad_hi()), n);
    else
      grid = central_mass_lattice(gen, n);
  }

  std::shared_ptr<const VelocityField> field;
  if (cfg.backend == Backend::kFiniteDifference && K > 0.0 && t_max > 0.0) {
    field = std::make_shared<detail::GridVelocity>(ev, f, t_max);
  } else {
    field = std::make_shared<detail::EvaluatorVelocity>(
        ev, f, gen.metric_coord(gen.quad_lo()),
        gen.metric_coord(gen.quad_hi()));
  }

  return HeatFlowProblem{gen,   pot,         ev,
                         f,     K,           t_max,
                         opt.ode_tol,        opt.eps_horizon,
                         std::move(grid),    std::move(field)};
}

double velocity(const HeatFlowProblem& prob, double t, double x) {
  // an identity problem (K = 0) has zero drift at every time, so no horizon
  // restriction applies
  if (!(t >= 0.0) || (prob.t_max > 0.0 && t > prob.t_max + 1e-12))
    throw std::invalid_argument("velocity: t outside [0, t_max]");
  if (!std::isfinite(x)) throw std::invalid_argument("velocity: x not finite");
  return prob.field->dx_v(t, x);
}

TransportPointResult transport_eval_full(const HeatFlowProblem& prob,
                                         double x) {
  if (!std::isfinite(x) || !(x > prob.gen.domain_lo()) ||
      !(x < prob.gen.domain_hi()))
    throw std::invalid_argument("transport_eval: x outside the domain");
  TransportPointResult out;
  if (prob.K == 0.0 || prob.t_max <= 0.0) {
    out.value = x;
    return out;
  }
  const Generator1D& gen = prob.gen;
  const VelocityField& field = *prob.field;
  const double zlo = field.zeta_lo(), zhi = field.zeta_hi();
  const double t_max = prob.t_max;

  const auto rhs = [&](double s, double z) {
    const double y = gen.from_metric_coord(std::clamp(z, zlo, zhi));
    return -gen.sqrt_a(y) * field.dx_v(std::max(0.0, t_max - s), y);
  };
  const auto cap = [&](double s) {
    return (t_max - s) < 1.0 ? 0.05 : 0.5;
  };
  const auto clamp_state = [&](double z) { return std::clamp(z, zlo, zhi); };

  // a second run at a 5x tighter tolerance turns the pair into an
  // a-posteriori global error estimate; the tighter result is returned
  const double z0 = gen.metric_coord(x);
  const detail::OdeResult coarse =
      detail::dopri5(rhs, 0.0, t_max, z0, prob.ode_tol, cap, clamp_state);
  const detail::OdeResult fine =
      detail::dopri5(rhs, 0.0, t_max, z0, prob.ode_tol / 5.0, cap, clamp_state);
  out.value = gen.from_metric_coord(fine.y);
  out.steps = coarse.steps + fine.steps;
  out.rejected = coarse.rejected + fine.rejected;
  out.clamped = fine.clamped;
  out.ode_error = gen.sqrt_a(out.value) * std::abs(fine.y - coarse.y) +
                  1e-15 * (1.0 + std::abs(out.value));
  return out;
}

double transport_eval(const HeatFlowProblem& prob, double x) {
  return transport_eval_full(prob, x).value;
}

double lipschitz_estimate(const std::vector<double>& xs,
                          const std::vector<double>& ts,
                          const Generator1D& gen) {
  if (xs.size() != ts.size() || xs.size() < 2)
    throw std::invalid_argument("lipschitz_estimate: bad grid");
  double sup = 0.0;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double den = gen.metric_distance(xs[i], xs[i + 1]);
    if (!(den > 0.0))
      throw std::invalid_argument("lipschitz_estimate: coincident grid points");
    sup = std::max(sup, gen.metric_distance(ts[i], ts[i + 1]) / den);
  }
  return sup;
}

TransportMapGrid transport_grid(const HeatFlowProblem& prob) {
  const std::vector<double>& xs = prob.grid;
  if (xs.size() < 5)
    throw std::invalid_argument("transport_grid: need at least 5 grid points");
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i + 1] > xs[i]))
      throw std::invalid_argument("transport_grid: grid not increasing");

  TransportMapGrid g;
  g.points = xs;
  g.values.resize(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    const TransportPointResult r = transport_eval_full(prob, xs[i]);
    g.values[i] = r.value;
    g.ode_error = std::max(g.ode_error, r.ode_error);
    g.clamped += r.clamped;
  }
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!(g.values[i + 1] > g.values[i])) {
      std::ostringstream msg;
      msg << "transport_grid: monotonicity violated between x = " << xs[i]
          << " and x = " << xs[i + 1] << " (T = " << g.values[i] << ", "
          << g.values[i + 1] << "); tighten ode_tol";
      throw std::runtime_error(msg.str());
    }
  }

  // derivative in the metric coordinate (grids are uniform there), chained
  // back to d/dx
  std::vector<double> zetas(xs.size());
  for (size_t i = 0; i < xs.size(); ++i)
    zetas[i] = prob.gen.metric_coord(xs[i]);
  g.derivative.resize(xs.size());
  const size_t n = xs.size();
  for (size_t i = 0; i < n; ++i) {
    const size_t i0 = std::min(std::max<size_t>(i, 2) - 2, n - 5);
    const std::vector<double> nodes(zetas.begin() + static_cast<long>(i0),
                                    zetas.begin() + static_cast<long>(i0 + 5));
    const std::vector<double> w = detail::fornberg_weights(zetas[i], nodes, 1);
    double dtdz = 0.0;
    for (size_t j = 0; j < 5; ++j) dtdz += w[j] * g.values[i0 + j];
    g.derivative[i] = dtdz / prob.gen.sqrt_a(xs[i]);
  }

  g.lipschitz = lipschitz_estimate(xs, g.values, prob.gen);
  g.bound = theorem_bound(prob.gen.rho1(), prob.gen.rho2(), prob.K);
  g.horizon_tail =
      prob.K > 0.0
          ? (prob.K / prob.gen.rho1()) * std::exp(-prob.gen.rho1() * prob.t_max)
          : 0.0;
  return g;
}

double velocity_decay_excess(const HeatFlowProblem& prob,
                             const std::vector<double>& times,
                             const std::vector<double>& xs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const double envelope = prob.K * std::exp(-prob.gen.rho1() * t);
    for (double x : xs) {
      const double v = prob.gen.sqrt_a(x) * std::abs(velocity(prob, t, x));
      worst = std::max(worst, v - envelope);
    }
  }
  return worst;
}

HessianCheckResult hessian_log_pt_bound_check(const HeatFlowProblem& prob,
                                              const std::vector<double>& times,
                                              const std::vector<double>& xs,
                                              double tol) {
  HessianCheckResult res;
  res.worst_excess = -std::numeric_limits<double>::infinity();
  const Generator1D& gen = prob.gen;
  const double amp = std::exp(prob.K * prob.K / (2.0 * gen.rho1()));
  for (double t : times) {
    if (!(t > 0.0))
      throw std::invalid_argument("hessian_log_pt_bound_check: t must be > 0");
    const double rhs =
        prob.K * std::sqrt(1.0 / t) * std::exp(-gen.rho2() * t / 2.0) * amp;
    for (double x : xs) {
      const double val =
          detail::floored_pt(prob.evaluator, prob.target_density, t, x);
      const double g1 = prob.evaluator.grad_pt(prob.target_density, t, x);
      const double g2 =
          prob.evaluator.deriv_pt(prob.target_density, t, x, 2);
      const double u1 = g1 / val;
      const double u2 = g2 / val - u1 * u1;
      // intrinsic second derivative along the unit metric direction
      const double hess =
          gen.a(x) * u2 + 0.5 * gen.a_jet(x).derivative(1) * u1;
      const double lhs = -hess;
      const double excess = lhs - rhs;
      if (excess > res.worst_excess) {
        res.worst_excess = excess;
        res.t_at = t;
        res.x_at = x;
      }
      if (rhs > 0.0) res.worst_ratio = std::max(res.worst_ratio, lhs / rhs);
    }
  }
  res.pass = res.worst_excess <= tol;
  return res;
}

}  // namespace hft
