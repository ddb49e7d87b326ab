#include <cmath>
#include <vector>

#include "doctest.h"
#include "hft/generator.hpp"
#include "hft/measures.hpp"
#include "hft/potential.hpp"
#include "hft/semigroup.hpp"
#include "hft/transport.hpp"

using namespace hft;

namespace {

SemigroupConfig mehler_cfg() {
  SemigroupConfig cfg;
  cfg.backend = Backend::kMehler;
  return cfg;
}

SemigroupConfig spectral_cfg(int truncation) {
  SemigroupConfig cfg;
  cfg.backend = Backend::kSpectral;
  cfg.truncation = truncation;
  return cfg;
}

SemigroupConfig fd_cfg() {
  SemigroupConfig cfg;
  cfg.backend = Backend::kFiniteDifference;
  return cfg;
}

}  // namespace

TEST_CASE("lipschitz bound formula hits the precomputed references") {
  CHECK(theorem_bound(1.0, 1.0, 0.0) == 1.0);
  CHECK(theorem_bound(1.0, 1.0, 1.0) ==
        doctest::Approx(62.347985005038982991).epsilon(1e-13));
  CHECK(theorem_bound(0.5, 0.5, 0.5) ==
        doctest::Approx(9.7364424020473915842).epsilon(1e-13));
  CHECK(theorem_bound(1.0, 1.0, 2.0) ==
        doctest::Approx(1.2236918464090680614e16).epsilon(1e-13));
  CHECK(theorem_bound(0.5, 0.5, 0.25) ==
        doctest::Approx(2.5686581745464759759).epsilon(1e-13));

  // monotone in K, antitone in the curvature constants
  double prev = 1.0;
  for (double k : {0.25, 0.5, 1.0, 1.5}) {
    const double b = theorem_bound(1.0, 1.0, k);
    CHECK(b > prev);
    prev = b;
  }
  CHECK(theorem_bound(2.0, 1.0, 1.0) < theorem_bound(1.0, 1.0, 1.0));
  CHECK(theorem_bound(1.0, 2.0, 1.0) < theorem_bound(1.0, 1.0, 1.0));
  CHECK_THROWS_AS(theorem_bound(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_bound(1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_bound(1.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("integration horizon matches the tail-displacement formula") {
  CHECK(choose_t_max(0.0, 1.0, 1e-6) == 0.0);
  CHECK(choose_t_max(1.0, 1.0, 1e-6) ==
        doctest::Approx(13.815510557964274104).epsilon(1e-14));
  const double base = choose_t_max(1.0, 0.5, 1e-6);
  CHECK(choose_t_max(2.0, 0.5, 1e-6) ==
        doctest::Approx(base + std::log(2.0) / 0.5).epsilon(1e-13));
  CHECK(choose_t_max(1e-9, 1.0, 1.0) == 0.0);  // clamped at zero
  CHECK_THROWS_AS(choose_t_max(1.0, 0.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(choose_t_max(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("runge-kutta tableau satisfies the order conditions") {
  const auto& a = detail::dopri5_a();
  const auto& b = detail::dopri5_b();
  const auto& bh = detail::dopri5_bhat();
  const auto& c = detail::dopri5_c();

  for (int i = 1; i < 7; ++i) {
    double row = 0.0;
    for (int j = 0; j < i; ++j) row += a[i][j];
    CHECK(row == doctest::Approx(c[i]).epsilon(1e-14));
  }
  auto moment = [&](const std::array<double, 7>& w, int k) {
    double s = 0.0;
    for (int j = 0; j < 7; ++j) s += w[j] * std::pow(c[j], k);
    return s;
  };
  CHECK(moment(b, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(moment(b, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(moment(b, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(moment(b, 3) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(moment(b, 4) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(moment(bh, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(moment(bh, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(moment(bh, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(moment(bh, 3) == doctest::Approx(0.25).epsilon(1e-14));

  double bac = 0.0, bcac = 0.0, bac2 = 0.0, baac = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < i; ++j) {
      bac += b[i] * a[i][j] * c[j];
      bcac += b[i] * c[i] * a[i][j] * c[j];
      bac2 += b[i] * a[i][j] * c[j] * c[j];
      for (int kk = 0; kk < j; ++kk) baac += b[i] * a[i][j] * a[j][kk] * c[kk];
    }
  CHECK(bac == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(bcac == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
  CHECK(bac2 == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(baac == doctest::Approx(1.0 / 24.0).epsilon(1e-14));

  // FSAL: the last stage coincides with the 5th-order solution
  for (int j = 0; j < 6; ++j)
    CHECK(a[6][j] == doctest::Approx(b[j]).epsilon(1e-15));
}

TEST_CASE("adaptive integrator meets tolerance on a gaussian decay") {
  const auto rhs = [](double s, double y) { return -2.0 * s * y; };
  const auto r1 = detail::dopri5(rhs, 0.0, 2.0, 1.0, 1e-10, {}, {});
  const double exact = std::exp(-4.0);
  CHECK(std::abs(r1.y - exact) <= 1e-9);
  const auto r2 = detail::dopri5(rhs, 0.0, 2.0, 1.0, 1e-13, {}, {});
  CHECK(std::abs(r2.y - exact) < std::abs(r1.y - exact) + 1e-15);
  CHECK(std::abs(r1.y - r2.y) <= r1.err_sum + 1e-14);

  // clamping keeps the state admissible and is reported
  const auto down = [](double, double) { return -1.0; };
  const auto r3 = detail::dopri5(
      down, 0.0, 2.0, 0.5, 1e-10, {},
      [](double y) { return std::max(y, 0.0); });
  CHECK(r3.y == 0.0);
  CHECK(r3.clamped > 0);
}

TEST_CASE("difference weights reproduce the classic five-point stencil") {
  const std::vector<double> nodes = {-2.0, -1.0, 0.0, 1.0, 2.0};
  const std::vector<double> w = detail::fornberg_weights(0.0, nodes, 1);
  const std::vector<double> ref = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0,
                                   -1.0 / 12.0};
  for (size_t i = 0; i < 5; ++i)
    CHECK(w[i] == doctest::Approx(ref[i]).epsilon(1e-14));

  // exact on cubics over scattered nodes
  const std::vector<double> sc = {0.1, 0.35, 0.7, 1.1, 1.4};
  const std::vector<double> ws = detail::fornberg_weights(0.7, sc, 1);
  double d = 0.0;
  for (size_t i = 0; i < 5; ++i) d += ws[i] * sc[i] * sc[i] * sc[i];
  CHECK(d == doctest::Approx(3.0 * 0.7 * 0.7).epsilon(1e-12));
}

TEST_CASE("zero potential short-circuits to the identity map") {
  const HeatFlowProblem prob =
      make_problem(Generator1D::ou(), Potential::zero(), mehler_cfg());
  CHECK(prob.K == 0.0);
  CHECK(prob.t_max == 0.0);
  for (double t : {0.0, 0.5})
    CHECK(velocity(prob, t, 0.3) == doctest::Approx(0.0).epsilon(1e-12));
  const TransportMapGrid g = transport_grid(prob);
  for (size_t i = 0; i < g.points.size(); ++i) {
    CHECK(g.values[i] == g.points[i]);
    CHECK(g.derivative[i] == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(g.lipschitz == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.bound == 1.0);
}

TEST_CASE("gaussian tilt produces the exact translation flow") {
  const double K = 1.0;
  const HeatFlowProblem prob =
      make_problem(Generator1D::ou(), Potential::linear(K), mehler_cfg());
  CHECK(prob.K == doctest::Approx(K).epsilon(1e-9));
  CHECK(prob.t_max == doctest::Approx(13.815510557964274104).epsilon(1e-9));

  // drift is K e^{-t}, uniformly in x
  for (double t : {0.0, 0.3, 1.0, 3.0})
    for (double x : {-1.5, 0.0, 2.0})
      CHECK(velocity(prob, t, x) ==
            doctest::Approx(K * std::exp(-t)).epsilon(1e-10));

  const TransportMapGrid g = transport_grid(prob);
  for (size_t i = 0; i < g.points.size(); ++i) {
    CHECK(std::abs(g.values[i] - (g.points[i] - K)) <= 2e-6);
    CHECK(std::abs(g.derivative[i] - 1.0) <= 1e-5);
  }
  CHECK(std::abs(g.lipschitz - 1.0) <= 1e-6);
  CHECK(g.bound == doctest::Approx(62.347985005038982991).epsilon(1e-12));
  CHECK(g.horizon_tail ==
        doctest::Approx(prob.eps_horizon).epsilon(1e-9));
  CHECK(g.clamped == 0);

  // agreement with the quantile coupling and the pushforward distance
  const MeasureCDF mu = MeasureCDF::from_generator(prob.gen);
  const MeasureCDF nu = MeasureCDF::perturbed(prob.gen, prob.pot);
  double sup = 0.0;
  for (size_t i = 0; i < g.points.size(); ++i)
    sup = std::max(sup, std::abs(g.values[i] - monge_quantile_map(
                                                   mu, nu, g.points[i])));
  CHECK(sup <= 1e-5);
  CHECK(pushforward_ks_distance(g.points, g.values, mu, nu) <= 0.002);
}

TEST_CASE("doubling the horizon moves the map by at most the tail bound") {
  const Generator1D gen = Generator1D::ou();
  TransportOptions opt;
  const HeatFlowProblem p1 = make_problem(gen, Potential::linear(0.8),
                                          mehler_cfg(), opt);
  TransportOptions opt2;
  opt2.eps_horizon = (p1.K / gen.rho1()) *
                     std::exp(-gen.rho1() * 2.0 * p1.t_max);
  const HeatFlowProblem p2 = make_problem(gen, Potential::linear(0.8),
                                          mehler_cfg(), opt2);
  CHECK(p2.t_max == doctest::Approx(2.0 * p1.t_max).epsilon(1e-9));
  for (double x : {-1.0, 0.0, 0.7, 2.0})
    CHECK(std::abs(transport_eval(p1, x) - transport_eval(p2, x)) <=
          2.0 * opt.eps_horizon);
}

TEST_CASE("halving the ode tolerance stays inside the reported estimate") {
  const Generator1D gen = Generator1D::laguerre(1.5);
  TransportOptions loose;
  loose.ode_tol = 1e-6;
  TransportOptions tight;
  tight.ode_tol = 5e-7;
  const HeatFlowProblem pl =
      make_problem(gen, Potential::sqrt_slope(0.5), spectral_cfg(400), loose);
  const HeatFlowProblem pt =
      make_problem(gen, Potential::sqrt_slope(0.5), spectral_cfg(400), tight);
  for (double x : {0.2, 0.9, 2.5, 6.0}) {
    const TransportPointResult a = transport_eval_full(pl, x);
    const TransportPointResult b = transport_eval_full(pt, x);
    CHECK(std::abs(a.value - b.value) <= a.ode_error + 1e-12);
  }
}

TEST_CASE("gamma transport coincides with the quantile map") {
  const Generator1D gen = Generator1D::laguerre(1.5);
  const HeatFlowProblem prob =
      make_problem(gen, Potential::sqrt_slope(0.5), spectral_cfg(400));
  CHECK(prob.K == doctest::Approx(0.5).epsilon(1e-9));
  const TransportMapGrid g = transport_grid(prob);
  CHECK(g.lipschitz <= g.bound + 1e-6);

  const MeasureCDF mu = MeasureCDF::from_generator(gen);
  const MeasureCDF nu = MeasureCDF::perturbed(gen, prob.pot);
  const double q_lo = mu.quantile(0.005), q_hi = mu.quantile(0.995);
  double sup = 0.0;
  for (size_t i = 0; i < g.points.size(); ++i) {
    if (g.points[i] < q_lo || g.points[i] > q_hi) continue;
    sup = std::max(sup, std::abs(g.values[i] - monge_quantile_map(
                                                   mu, nu, g.points[i])));
  }
  CHECK(sup <= 1e-3);
  CHECK(pushforward_ks_distance(g.points, g.values, mu, nu) <= 0.01);
}

TEST_CASE("spectral and finite-difference transports agree") {
  const Generator1D gen = Generator1D::laguerre(1.5);
  TransportOptions opt;
  opt.grid_points = 81;
  const HeatFlowProblem ps =
      make_problem(gen, Potential::sqrt_slope(0.5), spectral_cfg(400), opt);
  TransportOptions opt_fd = opt;
  opt_fd.grid = ps.grid;
  const HeatFlowProblem pf =
      make_problem(gen, Potential::sqrt_slope(0.5), fd_cfg(), opt_fd);
  const TransportMapGrid gs = transport_grid(ps);
  const TransportMapGrid gf = transport_grid(pf);
  double sup = 0.0;
  for (size_t i = 0; i < gs.points.size(); ++i)
    sup = std::max(sup, std::abs(gs.values[i] - gf.values[i]));
  CHECK(sup <= 5e-4);
}

TEST_CASE("velocity decays inside the exponential envelope") {
  const std::vector<double> times = default_time_schedule();
  {
    const HeatFlowProblem prob =
        make_problem(Generator1D::ou(), Potential::linear(1.0), mehler_cfg());
    CHECK(velocity_decay_excess(prob, times,
                                central_mass_lattice(prob.gen, 9)) <= 1e-6);
  }
  {
    const Generator1D gen = Generator1D::laguerre(1.5);
    const HeatFlowProblem prob =
        make_problem(gen, Potential::sqrt_slope(0.5), spectral_cfg(400));
    CHECK(velocity_decay_excess(prob, times, central_mass_lattice(gen, 9)) <=
          1e-6);
  }
}

TEST_CASE("log-semigroup hessian stays under the proof integrand bound") {
  const std::vector<double> times = {0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
  {
    const HeatFlowProblem prob =
        make_problem(Generator1D::ou(), Potential::linear(1.0), mehler_cfg());
    const HessianCheckResult r = hessian_log_pt_bound_check(
        prob, times, central_mass_lattice(prob.gen, 9));
    CHECK(r.pass);
    // log P_t e^{-Kx} is linear in x, so the hessian vanishes
    CHECK(std::abs(r.worst_excess + prob.K * std::sqrt(1.0 / 4.0) *
                                        std::exp(-4.0 / 2.0) *
                                        std::exp(0.5)) <= 1e-7);
  }
  {
    const Generator1D gen = Generator1D::laguerre(1.5);
    const HeatFlowProblem prob =
        make_problem(gen, Potential::sqrt_slope(0.5), spectral_cfg(400));
    const HessianCheckResult r = hessian_log_pt_bound_check(
        prob, times, central_mass_lattice(gen, 9));
    CHECK(r.pass);
    CHECK(r.worst_ratio < 1.0);
  }
}
