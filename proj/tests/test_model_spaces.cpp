#include "doctest.h"

#include <cmath>

#include "hft/generator.hpp"
#include "hft/potential.hpp"

using hft::Generator1D;
using hft::Jet;
using hft::Potential;

TEST_CASE("ou generator basics") {
  const auto g = hft::make_ou();
  CHECK(g.a(3.7) == 1.0);
  CHECK(g.b(3.7) == -3.7);
  CHECK(g.rho1() == 1.0);
  CHECK(g.rho2() == 1.0);
  CHECK(g.metric_distance(-1.0, 2.5) == doctest::Approx(3.5));
  // invariant density is the standard normal
  CHECK(g.density(0.0) == doctest::Approx(1.0 / std::sqrt(2 * 3.14159265358979323846)));
  // truncated mass
  CHECK(g.integrate_mu([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("laguerre generator basics") {
  const auto g = hft::make_laguerre(1.5);
  CHECK(g.a(2.0) == 2.0);
  CHECK(g.b(2.0) == doctest::Approx(-0.5));
  CHECK(g.rho1() == 0.5);
  CHECK(g.metric_distance(1.0, 4.0) == doctest::Approx(2.0));
  CHECK(g.integrate_mu([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g.integrate_mu([](double x) { return x; }) == doctest::Approx(1.5).epsilon(1e-9));
  // oracle rule agrees with the adaptive rule
  CHECK(g.integrate_mu_oracle([](double x) { return std::exp(-2.0 * std::sqrt(x)); }) ==
        doctest::Approx(g.integrate_mu([](double x) { return std::exp(-2.0 * std::sqrt(x)); }))
            .epsilon(1e-9));
}

TEST_CASE("laguerre rejects p below 3/2") {
  CHECK_THROWS_WITH_AS(hft::make_laguerre(1.0),
                       doctest::Contains("self-adjoint"),
                       std::invalid_argument);
  CHECK_THROWS_AS(hft::make_laguerre(1.49), std::invalid_argument);
  CHECK_NOTHROW(hft::make_laguerre(1.5));
}

TEST_CASE("generator apply matches L f = a f'' + b f'") {
  const auto ou = hft::make_ou();
  const auto lag = hft::make_laguerre(2.0);
  // f = x^3 at x = 1.2: f' = 3x^2, f'' = 6x
  const Jet f = Jet::polynomial(1.2, {1.2 * 1.2 * 1.2, 3 * 1.2 * 1.2, 3 * 1.2, 1.0});
  const double x = 1.2;
  CHECK(ou.apply(f).value() == doctest::Approx(6 * x - x * 3 * x * x));
  CHECK(lag.apply(f).value() == doctest::Approx(x * 6 * x + (2.0 - x) * 3 * x * x));
  // order bookkeeping: order-4 truncated jet -> order-2 jet of Lf
  const Jet f4 = f.truncated(4);
  CHECK(ou.apply(f4).cap() == 2);
}

TEST_CASE("carre du champ uses the diffusion coefficient") {
  const auto lag = hft::make_laguerre(1.5);
  const Jet f = Jet::polynomial(2.0, {5.0, 3.0});  // f' = 3
  CHECK(lag.carre_du_champ(f) == doctest::Approx(2.0 * 9.0));
}

TEST_CASE("custom generator matches the ou closed forms") {
  const auto g = Generator1D::custom(
      [](double) { return 1.0; }, [](double x) { return -x; },
      [](double x) { return -0.5 * x * x; }, -12.0, 12.0, 1.0, 1.0);
  CHECK(g.density(0.3) == doctest::Approx(hft::make_ou().density(0.3)).epsilon(1e-9));
  const Jet f = Jet::polynomial(0.7, {0.0, 1.0, 2.0, 0.5, 0.25});
  const auto ref = hft::make_ou().apply(f);
  const auto got = g.apply(f.truncated(4));
  CHECK(got.value() == doctest::Approx(ref.value()).epsilon(1e-9));
  CHECK(got.derivative(1) == doctest::Approx(ref.derivative(1)).epsilon(1e-7));
  CHECK(g.metric_distance(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("potential certification and normalization, ou linear") {
  const auto g = hft::make_ou();
  const auto pot = Potential::linear(1.0);
  const double K = hft::certify_lipschitz(g, pot);
  CHECK(K == doctest::Approx(1.0).epsilon(1e-12));
  const auto npot = hft::normalize_potential(g, pot);
  // Z = E[e^{-x}] = e^{1/2}, so the shift is 1/2
  CHECK(npot.shift() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(g.integrate_mu([&](double x) { return std::exp(-npot.V(x)); }) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("sqrt potential is metric-Lipschitz with constant c") {
  const auto g = hft::make_laguerre(1.5);
  const auto pot = Potential::sqrt_slope(0.5);
  CHECK(hft::certify_lipschitz(g, pot) == doctest::Approx(0.5).epsilon(1e-12));
  const auto npot = hft::normalize_potential(g, pot);
  CHECK(g.integrate_mu([&](double x) { return std::exp(-npot.V(x)); }) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("tabulated potential reproduces a smooth profile") {
  // tabulate V(x) = x^2/4 on [-6,6] and compare values and derivatives
  std::vector<double> xs, vs;
  for (int i = 0; i <= 240; ++i) {
    const double x = -6.0 + 12.0 * i / 240.0;
    xs.push_back(x);
    vs.push_back(0.25 * x * x);
  }
  const auto pot = Potential::tabulated(xs, vs);
  CHECK(pot.V(1.234) == doctest::Approx(0.25 * 1.234 * 1.234).epsilon(1e-6));
  CHECK(pot.dV(1.234) == doctest::Approx(0.5 * 1.234).epsilon(1e-3));
  const Jet j = pot.V_jet(Jet::variable(0.775, 3));
  CHECK(j.value() == doctest::Approx(0.25 * 0.775 * 0.775).epsilon(1e-6));
  CHECK(j.derivative(1) == doctest::Approx(0.5 * 0.775).epsilon(1e-3));
}

TEST_CASE("jet-capable potentials compose on seeds") {
  const auto pot = Potential::sqrt_slope(0.25);
  const Jet j = pot.V_jet(Jet::variable(4.0, 3));
  CHECK(j.value() == doctest::Approx(2 * 0.25 * 2.0));
  CHECK(j.derivative(1) == doctest::Approx(0.25 / 2.0));  // c / sqrt(x)
}
