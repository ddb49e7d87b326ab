#include "doctest.h"

#include <cmath>
#include <random>

#include "hft/gamma.hpp"
#include "hft/generator.hpp"

using hft::Generator1D;
using hft::Jet;

namespace {

Jet random_jet(std::mt19937_64& rng, double x) {
  std::vector<double> c(5);
  for (double& v : c) v = -10.0 + 20.0 * hft::uniform_from_bits(rng());
  return Jet::polynomial(x, c);
}

}  // namespace

TEST_CASE("ou gamma closed forms (derived independently)") {
  // Gamma1 = f'^2, Gamma2 = f''^2 + f'^2, Gamma3 = f'''^2 + 3 f''^2 + f'^2
  const auto g = hft::make_ou();
  std::mt19937_64 rng(7);
  for (int s = 0; s < 200; ++s) {
    const double x = -6.0 + 12.0 * hft::uniform_from_bits(rng());
    const Jet f = random_jet(rng, x);
    const double d1 = f.derivative(1), d2 = f.derivative(2), d3 = f.derivative(3);
    const double g1 = hft::gamma_n_recursive(g, f, 1);
    const double g2 = hft::gamma_n_recursive(g, f, 2);
    const double g3 = hft::gamma_n_recursive(g, f, 3);
    CHECK(g1 == doctest::Approx(d1 * d1).epsilon(1e-12));
    CHECK(g2 == doctest::Approx(d2 * d2 + d1 * d1).epsilon(1e-12));
    CHECK(g3 == doctest::Approx(d3 * d3 + 3 * d2 * d2 + d1 * d1).epsilon(1e-11));
  }
}

TEST_CASE("laguerre recursion matches the explicit forms") {
  std::mt19937_64 rng(11);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto g = hft::make_laguerre(p);
    for (int s = 0; s < 200; ++s) {
      const double x = 0.01 + 39.99 * hft::uniform_from_bits(rng());
      const Jet f = random_jet(rng, x);
      for (int n = 1; n <= 3; ++n) {
        const double rec = hft::gamma_n_recursive(g, f, n);
        const double ref = hft::laguerre_gamma_explicit(p, x, f, n);
        CHECK(std::abs(rec - ref) <= 1e-10 * (1.0 + std::abs(ref)));
      }
    }
  }
}

TEST_CASE("laguerre explicit spot values") {
  // p = 3/2, x = 1, f = x: Gamma2 = (p+x)/2, Gamma3 = (3p+x)/4
  CHECK(hft::laguerre_gamma_explicit(1.5, 1.0, 1.0, 0.0, 0.0, 2) ==
        doctest::Approx(1.25));
  CHECK(hft::laguerre_gamma_explicit(1.5, 1.0, 1.0, 0.0, 0.0, 3) ==
        doctest::Approx(1.375));
}

TEST_CASE("gamma3 is independent of the 4th Taylor coefficient") {
  const auto g = hft::make_ou();
  const auto lag = hft::make_laguerre(2.0);
  std::vector<double> c{1.0, -2.0, 3.0, 0.5, 0.0};
  for (const auto* gen : {&g, &lag}) {
    const double x = gen->kind() == Generator1D::Kind::kOu ? 0.8 : 2.3;
    c[4] = 0.0;
    const double base = hft::gamma_n_recursive(*gen, Jet::polynomial(x, c), 3);
    c[4] = 1.0;
    const double bumped = hft::gamma_n_recursive(*gen, Jet::polynomial(x, c), 3);
    CHECK(std::abs(bumped - base) <= 1e-9 * (1.0 + std::abs(base)));
  }
}

TEST_CASE("bilinear form satisfies the polarization identity") {
  const auto g = hft::make_laguerre(2.0);
  std::mt19937_64 rng(17);
  const double x = 1.7;
  const Jet f = random_jet(rng, x), h = random_jet(rng, x);
  for (int n = 1; n <= 3; ++n) {
    const double direct = hft::gamma_n_bilinear(g, f, h, n);
    const double polarized = 0.25 * (hft::gamma_n_recursive(g, f + h, n) -
                                     hft::gamma_n_recursive(g, f - h, n));
    CHECK(direct == doctest::Approx(polarized).epsilon(1e-9));
  }
}

TEST_CASE("bilinearity of the bilinear form") {
  const auto g = hft::make_laguerre(1.5);
  std::mt19937_64 rng(13);
  const double x = 3.1;
  const Jet f = random_jet(rng, x), h = random_jet(rng, x), k = random_jet(rng, x);
  for (int n = 1; n <= 2; ++n) {
    const double lhs = hft::gamma_n_bilinear(g, f + 2.0 * h, k, n);
    const double rhs = hft::gamma_n_bilinear(g, f, k, n) +
                       2.0 * hft::gamma_n_bilinear(g, h, k, n);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    // symmetry
    CHECK(hft::gamma_n_bilinear(g, f, h, n) ==
          doctest::Approx(hft::gamma_n_bilinear(g, h, f, n)).epsilon(1e-10));
    // diagonal consistency
    CHECK(hft::gamma_n_bilinear(g, f, f, n) ==
          doctest::Approx(hft::gamma_n_recursive(g, f, n)).epsilon(1e-10));
  }
}

TEST_CASE("jet order preconditions") {
  const auto g = hft::make_ou();
  const Jet low = Jet::variable(0.0, 2);  // order 2 AD jet
  CHECK_NOTHROW((void)hft::gamma_n_recursive(g, low, 2));
  CHECK_THROWS_AS((void)hft::gamma_n_recursive(g, low, 3), std::invalid_argument);
  CHECK_THROWS_AS((void)hft::gamma_n_recursive(g, low, 4), std::invalid_argument);
}

TEST_CASE("curvature certification") {
  const auto ou = hft::make_ou();
  for (int n : {1, 2}) {
    const auto rep = hft::certify_curvature(ou, n, 1.0, 2000, 99);
    CHECK(rep.pass);
    CHECK(rep.min_margin >= -1e-9);
  }
  for (double p : {1.5, 2.0, 3.0}) {
    const auto lag = hft::make_laguerre(p);
    for (int n : {1, 2}) {
      const auto rep = hft::certify_curvature(lag, n, 0.5, 2000, 99);
      CHECK(rep.pass);
    }
  }
  // an inflated rho must fail: Gamma2 - 1.5 Gamma1 < 0 for pure-slope jets
  const auto bad = hft::certify_curvature(ou, 1, 1.5, 2000, 99);
  CHECK_FALSE(bad.pass);
}
