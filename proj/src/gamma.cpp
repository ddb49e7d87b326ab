#include "hft/gamma.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace hft {

namespace {

int required_order(int n) {
  switch (n) {
    case 0: return 0;
    case 1: return 1;
    case 2: return 2;
    case 3: return 4;
    default:
      throw std::invalid_argument("gamma_n: n must be in 0..3, got " +
                                  std::to_string(n));
  }
}

/// bilinear Gamma_n(u,v) as a polynomial jet; inputs must be polynomial jets.
/// The recursion is taken on the bilinear form itself rather than through the
/// polarization identity: polarizing Gamma_n(f, Lf) subtracts nearly equal
/// Gamma values whenever Lf dominates f and costs ~5 bits at large x, which
/// would breach the 1e-10 agreement tolerance against the closed forms.
Jet gamma_bilinear_jet(const Generator1D& gen, const Jet& u, const Jet& v,
                       int n) {
  if (n == 0) return u * v;
  const Jet prev = gamma_bilinear_jet(gen, u, v, n - 1);
  const Jet cross_uv = gamma_bilinear_jet(gen, u, gen.apply(v), n - 1);
  const Jet cross_vu = gamma_bilinear_jet(gen, v, gen.apply(u), n - 1);
  return 0.5 * (gen.apply(prev) - cross_uv - cross_vu);
}

Jet gamma_unary(const Generator1D& gen, const Jet& u, int n) {
  return gamma_bilinear_jet(gen, u, u, n);
}

}  // namespace

Jet gamma_n_jet(const Generator1D& gen, const Jet& fjet, int n) {
  // cap is the knowledge bound: polynomial jets know every coefficient,
  // truncated jets must carry at least the required order
  const int need = required_order(n);
  if (fjet.cap() < need)
    throw std::invalid_argument(
        "gamma_n_jet: n=" + std::to_string(n) + " requires jet order >= " +
        std::to_string(need) + ", got " + std::to_string(fjet.cap()));
  return gamma_unary(gen, fjet.as_polynomial(), n);
}

double gamma_n_recursive(const Generator1D& gen, const Jet& fjet, int n) {
  return gamma_n_jet(gen, fjet, n).value();
}

double gamma_n_bilinear(const Generator1D& gen, const Jet& fjet,
                        const Jet& hjet, int n) {
  const int need = required_order(n);
  if (fjet.cap() < need || hjet.cap() < need)
    throw std::invalid_argument("gamma_n_bilinear: n=" + std::to_string(n) +
                                " requires jet order >= " +
                                std::to_string(need));
  return gamma_bilinear_jet(gen, fjet.as_polynomial(), hjet.as_polynomial(), n)
      .value();
}

double laguerre_gamma_explicit(double p, double x, double d1, double d2,
                               double d3, int n) {
  switch (n) {
    case 1:
      return x * d1 * d1;
    case 2:
      return x * x * d2 * d2 + x * d1 * d2 + 0.5 * (p + x) * d1 * d1;
    case 3:
      return x * x * x * d3 * d3 + 3.0 * x * x * d2 * d3 +
             1.5 * (p + x) * x * d2 * d2 + 1.5 * x * d2 * d2 +
             1.5 * x * d1 * d2 + 0.25 * (3.0 * p + x) * d1 * d1;
    default:
      throw std::invalid_argument("laguerre_gamma_explicit: n must be 1, 2 or 3");
  }
}

double laguerre_gamma_explicit(double p, double x, const Jet& fjet, int n) {
  const double d1 = fjet.cap() >= 1 ? fjet.derivative(1) : 0.0;
  const double d2 = fjet.cap() >= 2 ? fjet.derivative(2) : 0.0;
  const double d3 = fjet.cap() >= 3 ? fjet.derivative(3) : 0.0;
  if (n >= 2 && fjet.cap() < 2)
    throw std::invalid_argument("laguerre_gamma_explicit: jet order too low");
  if (n >= 3 && fjet.cap() < 3)
    throw std::invalid_argument("laguerre_gamma_explicit: jet order too low");
  return laguerre_gamma_explicit(p, x, d1, d2, d3, n);
}

double uniform_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

CurvatureReport certify_curvature(const Generator1D& gen, int n, double rho,
                                  int samples, std::uint64_t seed) {
  if (n < 1 || n > 2)
    throw std::invalid_argument("certify_curvature: n must be 1 or 2");
  if (samples < 1) throw std::invalid_argument("certify_curvature: samples < 1");

  double lo, hi;
  switch (gen.kind()) {
    case Generator1D::Kind::kOu:
      lo = -6.0;
      hi = 6.0;
      break;
    case Generator1D::Kind::kLaguerre:
      lo = 1e-3;
      hi = 40.0;
      break;
    default:
      lo = gen.quad_lo();
      hi = gen.quad_hi();
  }

  std::mt19937_64 rng(seed);
  CurvatureReport rep;
  rep.n = n;
  rep.rho = rho;
  rep.samples = samples;
  rep.seed = seed;
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.min_margin_normalized = std::numeric_limits<double>::infinity();

  for (int s = 0; s < samples; ++s) {
    const double x = lo + (hi - lo) * uniform_from_bits(rng());
    std::vector<double> coef(5);
    for (double& c : coef) c = -10.0 + 20.0 * uniform_from_bits(rng());
    const Jet f = Jet::polynomial(x, coef);
    const double gn = gamma_n_recursive(gen, f, n);
    const double gn1 = gamma_n_recursive(gen, f, n + 1);
    const double margin = gn1 - rho * gn;
    const double norm = margin / (1.0 + std::abs(gn1) + std::abs(gn));
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.worst = {x, coef, gn, gn1};
    }
    rep.min_margin_normalized = std::min(rep.min_margin_normalized, norm);
  }
  rep.pass = rep.min_margin >= -1e-9;
  return rep;
}

}  // namespace hft
