#pragma once

#include <string>
#include <vector>

#include "hft/generator.hpp"
#include "hft/measures.hpp"
#include "hft/potential.hpp"
#include "hft/semigroup.hpp"
#include "hft/smooth_fn.hpp"
#include "hft/transport.hpp"

namespace hft {

/**
 * Outcome of one numerical check.  `margin` is the smallest slack observed
 * (right side minus left side in the check's native scale); a negative margin
 * beyond the check's tolerance flips `pass`.  Reports are deterministic given
 * the fingerprint: no randomness enters any check.
 */
struct VerificationReport {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string worst_witness;
  std::string fingerprint;
};

/// Constant transferred to the perturbed measure's Poincare and log-Sobolev
/// inequalities: exp(2 sqrt(2 pi / rho2) K e^{K^2/(2 rho1)}), the square of
/// the transport map's Lipschitz bound.
double transfer_constant(double rho1, double rho2, double K);

/// Gamma_n of the semigroup image P_t f at x, assembled from backend
/// derivatives (orders up to 3; the unseen 4th coefficient never enters).
double gamma_n_of_pt(const SemigroupEvaluator& ev, const SmoothFn& f, double t,
                     double x, int n);

/// Gamma_n(f)(x) for a smooth function, exact through its jet.
double gamma_n_of_fn(const Generator1D& gen, const SmoothFn& f, double x,
                     int n);

/**
 * The three pointwise semigroup inequalities for n in {1, 2} over the
 * schedule x grid:
 *
 *   Gamma_n(P_t f) <= e^{-2 rho_n t} P_t(Gamma_n f)
 *   Gamma_n(P_t f) <= (1/2t)        P_t(Gamma_{n-1} f)
 *   Gamma_n(P_t f) <= (1/t) e^{-rho_n t} P_t(Gamma_{n-1} f)
 *
 * with Gamma_0(f) = f^2.  PASS iff no violation exceeds 1e-7 absolute.
 */
VerificationReport semigroup_inequality_suite(const SemigroupEvaluator& ev,
                                              const std::vector<SmoothFn>& fns,
                                              const std::vector<double>& ts,
                                              const std::vector<double>& xs);

/**
 * Interpolant derivative identity: with L_n(s) = P_s(Gamma_n(P_{t-s} f)),
 * checks dL_n/ds = 2 P_s(Gamma_{n+1}(P_{t-s} f)) by centered differences
 * (PASS iff relative error <= 1e-4) and that L_n is non-decreasing over the
 * schedule.  Requires n in {0, 1, 2} and schedule points inside (0, t).
 */
VerificationReport interpolant_derivative_check(const SemigroupEvaluator& ev,
                                                const SmoothFn& f, int n,
                                                double t,
                                                const std::vector<double>& ss,
                                                const std::vector<double>& xs);

/**
 * Moment bound under the time-t transition law from x: for g with
 * sqrt(Gamma(g)) <= lip,
 *
 *   ||e^g||_{L^p} <= exp(lip^2 (p-q) lambda / 2) ||e^g||_{L^q},
 *   lambda = (1 - e^{-2 rho1 t}) / rho1.
 *
 * Margin is in log scale; PASS iff no violation beyond 1e-8.
 */
VerificationReport herbst_moment_check(const SemigroupEvaluator& ev,
                                       const SmoothFn& g, double lip, double p,
                                       double q, const std::vector<double>& ts,
                                       const std::vector<double>& xs);

/**
 * Poincare and log-Sobolev inequalities for the perturbed measure
 * dnu = e^{-V} dmu with the transferred constant:
 *
 *   Var_nu(g)   <= (C/rho1)   Int Gamma(g) dnu
 *   Ent_nu(g^2) <= (2C/rho1)  Int Gamma(g) dnu
 *
 * PASS iff no violation beyond 1e-8 relative.  Needs >= 10 test functions.
 */
VerificationReport poincare_transfer_check(const Generator1D& gen,
                                           const Potential& pot,
                                           double transfer,
                                           const std::vector<SmoothFn>& fns);

/**
 * Gamma-space growth estimate |T'(x)| <= C sqrt(x): reports the profile
 * sup |T'|/sqrt(x) globally and restricted to x >= 1; PASS iff the restricted
 * supremum stays within the measured metric Lipschitz constant (the identity
 * map already saturates 1/sqrt(x_min) at the left edge, so the global profile
 * is diagnostic only).  Errors on non-gamma generators.
 */
VerificationReport growth_check(const TransportMapGrid& map,
                                const Generator1D& gen);

/// Sup-norm and metric discrepancy between the heat-flow map and the
/// quantile coupling on the central 99%-mass part of the grid.
VerificationReport compare_transport_to_monge(const TransportMapGrid& map,
                                              const MeasureCDF& mu,
                                              const MeasureCDF& nu,
                                              const Generator1D& gen,
                                              double tol = 1e-3);

}  // namespace hft
