#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hft/generator.hpp"
#include "hft/smooth_fn.hpp"

namespace hft {

namespace detail {
class SemigroupBackend;
}

enum class Backend { kMehler, kSpectral, kFiniteDifference };

std::string backend_name(Backend b);

struct SemigroupConfig {
  Backend backend = Backend::kMehler;
  int quadrature_order = 128;  // MEHLER: Gauss-Hermite nodes
  int truncation = 200;        // SPECTRAL: eigenfunction cutoff N
  int fd_points = 4097;        // FINITE_DIFFERENCE: coarse grid size
  double fd_dt = 1e-3;         // FINITE_DIFFERENCE: Crank-Nicolson step
  bool fd_richardson = true;   // combine with a doubled grid for O(h^4) values
};

/// Thrown when the spectral tail |c_N e^{-N t}| exceeds its tolerance; carries
/// the truncation the decay fit says would be needed.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, int required)
      : std::runtime_error(what), required_truncation(required) {}
  int required_truncation;
};

/**
 * Evaluates (P_t f)(x) and its first few x-derivatives for a model generator
 * by one of three interchangeable numerical realizations:
 *
 *   MEHLER             Gauss-Hermite quadrature of the Gaussian-mixture
 *                      representation (Gaussian space only); the k-th
 *                      derivative commutes to e^{-kt} P_t f^(k) via the
 *                      function's jet.
 *   SPECTRAL           eigenfunction expansion in orthonormal Laguerre
 *                      polynomials (gamma space only); coefficients by
 *                      Gauss quadrature with 2N nodes.
 *   FINITE_DIFFERENCE  conservative-flux Crank-Nicolson marching on a grid
 *                      uniform in the metric coordinate, with spatial
 *                      Richardson combination; works for both spaces and
 *                      serves as the independent cross-check.
 *
 * Evaluators are immutable after construction and evaluation is pure; the
 * internal per-function caches are guarded so concurrent sweeps may share an
 * instance.  Copies share the backend state.
 */
class SemigroupEvaluator {
 public:
  SemigroupEvaluator(const Generator1D& gen, const SemigroupConfig& cfg);

  static SemigroupEvaluator mehler(int quadrature_order = 128);
  static SemigroupEvaluator spectral(double p, int truncation = 200);
  static SemigroupEvaluator finite_difference(const Generator1D& gen,
                                              int points = 4097,
                                              double dt = 1e-3,
                                              bool richardson = true);

  /// (P_t f)(x)
  double pt(const SmoothFn& f, double t, double x) const;

  /// d/dx (P_t f)(x)
  double grad_pt(const SmoothFn& f, double t, double x) const;

  /// k-th x-derivative of (P_t f)(x); k up to 3 (2 for FINITE_DIFFERENCE)
  double deriv_pt(const SmoothFn& f, double t, double x, int k) const;

  /// P_t applied to a function known only pointwise (no derivative path);
  /// used for iterated-semigroup and interpolation checks
  double pt_of_values(const std::function<double(double)>& f, double t,
                      double x) const;

  int max_derivative_order() const;

  const Generator1D& generator() const { return gen_; }
  Backend backend() const { return cfg_.backend; }
  const SemigroupConfig& config() const { return cfg_; }

 private:
  Generator1D gen_;
  SemigroupConfig cfg_;
  std::shared_ptr<const detail::SemigroupBackend> impl_;
};

/// Gaussian-space semigroup value by Mehler quadrature:
/// integrates f(x e^{-t} + sqrt(1-e^{-2t}) z) against the standard Gaussian.
double ou_pt(const SmoothFn& f, double t, double x, int quadrature_order = 128);

/// Gamma-space semigroup value by spectral expansion sum_n e^{-nt} c_n l_n(x).
double laguerre_pt(const SmoothFn& f, double t, double x, double p,
                   int truncation = 200);

/// Nodes of the finite-difference grid for a generator (uniform in the metric
/// coordinate, covering all but ~1e-10 of the invariant mass).
std::vector<double> fd_grid(const Generator1D& gen, int points = 4097);

/// Crank-Nicolson evolution of grid samples to time t on fd_grid(gen, points);
/// zero-flux boundaries, conservative weights.  Aborts if the discrete
/// invariant mass drifts beyond 1e-6 relative.
std::vector<double> fd_pt(const std::vector<double>& values, double t,
                          const Generator1D& gen, int points = 4097,
                          double dt = 1e-3);

/// Fixed time schedule used by all lattice checks; spans the horizons the
/// transport integration visits.
const std::vector<double>& default_time_schedule();

/// Evaluation abscissae covering the central 99%-mass region of the invariant
/// measure, uniformly spaced in x.
std::vector<double> central_mass_lattice(const Generator1D& gen, int n = 25);

struct ErgodicReport {
  double mean = 0.0;         // integral of f against the invariant measure
  double fitted_rate = 0.0;  // least-squares slope of -log deviation vs t
  bool trivial = false;      // deviations at noise level at every time
  bool pass = false;
  std::vector<double> times;
  std::vector<double> deviations;  // max |P_t f - mean| over the lattice
};

/// Checks |P_t f(x) - mean| decays at the spectral-gap rate on the schedule.
ErgodicReport ergodic_limit_check(const SemigroupEvaluator& ev,
                                  const SmoothFn& f,
                                  const std::vector<double>& schedule);

/// |integral(f P_t h dmu) - integral(h P_t f dmu)|; symmetry of P_t in L2(mu).
double symmetry_check(const SemigroupEvaluator& ev, const SmoothFn& f,
                      const SmoothFn& h, double t);

/// max over xs of |P_{t+s} f - P_t(P_s f)|, the composition evaluated through
/// the pointwise-function path.
double semigroup_property_check(const SemigroupEvaluator& ev, const SmoothFn& f,
                                double t, double s,
                                const std::vector<double>& xs);

/// max over the schedule and lattice of |P_t 1 - 1|.
double conservativeness_check(const SemigroupEvaluator& ev,
                              const std::vector<double>& schedule,
                              const std::vector<double>& xs);

/// |integral(P_t f dmu) - integral(f dmu)|.
double mass_invariance_check(const SemigroupEvaluator& ev, const SmoothFn& f,
                             double t);

}  // namespace hft
