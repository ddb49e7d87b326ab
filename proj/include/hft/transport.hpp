#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "hft/generator.hpp"
#include "hft/potential.hpp"
#include "hft/semigroup.hpp"
#include "hft/smooth_fn.hpp"

namespace hft {

/// The explicit Lipschitz constant exp(sqrt(2 pi / rho2) K e^{K^2/(2 rho1)})
/// of the heat-flow map for a K-Lipschitz log-density perturbation.
double theorem_bound(double rho1, double rho2, double K);

/// Integration horizon (1/rho1) log(K / (rho1 eps)): the residual metric
/// displacement of the flow past t_max is at most eps.  K = 0 returns 0.
double choose_t_max(double K, double rho1, double eps);

/// Drift of the interpolation flow: returns d/dx of V_t = -log P_t f.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual double dx_v(double t, double x) const = 0;
  /// Metric clamp range for characteristics driven by this field.
  virtual double zeta_lo() const = 0;
  virtual double zeta_hi() const = 0;
};

struct TransportOptions {
  double ode_tol = 1e-8;
  double eps_horizon = 1e-6;
  int grid_points = 201;
  std::vector<double> grid;  // optional explicit evaluation grid
};

/**
 * Immutable bundle describing one transport construction: target measure
 * d nu = e^{-V} d mu through its normalized potential, the semigroup
 * evaluator of the interpolation P_t e^{-V}, the certified constant K, the
 * horizon, and the evaluation grid.
 */
struct HeatFlowProblem {
  Generator1D gen;
  Potential pot;           // normalized; certified_k() is the K below
  SemigroupEvaluator evaluator;
  SmoothFn target_density;  // e^{-V}, strictly positive
  double K = 0.0;
  double t_max = 0.0;
  double ode_tol = 1e-8;
  double eps_horizon = 1e-6;
  std::vector<double> grid;
  std::shared_ptr<const VelocityField> field;
};

/// Normalizes and certifies the potential, builds the evaluator and the
/// velocity field (precomputed time-slice lattice for the finite-difference
/// backend, direct evaluation otherwise) and the default evaluation grid.
HeatFlowProblem make_problem(const Generator1D& gen, const Potential& pot,
                             const SemigroupConfig& cfg,
                             const TransportOptions& opt = {});

/// d/dx V_t(x) = -(d/dx P_t f)(x) / P_t f(x).
double velocity(const HeatFlowProblem& prob, double t, double x);

struct TransportPointResult {
  double value = 0.0;
  int steps = 0;
  int rejected = 0;
  int clamped = 0;
  double ode_error = 0.0;  // accumulated local error estimate, x units
};

/// Backward characteristic through (t_max, x) evaluated at time 0; the
/// transport map T with T#mu = nu up to horizon and ODE tolerances.
TransportPointResult transport_eval_full(const HeatFlowProblem& prob,
                                         double x);
double transport_eval(const HeatFlowProblem& prob, double x);

struct TransportMapGrid {
  std::vector<double> points;
  std::vector<double> values;
  std::vector<double> derivative;  // d T / d x, 4th-order differences
  double lipschitz = 1.0;          // measured, generator metric
  double bound = 1.0;              // theorem bound for (rho1, rho2, K)
  double horizon_tail = 0.0;       // (K/rho1) e^{-rho1 t_max}
  double ode_error = 0.0;          // worst per-point accumulated estimate
  int clamped = 0;                 // domain-exit clamps over the whole grid
};

/// Maps the problem grid; throws if the result is not strictly increasing.
TransportMapGrid transport_grid(const HeatFlowProblem& prob);

/// sup over adjacent grid pairs of the intrinsic-metric difference ratio.
double lipschitz_estimate(const std::vector<double>& xs,
                          const std::vector<double>& ts,
                          const Generator1D& gen);

/// Worst metric-norm excess sqrt(a)|dx V_t| - K e^{-rho1 t} over the lattice;
/// nonpositive means the exponential decay envelope holds.
double velocity_decay_excess(const HeatFlowProblem& prob,
                             const std::vector<double>& times,
                             const std::vector<double>& xs);

struct HessianCheckResult {
  bool pass = false;
  double worst_excess = 0.0;  // max over lattice of lhs - rhs
  double worst_ratio = 0.0;   // max of lhs / rhs
  double t_at = 0.0;
  double x_at = 0.0;
};

/// Pointwise check of the proof's integrand estimate: the intrinsic second
/// derivative of -log P_t f is at most K sqrt(1/t) e^{-rho2 t/2} e^{K^2/(2
/// rho1)} on the schedule-by-grid lattice.
HessianCheckResult hessian_log_pt_bound_check(const HeatFlowProblem& prob,
                                              const std::vector<double>& times,
                                              const std::vector<double>& xs,
                                              double tol = 1e-6);

namespace detail {

struct OdeResult {
  double y = 0.0;
  int steps = 0;
  int rejected = 0;
  int clamped = 0;
  double err_sum = 0.0;
};

/// Adaptive Dormand-Prince 4(5) for a scalar nonautonomous ODE on [s0, s1].
/// max_step(s) caps the step size; clamp(y) projects the state back into the
/// admissible range after each accepted step.
OdeResult dopri5(const std::function<double(double, double)>& rhs, double s0,
                 double s1, double y0, double tol,
                 const std::function<double(double)>& max_step,
                 const std::function<double(double)>& clamp);

// tableau accessors so tests can assert the order conditions
const std::array<std::array<double, 7>, 7>& dopri5_a();
const std::array<double, 7>& dopri5_b();
const std::array<double, 7>& dopri5_bhat();
const std::array<double, 7>& dopri5_c();

/// Fornberg finite-difference weights for the m-th derivative at x0 from the
/// given nodes; used for the 4th-order derivative profile of grid maps.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& xs,
                                     int m);

}  // namespace detail

}  // namespace hft
