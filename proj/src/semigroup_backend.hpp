#pragma once

#include <functional>
#include <memory>

#include "hft/generator.hpp"
#include "hft/smooth_fn.hpp"

namespace hft::detail {

/// Internal backend contract shared by the three semigroup realizations.
class SemigroupBackend {
 public:
  virtual ~SemigroupBackend() = default;

  /// k-th x-derivative of (P_t f)(x); k in [0, max_derivative_order()].
  virtual double eval(const SmoothFn& f, double t, double x, int k) const = 0;

  /// P_t applied to a value-only function (no derivatives available).
  virtual double eval_values(const std::function<double(double)>& f, double t,
                             double x) const = 0;

  virtual int max_derivative_order() const = 0;
};

std::shared_ptr<const SemigroupBackend> make_mehler_backend(
    const Generator1D& gen, int quadrature_order);
std::shared_ptr<const SemigroupBackend> make_spectral_backend(
    const Generator1D& gen, int truncation);
std::shared_ptr<const SemigroupBackend> make_fd_backend(const Generator1D& gen,
                                                        int points, double dt,
                                                        bool richardson);

}  // namespace hft::detail
