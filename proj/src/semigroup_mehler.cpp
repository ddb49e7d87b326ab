#include <cmath>
#include <memory>
#include <stdexcept>

#include "hft/quadrature.hpp"
#include "semigroup_backend.hpp"

namespace hft::detail {

namespace {

/**
 * Gaussian-space semigroup through its Gaussian-mixture representation:
 *   (P_t f)(x) = E[ f(x e^{-t} + sqrt(1-e^{-2t}) Z) ],  Z ~ N(0,1),
 * integrated by Gauss-Hermite quadrature.  Derivatives commute through the
 * mixture as d^k/dx^k P_t f = e^{-kt} P_t f^(k), with f^(k) taken from the
 * function's jet, so every derivative order is evaluated by the same rule.
 */
class MehlerBackend final : public SemigroupBackend {
 public:
  MehlerBackend(const Generator1D& gen, int order) : rule_(gauss_hermite_prob(order)) {
    if (gen.kind() != Generator1D::Kind::kOu)
      throw std::invalid_argument(
          "MEHLER backend requires the Gaussian-space generator");
  }

  double eval(const SmoothFn& f, double t, double x, int k) const override {
    if (k < 0 || k > max_derivative_order())
      throw std::invalid_argument("MEHLER: derivative order out of range");
    if (t == 0.0) return f.derivative(x, k);
    const double decay = std::exp(-t);
    const double sigma = std::sqrt(1.0 - decay * decay);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
      const double y = x * decay + sigma * rule_.nodes[i];
      const double v = k == 0 ? f.value(y) : f.derivative(y, k);
      if (!std::isfinite(v))
        throw std::domain_error(
            "MEHLER: non-finite integrand at quadrature node");
      acc += rule_.weights[i] * v;
    }
    return std::pow(decay, k) * acc;
  }

  double eval_values(const std::function<double(double)>& f, double t,
                     double x) const override {
    if (t == 0.0) return f(x);
    const double decay = std::exp(-t);
    const double sigma = std::sqrt(1.0 - decay * decay);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i)
      acc += rule_.weights[i] * f(x * decay + sigma * rule_.nodes[i]);
    return acc;
  }

  int max_derivative_order() const override { return 3; }

 private:
  QuadRule rule_;
};

}  // namespace

std::shared_ptr<const SemigroupBackend> make_mehler_backend(
    const Generator1D& gen, int quadrature_order) {
  return std::make_shared<MehlerBackend>(gen, quadrature_order);
}

}  // namespace hft::detail
