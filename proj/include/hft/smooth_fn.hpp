#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hft/jet.hpp"

namespace hft {

/**
 * A scalar test function carrying an exact Taylor-jet evaluation path next to
 * the plain one, so semigroup backends can differentiate it to any needed
 * order without finite differences.  Construct from a single generic lambda
 * that compiles on both double and Jet arguments.
 *
 * `positive` marks functions that are strictly positive on the generator's
 * domain; the local log-Sobolev inequality is only checked for those.
 */
class SmoothFn {
 public:
  SmoothFn() = default;

  template <class F>
  static SmoothFn make(std::string name, F f, bool positive = false) {
    SmoothFn s;
    s.name_ = std::move(name);
    s.positive_ = positive;
    s.value_ = [f](double x) { return f(x); };
    s.jet_ = [f](const Jet& x) { return f(x); };
    s.id_ = next_id();
    return s;
  }

  double operator()(double x) const { return value_(x); }
  double value(double x) const { return value_(x); }

  /// k-th derivative at x, exact via an order-k jet.
  double derivative(double x, int k) const {
    if (k == 0) return value_(x);
    return jet_(Jet::variable(x, k)).derivative(k);
  }

  Jet jet(const Jet& seed) const { return jet_(seed); }

  const std::string& name() const { return name_; }
  bool positive() const { return positive_; }

  /// Stable identity used by backends to cache per-function state.
  std::uint64_t id() const { return id_; }

  explicit operator bool() const { return static_cast<bool>(value_); }

 private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  std::string name_;
  bool positive_ = false;
  std::function<double(double)> value_;
  std::function<Jet(const Jet&)> jet_;
  std::uint64_t id_ = 0;
};

SmoothFn constant_one();

/**
 * Ten-function verification suite for the Gaussian space: eigenfunctions of
 * the generator (x is the slowest mode and saturates the gradient
 * commutation), exponentials, and assorted bounded non-polynomial shapes.
 */
std::vector<SmoothFn> ou_test_suite();

/// Ten-function suite for the gamma space with parameter p; includes the
/// first two generator eigenfunctions and the sqrt-potential density shape.
std::vector<SmoothFn> laguerre_test_suite(double p);

}  // namespace hft
