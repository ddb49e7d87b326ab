#include "hft/smooth_fn.hpp"

#include <cmath>

namespace hft {

namespace {

// pulls the double overloads into scope so the generic lambdas below resolve
// on double through these and on Jet through ADL
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tanh;

}  // namespace

SmoothFn constant_one() {
  return SmoothFn::make("one", [](auto x) { return 0.0 * x + 1.0; }, true);
}

std::vector<SmoothFn> ou_test_suite() {
  std::vector<SmoothFn> fns;
  fns.push_back(constant_one());
  fns.push_back(SmoothFn::make("x", [](auto x) { return x; }));
  fns.push_back(SmoothFn::make(
      "hermite2", [](auto x) { return (x * x - 1.0) / sqrt(2.0); }));
  fns.push_back(SmoothFn::make(
      "hermite3", [](auto x) { return (x * x * x - 3.0 * x) / sqrt(6.0); }));
  fns.push_back(SmoothFn::make("exp(-x)", [](auto x) { return exp(-x); },
                               true));
  fns.push_back(SmoothFn::make("gauss_sin", [](auto x) {
    return exp(-0.5 * x * x) * sin(3.0 * x);
  }));
  fns.push_back(SmoothFn::make("tanh", [](auto x) { return tanh(x); }));
  fns.push_back(
      SmoothFn::make("log1px2", [](auto x) { return log(1.0 + x * x); }));
  fns.push_back(SmoothFn::make("2+cos", [](auto x) { return 2.0 + cos(x); },
                               true));
  fns.push_back(SmoothFn::make(
      "cauchy", [](auto x) { return 1.0 / (1.0 + x * x); }, true));
  return fns;
}

std::vector<SmoothFn> laguerre_test_suite(double p) {
  std::vector<SmoothFn> fns;
  fns.push_back(constant_one());
  // orthonormal eigenfunctions from the three-term recurrence:
  //   sqrt((n+1)(n+p)) l_{n+1} = (2n+p-x) l_n - sqrt(n(n+p-1)) l_{n-1}
  fns.push_back(SmoothFn::make(
      "eigen1", [p](auto x) { return (p - x) / sqrt(p); }));
  fns.push_back(SmoothFn::make("eigen2", [p](auto x) {
    return ((2.0 + p - x) * (p - x) / sqrt(p) - sqrt(p)) /
           sqrt(2.0 * (p + 1.0));
  }));
  fns.push_back(SmoothFn::make("x", [](auto x) { return x; }));
  fns.push_back(SmoothFn::make("x^2", [](auto x) { return x * x; }));
  fns.push_back(SmoothFn::make(
      "exp(-2sqrt(x))", [](auto x) { return exp(-2.0 * sqrt(x)); }, true));
  fns.push_back(SmoothFn::make("exp(-x/2)",
                               [](auto x) { return exp(-0.5 * x); }, true));
  fns.push_back(
      SmoothFn::make("x*exp(-x)", [](auto x) { return x * exp(-x); }));
  fns.push_back(
      SmoothFn::make("log(1+x)", [](auto x) { return log(1.0 + x); }));
  fns.push_back(SmoothFn::make(
      "1/(1+x)", [](auto x) { return 1.0 / (1.0 + x); }, true));
  return fns;
}

}  // namespace hft
