#include "hft/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hft {

namespace {

/// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix built from the
/// orthonormal three-term recurrence, weights are mass * (first eigenvector
/// component)^2.
QuadRule golub_welsch(const std::vector<double>& diag,
                      const std::vector<double>& offdiag, double mass) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = diag[static_cast<size_t>(i)];
    if (i + 1 < n) {
      J(i, i + 1) = offdiag[static_cast<size_t>(i)];
      J(i + 1, i) = offdiag[static_cast<size_t>(i)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("golub_welsch: eigensolver failed");
  QuadRule rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[static_cast<size_t>(i)] = mass * v0 * v0;
  }
  return rule;
}

struct LaguerreNodeData {
  double newton_step;     // l_n(x) / l_n'(x), scale-free
  double log_inv_weight;  // log sum_{m<n} l_m(x)^2, the Christoffel reciprocal
};

/// Runs the orthonormal gamma-Laguerre recurrence at fixed x with periodic
/// rescaling so the growth region past the last zero cannot overflow.
LaguerreNodeData laguerre_node_data(int n, double p, double x) {
  double lm1 = 0.0, l0 = 1.0;
  double dm1 = 0.0, d0 = 0.0;
  double sum = 1.0;        // running sum of l_m^2 in the current scale
  double log_scale = 0.0;  // true value = stored value * exp(log_scale)
  double am1 = 0.0;
  constexpr double kRescaleAt = 1e120;
  for (int m = 0; m < n; ++m) {
    const double am = std::sqrt((m + 1.0) * (m + p));
    const double c = x - (2.0 * m + p);
    const double l1 = (c * l0 - am1 * lm1) / am;
    const double d1 = (c * d0 + l0 - am1 * dm1) / am;
    lm1 = l0;
    l0 = l1;
    dm1 = d0;
    d0 = d1;
    if (m + 1 < n) sum += l0 * l0;
    if (std::abs(l0) > kRescaleAt || std::abs(d0) > kRescaleAt) {
      constexpr double r = 1.0 / kRescaleAt;
      lm1 *= r;
      l0 *= r;
      dm1 *= r;
      d0 *= r;
      sum *= r * r;
      log_scale += std::log(kRescaleAt);
    }
    am1 = am;
  }
  LaguerreNodeData out;
  out.newton_step = l0 / d0;
  out.log_inv_weight = std::log(sum) + 2.0 * log_scale;
  return out;
}

/// Same recurrence walk for the orthonormal probabilists' Hermite family
/// (x h_m = sqrt(m+1) h_{m+1} + sqrt(m) h_{m-1}).
LaguerreNodeData hermite_node_data(int n, double x) {
  double lm1 = 0.0, l0 = 1.0;
  double dm1 = 0.0, d0 = 0.0;
  double sum = 1.0;
  double log_scale = 0.0;
  double am1 = 0.0;
  constexpr double kRescaleAt = 1e120;
  for (int m = 0; m < n; ++m) {
    const double am = std::sqrt(m + 1.0);
    const double l1 = (x * l0 - am1 * lm1) / am;
    const double d1 = (x * d0 + l0 - am1 * dm1) / am;
    lm1 = l0;
    l0 = l1;
    dm1 = d0;
    d0 = d1;
    if (m + 1 < n) sum += l0 * l0;
    if (std::abs(l0) > kRescaleAt || std::abs(d0) > kRescaleAt) {
      constexpr double r = 1.0 / kRescaleAt;
      lm1 *= r;
      l0 *= r;
      dm1 *= r;
      d0 *= r;
      sum *= r * r;
      log_scale += std::log(kRescaleAt);
    }
    am1 = am;
  }
  LaguerreNodeData out;
  out.newton_step = l0 / d0;
  out.log_inv_weight = std::log(sum) + 2.0 * log_scale;
  return out;
}

std::mutex cache_mutex;

const QuadRule& cached_legendre(int n) {
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> diag(static_cast<size_t>(n), 0.0);
    std::vector<double> off(static_cast<size_t>(n > 0 ? n - 1 : 0));
    for (int k = 0; k + 1 < n; ++k) {
      const double kk = static_cast<double>(k + 1);
      off[static_cast<size_t>(k)] = kk / std::sqrt(4.0 * kk * kk - 1.0);
    }
    it = cache.emplace(n, golub_welsch(diag, off, 2.0)).first;
  }
  return it->second;
}

}  // namespace

QuadRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  return cached_legendre(n);
}

QuadRule gauss_legendre(int n, double lo, double hi) {
  QuadRule base = gauss_legendre(n);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (size_t i = 0; i < base.nodes.size(); ++i) {
    base.nodes[i] = mid + half * base.nodes[i];
    base.weights[i] *= half;
  }
  return base;
}

QuadRule gauss_hermite_prob(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_prob: n < 1");
  std::vector<double> diag(static_cast<size_t>(n), 0.0);
  std::vector<double> off(static_cast<size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k)
    off[static_cast<size_t>(k)] = std::sqrt(static_cast<double>(k + 1));
  QuadRule rule = golub_welsch(diag, off, 1.0);
  // eigenvector weights at the outermost nodes are noise near eps^2 and get
  // amplified by exponentially growing integrands; rebuild them from the
  // Christoffel identity as for the gamma rule
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    double x = rule.nodes[i];
    for (int iter = 0; iter < 2; ++iter) {
      const double step = hermite_node_data(n, x).newton_step;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    if (!std::isfinite(x)) x = rule.nodes[i];
    rule.nodes[i] = x;
    rule.weights[i] = std::exp(-hermite_node_data(n, x).log_inv_weight);
  }
  return rule;
}

QuadRule gauss_laguerre_gamma(int n, double p) {
  if (n < 1) throw std::invalid_argument("gauss_laguerre_gamma: n < 1");
  if (p <= 0.0) throw std::invalid_argument("gauss_laguerre_gamma: p <= 0");
  std::vector<double> diag(static_cast<size_t>(n));
  std::vector<double> off(static_cast<size_t>(n - 1));
  for (int k = 0; k < n; ++k) {
    diag[static_cast<size_t>(k)] = 2.0 * k + p;
    if (k + 1 < n)
      off[static_cast<size_t>(k)] =
          std::sqrt(static_cast<double>(k + 1) * (static_cast<double>(k) + p));
  }
  QuadRule rule = golub_welsch(diag, off, 1.0);
  // Eigenvector-based weights are absolute-error limited near eps^2, so far
  // nodes whose true weights sit below ~1e-25 come back as pure noise, which
  // weighted-recurrence consumers then amplify by the polynomial growth
  // factor at those nodes. Polish each node with two Newton steps and
  // recompute every weight from the Christoffel identity, which underflows
  // to an honest zero instead.
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    double x = rule.nodes[i];
    for (int iter = 0; iter < 2; ++iter) {
      const double step = laguerre_node_data(n, p, x).newton_step;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    if (!(x > 0.0)) x = rule.nodes[i];
    rule.nodes[i] = x;
    rule.weights[i] = std::exp(-laguerre_node_data(n, p, x).log_inv_weight);
  }
  return rule;
}

namespace {

struct Panel {
  double lo, hi, tol;
  int depth;
};

double panel_estimate(const std::function<double(double)>& f, double lo,
                      double hi, const QuadRule& r15, const QuadRule& r31,
                      double& coarse) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double i15 = 0.0, i31 = 0.0;
  for (size_t i = 0; i < r15.nodes.size(); ++i)
    i15 += r15.weights[i] * f(mid + half * r15.nodes[i]);
  for (size_t i = 0; i < r31.nodes.size(); ++i)
    i31 += r31.weights[i] * f(mid + half * r31.nodes[i]);
  coarse = half * i15;
  return half * i31;
}

}  // namespace

QuadResult adaptive_quad_full(const std::function<double(double)>& f, double lo,
                              double hi, double abs_tol, int max_depth) {
  if (!(hi > lo)) {
    if (hi == lo) return {0.0, 0.0, 0};
    throw std::invalid_argument("adaptive_quad: hi < lo");
  }
  const QuadRule& r15 = gauss_legendre(15);
  const QuadRule& r31 = gauss_legendre(31);
  QuadResult out;
  std::vector<Panel> stack{{lo, hi, abs_tol, 0}};
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    double coarse = 0.0;
    const double fine = panel_estimate(f, p.lo, p.hi, r15, r31, coarse);
    out.evaluations += 46;
    const double err = std::abs(fine - coarse);
    if (err <= p.tol || p.depth >= max_depth) {
      out.value += fine;
      out.error += err;
      continue;
    }
    const double mid = 0.5 * (p.lo + p.hi);
    stack.push_back({p.lo, mid, 0.5 * p.tol, p.depth + 1});
    stack.push_back({mid, p.hi, 0.5 * p.tol, p.depth + 1});
  }
  return out;
}

double adaptive_quad(const std::function<double(double)>& f, double lo,
                     double hi, double abs_tol) {
  return adaptive_quad_full(f, lo, hi, abs_tol).value;
}

double composite_gl(const std::function<double(double)>& f, double lo,
                    double hi, int panels, int n) {
  if (panels < 1) throw std::invalid_argument("composite_gl: panels < 1");
  const QuadRule& rule = gauss_legendre(n);
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = lo + k * h, b = a + h;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
      s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * s;
  }
  return total;
}

}  // namespace hft
