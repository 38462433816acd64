#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dkl/errors.hpp"

namespace dkl {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }

  /// int_a^b f(x) dx.
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return half * s;
  }
};

inline constexpr int kMaxQuadratureOrder = 64;

namespace quadrature_detail {

// Newton iteration on P_n from the Chebyshev-like initial guesses, in long
// double so that the rounded doubles are correct to the last bit or so.
inline GaussLegendreRule compute_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const long double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    // Re-evaluate the derivative at the converged node.
    long double p0 = 1, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const long double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1;
    dp = n * (x * p1 - p0) / (x * x - 1);
    const long double w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = static_cast<double>(-x);
    rule.nodes[n - 1 - i] = static_cast<double>(x);
    rule.weights[i] = rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace quadrature_detail

/// Shared immutable rule of the given order (1..64).
inline const GaussLegendreRule& gauss_legendre(int order) {
  require(order >= 1 && order <= kMaxQuadratureOrder, ErrorKind::domain,
          "Gauss-Legendre order must lie in [1, 64], got " + std::to_string(order));
  static const auto rules = [] {
    std::array<GaussLegendreRule, kMaxQuadratureOrder + 1> all{};
    for (int n = 1; n <= kMaxQuadratureOrder; ++n) all[n] = quadrature_detail::compute_rule(n);
    return all;
  }();
  return rules[order];
}

}  // namespace dkl
