#pragma once

// The main term x * P_{k-1}(log x) of the summatory function D_k(x).
//
// P_{k-1} is read off the residue of zeta(s)^k x^s / s at s = 1. For k = 2
// it has the closed form log x + 2*gamma - 1. For k = 3, 4 we integrate
// zeta^k(s) (s-1)^{j+1} / s around a circle |s - 1| = 1/4 with 50-digit
// arithmetic and cross-check the result against a least-squares fit of
// exact Riesz means of D_k.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "dkl/divisor_table.hpp"
#include "dkl/errors.hpp"
#include "dkl/fit.hpp"
#include "dkl/summation.hpp"

namespace dkl {

inline constexpr double euler_gamma = std::numbers::egamma;

enum class Provenance { closed_form, residue_oracle };

struct MainTermPolynomial {
  int k = 2;
  std::vector<double> coeffs;  // coeffs[j] multiplies z^j
  Provenance provenance = Provenance::closed_form;

  double evaluate(double z) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// x * P_{k-1}(log x).
  double main_term(double x) const { return x * evaluate(std::log(x)); }
};

namespace residue_detail {

using Real = boost::multiprecision::cpp_bin_float_50;
using Complex = boost::multiprecision::cpp_complex_50;

// Euler-Maclaurin for zeta(s), s != 1. With 20 direct terms and 24
// Bernoulli corrections the truncation error near |s - 1| = 1/4 is far
// below 1e-50.
inline Complex zeta(const Complex& s) {
  constexpr int direct_terms = 20;
  constexpr int corrections = 24;
  const Complex one(1);
  Complex sum(0);
  for (int n = 1; n < direct_terms; ++n) sum += exp(-s * log(Real(n)));
  const Real big_n(direct_terms);
  const Real log_n = log(big_n);
  const Complex n_pow = exp(-s * log_n);  // N^{-s}
  sum += n_pow * big_n / (s - one);
  sum += n_pow / Real(2);
  // term_j = B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
  Complex rising = s;                // s(s+1)...(s+2j-2)
  Complex power = n_pow / big_n;     // N^{-s-1}
  Real factorial(2);                 // (2j)!
  for (int j = 1; j <= corrections; ++j) {
    sum += boost::math::bernoulli_b2n<Real>(j) / factorial * rising * power;
    rising *= (s + Real(2 * j - 1)) * (s + Real(2 * j));
    power /= big_n * big_n;
    factorial *= Real(2 * j + 1) * Real(2 * j + 2);
  }
  return sum;
}

}  // namespace residue_detail

/// Coefficients of P_{k-1} from the contour integral
///   c_j = (1 / j!) * (1 / 2 pi i) \oint zeta^k(s) (s - 1)^j / s ds
/// with the trapezoidal rule on `nodes` points of |s - 1| = radius. The
/// aliasing error is about radius^nodes.
inline std::vector<double> residue_coefficients(int k, double radius = 0.25, int nodes = 128) {
  using residue_detail::Complex;
  using residue_detail::Real;
  require(k >= 1 && k <= kMaxDivisorOrder, ErrorKind::unsupported, "residue oracle: k out of range");
  const Real pi = boost::math::constants::pi<Real>();
  std::vector<Complex> acc(static_cast<std::size_t>(k), Complex(0));
  for (int q = 0; q < nodes; ++q) {
    const Real theta = 2 * pi * q / nodes;
    const Complex w(Real(radius) * cos(theta), Real(radius) * sin(theta));  // s - 1
    const Complex s = w + Complex(1);
    const Complex zk = pow(residue_detail::zeta(s), k);
    Complex term = zk * w / s;  // j = 0: zeta^k (s-1) / s
    for (int j = 0; j < k; ++j) {
      acc[j] += term;
      term *= w;
    }
  }
  std::vector<double> coeffs(static_cast<std::size_t>(k));
  Real factorial(1);
  for (int j = 0; j < k; ++j) {
    if (j > 0) factorial *= j;
    coeffs[j] = static_cast<double>(real(acc[j]) / (factorial * nodes));
  }
  return coeffs;
}

namespace riesz_detail {

// zeta(-m) for small m.
inline double zeta_at_negative_integer(int m) {
  static constexpr std::array<double, 8> table = {-0.5,        -1.0 / 12.0, 0.0, 1.0 / 120.0,
                                                  0.0,         -1.0 / 252.0, 0.0, 1.0 / 240.0};
  return table.at(static_cast<std::size_t>(m));
}

inline long double binom(int n, int r) {
  long double b = 1;
  for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
  return b;
}

inline long double factorial(int n) {
  long double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace riesz_detail

struct MainTermFitOptions {
  int riesz_order = 4;            // order of the Riesz mean being fitted
  std::uint64_t x_min = 20'000;   // grid bounds (integers)
  std::uint64_t x_max = 2'000'000;
  int grid_points = 24;           // log-spaced
};

/// Least-squares estimate of the coefficients of P_{k-1} from exact data.
///
/// Fits the Riesz mean R(X) = (1/r!) sum_{n <= X} d_k(n) (X - n)^r rather
/// than D_k itself: its oscillating remainder is smaller than X^{r+1} by a
/// factor of roughly X^{-(r+2)/k - 1/2}, while the main term is still linear in
/// the c_j. The exactly known contributions of the poles of Gamma(s) at
/// s = 0, -1, -3, ... are subtracted first.
inline std::vector<double> fit_main_term_coeffs(const DivisorTable& table,
                                                const MainTermFitOptions& opt = {}) {
  const int k = table.k();
  const int r = opt.riesz_order;
  require(k >= 1, ErrorKind::domain, "fit needs k >= 1");
  require(r >= 1 && r <= 7, ErrorKind::domain, "riesz order must lie in [1, 7]");
  require(opt.x_max <= table.limit(), ErrorKind::out_of_range, "fit grid exceeds table limit");
  require(opt.grid_points >= k + 2 && opt.x_min >= 2 && opt.x_min < opt.x_max,
          ErrorKind::insufficient, "fit grid too small");

  // J(i) = int_0^1 (1-u)^{r-1} u log^i u du
  std::vector<long double> moments(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    long double s = 0;
    for (int q = 0; q <= r - 1; ++q) {
      const long double sign = ((q + i) % 2 == 0) ? 1.0L : -1.0L;
      s += riesz_detail::binom(r - 1, q) * sign * riesz_detail::factorial(i) /
           std::pow(static_cast<long double>(q + 2), i + 1);
    }
    moments[i] = s / riesz_detail::factorial(r - 1);
  }

  std::vector<std::vector<long double>> rows;
  std::vector<long double> rhs;
  const double log_lo = std::log(static_cast<double>(opt.x_min));
  const double log_hi = std::log(static_cast<double>(opt.x_max));
  const auto values = table.values();
  for (int g = 0; g < opt.grid_points; ++g) {
    const double t = static_cast<double>(g) / (opt.grid_points - 1);
    const auto x_int = static_cast<std::uint64_t>(std::llround(std::exp(log_lo + t * (log_hi - log_lo))));
    const auto x = static_cast<long double>(x_int);

    // Riesz mean, scaled by X^{-(r+1)} as we go.
    CompensatedSum acc;
    for (std::uint64_t n = 1; n <= x_int; ++n) {
      const double u = static_cast<double>(x_int - n) / static_cast<double>(x_int);
      double p = 1.0;
      for (int e = 0; e < r; ++e) p *= u;
      acc += values[n] * p;
    }
    long double scaled = static_cast<long double>(acc.value()) / (riesz_detail::factorial(r) * x);

    // Pole terms zeta(-m)^k X^{r-m} (-1)^m / (m! (r-m)!), scaled the same way.
    for (int m = 0; m <= r; ++m) {
      const double z = riesz_detail::zeta_at_negative_integer(m);
      if (z == 0.0) continue;
      const long double sign = (m % 2 == 0) ? 1.0L : -1.0L;
      scaled -= std::pow(static_cast<long double>(z), k) * sign /
                (riesz_detail::factorial(m) * riesz_detail::factorial(r - m)) /
                std::pow(x, m + 1);
    }

    // Basis: beta_j(L) = sum_i C(j,i) L^{j-i} J(i).
    const long double L = std::log(x);
    std::vector<long double> row(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      long double b = 0;
      for (int i = 0; i <= j; ++i) b += riesz_detail::binom(j, i) * std::pow(L, j - i) * moments[i];
      row[j] = b;
    }
    // Weight by the expected relative accuracy, which improves with X.
    const long double w = std::pow(x / static_cast<long double>(opt.x_max), 1.5L);
    for (auto& v : row) v *= w;
    rows.push_back(std::move(row));
    rhs.push_back(scaled * w);
  }
  const auto c = least_squares(std::move(rows), std::move(rhs));
  return {c.begin(), c.end()};
}

/// True when every pair agrees to `digits` significant digits, measured
/// against the larger magnitude of each pair.
inline bool agree_to_digits(const std::vector<double>& a, const std::vector<double>& b, int digits) {
  if (a.size() != b.size()) return false;
  const double tol = 0.5 * std::pow(10.0, 1 - digits);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max(std::abs(a[i]), std::abs(b[i]));
    if (std::abs(a[i] - b[i]) > tol * scale) return false;
  }
  return true;
}

struct MainTermOptions {
  bool cross_validate = true;
  MainTermFitOptions fit{};
};

/// P_{k-1} for 2 <= k <= 4. Results for k >= 3 are memoized per k.
inline MainTermPolynomial main_term_coeffs(int k, const MainTermOptions& opt = {}) {
  require(k >= 2 && k <= 4, ErrorKind::unsupported,
          "main_term_coeffs supports 2 <= k <= 4, got k = " + std::to_string(k));
  if (k == 2) return {2, {2.0 * euler_gamma - 1.0, 1.0}, Provenance::closed_form};

  static std::mutex mutex;
  static std::map<int, std::vector<double>> validated;
  {
    std::lock_guard lock(mutex);
    if (auto it = validated.find(k); it != validated.end()) {
      return {k, it->second, Provenance::residue_oracle};
    }
  }
  auto coeffs = residue_coefficients(k);
  if (opt.cross_validate) {
    const auto table = sieve_dk(k, opt.fit.x_max);
    const auto fitted = fit_main_term_coeffs(table, opt.fit);
    if (!agree_to_digits(coeffs, fitted, 6)) {
      std::string msg = "main term for k = " + std::to_string(k) +
                        ": contour and least-squares coefficients disagree:";
      for (std::size_t j = 0; j < coeffs.size(); ++j) {
        msg += " c" + std::to_string(j) + "=" + std::to_string(coeffs[j]) + "/" + std::to_string(fitted[j]);
      }
      fail(ErrorKind::validation, msg);
    }
    std::lock_guard lock(mutex);
    validated[k] = coeffs;
  }
  return {k, coeffs, Provenance::residue_oracle};
}

}  // namespace dkl
