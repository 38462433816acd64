#pragma once

// Small dense least-squares helpers used by the regression-style checks.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dkl/errors.hpp"

namespace dkl {

/// Solves min ||A c - b||_2 by Householder QR in long double. `rows` are
/// the rows of A; all must have the same length.
inline std::vector<long double> least_squares(std::vector<std::vector<long double>> rows,
                                              std::vector<long double> rhs) {
  const std::size_t m = rows.size();
  require(m > 0 && rhs.size() == m, ErrorKind::domain, "least_squares: shape mismatch");
  const std::size_t n = rows[0].size();
  require(m >= n, ErrorKind::insufficient, "least_squares: underdetermined system");

  for (std::size_t col = 0; col < n; ++col) {
    long double norm = 0;
    for (std::size_t r = col; r < m; ++r) norm += rows[r][col] * rows[r][col];
    norm = std::sqrt(norm);
    require(norm > 0, ErrorKind::validation, "least_squares: rank-deficient design");
    const long double alpha = rows[col][col] > 0 ? -norm : norm;
    std::vector<long double> v(m - col);
    for (std::size_t r = col; r < m; ++r) v[r - col] = rows[r][col];
    v[0] -= alpha;
    long double vnorm2 = 0;
    for (long double x : v) vnorm2 += x * x;
    if (vnorm2 == 0) continue;
    for (std::size_t c = col; c < n; ++c) {
      long double dot = 0;
      for (std::size_t r = col; r < m; ++r) dot += v[r - col] * rows[r][c];
      const long double f = 2 * dot / vnorm2;
      for (std::size_t r = col; r < m; ++r) rows[r][c] -= f * v[r - col];
    }
    long double dot = 0;
    for (std::size_t r = col; r < m; ++r) dot += v[r - col] * rhs[r];
    const long double f = 2 * dot / vnorm2;
    for (std::size_t r = col; r < m; ++r) rhs[r] -= f * v[r - col];
  }

  std::vector<long double> coef(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= rows[i][c] * coef[c];
    coef[i] = s / rows[i][i];
  }
  return coef;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least-squares line y = intercept + slope x. Empty when fewer
/// than two distinct abscissae are given.
inline std::optional<LineFit> fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::domain, "fit_line: size mismatch");
  if (x.size() < 2) return std::nullopt;
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= x.size();
  long double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) return std::nullopt;
  const long double slope = sxy / sxx;
  return LineFit{static_cast<double>(slope), static_cast<double>(my - slope * mx)};
}

}  // namespace dkl
