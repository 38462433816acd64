#pragma once

// Moment integrals of Delta_k over long and short intervals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "dkl/delta.hpp"
#include "dkl/errors.hpp"
#include "dkl/quadrature.hpp"
#include "dkl/rng.hpp"
#include "dkl/summation.hpp"

namespace dkl {

inline constexpr int kDefaultQuadratureOrder = 8;

/// Exponent of the expected growth of int_1^X Delta_k^m: 1 + m (k-1)/(2k).
inline double moment_growth_exponent(int k, int m) { return 1.0 + m * (k - 1.0) / (2.0 * k); }

struct MomentResult {
  int k = 2;
  int m = 1;
  double a = 1.0;
  double b = 1.0;
  double value = 0.0;
  int quadrature_order = kDefaultQuadratureOrder;
  double normalization = 0.0;  // value / b^{moment_growth_exponent(k, m)}
};

namespace moment_detail {

inline double ipow(double v, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= v;
  return r;
}

// Unit intervals per chunk. Fixed, so the reduction tree never depends on
// the thread count.
inline constexpr std::uint64_t kChunkWidth = 1U << 16U;

}  // namespace moment_detail

/// int_a^b Delta_k(x)^m dx, splitting at the integers where Delta_k jumps and
/// applying Gauss-Legendre of the given order on each smooth piece.
inline MomentResult moment_integral(const DeltaEvaluator& ev, int m, double a, double b,
                                    int order = kDefaultQuadratureOrder,
                                    unsigned threads = default_thread_count()) {
  require(m >= 1 && m <= 9, ErrorKind::domain, "moment order m must lie in [1, 9]");
  require(order >= 4 && order <= 16, ErrorKind::domain, "quadrature order must lie in [4, 16]");
  require(a >= 1.0, ErrorKind::domain, "moment integral needs a >= 1");
  require(b >= a, ErrorKind::domain, "moment integral needs b > a");
  require(b <= static_cast<double>(ev.limit()), ErrorKind::out_of_range,
          "moment integral upper bound beyond table limit");

  MomentResult result{ev.k(), m, a, b, 0.0, order, 0.0};
  if (b == a) return result;

  const auto& rule = gauss_legendre(order);
  const auto first = static_cast<std::uint64_t>(std::floor(a));
  const auto last = static_cast<std::uint64_t>(std::floor(b));  // piece [last, b) may be empty
  const std::uint64_t pieces = last - first + 1;
  const std::uint64_t chunks = (pieces + moment_detail::kChunkWidth - 1) / moment_detail::kChunkWidth;
  const auto values = ev.table().values();

  auto integrate_chunk = [&](std::size_t c) {
    const std::uint64_t n_begin = first + c * moment_detail::kChunkWidth;
    const std::uint64_t n_end = std::min(last + 1, n_begin + moment_detail::kChunkWidth);
    CompensatedSum acc;
    std::uint64_t d_n = ev.summatory(n_begin);
    for (std::uint64_t n = n_begin; n < n_end; ++n) {
      if (n > n_begin) d_n += values[n];
      const double lo = std::max(a, static_cast<double>(n));
      const double hi = std::min(b, static_cast<double>(n + 1));
      if (hi <= lo) continue;
      const auto dn = static_cast<double>(d_n);
      acc += rule.integrate([&](double x) { return moment_detail::ipow(dn - ev.main_term(x), m); }, lo, hi);
    }
    return acc.value();
  };
  const auto partial = map_chunks(chunks, integrate_chunk, threads);
  result.value = pairwise_sum(partial);
  result.normalization = result.value / std::pow(b, moment_growth_exponent(ev.k(), m));
  return result;
}

struct FitResult {
  int k = 2;
  int m = 2;
  double fitted_constant = 0.0;
  double exponent_fixed = 0.0;
  std::vector<std::pair<double, double>> residual_series;  // (X, int_1^X Delta^m / X^exponent)
  std::vector<double> values;                              // int_1^X Delta^m for the same X
};

/// Normalized moments int_1^X Delta_k^m / X^{1 + m(k-1)/(2k)} along X_list;
/// the last one is reported as the fitted constant.
inline FitResult fit_moment_constant(const DeltaEvaluator& ev, int m, const std::vector<double>& x_list,
                                     int order = kDefaultQuadratureOrder) {
  require(x_list.size() >= 4, ErrorKind::insufficient, "moment fit needs at least 4 X values");
  require(std::is_sorted(x_list.begin(), x_list.end()) &&
              std::adjacent_find(x_list.begin(), x_list.end()) == x_list.end(),
          ErrorKind::domain, "X values must be strictly increasing");
  require(x_list.front() > 1.0, ErrorKind::domain, "X values must exceed 1");

  FitResult fit;
  fit.k = ev.k();
  fit.m = m;
  fit.exponent_fixed = moment_growth_exponent(ev.k(), m);
  double running = 0.0;
  double prev = 1.0;
  for (double x : x_list) {
    running += moment_integral(ev, m, prev, x, order).value;
    prev = x;
    fit.values.push_back(running);
    fit.residual_series.emplace_back(x, running / std::pow(x, fit.exponent_fixed));
  }
  fit.fitted_constant = fit.residual_series.back().second;
  return fit;
}

/// The constant of the mean-square asymptotic int_1^X Delta_k^2 ~ c X^{(2k-1)/k}:
///   c = (2 pi^2 (2k - 1))^{-1} sum_n d_k(n)^2 n^{-(k+1)/k},
/// i.e. (6 pi^2)^{-1} sum d(n)^2 n^{-3/2} for k = 2 and
/// (10 pi^2)^{-1} sum d_3(n)^2 n^{-4/3} for k = 3.
///
/// The series is summed as the Euler product
///   zeta(s)^{k^2} prod_p (1 - p^{-s})^{k^2} sum_j C(j+k-1, k-1)^2 p^{-js},
/// whose factors are 1 + O(p^{-2s}); primes up to `prime_limit` are used.
inline double divisor_square_series(int k, std::uint64_t prime_limit = 2'000'000) {
  require(k >= 2 && k <= 4, ErrorKind::unsupported, "series constant implemented for 2 <= k <= 4");
  const long double s = (k + 1.0L) / k;
  std::vector<bool> composite(prime_limit + 1, false);
  long double log_product = 0;
  for (std::uint64_t p = 2; p <= prime_limit; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t q = p * p; q <= prime_limit; q += p) composite[q] = true;
    const long double y = std::pow(static_cast<long double>(p), -s);
    // local factor sum_j C(j+k-1,k-1)^2 y^j
    long double local = 1, coeff = 1, yj = 1;
    for (int j = 1; j < 4000; ++j) {
      coeff = coeff * (j + k - 1) / j;
      yj *= y;
      const long double term = coeff * coeff * yj;
      local += term;
      if (term < 1e-22L * local) break;
    }
    log_product += std::log(local) + k * k * std::log1p(-y);
  }
  const long double z = boost::math::zeta(s);
  return static_cast<double>(std::exp(log_product + k * k * std::log(z)));
}

inline double mean_square_constant(int k, std::uint64_t prime_limit = 2'000'000) {
  return divisor_square_series(k, prime_limit) / (2.0 * std::numbers::pi * std::numbers::pi * (2.0 * k - 1.0));
}

/// The same series summed directly up to N, plus an estimate of the tail.
///
/// With S(t) = sum_{n <= t} d_k(n)^2 = t Q(log t) + E(t), where t Q(log t)
/// is the residue of zeta(s)^{k^2} G(s) t^s / s at s = 1, partial summation
/// gives
///   sum_{n > N} d_k(n)^2 n^{-s} = int_N^inf t^{-s} d(t Q(log t)) - E(N) N^{-s}
///                                + s int_N^inf E(t) t^{-s-1} dt.
/// The first two terms form `tail`; the last is dropped and is of relative
/// size about N^{-1/2} when E(t) is of order t^{1/2}.
struct SeriesTailEstimate {
  std::uint64_t n = 0;
  double partial = 0.0;        // sum_{n <= N} d_k(n)^2 n^{-s}
  double tail_main = 0.0;      // int_N^inf t^{-s} d(t Q(log t))
  double tail_boundary = 0.0;  // -E(N) N^{-s}
  std::vector<double> q_coeffs;

  double tail() const { return tail_main + tail_boundary; }
  double total() const { return partial + tail(); }
};

namespace series_detail {

using Cplx = std::complex<double>;

// prod_p (1 - p^{-s})^{k^2} sum_j C(j+k-1,k-1)^2 p^{-js} at complex s.
inline std::vector<Cplx> euler_correction(int k, const std::vector<Cplx>& points, std::uint64_t prime_limit) {
  std::vector<bool> composite(prime_limit + 1, false);
  std::vector<Cplx> log_g(points.size(), Cplx(0.0));
  for (std::uint64_t p = 2; p <= prime_limit; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t q = p * p; q <= prime_limit; q += p) composite[q] = true;
    const double lp = std::log(static_cast<double>(p));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Cplx y = std::exp(-points[i] * lp);
      Cplx local(1.0), yj(1.0);
      double coeff = 1;
      for (int j = 1; j < 200; ++j) {
        coeff = coeff * (j + k - 1) / j;
        yj *= y;
        const Cplx term = coeff * coeff * yj;
        local += term;
        if (std::abs(term) < 1e-18 * std::abs(local)) break;
      }
      log_g[i] += std::log(local) + static_cast<double>(k * k) * std::log(1.0 - y);
    }
  }
  for (auto& v : log_g) v = std::exp(v);
  return log_g;
}

}  // namespace series_detail

inline SeriesTailEstimate divisor_square_series_tail(const DivisorTable& table, std::uint64_t prime_limit = 1'000'000,
                                                     double radius = 0.15, int nodes = 64) {
  using series_detail::Cplx;
  const int k = table.k();
  require(k >= 2 && k <= 4, ErrorKind::unsupported, "series tail implemented for 2 <= k <= 4");
  const double s = (k + 1.0) / k;
  const int degree = k * k - 1;

  SeriesTailEstimate out;
  out.n = table.limit();
  const auto values = table.values();
  CompensatedSum partial;
  long double squares = 0;
  for (std::uint64_t n = 1; n <= out.n; ++n) {
    const double v = values[n];
    partial += v * v * std::pow(static_cast<double>(n), -s);
    squares += v * v;
  }
  out.partial = partial.value();

  // Q_j = (1/j!) (1/2 pi i) \oint zeta^{k^2} G (s-1)^j / s ds on |s-1| = radius.
  std::vector<Cplx> ws(static_cast<std::size_t>(nodes)), ss(static_cast<std::size_t>(nodes));
  for (int q = 0; q < nodes; ++q) {
    ws[q] = std::polar(radius, 2.0 * std::numbers::pi * q / nodes);
    ss[q] = 1.0 + ws[q];
  }
  const auto g = series_detail::euler_correction(k, ss, prime_limit);
  std::vector<Cplx> acc(static_cast<std::size_t>(degree + 1), Cplx(0.0));
  for (int q = 0; q < nodes; ++q) {
    const residue_detail::Complex zs(residue_detail::Real(ss[q].real()), residue_detail::Real(ss[q].imag()));
    const auto z = residue_detail::zeta(zs);
    const Cplx zeta_val(static_cast<double>(real(z)), static_cast<double>(imag(z)));
    Cplx term = std::pow(zeta_val, k * k) * g[q] * ws[q] / ss[q];
    for (int j = 0; j <= degree; ++j) {
      acc[j] += term;
      term *= ws[q];
    }
  }
  out.q_coeffs.resize(static_cast<std::size_t>(degree + 1));
  double factorial = 1;
  for (int j = 0; j <= degree; ++j) {
    if (j > 0) factorial *= j;
    out.q_coeffs[j] = acc[j].real() / (factorial * nodes);
  }

  // R = Q + Q'; int_{L0}^inf e^{-aL} R(L) dL = e^{-a L0} sum_i R^{(i)}(L0) / a^{i+1}.
  std::vector<double> r(out.q_coeffs);
  for (int j = 1; j <= degree; ++j) r[j - 1] += j * out.q_coeffs[j];
  const double a = s - 1.0;
  const double l0 = std::log(static_cast<double>(out.n));
  double tail = 0.0, scale = 1.0 / a;
  for (int i = 0; i <= degree; ++i) {
    double v = 0.0;
    for (int j = degree; j >= i; --j) {
      double falling = 1.0;
      for (int t = 0; t < i; ++t) falling *= j - t;
      v = v * l0 + falling * r[j];
    }
    tail += v * scale;
    scale /= a;
  }
  out.tail_main = std::exp(-a * l0) * tail;
  const double nd = static_cast<double>(out.n);
  double q_at = 0.0;
  for (int j = degree; j >= 0; --j) q_at = q_at * l0 + out.q_coeffs[j];
  const double e_n = static_cast<double>(squares) - nd * q_at;
  out.tail_boundary = -e_n * std::pow(nd, -s);
  return out;
}

struct IntervalAverage {
  double average = 0.0;   // (1/H) int_X^{X+H} Delta_k
  double residual = 0.0;  // Delta_k(X) - average
};

inline IntervalAverage interval_average(const DeltaEvaluator& ev, double x, double h) {
  require(h > 0.0, ErrorKind::domain, "interval average needs H > 0");
  require(h <= x / 2.0, ErrorKind::domain, "interval average needs H <= X/2");
  const double avg = moment_integral(ev, 1, x, x + h).value / h;
  return {avg, ev.delta(x) - avg};
}

struct AveragingSweep {
  double max_scaled_residual = 0.0;  // max |Delta(X) - average| / (H log X)
  double worst_x = 0.0;
  double worst_h = 0.0;
  std::size_t samples = 0;
};

/// Random (X, H): X uniform in [x_lo, x_hi], H log-uniform in
/// [X^{h_lo_exp}, X^{h_hi_exp}].
inline AveragingSweep averaging_sweep(const DeltaEvaluator& ev, std::size_t samples, double x_lo, double x_hi,
                                      double h_lo_exp, double h_hi_exp, std::uint64_t seed) {
  require(x_lo >= 2.0 && x_lo < x_hi, ErrorKind::domain, "averaging sweep needs 2 <= x_lo < x_hi");
  require(h_lo_exp > 0.0 && h_lo_exp <= h_hi_exp && h_hi_exp < 1.0, ErrorKind::domain,
          "averaging sweep needs 0 < h_lo_exp <= h_hi_exp < 1");
  Rng rng(seed);
  AveragingSweep sweep;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = rng.uniform(x_lo, x_hi);
    const double log_x = std::log(x);
    const double h = std::min(x / 2.0, std::exp(rng.uniform(h_lo_exp * log_x, h_hi_exp * log_x)));
    const double scaled = std::abs(interval_average(ev, x, h).residual) / (h * log_x);
    if (scaled > sweep.max_scaled_residual) {
      sweep.max_scaled_residual = scaled;
      sweep.worst_x = x;
      sweep.worst_h = h;
    }
  }
  sweep.samples = samples;
  return sweep;
}

struct ShortIntervalMoment {
  double value = 0.0;      // int_{X-H}^{X+H} Delta_k^4
  double long_term = 0.0;  // H X^{(2k-2)/k}
  double short_term = 0.0; // H^{(2k-3)/(2k+1)} X^{(8k-8)/(2k+1)}
};

inline ShortIntervalMoment short_interval_fourth_moment(const DeltaEvaluator& ev, double x, double h) {
  require(h >= 1.0 && h <= x / 2.0, ErrorKind::domain, "short interval needs 1 <= H <= X/2");
  const int k = ev.k();
  ShortIntervalMoment out;
  out.value = moment_integral(ev, 4, x - h, x + h).value;
  out.long_term = h * std::pow(x, (2.0 * k - 2.0) / k);
  out.short_term = std::pow(h, (2.0 * k - 3.0) / (2.0 * k + 1.0)) * std::pow(x, (8.0 * k - 8.0) / (2.0 * k + 1.0));
  return out;
}

/// Conjectural floor and best known upper bound for the exponent alpha of Delta.
inline constexpr double kAlphaFloor = 0.25;
inline constexpr double kAlphaHuxley = 131.0 / 416.0;

struct HuxleyComparison {
  double alpha = 0.0;
  double exponent = 0.0;   // 1 + 2 alpha
  double bound = 0.0;      // H X + X^{1 + 2 alpha}
  double ratio = 0.0;      // measured / bound
  double ratio_log = 0.0;  // measured / (log X * bound)
};

struct HuxleyReport {
  double x = 0.0;
  double h = 0.0;
  double measured = 0.0;
  HuxleyComparison estimated;
  HuxleyComparison huxley;
};

inline HuxleyComparison compare_fourth_moment(double measured, double x, double h, double alpha) {
  HuxleyComparison c;
  c.alpha = alpha;
  c.exponent = 1.0 + 2.0 * alpha;
  c.bound = h * x + std::pow(x, c.exponent);
  c.ratio = measured / c.bound;
  c.ratio_log = c.ratio / std::log(x);
  return c;
}

/// Fourth moment of Delta over [X-H, X+H] against H X + X^{1+2 alpha} for the
/// estimated alpha and for alpha = 131/416.
inline HuxleyReport huxley_bound_check(const DeltaEvaluator& ev, double x, double h, double alpha_est) {
  require(ev.k() == 2, ErrorKind::domain, "the alpha-bound comparison concerns k = 2");
  require(h >= std::sqrt(x) && h <= x / 2.0, ErrorKind::domain, "needs sqrt(X) <= H <= X/2");
  HuxleyReport r;
  r.x = x;
  r.h = h;
  r.measured = moment_integral(ev, 4, x - h, x + h).value;
  r.estimated = compare_fourth_moment(r.measured, x, h, alpha_est);
  r.huxley = compare_fourth_moment(r.measured, x, h, kAlphaHuxley);
  return r;
}

}  // namespace dkl
