#pragma once

// Truncated Voronoi-type expansion
//
//   Delta_k(x) ~ x^{(k-1)/(2k)} / (pi sqrt k)
//                * sum_{n <= N} d_k(n) n^{-(k+1)/(2k)} cos(2 k pi (x n)^{1/k} + (k - 3) pi / 4)
//
// and measurement of its truncation error against the exact Delta_k.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dkl/delta.hpp"
#include "dkl/divisor_table.hpp"
#include "dkl/double_double.hpp"
#include "dkl/errors.hpp"
#include "dkl/fit.hpp"
#include "dkl/rng.hpp"
#include "dkl/summation.hpp"

namespace dkl {

/// Phase arguments above this many radians are reduced in double-double.
inline constexpr double kDoubleDoublePhaseThreshold = 1e8;

/// Phase of term n at x, in turns, reduced to [-1/2, 1/2]:
/// k (x n)^{1/k} + (k - 3)/8 modulo 1.
inline double phase_turns(int k, double x, std::uint64_t n, bool extended) {
  const double offset = (k - 3) / 8.0;
  if (!extended) {
    const double t = k * std::pow(x * static_cast<double>(n), 1.0 / k) + offset;
    return t - std::nearbyint(t);
  }
  // x is a double and n < 2^53, so x * n is exact as a double-double.
  const DoubleDouble xn = mul_exact(x, static_cast<double>(n));
  const DoubleDouble turns = kth_root(xn, k) * DoubleDouble(static_cast<double>(k)) + DoubleDouble(offset);
  return static_cast<double>(reduce_to_unit(turns));
}

/// Cosine of the term-n phase, switching to double-double above the
/// threshold.
inline double term_cosine(int k, double x, std::uint64_t n) {
  const double radians = 2.0 * k * std::numbers::pi * std::pow(x * static_cast<double>(n), 1.0 / k);
  const bool extended = radians > kDoubleDoublePhaseThreshold;
  if (!extended) return std::cos(radians + (k - 3) * std::numbers::pi / 4.0);
  return std::cos(2.0 * std::numbers::pi * phase_turns(k, x, n, true));
}

class VoronoiSeries {
 public:
  /// amplitudes[n - 1] = d_k(n) n^{-(k+1)/(2k)} for n = 1..N.
  static VoronoiSeries build(const DivisorTable& table, std::uint64_t terms) {
    require(terms >= 1, ErrorKind::domain, "Voronoi series needs N >= 1 (empty series)");
    require(terms <= table.limit(), ErrorKind::out_of_range, "Voronoi N exceeds divisor table limit");
    VoronoiSeries s;
    s.k_ = table.k();
    require(s.k_ >= 2, ErrorKind::domain, "Voronoi expansion needs k >= 2");
    const double exponent = -(s.k_ + 1.0) / (2.0 * s.k_);
    s.amplitudes_.resize(terms);
    for (std::uint64_t n = 1; n <= terms; ++n) {
      s.amplitudes_[n - 1] = table[n] * std::pow(static_cast<double>(n), exponent);
    }
    return s;
  }

  int k() const { return k_; }
  std::uint64_t terms() const { return amplitudes_.size(); }
  double amplitude(std::uint64_t n) const { return amplitudes_.at(n - 1); }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  double phase_offset() const { return (k_ - 3) * std::numbers::pi / 4.0; }
  double prefactor_exponent() const { return (k_ - 1.0) / (2.0 * k_); }

  double prefactor(double x) const {
    return std::pow(x, prefactor_exponent()) / (std::numbers::pi * std::sqrt(static_cast<double>(k_)));
  }

  /// True when N > x, where the expansion is outside its useful range.
  bool beyond_recommended_range(double x) const { return static_cast<double>(terms()) > x; }

  /// Partial sums of the series at x after each of the requested prefix
  /// lengths (ascending, each <= terms()). One pass over the terms.
  std::vector<double> partial_sums(double x, const std::vector<std::uint64_t>& cutoffs) const {
    require(x >= 1.0, ErrorKind::domain, "Voronoi series needs x >= 1");
    std::vector<double> out;
    out.reserve(cutoffs.size());
    CompensatedSum acc;
    std::uint64_t n = 1;
    const double pre = prefactor(x);
    for (std::uint64_t cutoff : cutoffs) {
      require(cutoff >= 1 && cutoff <= terms(), ErrorKind::domain, "partial sum cutoff out of range");
      for (; n <= cutoff; ++n) acc += amplitudes_[n - 1] * term_cosine(k_, x, n);
      out.push_back(pre * acc.value());
    }
    return out;
  }

 private:
  int k_ = 2;
  std::vector<double> amplitudes_;
};

/// Value of the truncated expansion with all N stored terms.
inline double truncated_voronoi(const VoronoiSeries& series, double x) {
  return series.partial_sums(x, {series.terms()}).front();
}

struct ErrorProfileRow {
  std::uint64_t terms = 0;
  double rms_error = 0.0;
  double max_error = 0.0;
};

struct ErrorProfile {
  int k = 2;
  double x_base = 0.0;
  int sample_count = 0;
  std::vector<ErrorProfileRow> rows;
  std::optional<double> fitted_slope;  // d log(rms) / d log N; empty for one N
};

/// Half-integer sample points drawn uniformly from [X, 2X].
inline std::vector<double> half_integer_samples(double x_base, int count, std::uint64_t seed) {
  Rng rng(seed);
  const auto lo = static_cast<std::uint64_t>(std::ceil(x_base));
  const auto span = static_cast<std::uint64_t>(std::floor(2.0 * x_base)) - lo;  // points lo+j+1/2 < 2X
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (auto& x : xs) x = static_cast<double>(lo + rng.below(span)) + 0.5;
  return xs;
}

/// RMS and max of |Delta_k(x) - truncated sum| over the sample for each N,
/// and the slope of log RMS against log N.
inline ErrorProfile truncation_error_profile(const DeltaEvaluator& evaluator, double x_base, int sample_count,
                                             std::vector<std::uint64_t> term_counts, std::uint64_t rng_seed) {
  require(sample_count >= 8, ErrorKind::insufficient, "error profile needs at least 8 sample points");
  require(!term_counts.empty(), ErrorKind::insufficient, "error profile needs at least one N");
  require(x_base >= 1.0 && 2.0 * x_base <= static_cast<double>(evaluator.limit()), ErrorKind::out_of_range,
          "error profile samples [X, 2X] beyond the table limit");
  std::sort(term_counts.begin(), term_counts.end());
  require(term_counts.front() >= 1, ErrorKind::domain, "N must be at least 1");
  const auto series = VoronoiSeries::build(evaluator.table(), term_counts.back());
  const auto xs = half_integer_samples(x_base, sample_count, rng_seed);

  // Per-sample squared errors, reduced pairwise in sample order.
  std::vector<std::vector<double>> sq(term_counts.size(), std::vector<double>(xs.size()));
  std::vector<double> max_err(term_counts.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double exact = evaluator.delta(xs[i]);
    const auto sums = series.partial_sums(xs[i], term_counts);
    for (std::size_t j = 0; j < term_counts.size(); ++j) {
      const double e = std::abs(exact - sums[j]);
      sq[j][i] = e * e;
      max_err[j] = std::max(max_err[j], e);
    }
  }

  ErrorProfile profile;
  profile.k = evaluator.k();
  profile.x_base = x_base;
  profile.sample_count = sample_count;
  std::vector<double> log_n, log_rms;
  for (std::size_t j = 0; j < term_counts.size(); ++j) {
    const double rms = std::sqrt(pairwise_sum(sq[j]) / static_cast<double>(xs.size()));
    profile.rows.push_back({term_counts[j], rms, max_err[j]});
    log_n.push_back(std::log(static_cast<double>(term_counts[j])));
    log_rms.push_back(std::log(rms));
  }
  if (auto line = fit_line(log_n, log_rms)) profile.fitted_slope = line->slope;
  return profile;
}

}  // namespace dkl
