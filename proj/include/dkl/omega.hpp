#pragma once

// Large values of Delta_k: the omega threshold G_k(x), extrema scans, a crude
// envelope exponent, and the short-interval divisor sum check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dkl/delta.hpp"
#include "dkl/errors.hpp"
#include "dkl/fit.hpp"
#include "dkl/rng.hpp"
#include "dkl/summation.hpp"

namespace dkl {

/// e^e, below which log log log x <= 0.
inline const double kTripleLogThreshold = std::exp(std::numbers::e);

struct OmegaExponents {
  double a = 0.0;  // power of log log x
  double b = 0.0;  // power of (log log log x)^{-1}
};

inline OmegaExponents omega_exponents(int k) {
  require(k >= 2, ErrorKind::domain, "omega threshold needs k >= 2");
  const double kk = k;
  return {(kk + 1.0) / (2.0 * kk) * (std::pow(kk, 2.0 * kk / (kk + 1.0)) - 1.0), (3.0 * kk - 1.0) / (4.0 * kk)};
}

/// G_k(x) = (x log x)^{(k-1)/(2k)} (log log x)^a (log log log x)^{-b}.
inline double gk_threshold(int k, double x) {
  require(x > kTripleLogThreshold, ErrorKind::domain, "G_k(x) needs x > e^e");
  const auto [a, b] = omega_exponents(k);
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  const double l3 = std::log(l2);
  return std::pow(x * l1, (k - 1.0) / (2.0 * k)) * std::pow(l2, a) * std::pow(l3, -b);
}

/// The k = 2 threshold written with iterated logarithms,
/// (X log X)^{1/4} (log_2 X)^{3(2^{4/3}-1)/4} (log_3 X)^{-5/8},
/// evaluated as one exponential of a sum of logarithms.
inline double g2_threshold_iterated(double x) {
  require(x > kTripleLogThreshold, ErrorKind::domain, "G_2(x) needs x > e^e");
  const double log1 = std::log(x);
  const double log2 = std::log(log1);
  const double log3 = std::log(log2);
  const double a = 0.75 * (std::cbrt(16.0) - 1.0);
  return std::exp(0.25 * (log1 + log2) + a * std::log(log2) - 0.625 * std::log(log3));
}

struct ExtremaRecord {
  double x = 0.0;
  double delta_value = 0.0;
  double ratio_power = 0.0;            // |Delta| / x^{(k-1)/(2k)}
  std::optional<double> ratio_g;       // |Delta| / G_k(x), only for x > e^e
  int sign = 0;
};

struct SignRun {
  double start = 0.0;  // first sampled point of the run
  double end = 0.0;    // last sampled point of the run
  int sign = 0;
  double length() const { return end - start; }
};

struct ScanResult {
  int k = 2;
  std::uint64_t x_max = 0;
  std::vector<ExtremaRecord> top_by_power;   // descending ratio_power
  std::vector<ExtremaRecord> top_by_g;       // descending ratio_g
  std::vector<ExtremaRecord> envelope;       // points where max |Delta| so far increases
  std::vector<SignRun> longest_sign_runs;    // descending length
  std::uint64_t points_scanned = 0;
  std::uint64_t exact_zeros = 0;             // points with Delta == 0, excluded from records
  double max_g_form_discrepancy = 0.0;       // k = 2: max relative gap between the two G_2 forms
};

namespace scan_detail {

inline constexpr std::uint64_t kChunkWidth = 1U << 16U;

inline bool by_power(const ExtremaRecord& a, const ExtremaRecord& b) {
  if (a.ratio_power != b.ratio_power) return a.ratio_power > b.ratio_power;
  return a.x < b.x;
}

inline bool by_g(const ExtremaRecord& a, const ExtremaRecord& b) {
  if (*a.ratio_g != *b.ratio_g) return *a.ratio_g > *b.ratio_g;
  return a.x < b.x;
}

inline bool by_length(const SignRun& a, const SignRun& b) {
  if (a.length() != b.length()) return a.length() > b.length();
  return a.start < b.start;
}

template <typename Less>
void keep_top(std::vector<ExtremaRecord>& v, std::size_t count, Less less) {
  std::sort(v.begin(), v.end(), less);
  if (v.size() > count) v.resize(count);
}

struct ChunkScan {
  std::vector<ExtremaRecord> top_power;
  std::vector<ExtremaRecord> top_g;
  std::vector<ExtremaRecord> envelope;  // running max within the chunk
  std::vector<SignRun> runs;            // all runs, in order
  std::uint64_t points = 0;
  std::uint64_t zeros = 0;
  double g_discrepancy = 0.0;
};

}  // namespace scan_detail

/// Scans Delta_k at every integer n (value just after the jump), at n + 1/2,
/// and one ulp before n + 1 (value just before the next jump), for
/// 1 <= n < x_max. Between jumps Delta_k decreases, so the extremes sit at
/// these one-sided limits.
inline ScanResult scan_extrema(const DeltaEvaluator& ev, std::uint64_t x_max, std::size_t record_top,
                               unsigned threads = default_thread_count()) {
  require(x_max >= 2 && x_max <= ev.limit(), ErrorKind::out_of_range, "scan range must lie within the table");
  require(record_top >= 1, ErrorKind::domain, "record_top must be positive");
  using namespace scan_detail;
  const int k = ev.k();
  const double power = (k - 1.0) / (2.0 * k);
  const std::uint64_t chunks = (x_max - 1 + kChunkWidth - 1) / kChunkWidth;
  const auto values = ev.table().values();

  auto scan_chunk = [&](std::size_t c) {
    ChunkScan out;
    const std::uint64_t n_begin = 1 + c * kChunkWidth;
    const std::uint64_t n_end = std::min(x_max, n_begin + kChunkWidth);  // n < x_max
    double envelope_max = 0.0;
    std::uint64_t d_n = ev.summatory(n_begin);
    auto visit = [&](double x, double delta) {
      ++out.points;
      if (delta == 0.0) {
        ++out.zeros;
        return;
      }
      ExtremaRecord rec;
      rec.x = x;
      rec.delta_value = delta;
      rec.sign = delta > 0 ? 1 : -1;
      rec.ratio_power = std::abs(delta) / std::pow(x, power);
      if (x > kTripleLogThreshold) {
        const double g = gk_threshold(k, x);
        rec.ratio_g = std::abs(delta) / g;
        if (k == 2) {
          const double alt = g2_threshold_iterated(x);
          out.g_discrepancy = std::max(out.g_discrepancy, std::abs(g - alt) / g);
        }
      }
      if (std::abs(delta) > envelope_max) {
        envelope_max = std::abs(delta);
        out.envelope.push_back(rec);
      }
      if (!out.runs.empty() && out.runs.back().sign == rec.sign) {
        out.runs.back().end = x;
      } else {
        out.runs.push_back({x, x, rec.sign});
      }
      out.top_power.push_back(rec);
      if (rec.ratio_g) out.top_g.push_back(rec);
      if (out.top_power.size() >= 4 * record_top + 64) keep_top(out.top_power, record_top, by_power);
      if (out.top_g.size() >= 4 * record_top + 64) keep_top(out.top_g, record_top, by_g);
    };
    for (std::uint64_t n = n_begin; n < n_end; ++n) {
      if (n > n_begin) d_n += values[n];
      const auto dn = static_cast<double>(d_n);
      const auto xn = static_cast<double>(n);
      const double before_next = std::nextafter(xn + 1.0, 0.0);
      visit(xn, dn - ev.main_term(xn));
      visit(xn + 0.5, dn - ev.main_term(xn + 0.5));
      visit(before_next, dn - ev.main_term(before_next));
    }
    keep_top(out.top_power, record_top, by_power);
    keep_top(out.top_g, record_top, by_g);
    return out;
  };
  const auto parts = map_chunks(chunks, scan_chunk, threads);

  ScanResult result;
  result.k = k;
  result.x_max = x_max;
  double running = 0.0;
  std::vector<SignRun> runs;
  for (const auto& part : parts) {
    result.points_scanned += part.points;
    result.exact_zeros += part.zeros;
    result.max_g_form_discrepancy = std::max(result.max_g_form_discrepancy, part.g_discrepancy);
    result.top_by_power.insert(result.top_by_power.end(), part.top_power.begin(), part.top_power.end());
    result.top_by_g.insert(result.top_by_g.end(), part.top_g.begin(), part.top_g.end());
    for (const auto& rec : part.envelope) {
      if (std::abs(rec.delta_value) > running) {
        running = std::abs(rec.delta_value);
        result.envelope.push_back(rec);
      }
    }
    for (const auto& run : part.runs) {
      if (!runs.empty() && runs.back().sign == run.sign) {
        runs.back().end = run.end;
      } else {
        runs.push_back(run);
      }
    }
  }
  keep_top(result.top_by_power, record_top, by_power);
  keep_top(result.top_by_g, record_top, by_g);
  std::sort(runs.begin(), runs.end(), by_length);
  if (runs.size() > record_top) runs.resize(record_top);
  result.longest_sign_runs = std::move(runs);
  return result;
}

struct AlphaEstimate {
  double alpha = 0.0;
  std::size_t points_used = 0;
  bool within_sanity_bound = true;  // alpha in [0, 1/2]
};

/// Slope of log(running max |Delta|) against log x over the records with
/// x >= x_min_fit. Fed with ScanResult::envelope this is an estimate of the
/// upper-envelope exponent.
inline AlphaEstimate estimate_alpha(std::vector<ExtremaRecord> records, double x_min_fit) {
  std::erase_if(records, [&](const ExtremaRecord& r) { return r.x < x_min_fit; });
  require(records.size() >= 10, ErrorKind::insufficient,
          "alpha estimate needs at least 10 records above x_min_fit, got " + std::to_string(records.size()));
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  std::vector<double> lx, ly;
  double running = 0.0;
  for (const auto& r : records) {
    running = std::max(running, std::abs(r.delta_value));
    require(running > 0.0, ErrorKind::domain, "alpha estimate needs nonzero Delta values");
    lx.push_back(std::log(r.x));
    ly.push_back(std::log(running));
  }
  const auto line = fit_line(lx, ly);
  require(line.has_value(), ErrorKind::insufficient, "alpha estimate needs records at distinct x");
  AlphaEstimate est;
  est.alpha = line->slope;
  est.points_used = records.size();
  est.within_sanity_bound = est.alpha >= 0.0 && est.alpha <= 0.5;
  return est;
}

struct ShiuResult {
  std::uint64_t sum = 0;  // sum_{x < n <= x + h} d(n)
  double ratio = 0.0;     // sum / (h log x)
};

/// Short-interval divisor sum against h log x, for x^{0.1} <= h <= x. Falls
/// back to the hyperbola method when x + h is beyond the table.
inline ShiuResult shiu_check(const DeltaEvaluator& ev, double x, double h) {
  require(ev.k() == 2, ErrorKind::domain, "short-interval divisor check concerns d(n), k = 2");
  require(x > 1.0, ErrorKind::domain, "shiu_check needs x > 1");
  require(h >= std::pow(x, 0.1) && h <= x, ErrorKind::domain, "shiu_check needs x^0.1 <= h <= x");
  const std::uint64_t lo = floor_safe(x);
  const std::uint64_t hi = floor_safe(x + h);
  ShiuResult r;
  if (hi <= ev.limit()) {
    r.sum = ev.summatory(hi) - ev.summatory(lo);
  } else {
    r.sum = summatory_hyperbola(2, x + h) - summatory_hyperbola(2, x);
  }
  r.ratio = static_cast<double>(r.sum) / (h * std::log(x));
  return r;
}

struct ShiuSweep {
  double max_ratio = 0.0;
  double worst_x = 0.0;
  double worst_h = 0.0;
  std::size_t samples = 0;
};

/// Random (x, h): x uniform in [x_lo, x_hi], h log-uniform in [x^{0.1}, x].
inline ShiuSweep shiu_sweep(const DeltaEvaluator& ev, std::size_t samples, double x_lo, double x_hi,
                            std::uint64_t seed) {
  require(x_lo > 1.0 && x_lo < x_hi, ErrorKind::domain, "shiu sweep needs 1 < x_lo < x_hi");
  Rng rng(seed);
  ShiuSweep sweep;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = rng.uniform(x_lo, x_hi);
    const double h = std::exp(rng.uniform(0.1 * std::log(x), std::log(x)));
    const auto r = shiu_check(ev, x, h);
    if (r.ratio > sweep.max_ratio) {
      sweep.max_ratio = r.ratio;
      sweep.worst_x = x;
      sweep.worst_h = h;
    }
  }
  sweep.samples = samples;
  return sweep;
}

}  // namespace dkl
