#pragma once

// Counting 2l-tuples n_1..n_{2l} in (N, 2N] whose signed sum of k-th roots
//   |n_1^{1/k} + ... + n_l^{1/k} - n_{l+1}^{1/k} - ... - n_{2l}^{1/k}| < delta N^{1/k}.
// All root sums are carried in double-double.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "dkl/double_double.hpp"
#include "dkl/errors.hpp"
#include "dkl/fit.hpp"

namespace dkl {

/// Differences this close to the window edge are reported, not trusted.
inline constexpr double kBoundaryTolerance = 1e-24;

struct CountResult {
  int k = 2;
  int l = 2;
  std::uint64_t n = 0;
  double delta = 0.0;
  std::uint64_t count = 0;
  double bound_main = 0.0;  // N^{2l} delta
  double bound_diag = 0.0;  // N^l
  double window = 0.0;      // delta N^{1/k}
  std::uint64_t flagged_boundary_pairs = 0;

  double ratio_to_max_bound() const { return static_cast<double>(count) / std::max(bound_main, bound_diag); }
  double ratio_to_sum_bound() const { return static_cast<double>(count) / (bound_main + bound_diag); }
};

enum class CountAlgorithm { naive, sorted_window };

namespace count_detail {

/// A distinct root sum and the number of ordered index tuples producing it.
struct SumEntry {
  DoubleDouble value;
  std::uint64_t multiplicity = 0;
};

inline std::vector<DoubleDouble> roots(int k, std::uint64_t n) {
  std::vector<DoubleDouble> r;
  r.reserve(n);
  for (std::uint64_t v = n + 1; v <= 2 * n; ++v) r.push_back(kth_root(v, k));
  return r;
}

inline DoubleDouble window(int k, std::uint64_t n, double delta) {
  return kth_root(n, k) * DoubleDouble(delta);
}

inline void validate(int k, int l, std::uint64_t n, double delta) {
  require(delta > 0.0, ErrorKind::domain, "delta must be positive");
  require(n >= 3, ErrorKind::domain, "N must be at least 3");
  require(k >= 1 && k <= 16, ErrorKind::domain, "root order k must lie in [1, 16]");
  require(l == 2 || l == 3, ErrorKind::domain, "half-tuple size l must be 2 or 3");
}

inline CountResult make_result(int k, int l, std::uint64_t n, double delta) {
  CountResult r;
  r.k = k;
  r.l = l;
  r.n = n;
  r.delta = delta;
  r.bound_main = std::pow(static_cast<double>(n), 2 * l) * delta;
  r.bound_diag = std::pow(static_cast<double>(n), l);
  r.window = static_cast<double>(window(k, n, delta));
  return r;
}

// Sorted, distinct-value entries for all index multisets i_1 <= ... <= i_l
// with first index in [first_begin, first_end). Multiplicity is the number
// of orderings.
inline std::vector<SumEntry> build_block(const std::vector<DoubleDouble>& r, int l, std::size_t first_begin,
                                         std::size_t first_end) {
  const std::size_t n = r.size();
  std::vector<SumEntry> out;
  for (std::size_t i = first_begin; i < first_end; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (l == 2) {
        out.push_back({r[i] + r[j], i == j ? 1U : 2U});
        continue;
      }
      for (std::size_t q = j; q < n; ++q) {
        std::uint64_t mult = 6;
        if (i == j && j == q) mult = 1;
        else if (i == j || j == q) mult = 3;
        out.push_back({r[i] + r[j] + r[q], mult});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SumEntry& a, const SumEntry& b) { return a.value < b.value; });
  // Merge exact repeats (diagonal sums repeat).
  std::size_t w = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (w > 0 && out[w - 1].value == out[i].value) {
      out[w - 1].multiplicity += out[i].multiplicity;
    } else {
      out[w++] = out[i];
    }
  }
  out.resize(w);
  return out;
}

inline std::uint64_t slab_size(std::size_t n, std::size_t i, int l) {
  const std::uint64_t rest = n - i;  // choices for j >= i
  return l == 2 ? rest : rest * (rest + 1) / 2;
}

// Ordered pairs (e in a, f in b), weighted by multiplicities, with
// |a_e - b_f| < t (strict) or <= t. Both inputs sorted ascending.
inline std::uint64_t count_within(const std::vector<SumEntry>& a, const std::vector<SumEntry>& b,
                                  const DoubleDouble& t, bool strict) {
  std::vector<std::uint64_t> prefix(b.size() + 1, 0);
  for (std::size_t i = 0; i < b.size(); ++i) prefix[i + 1] = prefix[i] + b[i].multiplicity;
  std::size_t lo = 0, hi = 0;
  std::uint64_t total = 0;
  for (const auto& e : a) {
    const DoubleDouble left = e.value - t;
    const DoubleDouble right = e.value + t;
    if (strict) {
      while (lo < b.size() && b[lo].value <= left) ++lo;
      while (hi < b.size() && b[hi].value < right) ++hi;
    } else {
      while (lo < b.size() && b[lo].value < left) ++lo;
      while (hi < b.size() && b[hi].value <= right) ++hi;
    }
    if (hi > lo) total += e.multiplicity * (prefix[hi] - prefix[lo]);
  }
  return total;
}

struct WindowCounts {
  std::uint64_t inside = 0;
  std::uint64_t flagged = 0;
};

inline WindowCounts count_blocks(const std::vector<SumEntry>& a, const std::vector<SumEntry>& b,
                                 const DoubleDouble& w) {
  const DoubleDouble eps(kBoundaryTolerance);
  WindowCounts c;
  c.inside = count_within(a, b, w, true);
  const DoubleDouble inner = w - eps;
  const std::uint64_t near_outer = count_within(a, b, w + eps, true);
  const std::uint64_t near_inner = inner.hi > 0 ? count_within(a, b, inner, false) : 0;
  c.flagged = near_outer - near_inner;
  return c;
}

// Sorted block persisted to a temporary file, removed on destruction.
class SpilledBlock {
 public:
  explicit SpilledBlock(const std::vector<SumEntry>& entries) : size_(entries.size()) {
    static std::atomic<std::uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dkl_block_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".bin");
    std::ofstream out(path_, std::ios::binary);
    out.write(reinterpret_cast<const char*>(entries.data()),
              static_cast<std::streamsize>(entries.size() * sizeof(SumEntry)));
    require(static_cast<bool>(out), ErrorKind::resource, "failed to spill count block to " + path_.string());
  }
  SpilledBlock(const SpilledBlock&) = delete;
  SpilledBlock& operator=(const SpilledBlock&) = delete;
  ~SpilledBlock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

  std::vector<SumEntry> load() const {
    std::vector<SumEntry> entries(size_);
    std::ifstream in(path_, std::ios::binary);
    in.read(reinterpret_cast<char*>(entries.data()), static_cast<std::streamsize>(size_ * sizeof(SumEntry)));
    require(static_cast<bool>(in), ErrorKind::resource, "failed to reload count block " + path_.string());
    return entries;
  }

 private:
  std::filesystem::path path_;
  std::size_t size_;
};

}  // namespace count_detail

/// Exact count of ordered 2l-tuples in (N, 2N]^{2l} with the root sums within
/// the window. Entries are generated per first index, grouped into blocks of
/// at most memory_budget / 2 bytes, and spilled to temporary files when the
/// whole table does not fit in the budget.
inline CountResult count_2l_tuples(int k, int l, std::uint64_t n, double delta,
                                   std::uint64_t memory_budget = 1ULL << 30U) {
  using namespace count_detail;
  validate(k, l, n, delta);
  auto result = make_result(k, l, n, delta);
  const auto r = roots(k, n);
  const DoubleDouble w = window(k, n, delta);

  std::uint64_t total_entries = 0;
  std::uint64_t largest_slab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total_entries += slab_size(n, i, l);
    largest_slab = std::max(largest_slab, slab_size(n, i, l));
  }
  constexpr std::uint64_t entry_bytes = sizeof(SumEntry);
  if (total_entries * entry_bytes <= memory_budget) {
    const auto all = build_block(r, l, 0, n);
    const auto c = count_blocks(all, all, w);
    result.count = c.inside;
    result.flagged_boundary_pairs = c.flagged;
    return result;
  }

  const std::uint64_t capacity = memory_budget / (2 * entry_bytes);
  require(largest_slab <= capacity, ErrorKind::resource,
          "memory budget of " + std::to_string(memory_budget) + " bytes cannot hold two blocks of " +
              std::to_string(largest_slab) + " entries");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin;
    std::uint64_t used = 0;
    while (end < n && used + slab_size(n, end, l) <= capacity) used += slab_size(n, end++, l);
    ranges.emplace_back(begin, end);
    begin = end;
  }
  std::vector<std::unique_ptr<SpilledBlock>> blocks;
  for (auto [b, e] : ranges) blocks.push_back(std::make_unique<SpilledBlock>(build_block(r, l, b, e)));

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto a = blocks[i]->load();
    const auto self = count_blocks(a, a, w);
    result.count += self.inside;
    result.flagged_boundary_pairs += self.flagged;
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      const auto b = blocks[j]->load();
      const auto cross = count_blocks(a, b, w);
      // (e, f) and (f, e) both count.
      result.count += 2 * cross.inside;
      result.flagged_boundary_pairs += 2 * cross.flagged;
    }
  }
  return result;
}

/// Quadruple count (l = 2) by brute force over (N, 2N]^4 or by the sorted
/// pair-sum sweep. The naive route is limited to N <= 64.
inline CountResult count_quadruples(int k, std::uint64_t n, double delta, CountAlgorithm algo) {
  using namespace count_detail;
  validate(k, 2, n, delta);
  if (algo == CountAlgorithm::sorted_window) return count_2l_tuples(k, 2, n, delta);
  require(n <= 64, ErrorKind::out_of_range, "naive quadruple count limited to N <= 64");
  auto result = make_result(k, 2, n, delta);
  const auto r = roots(k, n);
  const DoubleDouble w = window(k, n, delta);
  const DoubleDouble eps(kBoundaryTolerance);
  std::vector<DoubleDouble> sums;
  sums.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sums.push_back(r[i] + r[j]);
  for (const auto& s : sums) {
    for (const auto& t : sums) {
      const DoubleDouble d = abs(s - t);
      if (d < w) ++result.count;
      if (abs(d - w) < eps) ++result.flagged_boundary_pairs;
    }
  }
  return result;
}

/// Brute force over all ordered 2l-tuples; the reference for small N.
inline CountResult count_2l_tuples_naive(int k, int l, std::uint64_t n, double delta) {
  using namespace count_detail;
  validate(k, l, n, delta);
  require(std::pow(static_cast<double>(n), 2 * l) <= 1e9, ErrorKind::out_of_range,
          "naive 2l-tuple count limited to N^{2l} <= 1e9");
  auto result = make_result(k, l, n, delta);
  const auto r = roots(k, n);
  const DoubleDouble w = window(k, n, delta);
  const DoubleDouble eps(kBoundaryTolerance);
  std::vector<DoubleDouble> sums;
  if (l == 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sums.push_back(r[i] + r[j]);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t q = 0; q < n; ++q) sums.push_back(r[i] + r[j] + r[q]);
  }
  for (const auto& s : sums) {
    for (const auto& t : sums) {
      const DoubleDouble d = abs(s - t);
      if (d < w) ++result.count;
      if (abs(d - w) < eps) ++result.flagged_boundary_pairs;
    }
  }
  return result;
}

struct BoundRow {
  CountResult result;
  double ratio = 0.0;                 // count / max(N^{2l} delta, N^l)
  double ratio_sum = 0.0;             // count / (N^{2l} delta + N^l)
  double delta_exponent = 0.0;        // e with delta = N^{-e}
  std::optional<double> log_n_trend;  // slope of log ratio vs log N within the (k, l, e) group
};

/// Ratios of each count to the bound terms, and the log-N trend of the
/// ratio among results with the same k, l and delta = N^{-e}.
inline std::vector<BoundRow> bound_report(const std::vector<CountResult>& results) {
  require(!results.empty(), ErrorKind::insufficient, "bound report needs at least one count");
  std::vector<BoundRow> rows;
  for (const auto& r : results) {
    BoundRow row;
    row.result = r;
    row.ratio = r.ratio_to_max_bound();
    row.ratio_sum = r.ratio_to_sum_bound();
    row.delta_exponent = std::round(-std::log(r.delta) / std::log(static_cast<double>(r.n)) * 1000.0) / 1000.0;
    rows.push_back(row);
  }
  std::map<std::tuple<int, int, double>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    groups[{rows[i].result.k, rows[i].result.l, rows[i].delta_exponent}].push_back(i);
  }
  for (const auto& [key, members] : groups) {
    std::vector<double> x, y;
    for (auto i : members) {
      x.push_back(std::log(static_cast<double>(rows[i].result.n)));
      y.push_back(std::log(rows[i].ratio));
    }
    const auto line = fit_line(x, y);
    if (!line) continue;
    for (auto i : members) rows[i].log_n_trend = line->slope;
  }
  return rows;
}

}  // namespace dkl
