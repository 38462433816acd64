#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace dkl {

/// Neumaier's variant of Kahan summation. Order-dependent but
/// deterministic for a fixed insertion order.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }

  CompensatedSum& operator+=(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fixed-shape pairwise (tree) reduction: the association depends only on
/// the number of inputs.
inline double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  if (values.size() <= 8) {
    CompensatedSum s;
    for (double v : values) s += v;
    return s.value();
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline unsigned default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

/// Runs fn(chunk_index) for every chunk in [0, chunk_count) on up to
/// `threads` workers and returns the results in chunk order. Results do not
/// depend on the thread count as long as fn is pure.
template <typename Fn>
auto map_chunks(std::size_t chunk_count, Fn&& fn, unsigned threads = default_thread_count())
    -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> results(chunk_count);
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(chunk_count)));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunk_count; ++c) results[c] = fn(c);
    return results;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < chunk_count; c += threads) results[c] = fn(c);
      });
    }
  }
  return results;
}

}  // namespace dkl
