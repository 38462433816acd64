#pragma once

// The one random source used by every experiment: std::mt19937_64 seeded
// with the experiment seed, and the conversions below (no std::*_distribution,
// whose algorithms are implementation-defined). Any port that reproduces
// mt19937_64 and these two formulas reproduces the sample sets.

#include <cstdint>
#include <random>

namespace dkl {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// (next >> 11) * 2^-53, in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

  /// floor(uniform() * n), in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

  /// lo + (hi - lo) * uniform().
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dkl
