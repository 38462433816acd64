#pragma once

// Exact tables of the k-fold divisor function d_k(n) and its summatory
// function D_k(x) = sum_{n <= x} d_k(n).

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dkl/errors.hpp"

namespace dkl {

inline constexpr int kMaxDivisorOrder = 6;

/// floor(x) for x >= 0, snapped up to the next integer when x sits within
/// one ulp below it (so 3 * (1.0/3) * 3 style round-off lands on 3).
inline std::uint64_t floor_safe(double x) {
  double f = std::floor(x);
  if (std::nextafter(x, std::numeric_limits<double>::infinity()) >= f + 1.0) f += 1.0;
  return static_cast<std::uint64_t>(f);
}

/// Largest r with r*r <= n.
inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Largest r with r*r*r <= n.
inline std::uint64_t icbrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(n)));
  while (r > 0 && r * r * r > n) --r;
  while ((r + 1) * (r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Immutable table of d_k(n) for 1 <= n <= limit, stored as 32-bit counts.
/// Index 0 is unused and holds 0.
class DivisorTable {
 public:
  DivisorTable() = default;
  DivisorTable(int k, std::vector<std::uint32_t> values) : k_(k), values_(std::move(values)) {
    require(!values_.empty(), ErrorKind::domain, "divisor table needs index 0 and at least n = 1");
  }

  int k() const { return k_; }
  std::uint64_t limit() const { return values_.empty() ? 0 : values_.size() - 1; }

  std::uint32_t operator[](std::uint64_t n) const { return values_[n]; }

  std::uint32_t at(std::uint64_t n) const {
    require(n >= 1 && n <= limit(), ErrorKind::out_of_range,
            "d_k index " + std::to_string(n) + " outside [1, " + std::to_string(limit()) + "]");
    return values_[n];
  }

  /// Values for n = 0..limit (entry 0 is 0).
  std::span<const std::uint32_t> values() const { return values_; }

  /// D_k(n) by direct summation; O(n). Prefer DeltaEvaluator for repeated queries.
  std::uint64_t summatory(std::uint64_t n) const {
    require(n <= limit(), ErrorKind::out_of_range, "summatory index beyond table limit");
    std::uint64_t total = 0;
    for (std::uint64_t i = 1; i <= n; ++i) total += values_[i];
    return total;
  }

  friend bool operator==(const DivisorTable&, const DivisorTable&) = default;

 private:
  int k_ = 0;
  std::vector<std::uint32_t> values_;
};

namespace sieve_detail {

// d(n) by a linear sieve: every composite is struck once by its least prime.
inline std::vector<std::uint32_t> linear_sieve_d2(std::uint64_t limit) {
  std::vector<std::uint32_t> d(limit + 1, 0);
  std::vector<std::uint32_t> least_exp(limit + 1, 0);  // exponent of the least prime
  std::vector<std::uint32_t> primes;
  d[1] = 1;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (least_exp[i] == 0) {
      primes.push_back(static_cast<std::uint32_t>(i));
      d[i] = 2;
      least_exp[i] = 1;
    }
    for (std::uint32_t p : primes) {
      const std::uint64_t m = i * p;
      if (m > limit) break;
      if (i % p == 0) {
        least_exp[m] = least_exp[i] + 1;
        d[m] = d[i] / (least_exp[i] + 1) * (least_exp[m] + 1);
        break;
      }
      least_exp[m] = 1;
      d[m] = d[i] * 2;
    }
  }
  return d;
}

// In place: values[n] <- sum_{e | n} values[e]. Walking e downward keeps
// values[e] untouched until it is read.
inline void convolve_with_one(std::vector<std::uint32_t>& values) {
  const std::uint64_t limit = values.size() - 1;
  for (std::uint64_t e = limit / 2; e >= 1; --e) {
    const std::uint32_t v = values[e];
    for (std::uint64_t m = 2 * e; m <= limit; m += e) {
      if (__builtin_add_overflow(values[m], v, &values[m])) {
        fail(ErrorKind::arithmetic, "d_k count overflowed 32 bits at n = " + std::to_string(m));
      }
    }
  }
}

}  // namespace sieve_detail

/// Exact d_k(n) for all n <= limit. Needs about 4 bytes per entry for the
/// table plus 4 more transiently while the k = 2 base is sieved.
inline DivisorTable sieve_dk(int k, std::uint64_t limit) {
  require(limit >= 1, ErrorKind::domain, "sieve limit must be at least 1 (empty domain)");
  require(k >= 1 && k <= kMaxDivisorOrder, ErrorKind::unsupported,
          "sieve_dk supports 1 <= k <= 6, got k = " + std::to_string(k));
  require(limit < std::numeric_limits<std::uint32_t>::max(), ErrorKind::out_of_range,
          "sieve limit exceeds 32-bit index range");
  std::vector<std::uint32_t> values;
  if (k == 1) {
    values.assign(limit + 1, 1);
    values[0] = 0;
  } else {
    values = sieve_detail::linear_sieve_d2(limit);
    for (int j = 2; j < k; ++j) sieve_detail::convolve_with_one(values);
  }
  return DivisorTable(k, std::move(values));
}

enum class SummatoryMethod { sieve_prefix, hyperbola };

namespace summatory_detail {

inline std::uint64_t hyperbola_d2(std::uint64_t n) {
  const std::uint64_t r = isqrt(n);
  std::uint64_t total = 0;
  for (std::uint64_t d = 1; d <= r; ++d) total += n / d;
  return 2 * total - r * r;
}

// Counts ordered triples abc <= n by their sorted representative a <= b <= c,
// weighting by the number of distinct permutations. a runs to n^{1/3}.
inline std::uint64_t hyperbola_d3(std::uint64_t n) {
  const std::uint64_t a_max = icbrt(n);
  std::uint64_t total = 0;
  for (std::uint64_t a = 1; a <= a_max; ++a) {
    const std::uint64_t rest = n / a;
    const std::uint64_t b_max = isqrt(rest);
    std::uint64_t distinct = 0;
    for (std::uint64_t b = a + 1; b <= b_max; ++b) distinct += rest / b - b;
    total += 6 * distinct;
    total += 3 * (rest / a - a);  // a = b < c
    total += 3 * (b_max - a);     // a < b = c
    total += 1;                   // a = b = c
  }
  return total;
}

}  // namespace summatory_detail

/// D_k(floor(x)) without a table: the hyperbola method for k = 2, 3.
inline std::uint64_t summatory_hyperbola(int k, double x) {
  require(x >= 1.0, ErrorKind::domain, "summatory function needs x >= 1");
  const std::uint64_t n = floor_safe(x);
  switch (k) {
    case 1: return n;
    case 2: return summatory_detail::hyperbola_d2(n);
    case 3: return summatory_detail::hyperbola_d3(n);
    default:
      fail(ErrorKind::unsupported, "hyperbola method implemented for k <= 3 only");
  }
}

/// D_k(floor(x)) by either route. The sieve-prefix route needs a table of
/// matching k reaching floor(x).
inline std::uint64_t summatory_dk(int k, double x, SummatoryMethod method,
                                  const DivisorTable* table = nullptr) {
  require(x >= 1.0, ErrorKind::domain, "summatory function needs x >= 1");
  if (method == SummatoryMethod::hyperbola) return summatory_hyperbola(k, x);
  require(table != nullptr && table->k() == k, ErrorKind::domain,
          "sieve-prefix summation needs a table of the same k");
  return table->summatory(floor_safe(x));
}

}  // namespace dkl
