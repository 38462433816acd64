#pragma once

// Delta_k(x) = D_k(x) - x P_{k-1}(log x), right-continuous at integers.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dkl/divisor_table.hpp"
#include "dkl/errors.hpp"
#include "dkl/main_term.hpp"

namespace dkl {

/// Pairs a divisor table with its main term and answers D_k(n) queries in
/// O(stride) from sparse checkpoints (8 bytes per `stride` entries).
class DeltaEvaluator {
 public:
  static constexpr std::uint64_t stride = 512;

  DeltaEvaluator(std::shared_ptr<const DivisorTable> table, MainTermPolynomial poly)
      : table_(std::move(table)), poly_(std::move(poly)) {
    require(table_ != nullptr, ErrorKind::domain, "DeltaEvaluator needs a table");
    require(table_->k() == poly_.k, ErrorKind::domain, "table and main term have different k");
    const auto values = table_->values();
    checkpoints_.reserve(table_->limit() / stride + 2);
    std::uint64_t running = 0;
    for (std::uint64_t n = 0; n <= table_->limit(); ++n) {
      if (n % stride == 0) checkpoints_.push_back(running);
      running += values[n];
    }
  }

  /// Builds the table and main term for k (2 <= k <= 4).
  static DeltaEvaluator build(int k, std::uint64_t limit) {
    return DeltaEvaluator(std::make_shared<DivisorTable>(sieve_dk(k, limit)), main_term_coeffs(k));
  }

  int k() const { return poly_.k; }
  std::uint64_t limit() const { return table_->limit(); }
  const DivisorTable& table() const { return *table_; }
  std::shared_ptr<const DivisorTable> table_ptr() const { return table_; }
  const MainTermPolynomial& polynomial() const { return poly_; }

  /// D_k(n) for 0 <= n <= limit.
  std::uint64_t summatory(std::uint64_t n) const {
    require(n <= limit(), ErrorKind::out_of_range,
            "D_k(" + std::to_string(n) + ") beyond table limit " + std::to_string(limit()));
    const std::uint64_t base = n / stride;
    std::uint64_t total = checkpoints_[base];
    const auto values = table_->values();
    for (std::uint64_t i = base * stride; i <= n; ++i) total += values[i];
    return total;
  }

  double main_term(double x) const { return poly_.main_term(x); }

  /// Delta_k(x) for 1 <= x <= limit.
  double delta(double x) const {
    require(x >= 1.0 && x <= static_cast<double>(limit()), ErrorKind::out_of_range,
            "delta_k: x outside [1, table limit]");
    return static_cast<double>(summatory(floor_safe(x))) - main_term(x);
  }

  /// lim_{x -> n^-} Delta_k(x) = D_k(n - 1) - n P(log n).
  double delta_left(std::uint64_t n) const {
    require(n >= 2 && n <= limit(), ErrorKind::out_of_range, "delta_left: n outside [2, limit]");
    return static_cast<double>(summatory(n - 1)) - main_term(static_cast<double>(n));
  }

 private:
  std::shared_ptr<const DivisorTable> table_;
  MainTermPolynomial poly_;
  std::vector<std::uint64_t> checkpoints_;
};

/// Free-function form: Delta_k(x) through an evaluator of matching k.
inline double delta_k(int k, double x, const DeltaEvaluator& evaluator) {
  require(k == evaluator.k(), ErrorKind::domain, "delta_k: evaluator built for a different k");
  return evaluator.delta(x);
}

}  // namespace dkl
