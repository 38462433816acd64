#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "dkl/delta.hpp"

namespace {

const dkl::DeltaEvaluator& ev2() {
  static const auto ev = dkl::DeltaEvaluator::build(2, 2'000'000);
  return ev;
}

}  // namespace

TEST(Delta, KnownValues) {
  EXPECT_NEAR(ev2().delta(1.0), 2.0 - 2.0 * std::numbers::egamma, 1e-14);
  EXPECT_NEAR(ev2().delta(1.0), 0.8455687, 5e-8);
  const double expected = 27.0 - 10.0 * (std::log(10.0) + 2.0 * std::numbers::egamma - 1.0);
  EXPECT_NEAR(ev2().delta(10.0), expected, 1e-12);
  EXPECT_NEAR(ev2().delta(10.0), 2.4298358, 5e-7);
  EXPECT_DOUBLE_EQ(dkl::delta_k(2, 10.0, ev2()), ev2().delta(10.0));
}

TEST(Delta, JumpEqualsDivisorCount) {
  for (std::uint64_t n : {2ULL, 6ULL, 12ULL, 720ULL, 65536ULL, 65537ULL, 1'999'999ULL}) {
    const double jump = ev2().delta(static_cast<double>(n)) - ev2().delta_left(n);
    EXPECT_NEAR(jump, ev2().table()[n], 1e-6) << n;
  }
}

TEST(Delta, RightContinuousNearIntegers) {
  // One ulp below an integer is snapped to it; two ulps below is not.
  const double n = 1000.0;
  const double below1 = std::nextafter(n, 0.0);
  const double below2 = std::nextafter(below1, 0.0);
  EXPECT_EQ(ev2().summatory(dkl::floor_safe(below1)), ev2().summatory(1000));
  EXPECT_EQ(ev2().summatory(dkl::floor_safe(below2)), ev2().summatory(999));
}

TEST(Delta, SummatoryMatchesHyperbola) {
  for (std::uint64_t n : {1ULL, 511ULL, 512ULL, 513ULL, 100'000ULL, 2'000'000ULL}) {
    EXPECT_EQ(ev2().summatory(n), dkl::summatory_hyperbola(2, static_cast<double>(n))) << n;
  }
}

TEST(Delta, NormalizedErrorHasNoDrift) {
  // |Delta(x)| / x^{1/4} over each decade: a wrong constant term would grow
  // like x^{3/4} here.
  double previous = 0.0;
  for (double lo : {1e3, 1e4, 1e5, 1e6}) {
    double worst = 0.0;
    for (auto n = static_cast<std::uint64_t>(lo); n < static_cast<std::uint64_t>(std::min(lo * 10, 2e6)); ++n) {
      const double x = static_cast<double>(n);
      worst = std::max(worst, std::abs(ev2().delta(x)) / std::pow(x, 0.25));
    }
    EXPECT_LT(worst, 8.0) << lo;
    if (previous > 0.0) EXPECT_LT(worst / previous, 2.0) << lo;
    previous = worst;
  }
}

TEST(Delta, ErrorPaths) {
  try {
    (void)ev2().delta(2'000'001.0);
    FAIL();
  } catch (const dkl::Error& e) {
    EXPECT_EQ(e.kind(), dkl::ErrorKind::out_of_range);
  }
  EXPECT_THROW((void)ev2().delta(0.5), dkl::Error);
  EXPECT_THROW((void)ev2().delta_left(1), dkl::Error);
  EXPECT_THROW((void)dkl::delta_k(3, 10.0, ev2()), dkl::Error);
  auto table = std::make_shared<dkl::DivisorTable>(dkl::sieve_dk(3, 100));
  EXPECT_THROW(dkl::DeltaEvaluator(table, dkl::main_term_coeffs(2)), dkl::Error);
}

TEST(Delta, HigherOrderDeltaIsSmallRelativeToMainTerm) {
  const auto ev3 = dkl::DeltaEvaluator::build(3, 1'000'000);
  for (double x : {1e4, 1e5, 1e6}) {
    EXPECT_LT(std::abs(ev3.delta(x)) / ev3.main_term(x), 1e-2) << x;
  }
}
