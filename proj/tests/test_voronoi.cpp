#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "dkl/voronoi.hpp"

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

const dkl::DeltaEvaluator& ev2() {
  static const auto ev = dkl::DeltaEvaluator::build(2, 2'200'000);
  return ev;
}

// Reduced phase in turns with 50-digit arithmetic.
double phase_oracle(int k, double x, std::uint64_t n) {
  const Big xn = Big(x) * Big(n);
  Big t = k * pow(xn, Big(1) / k) + Big(k - 3) / 8;
  t -= round(t);
  return static_cast<double>(t);
}

double turn_distance(double a, double b) {
  const double d = a - b;
  return std::abs(d - std::nearbyint(d));
}

}  // namespace

TEST(Voronoi, SingleTermExample) {
  const auto s = dkl::VoronoiSeries::build(ev2().table(), 1);
  EXPECT_NEAR(dkl::truncated_voronoi(s, 1e4), 10.0 / (2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(dkl::truncated_voronoi(s, 1e4), 1.5915494, 5e-8);
}

TEST(Voronoi, ZeroCosinePoint) {
  // 4 pi sqrt(x) - pi/4 = 401 pi/2 + ... : sqrt(x) = 100 + 3/16 is exact in binary.
  const double r = 100.1875;
  const auto s = dkl::VoronoiSeries::build(ev2().table(), 1);
  EXPECT_NEAR(dkl::truncated_voronoi(s, r * r), 0.0, 1e-11);
}

TEST(Voronoi, SeriesFields) {
  const auto s = dkl::VoronoiSeries::build(ev2().table(), 64);
  EXPECT_EQ(s.k(), 2);
  EXPECT_EQ(s.terms(), 64U);
  EXPECT_DOUBLE_EQ(s.phase_offset(), -std::numbers::pi / 4.0);
  EXPECT_DOUBLE_EQ(s.prefactor_exponent(), 0.25);
  for (std::uint64_t n = 1; n <= 64; ++n) {
    EXPECT_GT(s.amplitude(n), 0.0);
    EXPECT_DOUBLE_EQ(s.amplitude(n), ev2().table()[n] * std::pow(static_cast<double>(n), -0.75));
  }
  EXPECT_TRUE(s.beyond_recommended_range(10.0));
  EXPECT_FALSE(s.beyond_recommended_range(1000.0));
}

TEST(Voronoi, PrefixStability) {
  const auto a = dkl::VoronoiSeries::build(ev2().table(), 500);
  const auto b = dkl::VoronoiSeries::build(ev2().table(), 1000);
  for (std::uint64_t n = 1; n <= 500; ++n) ASSERT_EQ(a.amplitude(n), b.amplitude(n));
}

TEST(Voronoi, PhaseHomogeneity) {
  for (int k : {2, 3}) {
    for (std::uint64_t n : {2ULL, 7ULL, 1000ULL}) {
      for (double x : {3.0, 12345.0, 1e7}) {
        const double lhs = dkl::phase_turns(k, x, n, true);
        const double rhs = dkl::phase_turns(k, x * static_cast<double>(n), 1, true);
        EXPECT_LT(turn_distance(lhs, rhs), 1e-15) << k << " " << x << " " << n;
      }
    }
  }
}

TEST(Voronoi, DoubleAndExtendedPhasesAgreeBelow1e12) {
  for (int k : {2, 3, 4}) {
    for (double xn : {1e3 + 0.5, 123456.5, 1e9 + 0.5, 999'999'999'999.5}) {
      const double plain = dkl::phase_turns(k, xn, 1, false);
      const double dd = dkl::phase_turns(k, xn, 1, true);
      EXPECT_LT(turn_distance(plain, dd), 1e-8) << k << " " << xn;
    }
  }
}

TEST(Voronoi, ExtendedPhaseMatchesHighPrecisionOracle) {
  for (int k : {2, 3}) {
    for (double x : {1e6 + 0.5, 1e12 + 0.5, 4.5e15}) {
      for (std::uint64_t n : {1ULL, 999ULL, 1'000'003ULL}) {
        EXPECT_LT(turn_distance(dkl::phase_turns(k, x, n, true), phase_oracle(k, x, n)), 1e-9)
            << k << " " << x << " " << n;
      }
    }
  }
}

TEST(Voronoi, TruncatedSumApproachesDelta) {
  // The cosine series carries no constant term; Delta_2 minus its limit is
  // zeta(0)^2 = 1/4.
  const auto s = dkl::VoronoiSeries::build(ev2().table(), 1000);
  const double x = 1e6 + 0.5;
  EXPECT_LT(std::abs(dkl::truncated_voronoi(s, x) - ev2().delta(x)), std::log(x) * std::sqrt(x / 1000.0));

  const auto big = dkl::VoronoiSeries::build(ev2().table(), 2'000'000);
  for (double x0 : {1000.5, 5000.5, 1e6 + 0.5}) {
    EXPECT_LT(std::abs(dkl::truncated_voronoi(big, x0) - (ev2().delta(x0) - 0.25)), 0.15) << x0;
  }
}

TEST(Voronoi, PartialSumsMatchSeparateSeries) {
  const auto s = dkl::VoronoiSeries::build(ev2().table(), 256);
  const auto sums = s.partial_sums(12345.5, {16, 64, 256});
  for (std::size_t i = 0; i < 3; ++i) {
    const std::uint64_t n = 16ULL << (2 * i);
    const auto t = dkl::VoronoiSeries::build(ev2().table(), n);
    EXPECT_NEAR(sums[i], dkl::truncated_voronoi(t, 12345.5), 1e-12);
  }
}

TEST(ErrorProfile, SingleTermCountHasNoSlope) {
  const auto p = dkl::truncation_error_profile(ev2(), 1e4, 16, {64}, 1);
  ASSERT_EQ(p.rows.size(), 1U);
  EXPECT_FALSE(p.fitted_slope.has_value());
  EXPECT_GT(p.rows[0].rms_error, 0.0);
  EXPECT_GE(p.rows[0].max_error, p.rows[0].rms_error);
}

TEST(ErrorProfile, DeterministicForSeed) {
  const auto a = dkl::truncation_error_profile(ev2(), 1e5, 64, {16, 64, 256}, 9);
  const auto b = dkl::truncation_error_profile(ev2(), 1e5, 64, {256, 16, 64}, 9);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].rms_error, b.rows[i].rms_error);
  ASSERT_TRUE(a.fitted_slope.has_value());
  EXPECT_LT(*a.fitted_slope, 0.0);
}

TEST(ErrorProfile, SamplesAreHalfIntegersInRange) {
  for (double x : dkl::half_integer_samples(1e5, 500, 3)) {
    EXPECT_GE(x, 1e5);
    EXPECT_LT(x, 2e5);
    EXPECT_EQ(x - std::floor(x), 0.5);
  }
}

TEST(ErrorProfile, ErrorPaths) {
  try {
    (void)dkl::truncation_error_profile(ev2(), 1e4, 7, {16}, 1);
    FAIL();
  } catch (const dkl::Error& e) {
    EXPECT_EQ(e.kind(), dkl::ErrorKind::insufficient);
  }
  try {
    (void)dkl::VoronoiSeries::build(ev2().table(), 0);
    FAIL();
  } catch (const dkl::Error& e) {
    EXPECT_EQ(e.kind(), dkl::ErrorKind::domain);
  }
  EXPECT_THROW((void)dkl::truncation_error_profile(ev2(), 2e6, 16, {16}, 1), dkl::Error);
}
