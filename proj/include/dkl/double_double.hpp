#pragma once

// Double-double arithmetic (unevaluated sum hi + lo, |lo| <= ulp(hi)/2).
// Roughly 106 bits of significand; enough to carry 8+ correct digits of a
// phase after reducing arguments as large as 1e20 radians.

#include <cmath>
#include <compare>
#include <cstdint>

namespace dkl {

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double h) : hi(h) {}  // NOLINT: implicit by design of the arithmetic
  constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

namespace dd_detail {

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DoubleDouble quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline DoubleDouble operator-(const DoubleDouble& a) { return {-a.hi, -a.lo}; }

inline DoubleDouble operator+(const DoubleDouble& a, const DoubleDouble& b) {
  auto s = dd_detail::two_sum(a.hi, b.hi);
  auto t = dd_detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = dd_detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return dd_detail::quick_two_sum(s.hi, s.lo);
}

inline DoubleDouble operator-(const DoubleDouble& a, const DoubleDouble& b) { return a + (-b); }

inline DoubleDouble operator*(const DoubleDouble& a, const DoubleDouble& b) {
  auto p = dd_detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return dd_detail::quick_two_sum(p.hi, p.lo);
}

inline DoubleDouble operator/(const DoubleDouble& a, const DoubleDouble& b) {
  const double q1 = a.hi / b.hi;
  DoubleDouble r = a - b * DoubleDouble(q1);
  const double q2 = r.hi / b.hi;
  r = r - b * DoubleDouble(q2);
  const double q3 = r.hi / b.hi;
  return DoubleDouble(q1) + DoubleDouble(q2) + DoubleDouble(q3);
}

inline DoubleDouble& operator+=(DoubleDouble& a, const DoubleDouble& b) { return a = a + b; }
inline DoubleDouble& operator-=(DoubleDouble& a, const DoubleDouble& b) { return a = a - b; }
inline DoubleDouble& operator*=(DoubleDouble& a, const DoubleDouble& b) { return a = a * b; }

inline bool operator==(const DoubleDouble& a, const DoubleDouble& b) {
  return a.hi == b.hi && a.lo == b.lo;
}

inline std::partial_ordering operator<=>(const DoubleDouble& a, const DoubleDouble& b) {
  if (auto c = a.hi <=> b.hi; c != 0) return c;
  return a.lo <=> b.lo;
}

inline DoubleDouble abs(const DoubleDouble& a) { return a.hi < 0.0 ? -a : a; }

/// Exact product of two doubles.
inline DoubleDouble mul_exact(double a, double b) { return dd_detail::two_prod(a, b); }

inline DoubleDouble dd_pow(DoubleDouble base, unsigned exp) {
  DoubleDouble result(1.0);
  while (exp != 0) {
    if (exp & 1U) result *= base;
    base *= base;
    exp >>= 1U;
  }
  return result;
}

/// Positive k-th root of a positive value, refined by Newton steps in
/// double-double from a double seed.
inline DoubleDouble kth_root(const DoubleDouble& value, int k) {
  if (k == 1) return value;
  const double seed = k == 2 ? std::sqrt(value.hi) : std::pow(value.hi, 1.0 / k);
  DoubleDouble y(seed);
  // Two steps double the 53-bit seed past 106 bits.
  for (int iter = 0; iter < 2; ++iter) {
    const DoubleDouble y_km1 = dd_pow(y, static_cast<unsigned>(k - 1));
    const DoubleDouble f = y_km1 * y - value;
    y = y - f / (DoubleDouble(static_cast<double>(k)) * y_km1);
  }
  return y;
}

inline DoubleDouble kth_root(std::uint64_t n, int k) {
  // n < 2^64 may not be exact in a double; split it.
  const double hi = static_cast<double>(n >> 32U) * 4294967296.0;
  const double lo = static_cast<double>(n & 0xffffffffULL);
  return kth_root(dd_detail::two_sum(hi, lo), k);
}

/// Returns value - round(value), in [-1/2, 1/2].
inline DoubleDouble reduce_to_unit(const DoubleDouble& value) {
  const double n = std::nearbyint(value.hi);
  DoubleDouble r = dd_detail::two_sum(value.hi - n, value.lo);
  // hi - n is exact when |hi| >= 1 (Sterbenz); only the lo part can push
  // the result past 1/2.
  if (r.hi > 0.5 || (r.hi == 0.5 && r.lo > 0.0)) r = r - DoubleDouble(1.0);
  if (r.hi < -0.5 || (r.hi == -0.5 && r.lo < 0.0)) r = r + DoubleDouble(1.0);
  return r;
}

inline constexpr DoubleDouble dd_two_pi{6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr DoubleDouble dd_pi{3.141592653589793116e+00, 1.224646799147353207e-16};

}  // namespace dkl
