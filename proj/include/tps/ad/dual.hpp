#pragma once

#include <cmath>

namespace tps::ad {

/// Second-order forward-mode number: value plus first and second derivative
/// along one fixed direction. Closed under +, -, *, / and the elementary
/// functions declared below; anything else does not compile.
struct Dual2 {
  double v{0.0};
  double d1{0.0};
  double d2{0.0};

  constexpr Dual2() = default;
  constexpr Dual2(double value) : v(value) {}  // NOLINT(google-explicit-constructor): constants promote
  constexpr Dual2(double value, double first, double second) : v(value), d1(first), d2(second) {}

  /// The seeded independent variable of the direction.
  static constexpr Dual2 variable(double value) { return {value, 1.0, 0.0}; }

  Dual2& operator+=(const Dual2& o) { return *this = *this + o; }
  Dual2& operator-=(const Dual2& o) { return *this = *this - o; }
  Dual2& operator*=(const Dual2& o) { return *this = *this * o; }
  Dual2& operator/=(const Dual2& o) { return *this = *this / o; }

  friend constexpr Dual2 operator+(const Dual2& a, const Dual2& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
  friend constexpr Dual2 operator-(const Dual2& a, const Dual2& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
  friend constexpr Dual2 operator-(const Dual2& a) { return {-a.v, -a.d1, -a.d2}; }
  friend constexpr Dual2 operator*(const Dual2& a, const Dual2& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
  }
  friend constexpr Dual2 operator/(const Dual2& a, const Dual2& b) {
    const double q = a.v / b.v;
    const double q1 = (a.d1 - q * b.d1) / b.v;
    const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
    return {q, q1, q2};
  }
};

/// Lifts a scalar function with known first and second derivatives.
constexpr Dual2 chain(const Dual2& a, double f, double f1, double f2) {
  return {f, f1 * a.d1, f2 * a.d1 * a.d1 + f1 * a.d2};
}

inline Dual2 tanh(const Dual2& a) {
  const double h = std::tanh(a.v);
  const double s = 1.0 - h * h;
  return chain(a, h, s, -2.0 * h * s);
}

inline Dual2 exp(const Dual2& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}

inline Dual2 sin(const Dual2& a) {
  const double s = std::sin(a.v);
  return chain(a, s, std::cos(a.v), -s);
}

inline Dual2 cos(const Dual2& a) {
  const double c = std::cos(a.v);
  return chain(a, c, -std::sin(a.v), -c);
}

}  // namespace tps::ad
