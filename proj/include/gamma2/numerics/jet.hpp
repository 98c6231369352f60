#pragma once

#include <cmath>
#include <limits>

namespace gamma2 {

// Second-order forward-mode jet: value, first and second derivative with
// respect to a single variable.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  constexpr Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT: constants promote
  constexpr Jet(double value, double first, double second)
      : v(value), d1(first), d2(second) {}

  static constexpr Jet variable(double x) { return {x, 1.0, 0.0}; }
};

constexpr Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
constexpr Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
constexpr Jet operator-(Jet a) { return {-a.v, -a.d1, -a.d2}; }
constexpr Jet operator*(Jet a, Jet b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
constexpr Jet operator/(Jet a, Jet b) {
  const double r = a.v / b.v;
  const double r1 = (a.d1 - r * b.d1) / b.v;
  const double r2 = (a.d2 - 2.0 * r1 * b.d1 - r * b.d2) / b.v;
  return {r, r1, r2};
}
constexpr Jet operator+(Jet a, double b) { return {a.v + b, a.d1, a.d2}; }
constexpr Jet operator+(double a, Jet b) { return b + a; }
constexpr Jet operator-(Jet a, double b) { return {a.v - b, a.d1, a.d2}; }
constexpr Jet operator-(double a, Jet b) { return {a - b.v, -b.d1, -b.d2}; }
constexpr Jet operator*(Jet a, double b) { return {a.v * b, a.d1 * b, a.d2 * b}; }
constexpr Jet operator*(double a, Jet b) { return b * a; }
constexpr Jet operator/(Jet a, double b) { return {a.v / b, a.d1 / b, a.d2 / b}; }

// Composition with a scalar function given its value and two derivatives.
constexpr Jet chain(Jet x, double f, double f1, double f2) {
  return {f, f1 * x.d1, f2 * x.d1 * x.d1 + f1 * x.d2};
}

inline Jet sqrt(Jet x) {
  const double s = std::sqrt(x.v);
  return chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}

inline Jet exp(Jet x) {
  const double e = std::exp(x.v);
  return chain(x, e, e, e);
}

inline Jet abs(Jet x) { return x.v < 0.0 ? -x : x; }

// |x|^p for p > 1; the derivatives at x = 0 are taken as their one-sided limits.
inline Jet abs_pow(Jet x, double p) {
  const double ax = std::abs(x.v);
  if (ax == 0.0) {
    const double f2 = p > 2.0 ? 0.0 : (p == 2.0 ? 2.0 : std::numeric_limits<double>::infinity());
    return chain(x, 0.0, 0.0, f2);
  }
  const double sgn = x.v < 0.0 ? -1.0 : 1.0;
  const double f = std::pow(ax, p);
  return chain(x, f, sgn * p * f / ax, p * (p - 1.0) * f / (ax * ax));
}

inline double abs_pow(double x, double p) { return std::pow(std::abs(x), p); }

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace gamma2
