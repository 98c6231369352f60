#pragma once

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "gamma2/error.hpp"

namespace gamma2 {

namespace detail {

inline std::string bracket_message(double lo, double hi, double flo, double fhi) {
  std::ostringstream os;
  os.precision(17);
  os << "no sign change on [" << lo << ", " << hi << "], f = (" << flo << ", " << fhi << ")";
  return os.str();
}

}  // namespace detail

// Plain bisection; returns the midpoint of the final bracket.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol, int max_iter = 200) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw NoBracket(detail::bracket_message(lo, hi, flo, fhi));
  for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Secant refinement that never leaves [lo, hi]; used after bisection has
// localized the root.
template <class F>
double secant_polish(F&& f, double x0, double x1, double lo, double hi, int steps = 8) {
  double f0 = f(x0);
  double f1 = f(x1);
  for (int i = 0; i < steps; ++i) {
    if (f1 == 0.0 || f1 == f0) break;
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    if (!(x2 >= lo && x2 <= hi)) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f(x1);
  }
  return std::abs(f1) <= std::abs(f0) ? x1 : x0;
}

// Brent's method on a sign-changing bracket.
template <class F>
double brent(F&& f, double a, double b, double xtol = 1e-15, int max_iter = 300) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) == (fb < 0.0)) throw NoBracket(detail::bracket_message(a, b, fa, fb));
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb < 0.0) == (fc < 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * 2.2e-16 * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  return b;
}

// Subintervals of a uniform sampling of [lo, hi] on which f changes sign.
template <class F>
std::vector<std::pair<double, double>> sign_change_brackets(F&& f, double lo, double hi, int n) {
  std::vector<std::pair<double, double>> out;
  double x0 = lo;
  double f0 = f(x0);
  for (int i = 1; i <= n; ++i) {
    const double x1 = lo + (hi - lo) * static_cast<double>(i) / n;
    const double f1 = f(x1);
    if (f0 == 0.0) {
      out.emplace_back(x0, x0);
    } else if (f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
      out.emplace_back(x0, x1);
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0.0) out.emplace_back(x0, x0);
  return out;
}

}  // namespace gamma2
