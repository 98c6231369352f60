#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gamma2/error.hpp"

namespace gamma2 {

struct PowerLawFit {
  double limit = 0.0;     // L
  double coeff = 0.0;     // c
  double exponent = 1.0;  // p
  double rss = 0.0;
  int points = 0;
};

namespace detail {

inline PowerLawFit linear_fit_at(const std::vector<double>& x, const std::vector<double>& y,
                                 double p) {
  const std::size_t n = x.size();
  double su = 0, suu = 0, sy = 0, suy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::pow(x[i], p);
    su += u;
    suu += u * u;
    sy += y[i];
    suy += u * y[i];
  }
  const double det = n * suu - su * su;
  PowerLawFit f;
  f.exponent = p;
  f.points = static_cast<int>(n);
  if (det == 0.0) {
    f.limit = sy / n;
  } else {
    f.coeff = (n * suy - su * sy) / det;
    f.limit = (sy - f.coeff * su) / n;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.limit - f.coeff * std::pow(x[i], p);
    f.rss += r * r;
  }
  return f;
}

}  // namespace detail

// Least-squares fit of y = L + c x^p with free p over the last `window`
// points. For each trial p the problem is linear in (L, c); p is chosen by a
// scan followed by golden-section refinement.
inline PowerLawFit fit_power_law(const std::vector<double>& x_all, const std::vector<double>& y_all,
                                 int window = 4, double p_lo = 0.2, double p_hi = 4.0) {
  if (x_all.size() != y_all.size()) throw InvalidArgument("fit: size mismatch");
  if (x_all.size() < 3) throw InvalidArgument("extrapolation needs at least 3 points");
  const std::size_t k = std::min<std::size_t>(std::max(window, 3), x_all.size());
  std::vector<double> x(x_all.end() - k, x_all.end()), y(y_all.end() - k, y_all.end());
  // Scale x so that powers stay well conditioned.
  const double xs = *std::max_element(x.begin(), x.end());
  for (double& v : x) v /= xs;

  const int scan = 380;
  double best_p = p_lo, best_rss = INFINITY;
  for (int i = 0; i <= scan; ++i) {
    const double p = p_lo + (p_hi - p_lo) * i / scan;
    const double r = detail::linear_fit_at(x, y, p).rss;
    if (r < best_rss) {
      best_rss = r;
      best_p = p;
    }
  }
  const double step = (p_hi - p_lo) / scan;
  double a = std::max(p_lo, best_p - step), b = std::min(p_hi, best_p + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = detail::linear_fit_at(x, y, c).rss, fd = detail::linear_fit_at(x, y, d).rss;
  for (int i = 0; i < 100; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = detail::linear_fit_at(x, y, c).rss;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = detail::linear_fit_at(x, y, d).rss;
    }
  }
  double p = 0.5 * (a + b);
  PowerLawFit fit = detail::linear_fit_at(x, y, p);
  if (best_rss < fit.rss) fit = detail::linear_fit_at(x, y, best_p);
  fit.coeff /= std::pow(xs, fit.exponent);
  return fit;
}

}  // namespace gamma2
