#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gamma2/error.hpp"

namespace gamma2 {

namespace detail {

// Index i with x[i] <= t < x[i+1], clamped to valid cells.
inline std::size_t locate(const std::vector<double>& x, double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(i, x.size() - 2);
}

inline void require_increasing(const std::vector<double>& x) {
  if (x.size() < 2) throw InvalidArgument("interpolation needs at least two nodes");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw InvalidArgument("interpolation nodes must be strictly increasing");
}

}  // namespace detail

// Piecewise cubic Hermite interpolant with prescribed slopes.
class CubicHermite {
 public:
  CubicHermite() = default;
  CubicHermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
      : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
    detail::require_increasing(x_);
  }

  // Fritsch-Carlson monotone slopes.
  static CubicHermite monotone(std::vector<double> x, std::vector<double> y) {
    detail::require_increasing(x);
    const std::size_t n = x.size();
    std::vector<double> delta(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        m[i] = 0.0;
      } else {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
        m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    return CubicHermite(std::move(x), std::move(y), std::move(m));
  }

  double operator()(double t) const { return eval(t, 0); }
  double deriv(double t) const { return eval(t, 1); }
  double deriv2(double t) const { return eval(t, 2); }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  double eval(double t, int order) const {
    const std::size_t i = detail::locate(x_, t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1], m0 = dy_[i] * h, m1 = dy_[i + 1] * h;
    if (order == 0) {
      const double s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 +
             (s3 - s2) * m1;
    }
    if (order == 1) {
      const double s2 = s * s;
      return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * y1 +
              (3 * s2 - 2 * s) * m1) /
             h;
    }
    return ((12 * s - 6) * y0 + (6 * s - 4) * m0 + (-12 * s + 6) * y1 + (6 * s - 2) * m1) / (h * h);
  }

  std::vector<double> x_, y_, dy_;
};

// Piecewise quintic Hermite interpolant from values and first two
// derivatives; used for ODE tabulations where y'' is available in closed form.
class QuinticHermite {
 public:
  QuinticHermite() = default;
  QuinticHermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy,
                 std::vector<double> d2y)
      : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)), d2y_(std::move(d2y)) {
    detail::require_increasing(x_);
  }

  double operator()(double t) const { return eval(t, false); }
  double deriv(double t) const { return eval(t, true); }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& slopes() const { return dy_; }
  bool empty() const { return x_.empty(); }

 private:
  double eval(double t, bool derivative) const {
    const std::size_t i = detail::locate(x_, t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double p0 = y_[i], p1 = y_[i + 1];
    const double v0 = dy_[i] * h, v1 = dy_[i + 1] * h;
    const double a0 = d2y_[i] * h * h, a1 = d2y_[i + 1] * h * h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    if (!derivative) {
      const double h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
      const double h01 = s - 6 * s3 + 8 * s4 - 3 * s5;
      const double h02 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
      const double h10 = 10 * s3 - 15 * s4 + 6 * s5;
      const double h11 = -4 * s3 + 7 * s4 - 3 * s5;
      const double h12 = 0.5 * s3 - s4 + 0.5 * s5;
      return h00 * p0 + h01 * v0 + h02 * a0 + h10 * p1 + h11 * v1 + h12 * a1;
    }
    const double d00 = -30 * s2 + 60 * s3 - 30 * s4;
    const double d01 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    const double d02 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4;
    const double d10 = 30 * s2 - 60 * s3 + 30 * s4;
    const double d11 = -12 * s2 + 28 * s3 - 15 * s4;
    const double d12 = 1.5 * s2 - 4 * s3 + 2.5 * s4;
    return (d00 * p0 + d01 * v0 + d02 * a0 + d10 * p1 + d11 * v1 + d12 * a1) / h;
  }

  std::vector<double> x_, y_, dy_, d2y_;
};

}  // namespace gamma2
