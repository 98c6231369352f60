#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gamma2/error.hpp"

namespace gamma2 {

struct OdeOptions {
  double rtol = 1e-13;
  double atol = 1e-13;
  double h_init = 1e-3;
  double h_max = 0.02;
  double h_min = 1e-14;
  long max_steps = 10'000'000;
};

// Accepted steps of a scalar trajectory. `dy` holds the right-hand side at
// each stored point so callers can build Hermite interpolants.
struct OdeTrajectory {
  std::vector<double> t, y, dy;
  bool event_hit = false;
  long rejected = 0;
};

struct NoEvent {
  double operator()(double, double) const { return 1.0; }
};

// Dormand-Prince 5(4) for y' = f(t, y), from t0 towards t_end (either
// direction). Integration stops early when event(t, y) changes sign; the
// crossing is located by bisection on the cubic Hermite step interpolant and
// stored as the final point.
template <class Rhs, class Event = NoEvent>
OdeTrajectory integrate_dopri(Rhs&& f, double t0, double y0, double t_end, const OdeOptions& opt,
                              Event&& event = Event{}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeTrajectory tr;
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  double t = t0, y = y0;
  double k1 = f(t, y);
  tr.t.push_back(t);
  tr.y.push_back(y);
  tr.dy.push_back(k1);
  double g0 = event(t, y);
  double h = std::min(opt.h_init, opt.h_max);
  long steps = 0;

  while (dir * (t_end - t) > 0.0) {
    if (++steps > opt.max_steps) throw StiffnessFailure("step budget exhausted");
    h = std::min({h, opt.h_max, dir * (t_end - t)});
    const double hs = dir * h;
    const double k2 = f(t + c2 * hs, y + hs * a21 * k1);
    const double k3 = f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const double k4 = f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double yn = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = f(t + hs, yn);
    const double errv = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    if (!std::isfinite(yn) || !std::isfinite(errv))
      throw NonFiniteEvaluation("non-finite state in ODE step");
    const double scale = opt.atol + opt.rtol * std::max(std::abs(y), std::abs(yn));
    const double err = std::abs(errv) / scale;
    if (err > 1.0) {
      ++tr.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < opt.h_min) {
        std::ostringstream os;
        os.precision(17);
        os << "step collapsed to " << h << " at t = " << t;
        throw StiffnessFailure(os.str());
      }
      continue;
    }
    const double tn = t + hs;
    const double g1 = event(tn, yn);
    if ((g0 < 0.0) != (g1 < 0.0)) {
      // Locate the crossing on the cubic Hermite interpolant of this step.
      auto interp = [&](double s) {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y + (s3 - 2 * s2 + s) * hs * k1 + (-2 * s3 + 3 * s2) * yn +
               (s3 - s2) * hs * k7;
      };
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = event(t + mid * hs, interp(mid));
        if ((gm < 0.0) == (g0 < 0.0))
          lo = mid;
        else
          hi = mid;
      }
      const double te = t + hi * hs;
      const double ye = interp(hi);
      tr.t.push_back(te);
      tr.y.push_back(ye);
      tr.dy.push_back(f(te, ye));
      tr.event_hit = true;
      return tr;
    }
    t = tn;
    y = yn;
    k1 = k7;
    g0 = g1;
    tr.t.push_back(t);
    tr.y.push_back(y);
    tr.dy.push_back(k1);
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= fac;
  }
  return tr;
}

}  // namespace gamma2
