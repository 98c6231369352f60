#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gamma2/error.hpp"
#include "gamma2/numerics/interpolation.hpp"
#include "gamma2/numerics/quadrature.hpp"

namespace gamma2 {

enum class WeightSource { rearranged, levelset, user };

inline const char* to_string(WeightSource s) {
  switch (s) {
    case WeightSource::rearranged: return "rearranged";
    case WeightSource::levelset: return "levelset";
    case WeightSource::user: return "user";
  }
  return "user";
}

// Endpoint behaviour of a weight on (lo, hi):
//   d1 (t-lo)^{n1-1} <= eta <= d2 (t-lo)^{n1-1}   on (lo, lo + t_star]
//   d3 (hi-t)^{n2-1} <= eta <= d4 (hi-t)^{n2-1}   on [hi - t_star, hi)
//   |eta'| <= d5 eta / min(t - lo, hi - t)        on the whole interval
struct WeightTail {
  int n1 = 1, n2 = 1;
  double exponent_lo = 0.0, exponent_hi = 0.0;  // measured n-1 before rounding
  double d1 = 0, d2 = 0, d3 = 0, d4 = 0, d5 = 0;
  double t_star = 0;
};

struct Weight {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  double lo = -1.0;
  double hi = 1.0;
  WeightSource source = WeightSource::user;
  std::string label;
  // Points in (lo, hi) where eta is not smooth; used to split quadratures.
  std::vector<double> breakpoints;
  WeightTail tail;

  double operator()(double t) const { return eval(t); }

  double integral(double x0, double x1) const {
    QuadOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-14;
    opt.max_intervals = 20000;
    return integrate(eval, x0, x1, std::span<const double>(breakpoints), opt).value;
  }
  double total() const { return integral(lo, hi); }
};

// Measures the tail data on a sample grid. The exponents n-1 are read from
// the log-ratio of eta at distances d and 2d from each endpoint.
inline WeightTail measure_tail(const Weight& w, int samples = 400) {
  WeightTail tl;
  const double len = w.hi - w.lo;
  tl.t_star = 0.1 * len;
  const double d = 1e-6 * len;
  auto expo = [&](double x1, double x2) {
    const double r = std::log(w.eval(x2) / w.eval(x1)) / std::log(2.0);
    return std::isfinite(r) ? r : 0.0;
  };
  tl.exponent_lo = expo(w.lo + d, w.lo + 2 * d);
  tl.exponent_hi = expo(w.hi - d, w.hi - 2 * d);
  tl.n1 = std::max(1, static_cast<int>(std::lround(tl.exponent_lo)) + 1);
  tl.n2 = std::max(1, static_cast<int>(std::lround(tl.exponent_hi)) + 1);
  tl.d1 = tl.d3 = INFINITY;
  tl.d2 = tl.d4 = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double s = tl.t_star * i / samples;
    const double el = w.eval(w.lo + s) / std::pow(s, tl.n1 - 1);
    const double eh = w.eval(w.hi - s) / std::pow(s, tl.n2 - 1);
    tl.d1 = std::min(tl.d1, el);
    tl.d2 = std::max(tl.d2, el);
    tl.d3 = std::min(tl.d3, eh);
    tl.d4 = std::max(tl.d4, eh);
  }
  tl.d5 = 0.0;
  for (int i = 1; i < 4 * samples; ++i) {
    const double t = w.lo + len * i / (4.0 * samples);
    const double e = w.eval(t);
    if (e <= 0.0) continue;
    const double m = std::min(t - w.lo, w.hi - t);
    tl.d5 = std::max(tl.d5, std::abs(w.deriv(t)) * m / e);
  }
  return tl;
}

// Positivity and the two-sided tail bounds; throws HypothesisViolation.
inline void check_weight(const Weight& w) {
  const WeightTail& tl = w.tail;
  auto bad = [](double x) { return !std::isfinite(x) || x <= 0.0; };
  if (bad(tl.d1) || bad(tl.d2) || bad(tl.d3) || bad(tl.d4) || !std::isfinite(tl.d5))
    throw HypothesisViolation("weight '" + w.label + "' violates the endpoint tail bounds");
  if (std::abs(tl.exponent_lo - (tl.n1 - 1)) > 0.05 || std::abs(tl.exponent_hi - (tl.n2 - 1)) > 0.05)
    throw HypothesisViolation("weight '" + w.label + "' has non-integer endpoint exponents");
  for (int i = 1; i < 1000; ++i) {
    const double t = w.lo + (w.hi - w.lo) * i / 1000.0;
    if (!(w.eval(t) > 0.0)) throw HypothesisViolation("weight '" + w.label + "' is not positive");
  }
}

inline Weight finalize_weight(Weight w, bool check = true) {
  w.tail = measure_tail(w);
  if (check) check_weight(w);
  return w;
}

// eta(t) = intercept + slope t on (lo, hi).
inline Weight linear_weight(double intercept, double slope, double lo, double hi) {
  if (!(hi > lo)) throw InvalidArgument("weight interval must satisfy lo < hi");
  Weight w;
  w.eval = [=](double t) { return intercept + slope * t; };
  w.deriv = [=](double) { return slope; };
  w.lo = lo;
  w.hi = hi;
  w.label = "linear";
  return finalize_weight(std::move(w));
}

inline Weight constant_weight(double value, double lo, double hi) {
  Weight w = linear_weight(value, 0.0, lo, hi);
  w.label = "constant";
  return w;
}

// User table (t_i, eta_i) with monotone cubic interpolation.
inline Weight table_weight(std::vector<double> t, std::vector<double> eta) {
  auto h = CubicHermite::monotone(std::move(t), std::move(eta));
  Weight w;
  w.lo = h.front();
  w.hi = h.back();
  w.eval = [h](double x) { return h(x); };
  w.deriv = [h](double x) { return h.deriv(x); };
  w.breakpoints = h.nodes();
  w.label = "table";
  return finalize_weight(std::move(w));
}

}  // namespace gamma2
