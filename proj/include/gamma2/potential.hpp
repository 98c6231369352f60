#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gamma2/error.hpp"
#include "gamma2/numerics/interpolation.hpp"
#include "gamma2/numerics/jet.hpp"
#include "gamma2/numerics/roots.hpp"

namespace gamma2 {

// Wells a < b, central critical point c, well exponent q and the limit
// ell = lim W''(s) / |s - well|^{q-1}.
struct WellData {
  double a = -1.0;
  double b = 1.0;
  double c = 0.0;
  double q = 1.0;
  double ell = 4.0;
};

class Potential {
 public:
  using Fn = std::function<double(double)>;

  Potential(std::string name, Fn w, Fn dw, Fn d2w, WellData wells, bool symmetric,
            std::map<std::string, double> params = {}, bool c2 = true)
      : name_(std::move(name)),
        w_(std::move(w)),
        dw_(std::move(dw)),
        d2w_(std::move(d2w)),
        wells_(wells),
        symmetric_(symmetric),
        c2_(c2),
        params_(std::move(params)) {}

  // Builds W, W', W'' from a single generic shape functor evaluated on jets.
  template <class Shape>
  static Potential from_shape(std::string name, Shape shape, WellData wells, bool symmetric,
                              std::map<std::string, double> params = {}) {
    return Potential(
        std::move(name), [shape](double s) { return shape(s); },
        [shape](double s) { return shape(Jet::variable(s)).d1; },
        [shape](double s) { return shape(Jet::variable(s)).d2; }, wells, symmetric,
        std::move(params));
  }

  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }
  const WellData& wells() const { return wells_; }
  double a() const { return wells_.a; }
  double b() const { return wells_.b; }
  double c() const { return wells_.c; }
  double q() const { return wells_.q; }
  double ell() const { return wells_.ell; }
  bool symmetric() const { return symmetric_; }
  bool c2_regular() const { return c2_; }

  double eval(double s) const { return w_(s); }
  double operator()(double s) const { return w_(s); }
  double deriv(double s) const { return dw_(s); }

  // W''(s); empty within 1e-12 of a well when q < 1, where W'' is unbounded.
  std::optional<double> deriv2(double s) const {
    if (wells_.q < 1.0 &&
        (std::abs(s - wells_.a) <= 1e-12 || std::abs(s - wells_.b) <= 1e-12))
      return std::nullopt;
    return d2w_(s);
  }

  // W''(a) for q = 1 potentials.
  double curvature_at_wells() const {
    if (wells_.q < 1.0) throw InvalidArgument("W'' is unbounded at the wells when q < 1");
    return *deriv2(wells_.a);
  }

  void set_center(double c) { wells_.c = c; }

  // W(s) = (1 - s^2)^2 / 2.
  static Potential quartic() {
    auto shape = [](auto s) {
      auto u = 1.0 - s * s;
      return 0.5 * u * u;
    };
    return from_shape("quartic", shape, {-1.0, 1.0, 0.0, 1.0, 4.0}, true);
  }

  // W(s) = |1 - s^2|^{1+q} / (1+q); ell = q 2^{1+q}.
  static Potential subquadratic(double q) {
    if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("subquadratic potential needs q in (0, 1]");
    auto shape = [q](auto s) { return abs_pow(1.0 - s * s, 1.0 + q) / (1.0 + q); };
    return from_shape("subquadratic", shape, {-1.0, 1.0, 0.0, q, q * std::pow(2.0, 1.0 + q)}, true, {{"q", q}});
  }

  // Asymmetric q = 1 potential with wells a < b. In x = (2s - a - b)/(b - a),
  //   W = (1 - x^2)^2 / 2 * (1 + p x (1 - x^2) / (1 + x^2)^2).
  // The skew factor equals 1 at x = +-1, so both wells have W'' = 16/(b-a)^2,
  // while the profile is not odd about its center and c_sym != 0.
  static Potential skewed(double p = 1.0, double a = 0.0, double b = 1.0) {
    if (!(std::abs(p) < 2.0)) throw InvalidArgument("skewed potential needs |p| < 2");
    if (!(a < b)) throw InvalidArgument("skewed potential needs a < b");
    auto shape = [p, a, b](auto s) {
      auto x = (2.0 * s - (a + b)) / (b - a);
      auto x2 = x * x;
      auto u = 1.0 - x2;
      auto d = 1.0 + x2;
      return 0.5 * u * u * (1.0 + p * x * u / (d * d));
    };
    const double ell = 16.0 / ((b - a) * (b - a));
    Potential pot = from_shape("skewed", shape, {a, b, 0.5 * (a + b), 1.0, ell}, false,
                               {{"p", p}, {"a", a}, {"b", b}});
    pot.set_center(bisect([&](double s) { return pot.deriv(s); }, a + 1e-3 * (b - a),
                          b - 1e-3 * (b - a), 1e-15));
    return pot;
  }

 private:
  std::string name_;
  Fn w_, dw_, d2w_;
  WellData wells_;
  bool symmetric_ = false;
  bool c2_ = true;
  std::map<std::string, double> params_;
};

// Custom potential from samples (s_i, W_i, W'_i), interpolated by cubic
// Hermite pieces (C^1 only) and extended linearly outside the table. Wells
// are located as the two zeros of the tabulated W; q is supplied.
inline Potential tabulated_potential(std::vector<double> s, std::vector<double> w,
                                     std::vector<double> dw, double q = 1.0,
                                     std::string name = "tabulated") {
  if (s.size() < 4 || s.size() != w.size() || s.size() != dw.size())
    throw InvalidArgument("tabulated potential needs matching columns with at least 4 rows");
  CubicHermite h(s, w, dw);
  const double lo = s.front(), hi = s.back();
  const double wlo = w.front(), whi = w.back(), slo = dw.front(), shi = dw.back();
  auto W = [h, lo, hi, wlo, whi, slo, shi](double x) {
    if (x < lo) return wlo + slo * (x - lo);
    if (x > hi) return whi + shi * (x - hi);
    return h(x);
  };
  auto dW = [h, lo, hi, slo, shi](double x) {
    if (x < lo) return slo;
    if (x > hi) return shi;
    return h.deriv(x);
  };
  auto d2W = [h, lo, hi](double x) {
    if (x < lo || x > hi) return 0.0;
    return h.deriv2(x);
  };
  // Wells: interior minima of the table whose value is numerically zero.
  const double wmax = *std::max_element(w.begin(), w.end());
  std::vector<double> zeros;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (w[i] <= w[i - 1] && w[i] <= w[i + 1] && w[i] <= 1e-12 * std::max(1.0, wmax)) {
      if (!zeros.empty() && zeros.back() == s[i - 1]) continue;
      zeros.push_back(s[i]);
    }
  }
  if (zeros.size() != 2)
    throw HypothesisViolation("tabulated potential must vanish at exactly two sample points");
  WellData wd;
  wd.a = zeros[0];
  wd.b = zeros[1];
  wd.q = q;
  wd.c = bisect(dW, wd.a + 1e-6 * (wd.b - wd.a), wd.b - 1e-6 * (wd.b - wd.a), 1e-14);
  if (q == 1.0) {
    wd.ell = 0.5 * (d2W(wd.a + 1e-9) + d2W(wd.b - 1e-9));
  } else {
    const double d = 1e-6 * (wd.b - wd.a);
    wd.ell = 0.5 * (d2W(wd.a + d) + d2W(wd.b - d)) / std::pow(d, q - 1.0);
  }
  return Potential(std::move(name), W, dW, d2W, wd, false, {{"q", q}}, false);
}

struct HypothesisCheck {
  std::string name;
  std::string description;
  bool passed = false;
  bool warning_only = false;
  std::string detail;
};

struct ValidationReport {
  bool passed = true;
  std::vector<HypothesisCheck> checks;
  std::vector<double> zeros_of_w;
  std::vector<double> critical_points;
  double ell_hat_a = NAN;
  double ell_hat_b = NAN;
  double limit_ratio_b = NAN;
  double linear_growth = NAN;
  double gurtin_min_slope = NAN;
  std::vector<std::string> warnings;

  const HypothesisCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline std::string fmt17(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Minimum of f on [lo, hi] by golden-section search.
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iters = 120) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x)};
}

}  // namespace detail

inline ValidationReport validate_potential(const Potential& p, int n_samples = 4001,
                                           double tol = 1e-9) {
  if (n_samples < 100) throw InvalidArgument("validate_potential needs n_samples >= 100");
  const WellData& wd = p.wells();
  const double span = wd.b - wd.a;
  if (!(span > 0.0)) throw InvalidArgument("wells must satisfy a < b");
  ValidationReport rep;
  auto add = [&rep](std::string name, std::string desc, bool ok, std::string detail,
                    bool warning_only = false) {
    rep.checks.push_back({std::move(name), std::move(desc), ok, warning_only, std::move(detail)});
    if (!ok && !warning_only) rep.passed = false;
    if (!ok && warning_only) rep.warnings.push_back(rep.checks.back().name);
  };

  // Offset the grid by an irrational fraction so no sample lands on a well.
  const double lo = wd.a - 2.0 * span, hi = wd.b + 2.0 * span;
  const double h = (hi - lo) / (n_samples - 1);
  const double shift = h * (std::sqrt(2.0) - 1.0);
  std::vector<double> xs(n_samples), ws(n_samples), dws(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    xs[i] = lo + shift + i * h;
    ws[i] = p.eval(xs[i]);
    dws[i] = p.deriv(xs[i]);
    if (!std::isfinite(ws[i]) || !std::isfinite(dws[i]))
      throw NonFiniteEvaluation("W or W' is not finite at s = " + detail::fmt17(xs[i]));
  }

  const double wmin = *std::min_element(ws.begin(), ws.end());
  add("nonnegative", "W >= 0 on the sample grid", wmin >= -tol, "min W = " + detail::fmt17(wmin));

  // Zeros of W: local minima of the samples refined by golden section.
  for (int i = 1; i + 1 < n_samples; ++i) {
    if (ws[i] <= ws[i - 1] && ws[i] <= ws[i + 1]) {
      auto [x, v] = detail::golden_min([&](double s) { return p.eval(s); }, xs[i - 1], xs[i + 1]);
      if (v <= tol) rep.zeros_of_w.push_back(x);
    }
  }
  bool zeros_ok = rep.zeros_of_w.size() == 2 && std::abs(rep.zeros_of_w[0] - wd.a) < 1e-5 * span &&
                  std::abs(rep.zeros_of_w[1] - wd.b) < 1e-5 * span &&
                  std::abs(p.eval(wd.a)) <= tol && std::abs(p.eval(wd.b)) <= tol;
  add("two_zeros", "W has precisely two zeros, at a and b", zeros_ok,
      std::to_string(rep.zeros_of_w.size()) + " zero(s) found");

  // Zeros of W' by bracketed root-finding.
  auto dW = [&](double s) { return p.deriv(s); };
  for (int i = 0; i + 1 < n_samples; ++i) {
    if ((dws[i] < 0.0) != (dws[i + 1] < 0.0)) {
      double r = bisect(dW, xs[i], xs[i + 1], 1e-14);
      rep.critical_points.push_back(secant_polish(dW, r, r + 1e-9, xs[i], xs[i + 1]));
    }
  }
  bool three = rep.critical_points.size() == 3;
  std::string cdetail = std::to_string(rep.critical_points.size()) + " zero(s) of W'";
  if (three) {
    const double c = rep.critical_points[1];
    const auto w2c = p.deriv2(c);
    three = three && std::abs(rep.critical_points[0] - wd.a) < 1e-6 * span &&
            std::abs(rep.critical_points[2] - wd.b) < 1e-6 * span && w2c && *w2c < 0.0;
    cdetail += ", W''(c) = " + (w2c ? detail::fmt17(*w2c) : std::string("undefined"));
  }
  add("three_critical_points", "W' vanishes exactly at a < c < b and W''(c) < 0", three, cdetail);

  // ell from one-sided limits of W''(s) / |s - well|^{q-1}.
  auto ratio = [&](double s, double well) {
    const auto w2 = p.deriv2(s);
    return w2 ? *w2 / std::pow(std::abs(s - well), wd.q - 1.0) : NAN;
  };
  const double d = 1e-6 * span;
  rep.ell_hat_a = 0.5 * (ratio(wd.a - d, wd.a) + ratio(wd.a + d, wd.a));
  rep.ell_hat_b = 0.5 * (ratio(wd.b - d, wd.b) + ratio(wd.b + d, wd.b));
  const double ell_err = std::max(std::abs(rep.ell_hat_a - wd.ell), std::abs(rep.ell_hat_b - wd.ell));
  add("ell_limit", "W''(s)/|s-well|^{q-1} tends to ell at both wells", ell_err <= 1e-4 * wd.ell,
      "ell_hat = (" + detail::fmt17(rep.ell_hat_a) + ", " + detail::fmt17(rep.ell_hat_b) + ")");

  // W(s)/|s-b|^{1+q} -> ell/(q(1+q)) as s -> b from below.
  const double target = wd.ell / (wd.q * (1.0 + wd.q));
  double prev_gap = INFINITY;
  bool monotone = true;
  for (int k = 2; k <= 6; ++k) {
    const double e = std::pow(10.0, -k) * span;
    const double r = p.eval(wd.b - e) / std::pow(e, 1.0 + wd.q);
    const double gap = std::abs(r - target);
    if (gap > prev_gap * 1.05 + 1e-12) monotone = false;
    prev_gap = gap;
    rep.limit_ratio_b = r;
  }
  add("well_limits", "W(s)/|s-b|^{1+q} approaches ell/(q(1+q))",
      monotone && std::abs(rep.limit_ratio_b - target) <= 0.05 * target,
      "ratio at 1e-6 = " + detail::fmt17(rep.limit_ratio_b) + ", target " + detail::fmt17(target));

  // Growth away from the wells.
  const double t_hat = std::max(std::abs(wd.a), std::abs(wd.b)) + span;
  double lmin = INFINITY, gmin = INFINITY;
  for (int k = 0; k <= 40; ++k) {
    const double s = t_hat * std::pow(2.0, k / 4.0);
    for (double x : {s, -s}) {
      const double wv = p.eval(x), dv = p.deriv(x);
      if (!std::isfinite(wv) || !std::isfinite(dv))
        throw NonFiniteEvaluation("W is not finite at s = " + detail::fmt17(x));
      lmin = std::min(lmin, wv / std::abs(x));
      gmin = std::min(gmin, std::abs(dv));
    }
  }
  rep.linear_growth = lmin;
  rep.gurtin_min_slope = gmin;
  add("linear_growth", "W(s) >= L|s| for |s| >= T", lmin > 0.0, "L_hat = " + detail::fmt17(lmin));
  add("gurtin", "|W'| bounded away from 0 for large |s|", gmin > 0.0,
      "min |W'| = " + detail::fmt17(gmin));

  add("c2_regularity", "W is C^2 away from the wells", p.c2_regular(),
      p.c2_regular() ? "analytic" : "interpolated table is only C^1", true);
  return rep;
}

// Stored well data with c re-confirmed by bisection and secant polish.
inline WellData well_data(const Potential& p) {
  WellData wd = p.wells();
  const double span = wd.b - wd.a;
  auto dW = [&](double s) { return p.deriv(s); };
  const double lo = wd.a + 1e-3 * span, hi = wd.b - 1e-3 * span;
  const double r = bisect(dW, lo, hi, 1e-13);
  wd.c = dW(r) == 0.0 ? r : secant_polish(dW, r, r + 1e-10, lo, hi);
  return wd;
}

}  // namespace gamma2
