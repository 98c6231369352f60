#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gamma2/error.hpp"
#include "gamma2/numerics/interpolation.hpp"
#include "gamma2/numerics/ode.hpp"
#include "gamma2/numerics/quadrature.hpp"
#include "gamma2/numerics/roots.hpp"
#include "gamma2/potential.hpp"

namespace gamma2 {

struct DecayRates {
  double c1 = 0.0;
  double c2 = 0.0;
};

// Heteroclinic profile z' = sqrt(W(z)), z(0) = c, tabulated by an adaptive
// Dormand-Prince run in both directions and interpolated with quintic Hermite
// pieces (z'' = W'(z)/2). Outside the table the profile follows the
// linearized well behaviour:
//   q = 1:  b - z(t) = u_hi exp(-mu (t - t_hi)),  mu = sqrt(ell/2)
//   q < 1:  (b - z)^k decreases linearly with slope (1-q)A/2, k = (1-q)/2,
//           A = sqrt(ell/(q(1+q))), and reaches zero at the finite t_b.
// The same holds at the lower well.
class Profile {
 public:
  Profile() = default;

  double z(double t) const {
    if (t < t_lo()) return wells_.a + left_gap(t);
    if (t > t_hi()) return wells_.b - right_gap(t);
    return table_(t);
  }
  double operator()(double t) const { return z(t); }

  double dz(double t) const {
    if (t < t_lo()) return tail_slope(left_gap(t));
    if (t > t_hi()) return tail_slope(right_gap(t));
    return table_.deriv(t);
  }

  const WellData& wells() const { return wells_; }
  const std::string& potential_name() const { return potential_name_; }
  const QuinticHermite& table() const { return table_; }
  double t_lo() const { return table_.front(); }
  double t_hi() const { return table_.back(); }
  std::optional<double> t_a() const { return t_a_; }
  std::optional<double> t_b() const { return t_b_; }
  DecayRates decay_rates() const { return decay_; }
  double tail_rate() const { return mu_; }
  double max_ode_residual() const { return max_residual_; }
  double max_first_integral_defect() const { return max_first_integral_; }
  double tolerance() const { return tol_; }

  // Effective support used for quadrature: the finite endpoints when q < 1,
  // otherwise the points where the exponential tail drops below 1e-300.
  double support_lo() const {
    if (t_a_) return *t_a_;
    return t_lo() - std::max(0.0, std::log(std::max(u_lo_, 1e-300) / 1e-300)) / mu_;
  }
  double support_hi() const {
    if (t_b_) return *t_b_;
    return t_hi() + std::max(0.0, std::log(std::max(u_hi_, 1e-300) / 1e-300)) / mu_;
  }

  // Integral of g(t) over [x0, x1] within the table, cell by cell with
  // 10-point Gauss-Legendre.
  template <class G>
  double integrate_table(G&& g, double x0, double x1) const {
    x0 = std::max(x0, t_lo());
    x1 = std::min(x1, t_hi());
    if (!(x1 > x0)) return 0.0;
    const auto& rule = gauss_legendre(10);
    const auto& x = table_.nodes();
    auto it = std::upper_bound(x.begin(), x.end(), x0);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    double sum = 0.0;
    for (; i + 1 < x.size() && x[i] < x1; ++i) {
      const double lo = std::max(x[i], x0), hi = std::min(x[i + 1], x1);
      if (!(hi > lo)) continue;
      double cell = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        cell += rule.weights[k] * g(lo + (hi - lo) * rule.nodes[k]);
      sum += cell * (hi - lo);
    }
    return sum;
  }

  // Integral of (z - a) over (-inf, x].
  double integral_above_a(double x) const {
    const double span = wells_.b - wells_.a;
    if (x <= t_lo()) return tail_mass(left_gap(x));
    double s = tail_mass(u_lo_) +
               integrate_table([&](double t) { return table_(t) - wells_.a; }, t_lo(), x);
    if (x > t_hi()) s += span * (x - t_hi()) - (tail_mass(u_hi_) - tail_mass(right_gap(x)));
    return s;
  }

  // Integral of (b - z) over [x, +inf).
  double integral_below_b(double x) const {
    const double span = wells_.b - wells_.a;
    if (x >= t_hi()) return tail_mass(right_gap(x));
    double s = tail_mass(u_hi_) +
               integrate_table([&](double t) { return wells_.b - table_(t); }, x, t_hi());
    if (x < t_lo()) s += span * (t_lo() - x) - (tail_mass(u_lo_) - tail_mass(left_gap(x)));
    return s;
  }

  // Integral over the far-field tail whose gap to the well is u at its inner end.
  double tail_mass(double u) const {
    if (u <= 0.0) return 0.0;
    if (wells_.q == 1.0) return u / mu_;
    const double k = 0.5 * (1.0 - wells_.q);
    const double slope = k * A_;
    return std::pow(u, 1.0 + k) / (slope * (1.0 + 1.0 / k));
  }

  // Gap b - z (or z - a) at time t past the table end.
  double right_gap(double t) const { return tail_gap(u_hi_, t - t_hi()); }
  double left_gap(double t) const { return tail_gap(u_lo_, t_lo() - t); }
  double gap_at_table_ends_lo() const { return u_lo_; }
  double gap_at_table_ends_hi() const { return u_hi_; }

 private:
  double tail_gap(double u0, double d) const {
    if (d <= 0.0) return u0;
    if (wells_.q == 1.0) return u0 * std::exp(-mu_ * d);
    const double k = 0.5 * (1.0 - wells_.q);
    const double w = std::pow(u0, k) - k * A_ * d;
    return w > 0.0 ? std::pow(w, 1.0 / k) : 0.0;
  }
  double tail_slope(double u) const {
    if (u <= 0.0) return 0.0;
    if (wells_.q == 1.0) return mu_ * u;
    return A_ * std::pow(u, 0.5 * (1.0 + wells_.q));
  }

  friend Profile solve_profile(const Potential& p, double horizon, double tol);

  WellData wells_;
  std::string potential_name_;
  QuinticHermite table_;
  double mu_ = 0.0;
  double A_ = 0.0;
  double u_lo_ = 0.0;
  double u_hi_ = 0.0;
  std::optional<double> t_a_, t_b_;
  DecayRates decay_;
  double max_residual_ = 0.0;
  double max_first_integral_ = 0.0;
  double tol_ = 0.0;
};

inline Profile solve_profile(const Potential& p, double horizon = 40.0, double tol = 1e-12) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(tol > 1e-14 && tol < 1e-4)) throw InvalidArgument("tol must lie in (1e-14, 1e-4)");
  const WellData wd = well_data(p);
  const double a = wd.a, b = wd.b;
  auto sqrtW = [&](double z) {
    const double w = p.eval(std::clamp(z, a, b));
    return w > 0.0 ? std::sqrt(w) : 0.0;
  };
  auto rhs = [&](double, double z) { return sqrtW(z); };
  const double stop = 1e-13;
  OdeOptions opt;
  opt.rtol = std::max(0.1 * tol, 1e-15);
  opt.atol = opt.rtol;
  opt.h_max = 0.01;

  // For q < 1 the gap u to the well obeys u' = -sqrt(W), which is not
  // Lipschitz at u = 0. Close to the wells we integrate w = u^k, k = (1-q)/2,
  // instead: w' = -k sqrt(W)/u^{(1+q)/2} is smooth and tends to -k A.
  const bool finite_width = wd.q < 1.0;
  const double k = 0.5 * (1.0 - wd.q);
  const double switch_gap = finite_width ? 1e-3 * (b - a) : stop;
  const double A = std::sqrt(wd.ell / (wd.q * (1.0 + wd.q)));

  auto run_side = [&](double dir) {
    const double well = dir > 0 ? b : a;
    auto gap = [&](double z) { return dir * (well - z); };
    auto tr = integrate_dopri(rhs, 0.0, wd.c, dir * horizon, opt,
                              [&](double, double z) { return gap(z) - switch_gap; });
    // The located event point comes from the step interpolant and is less
    // accurate than the accepted steps, so it is not kept.
    if (tr.event_hit && tr.t.size() > 2) {
      tr.t.pop_back();
      tr.y.pop_back();
    }
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < tr.t.size(); ++i) pts.emplace_back(tr.t[i], tr.y[i]);
    if (finite_width && tr.event_hit) {
      auto ratio = [&](double w) {
        if (w <= 0.0) return A;
        const double u = std::pow(w, 1.0 / k);
        return std::sqrt(p.eval(well - dir * u) / std::pow(u, 1.0 + wd.q));
      };
      auto wrhs = [&](double, double w) { return -dir * k * ratio(w); };
      // Below this gap W(well - u) loses relative accuracy to cancellation;
      // the analytic tail takes over.
      const double w_stop = std::pow(1e-7 * (b - a), k);
      // Short first steps would only expose round-off in the interpolant's slope.
      OdeOptions wopt = opt;
      wopt.h_init = tr.t.size() > 1 ? std::abs(tr.t.back() - tr.t[tr.t.size() - 2]) : opt.h_init;
      auto tw = integrate_dopri(wrhs, tr.t.back(), std::pow(gap(tr.y.back()), k), dir * horizon, wopt,
                                [&](double, double w) { return w - w_stop; });
      const std::size_t keep = tw.event_hit && tw.t.size() > 2 ? tw.t.size() - 1 : tw.t.size();
      for (std::size_t i = 1; i < keep; ++i)
        pts.emplace_back(tw.t[i], well - dir * std::pow(std::max(tw.y[i], 0.0), 1.0 / k));
    }
    return pts;
  };
  const auto fwd = run_side(1.0);
  const auto bwd = run_side(-1.0);

  std::vector<double> t, z, dz, d2z;
  for (std::size_t i = bwd.size(); i-- > 1;) {
    t.push_back(bwd[i].first);
    z.push_back(bwd[i].second);
  }
  for (const auto& [ti, zi] : fwd) {
    t.push_back(ti);
    z.push_back(zi);
  }
  for (double zi : z) {
    const double zc = std::clamp(zi, a, b);
    dz.push_back(sqrtW(zc));
    d2z.push_back(0.5 * p.deriv(zc));
  }
  for (double& zi : z) zi = std::clamp(zi, a, b);

  Profile prof;
  prof.wells_ = wd;
  prof.potential_name_ = p.name();
  prof.tol_ = tol;
  prof.table_ = QuinticHermite(std::move(t), std::move(z), std::move(dz), std::move(d2z));
  prof.u_lo_ = prof.table_.values().front() - a;
  prof.u_hi_ = b - prof.table_.values().back();
  if (wd.q == 1.0) {
    prof.mu_ = std::sqrt(0.5 * wd.ell);
  } else {
    prof.A_ = std::sqrt(wd.ell / (wd.q * (1.0 + wd.q)));
    prof.mu_ = prof.A_;
    const double k = 0.5 * (1.0 - wd.q);
    prof.t_b_ = prof.t_hi() + std::pow(prof.u_hi_, k) / (k * prof.A_);
    prof.t_a_ = prof.t_lo() - std::pow(prof.u_lo_, k) / (k * prof.A_);
  }

  // Diagnostics at cell midpoints, where the interpolant is least constrained.
  const auto& nodes = prof.table_.nodes();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double tm = 0.5 * (nodes[i] + nodes[i + 1]);
    const double zm = prof.table_(tm), dm = prof.table_.deriv(tm);
    const double sw = sqrtW(zm);
    prof.max_residual_ = std::max(prof.max_residual_, std::abs(dm - sw));
    prof.max_first_integral_ = std::max(prof.max_first_integral_, std::abs(dm * dm - sw * sw));
  }

  // Tightest c1, c2 with c1^2 (b-s)^{1+q} <= W(s) <= c2^2 (b-s)^{1+q} on [(a+b)/2, b).
  double c1 = INFINITY, c2 = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double s = 0.5 * (a + b) + 0.5 * (b - a) * i / 2000.0;
    const double r = std::sqrt(p.eval(s) / std::pow(b - s, 1.0 + wd.q));
    c1 = std::min(c1, r);
    c2 = std::max(c2, r);
  }
  const double r_lim = std::sqrt(wd.ell / (wd.q * (1.0 + wd.q)));
  prof.decay_ = {std::min(c1, r_lim), std::max(c2, r_lim)};
  return prof;
}

struct ProfileConstants {
  double c_w = 0.0;
  double c_w_error = 0.0;
  double c_sym = 0.0;
  double c_sym_error = 0.0;
};

// c_W = int_a^b sqrt(W(s)) ds, split at c.
inline QuadResult compute_cw(const Potential& p, double tol = 1e-13) {
  const WellData& wd = p.wells();
  if (!(wd.b > wd.a)) return {};
  auto f = [&](double s) {
    const double w = p.eval(s);
    return w > 0.0 ? std::sqrt(w) : 0.0;
  };
  QuadOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = 1e-15;
  opt.max_intervals = 20000;
  return integrate(f, wd.a, wd.b, {wd.c}, opt);
}

// c_W recomputed along the profile as int sqrt(W(z)) z' dt, with the
// sub-table tails done in the s variable.
inline double cw_from_profile(const Profile& prof, const Potential& p) {
  auto sw = [&](double s) {
    const double w = p.eval(s);
    return w > 0.0 ? std::sqrt(w) : 0.0;
  };
  const WellData& wd = prof.wells();
  double v = prof.integrate_table([&](double t) { return sw(prof.z(t)) * prof.dz(t); },
                                  prof.t_lo(), prof.t_hi());
  v += integrate(sw, wd.a, prof.z(prof.t_lo())).value;
  v += integrate(sw, prof.z(prof.t_hi()), wd.b).value;
  return v;
}

// c_sym = int W(z(t)) t dt over the real line.
inline QuadResult compute_csym(const Profile& prof, const Potential& p, double tol = 1e-10) {
  // Even W about c makes z - c odd, so the integrand is odd.
  if (p.symmetric()) return {0.0, 0.0, 0, true};
  auto g = [&](double t) { return p.eval(prof.z(t)) * t; };
  double v = prof.integrate_table(g, prof.t_lo(), 0.0) + prof.integrate_table(g, 0.0, prof.t_hi());
  double err = 0.0;
  const WellData& wd = prof.wells();
  if (wd.q == 1.0) {
    // W(z) ~ (ell/2) u^2 with u = u0 exp(-mu |t - t_end|).
    const double mu = prof.tail_rate();
    const double uh = prof.gap_at_table_ends_hi(), ul = prof.gap_at_table_ends_lo();
    const double th = prof.t_hi(), tl = prof.t_lo();
    const double right = 0.5 * wd.ell * uh * uh * (th / (2 * mu) + 1.0 / (4 * mu * mu));
    const double left = 0.5 * wd.ell * ul * ul * (tl / (2 * mu) - 1.0 / (4 * mu * mu));
    v += right + left;
    err = 1e-3 * (std::abs(right) + std::abs(left));
  } else {
    QuadOptions opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = 1e-14;
    v += integrate(g, prof.t_hi(), *prof.t_b(), opt).value;
    v += integrate(g, *prof.t_a(), prof.t_lo(), opt).value;
  }
  // Quadrature error is dominated by the interpolated table.
  err += 10.0 * prof.tolerance() * (prof.t_hi() - prof.t_lo());
  return {v, err, 0, err <= tol};
}

inline ProfileConstants compute_constants(const Profile& prof, const Potential& p) {
  ProfileConstants c;
  const auto cw = compute_cw(p);
  const auto cs = compute_csym(prof, p);
  c.c_w = cw.value;
  c.c_w_error = cw.abs_error;
  c.c_sym = cs.value;
  c.c_sym_error = cs.abs_error;
  return c;
}

// int (z(t - tau) - sgn_{a,b}(t)) dt; affine in tau with slope -(b - a).
inline double shift_integral(const Profile& prof, double tau) {
  return prof.integral_above_a(-tau) - prof.integral_below_b(-tau);
}

// Solves coefficient * shift(tau) = rhs by Brent on [-10 w, 10 w], w the
// decay width (q = 1) or the support width (q < 1).
inline double solve_shift_equation(const Profile& prof, double coefficient, double rhs) {
  double w;
  if (prof.t_a() && prof.t_b())
    w = *prof.t_b() - *prof.t_a();
  else
    w = 1.0 / prof.tail_rate();
  auto res = [&](double tau) { return coefficient * shift_integral(prof, tau) - rhs; };
  const double tau = brent(res, -10.0 * w, 10.0 * w, 1e-15);
  const double r = res(tau);
  if (std::abs(r) > 1e-10 * std::max(1.0, std::abs(rhs)))
    throw NoConvergence("shift equation residual " + detail::fmt17(r));
  return tau;
}

// Interface offset tau_u for a set with perimeter P, mean curvature kappa in
// dimension n and total weight total_eta:
//   q = 1:  P shift(tau) = 2 c_W (n-1) kappa total_eta / (W''(a) (b - a))
//   q < 1:  shift(tau) = 0
inline double solve_tau(const Profile& prof, const Potential& p, double eta_t0, double perimeter,
                        double kappa, int n, double total_eta = 1.0) {
  if (!(eta_t0 > 0.0) || !(perimeter > 0.0))
    throw InvalidArgument("solve_tau needs positive eta(t0) and perimeter");
  const WellData& wd = prof.wells();
  if (wd.q < 1.0) return p.symmetric() ? 0.0 : solve_shift_equation(prof, 1.0, 0.0);
  const double cw = compute_cw(p).value;
  const double rhs =
      2.0 * cw * (n - 1) * kappa * total_eta / (p.curvature_at_wells() * (wd.b - wd.a));
  return solve_shift_equation(prof, perimeter, rhs);
}

// One-dimensional form: eta(t0) shift(tau0) = lambda0 int(eta) / W''(a) for
// q = 1, shift(tau0) = 0 for q < 1.
inline double solve_tau_1d(const Profile& prof, const Potential& p, double eta_t0, double lambda0,
                           double total_eta) {
  if (!(eta_t0 > 0.0)) throw InvalidArgument("solve_tau_1d needs eta(t0) > 0");
  if (prof.wells().q < 1.0) return p.symmetric() ? 0.0 : solve_shift_equation(prof, 1.0, 0.0);
  return solve_shift_equation(prof, eta_t0, lambda0 * total_eta / p.curvature_at_wells());
}

}  // namespace gamma2
