#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gamma2/error.hpp"
#include "gamma2/isoperimetry.hpp"
#include "gamma2/numerics/extrapolation.hpp"
#include "gamma2/numerics/parallel.hpp"
#include "gamma2/potential.hpp"
#include "gamma2/profile.hpp"
#include "gamma2/rearrangement.hpp"
#include "gamma2/solver1d.hpp"
#include "gamma2/weight.hpp"

namespace gamma2 {

struct Prediction {
  double first_order = 0.0;
  double second_order = 0.0;
  double tau_term = 0.0;   // 2 c_W tau eta'(t0)  (or 2 c_W tau (n-1) kappa P)
  double csym_term = 0.0;  // 2 c_sym eta'(t0)
  double bulk_term = 0.0;  // lambda0^2 int(eta) / (2 W''(a)); zero for q < 1

  double c_w = 0.0, c_sym = 0.0, tau = 0.0;
  double lambda0 = 0.0;  // limiting multiplier; equals Lambda_u in the n-D form
  double kappa = 0.0, perimeter = 0.0;
  int n = 1;
  double q = 1.0;
  double total_eta = 1.0;
  double eta_t0 = 0.0, eta_prime_t0 = 0.0;
  double w2 = std::numeric_limits<double>::quiet_NaN();  // W''(a); NaN when q < 1
  double span = 0.0;                                      // b - a
  bool one_dimensional = false;
  bool degenerate = false;  // eta(t0) == 0
};

inline double first_order_value(const Weight& w, const Potential& p, double t0) {
  return 2.0 * compute_cw(p).value * w(t0);
}

// n-D form:
//   F2 = 2 c_W^2 (n-1)^2 kappa^2 |Omega| / (W''(a) (b-a)^2) + 2 (c_sym + c_W tau)(n-1) kappa P
// with the first term dropped when q < 1.
inline Prediction second_order_prediction(const Potential& p, const Profile& prof, int n,
                                          double kappa, double perimeter, double total_eta = 1.0) {
  if (n < 1) throw InvalidArgument("dimension must be >= 1");
  Prediction pr;
  const WellData& wd = prof.wells();
  const auto cst = compute_constants(prof, p);
  pr.c_w = cst.c_w;
  pr.c_sym = cst.c_sym;
  pr.kappa = kappa;
  pr.perimeter = perimeter;
  pr.n = n;
  pr.q = wd.q;
  pr.total_eta = total_eta;
  pr.span = wd.b - wd.a;
  pr.eta_t0 = perimeter;
  pr.eta_prime_t0 = (n - 1) * kappa * perimeter;
  pr.first_order = 2.0 * pr.c_w * perimeter;
  pr.lambda0 = 2.0 * pr.c_w * (n - 1) * kappa / pr.span;
  pr.tau = solve_tau(prof, p, perimeter, perimeter, kappa, n, total_eta);
  if (wd.q == 1.0) {
    pr.w2 = p.curvature_at_wells();
    pr.bulk_term = pr.lambda0 * pr.lambda0 * total_eta / (2.0 * pr.w2);
  }
  pr.tau_term = 2.0 * pr.c_w * pr.tau * pr.eta_prime_t0;
  pr.csym_term = 2.0 * pr.c_sym * pr.eta_prime_t0;
  pr.second_order = pr.tau_term + pr.csym_term + pr.bulk_term;
  return pr;
}

// 1-D form: 2 eta'(t0)(tau0 c_W + c_sym) + [lambda0^2 int(eta) / (2 W''(a)) if q = 1].
inline Prediction second_order_prediction_1d(const Weight& w, const Potential& p,
                                             const Profile& prof, double t0) {
  Prediction pr;
  pr.one_dimensional = true;
  const WellData& wd = prof.wells();
  const auto cst = compute_constants(prof, p);
  pr.c_w = cst.c_w;
  pr.c_sym = cst.c_sym;
  pr.q = wd.q;
  pr.span = wd.b - wd.a;
  pr.eta_t0 = w(t0);
  pr.eta_prime_t0 = w.deriv(t0);
  pr.total_eta = w.total();
  pr.first_order = 2.0 * pr.c_w * pr.eta_t0;
  if (!(pr.eta_t0 > 0.0)) {
    pr.degenerate = true;
    return pr;
  }
  pr.kappa = pr.eta_prime_t0 / pr.eta_t0;  // (n-1) kappa
  pr.perimeter = pr.eta_t0;
  pr.lambda0 = 2.0 * pr.eta_prime_t0 * pr.c_w / (pr.span * pr.eta_t0);
  pr.tau = solve_tau_1d(prof, p, pr.eta_t0, pr.lambda0, pr.total_eta);
  if (wd.q == 1.0) {
    pr.w2 = p.curvature_at_wells();
    pr.bulk_term = pr.lambda0 * pr.lambda0 * pr.total_eta / (2.0 * pr.w2);
  }
  pr.tau_term = 2.0 * pr.eta_prime_t0 * pr.tau * pr.c_w;
  pr.csym_term = 2.0 * pr.eta_prime_t0 * pr.c_sym;
  pr.second_order = pr.tau_term + pr.csym_term + pr.bulk_term;
  return pr;
}

enum class SweepMode { recovery, minimize };

inline const char* to_string(SweepMode m) {
  return m == SweepMode::recovery ? "recovery" : "minimize";
}

struct ExpansionRow {
  double eps = 0.0;
  bool ok = false;
  std::string error;
  double tau_eps = 0.0;
  double lambda = 0.0;       // lambda0 (recovery) or lambda_eps (minimize)
  double lambda_bulk = 0.0;
  double first_order_energy = 0.0;  // G^(1)(v_eps)
  double excess = 0.0;              // E2 = (G^(1) - 2 c_W eta(t0)) / eps
  double recovery_excess_on_grid = std::numeric_limits<double>::quiet_NaN();
  double mass_residual = 0.0;
  double el_residual = 0.0;
  double bound_violation = 0.0;
  int iterations = 0;
  int transitions = 0;
  std::size_t nodes = 0;
};

struct ExpansionReport {
  SweepMode mode = SweepMode::recovery;
  std::string label;
  double t0 = 0.0;
  double mass = 0.0;
  std::vector<ExpansionRow> rows;
  Prediction prediction;
  std::optional<Prediction> prediction_1d;  // n-D runs also carry the 1-D form
  bool has_fit = false;
  PowerLawFit fit;
  double extrapolated_limit = std::numeric_limits<double>::quiet_NaN();
  double raw_last = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::infinity();
  bool gap_absolute = false;  // prediction ~ 0: gap is |L - prediction|
  bool minimizer_below_recovery = true;

  bool within(double threshold) const { return has_fit && gap <= threshold; }
};

struct SweepOptions {
  GridOptions grid;
  MinimizeOptions minimize;
  int fit_window = 4;
  unsigned threads = thread_budget();
};

// Geometric eps list from hi down to lo.
inline std::vector<double> geometric_eps(double hi = 1e-1, double lo = 1e-3, int count = 7) {
  std::vector<double> e;
  for (int k = 0; k < count; ++k)
    e.push_back(hi * std::pow(lo / hi, count == 1 ? 0.0 : double(k) / (count - 1)));
  return e;
}

namespace detail {

inline void finish_report(ExpansionReport& r, int window) {
  std::vector<double> x, y;
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    x.push_back(row.eps);
    y.push_back(row.excess);
    if (r.mode == SweepMode::minimize && !(row.excess <= row.recovery_excess_on_grid + 1e-12))
      r.minimizer_below_recovery = false;
  }
  if (!y.empty()) r.raw_last = y.back();
  if (x.size() >= 3) {
    r.fit = fit_power_law(x, y, std::min<int>(window, static_cast<int>(x.size())));
    r.has_fit = true;
    r.extrapolated_limit = r.fit.limit;
    const double pred = r.prediction.second_order;
    r.gap_absolute = std::abs(pred) < 1e-8;
    r.gap = r.gap_absolute ? std::abs(r.extrapolated_limit - pred)
                           : std::abs(r.extrapolated_limit - pred) / std::abs(pred);
  }
}

}  // namespace detail

// E2(eps) = (G^(1)(v_eps) - 2 c_W eta(t0)) / eps along eps_list, for the
// recovery sequence or the localized minimizer started from it, then fitted
// to L + c eps^p over the last fit_window points.
inline ExpansionReport verify_expansion_1d(const Weight& w, const Potential& p, const Profile& prof,
                                           double m, std::vector<double> eps_list, SweepMode mode,
                                           const SweepOptions& opt = {}) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw InvalidArgument("eps list must be decreasing");
  for (double e : eps_list)
    if (!(e > 0.0)) throw InvalidArgument("eps values must be positive");
  ExpansionReport rep;
  rep.mode = mode;
  rep.label = w.label;
  rep.mass = m;
  rep.t0 = reference_interface(w, p, m);
  rep.prediction = second_order_prediction_1d(w, p, prof, rep.t0);
  const double t0 = rep.t0;
  const double lambda0 = rep.prediction.lambda0;
  const double tau0 = rep.prediction.tau;
  const double first = rep.prediction.first_order;
  rep.rows.resize(eps_list.size());

  parallel_for(
      eps_list.size(),
      [&](std::size_t k) {
        ExpansionRow& row = rep.rows[k];
        row.eps = eps_list[k];
        const double eps = row.eps;
        try {
          RecoverySequence rec(prof, p, w, t0, eps, m, lambda0, tau0);
          row.tau_eps = rec.tau();
          row.mass_residual = rec.mass_residual();
          row.lambda = lambda0;
          if (mode == SweepMode::recovery) {
            row.first_order_energy = rec.first_order_energy();
          } else {
            auto grid = build_grid(w.lo, w.hi, t0, eps, opt.grid);
            DiscreteEnergy E(grid, w, p, eps);
            const Field1D init = recovery_field(rec, E, m);
            row.recovery_excess_on_grid = (init.energy() / eps - first) / eps;
            const auto res = minimize_localized(E, w, p, m, init, opt.minimize);
            row.first_order_energy = res.field.energy() / eps;
            row.lambda = res.lambda_eps;
            row.lambda_bulk = res.lambda_bulk;
            row.el_residual = res.el_residual;
            row.iterations = res.iterations;
            row.bound_violation = res.bound_violation;
            row.transitions = res.transitions;
            row.mass_residual = res.field.mass - m;
            row.nodes = grid.size();
          }
          row.excess = (row.first_order_energy - first) / eps;
          row.ok = std::isfinite(row.excess);
          if (!row.ok) row.error = "non-finite excess";
        } catch (const Error& e) {
          row.ok = false;
          row.error = e.what();
        }
      },
      opt.threads);
  detail::finish_report(rep, opt.fit_window);
  return rep;
}

// Level-set reduction: u(x) = v(d_E(x)) has F_eps(u) = int (W(v)/eps + eps v'^2) eta dt
// with eta(t) = H^{n-1}({d_E = t}); the interface sits at t0 = 0.
inline ExpansionReport verify_expansion_nd(const CanonicalSet& set, const Potential& p,
                                           const Profile& prof, std::vector<double> eps_list,
                                           const SweepOptions& opt = {},
                                           SweepMode mode = SweepMode::recovery) {
  const LevelSetWeight lw = levelset_weight(set);
  const double m = mass_for_interface(lw.weight, p.a(), p.b(), 0.0);
  ExpansionReport rep = verify_expansion_1d(lw.weight, p, prof, m, std::move(eps_list), mode,
                                            opt);
  rep.label = set.name();
  rep.prediction_1d = rep.prediction;
  rep.prediction = second_order_prediction(p, prof, lw.n, lw.kappa, lw.perimeter, lw.domain_measure);
  detail::finish_report(rep, opt.fit_window);
  return rep;
}

struct GridEnergyCheck {
  double grid_value = 0.0;     // F_eps(u) on an N x N piecewise-linear grid
  double reduced_value = 0.0;  // the exact 1-D reduction
  double relative_difference = 0.0;
};

// Slow cross-check of the reduction for the planar sets: samples
// u = v_eps(d_E) on the unit square and integrates W(u)/eps + eps |grad u|^2.
inline GridEnergyCheck grid_energy_check(const CanonicalSet& set, const Potential& p,
                                         const Profile& prof, double eps, int N = 400) {
  if (set.kind == CanonicalSet::Kind::centered_ball)
    throw UnsupportedSet("the grid check covers planar sets only");
  const LevelSetWeight lw = levelset_weight(set);
  const Weight& w = lw.weight;
  const double m = mass_for_interface(w, p.a(), p.b(), 0.0);
  const auto pr = second_order_prediction_1d(w, p, prof, 0.0);
  RecoverySequence rec(prof, p, w, 0.0, eps, m, pr.lambda0, pr.tau);
  const double r = set.param;
  auto dist = [&](double x, double y) {
    switch (set.kind) {
      case CanonicalSet::Kind::strip: return x - r;
      case CanonicalSet::Kind::quarter_disk: return std::hypot(x, y) - r;
      default: return std::hypot(x - 0.5, y - 0.5) - r;
    }
  };
  const auto u = GridFunction::sample(N, N, [&](double x, double y) { return rec(dist(x, y)); });
  GridEnergyCheck out;
  out.grid_value = u.integral_of([&](double s) { return p(s); }) / eps + eps * u.dirichlet_energy();
  out.reduced_value = rec.first_order_energy();
  out.relative_difference = std::abs(out.grid_value - out.reduced_value) / std::abs(out.reduced_value);
  return out;
}

}  // namespace gamma2
