#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gamma2/error.hpp"
#include "gamma2/numerics/quadrature.hpp"
#include "gamma2/numerics/roots.hpp"
#include "gamma2/numerics/tridiagonal.hpp"
#include "gamma2/potential.hpp"
#include "gamma2/profile.hpp"
#include "gamma2/weight.hpp"

namespace gamma2 {

// Unique t0 with a int_{lo}^{t0} eta + b int_{t0}^{hi} eta = m.
inline double reference_interface(const Weight& w, double a, double b, double m) {
  const double total = w.total();
  const double lo_mass = std::min(a, b) * total, hi_mass = std::max(a, b) * total;
  if (!(m > lo_mass && m < hi_mass)) {
    std::ostringstream os;
    os.precision(17);
    os << "mass " << m << " outside (" << lo_mass << ", " << hi_mass << ")";
    throw MassOutOfRange(os.str());
  }
  auto f = [&](double t0) { return a * w.integral(w.lo, t0) + b * w.integral(t0, w.hi) - m; };
  double t0 = brent(f, w.lo, w.hi, 1e-15);
  // Newton polish: f'(t0) = (a - b) eta(t0).
  for (int i = 0; i < 2; ++i) {
    const double e = w(t0);
    if (!(e > 0.0)) break;
    const double step = f(t0) / ((a - b) * e);
    if (std::abs(step) > 1e-10) break;
    t0 = std::clamp(t0 - step, w.lo, w.hi);
  }
  return t0;
}

inline double reference_interface(const Weight& w, const Potential& p, double m) {
  return reference_interface(w, p.a(), p.b(), m);
}

// Mass of the sharp interface state with jump at t0.
inline double mass_for_interface(const Weight& w, double a, double b, double t0) {
  return a * w.integral(w.lo, t0) + b * w.integral(t0, w.hi);
}

struct GridOptions {
  double fine_spacing_factor = 0.05;  // fine spacing = factor * eps^{3/2}
  double fine_halfwidth = 25.0;       // in units of eps around t0
  double growth = 1.1;
  double max_spacing = 0.01;
  double endpoint_fraction = 0.5;  // spacing <= fraction * distance to an end
};

// Graded mesh around the reference interface t0 (always a node).
struct Grid1D {
  std::vector<double> nodes;
  double t0 = 0.0;
  double eps = 0.0;
  double fine_spacing = 0.0;
  double resolved_halfwidth = 0.0;  // 20 eps |log eps|
  double max_spacing_near_interface = 0.0;

  std::size_t size() const { return nodes.size(); }
  double lo() const { return nodes.front(); }
  double hi() const { return nodes.back(); }
};

inline Grid1D build_grid(double lo, double hi, double t0, double eps, const GridOptions& opt = {}) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(t0 > lo && t0 < hi)) throw InvalidArgument("t0 must lie inside the weight interval");
  Grid1D g;
  g.t0 = t0;
  g.eps = eps;
  g.fine_spacing = opt.fine_spacing_factor * std::pow(eps, 1.5);
  g.resolved_halfwidth = 20.0 * eps * std::abs(std::log(eps));
  const double fine_zone = opt.fine_halfwidth * eps;
  const double cap_zone = std::max(g.fine_spacing, 0.1 * eps);
  const double len = hi - lo;
  const double end_floor = std::max(g.fine_spacing, 1e-4 * len);

  auto march = [&](double end) {
    std::vector<double> out;
    const double dir = end > t0 ? 1.0 : -1.0;
    double t = t0, h = g.fine_spacing;
    for (;;) {
      const double d = std::abs(t - t0);
      double cap = d < fine_zone ? g.fine_spacing
                                 : (d < g.resolved_halfwidth ? cap_zone : opt.max_spacing);
      cap = std::max(cap, g.fine_spacing);
      h = d < fine_zone ? g.fine_spacing : std::min(h * opt.growth, cap);
      h = std::min(h, std::max(end_floor, opt.endpoint_fraction * std::abs(end - t)));
      const double next = t + dir * h;
      if ((end - next) * dir <= 0.3 * h) {
        out.push_back(end);
        break;
      }
      out.push_back(next);
      t = next;
    }
    return out;
  };
  auto left = march(lo);
  auto right = march(hi);
  g.nodes.assign(left.rbegin(), left.rend());
  g.nodes.push_back(t0);
  g.nodes.insert(g.nodes.end(), right.begin(), right.end());

  for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i) {
    const double mid = 0.5 * (g.nodes[i] + g.nodes[i + 1]);
    if (std::abs(mid - t0) <= g.resolved_halfwidth)
      g.max_spacing_near_interface =
          std::max(g.max_spacing_near_interface, g.nodes[i + 1] - g.nodes[i]);
  }
  if (g.max_spacing_near_interface > 0.1 * eps * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(6);
    os << "grid spacing " << g.max_spacing_near_interface << " exceeds eps/10 = " << 0.1 * eps
       << " within 20 eps|log eps| of t0 (eps = " << eps << ")";
    throw UnresolvedEpsilon(os.str());
  }
  return g;
}

// Nodal state with its mass and energy parts G_eps = int (W(v) + eps^2 v'^2) eta.
struct Field1D {
  std::vector<double> t;
  std::vector<double> v;
  double mass = 0.0;
  double potential_energy = 0.0;  // int W(v) eta
  double gradient_energy = 0.0;   // int eps^2 v'^2 eta
  double energy() const { return potential_energy + gradient_energy; }
};

// P1 discretization of G_eps with 4-point Gauss per cell.
class DiscreteEnergy {
 public:
  static constexpr int kQ = 4;

  DiscreteEnergy(Grid1D grid, const Weight& w, const Potential& p, double eps)
      : grid_(std::move(grid)), p_(p), eps_(eps) {
    const auto& x = grid_.nodes;
    const std::size_t n = x.size();
    if (n < 3) throw InvalidArgument("grid needs at least 3 nodes");
    const GaussRule& r = gauss_legendre(kQ);
    for (int q = 0; q < kQ; ++q) xi_[q] = r.nodes[q];
    h_.resize(n - 1);
    wq_.resize((n - 1) * kQ);
    cell_eta_.resize(n - 1);
    c_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x[i + 1] - x[i];
      h_[i] = h;
      double s = 0.0;
      for (int q = 0; q < kQ; ++q) {
        const double e = w(x[i] + h * xi_[q]);
        if (!std::isfinite(e)) throw NonFiniteEvaluation("weight is not finite on the grid");
        const double wt = r.weights[q] * h * e;
        wq_[i * kQ + q] = wt;
        s += wt;
        c_[i] += wt * (1.0 - xi_[q]);
        c_[i + 1] += wt * xi_[q];
      }
      cell_eta_[i] = s;
    }
  }

  const Grid1D& grid() const { return grid_; }
  const std::vector<double>& nodes() const { return grid_.nodes; }
  std::size_t size() const { return grid_.nodes.size(); }
  double eps() const { return eps_; }
  const Potential& potential() const { return p_; }
  // Mass weights c_i = int phi_i eta, so that mass(v) = c . v.
  const std::vector<double>& mass_weights() const { return c_; }

  double mass(const std::vector<double>& v) const {
    long double s = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<long double>(c_[i]) * v[i];
    return static_cast<double>(s);
  }

  std::pair<double, double> parts(const std::vector<double>& v) const {
    long double pw = 0.0L, gr = 0.0L;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double dv = v[i + 1] - v[i];
      for (int q = 0; q < kQ; ++q) pw += wq_[i * kQ + q] * p_(v[i] + dv * xi_[q]);
      gr += eps_ * eps_ * dv * dv / (h_[i] * h_[i]) * cell_eta_[i];
    }
    return {static_cast<double>(pw), static_cast<double>(gr)};
  }
  double energy(const std::vector<double>& v) const {
    auto [a, b] = parts(v);
    return a + b;
  }

  std::vector<double> gradient(const std::vector<double>& v) const {
    std::vector<double> g(v.size(), 0.0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double dv = v[i + 1] - v[i];
      double gl = 0.0, gr = 0.0;
      for (int q = 0; q < kQ; ++q) {
        const double d = wq_[i * kQ + q] * p_.deriv(v[i] + dv * xi_[q]);
        gl += d * (1.0 - xi_[q]);
        gr += d * xi_[q];
      }
      const double k = 2.0 * eps_ * eps_ * dv / (h_[i] * h_[i]) * cell_eta_[i];
      g[i] += gl - k;
      g[i + 1] += gr + k;
    }
    return g;
  }

  // Exact Hessian; W'' is capped where it is unbounded (q < 1 wells).
  Tridiagonal hessian(const std::vector<double>& v) const {
    const std::size_t n = v.size();
    Tridiagonal m;
    m.diag.assign(n, 0.0);
    m.lower.assign(n - 1, 0.0);
    m.upper.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double dv = v[i + 1] - v[i];
      double a00 = 0.0, a01 = 0.0, a11 = 0.0;
      for (int q = 0; q < kQ; ++q) {
        const double d2 = second_derivative(v[i] + dv * xi_[q]);
        const double wt = wq_[i * kQ + q] * d2;
        a00 += wt * (1.0 - xi_[q]) * (1.0 - xi_[q]);
        a01 += wt * (1.0 - xi_[q]) * xi_[q];
        a11 += wt * xi_[q] * xi_[q];
      }
      const double k = 2.0 * eps_ * eps_ / (h_[i] * h_[i]) * cell_eta_[i];
      m.diag[i] += a00 + k;
      m.diag[i + 1] += a11 + k;
      m.upper[i] += a01 - k;
      m.lower[i] += a01 - k;
    }
    return m;
  }

  std::vector<double> hessian_vector(const std::vector<double>& v,
                                     const std::vector<double>& x) const {
    return hessian(v).multiply(x);
  }

  // int |v - v0| eta with v0 = a left of t0 and b right of it.
  double l1_distance_to_sharp(const std::vector<double>& v, double a, double b) const {
    const auto& x = grid_.nodes;
    long double s = 0.0L;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double target = 0.5 * (x[i] + x[i + 1]) < grid_.t0 ? a : b;
      const double dv = v[i + 1] - v[i];
      for (int q = 0; q < kQ; ++q) s += wq_[i * kQ + q] * std::abs(v[i] + dv * xi_[q] - target);
    }
    return static_cast<double>(s);
  }

  Field1D field(std::vector<double> v) const {
    Field1D f;
    f.t = grid_.nodes;
    f.mass = mass(v);
    auto [pw, gr] = parts(v);
    f.potential_energy = pw;
    f.gradient_energy = gr;
    f.v = std::move(v);
    return f;
  }

  // Adds a constant so that c . v = m.
  void project_mass(std::vector<double>& v, double m) const {
    double csum = 0.0;
    for (double ci : c_) csum += ci;
    for (int k = 0; k < 2; ++k) {
      const double shift = (m - mass(v)) / csum;
      for (double& x : v) x += shift;
    }
  }

 private:
  double second_derivative(double s) const {
    const WellData& wd = p_.wells();
    if (wd.q < 1.0) {
      // Keep the curvature finite near the wells; the value there only
      // preconditions the step.
      const double floor = 1e-12 * (wd.b - wd.a);
      const double da = std::abs(s - wd.a), db = std::abs(s - wd.b);
      if (da < floor) s = wd.a + (s < wd.a ? -floor : floor);
      if (db < floor) s = wd.b + (s < wd.b ? -floor : floor);
    }
    auto d2 = p_.deriv2(s);
    return d2 ? *d2 : 0.0;
  }

  Grid1D grid_;
  Potential p_;
  double eps_;
  std::array<double, kQ> xi_{};
  std::vector<double> h_, wq_, cell_eta_, c_;
};

inline DiscreteEnergy assemble_energy(const Grid1D& grid, const Weight& w, const Potential& p,
                                      double eps) {
  return DiscreteEnergy(grid, w, p, eps);
}

struct WellRoots {
  double a_eps = 0.0, c_eps = 0.0, b_eps = 0.0;
};

// The three zeros of W' + eps_lambda, searched in windows around a, c, b.
inline WellRoots well_roots(const Potential& p, double eps_lambda) {
  const double a = p.a(), b = p.b(), c = p.c(), span = b - a;
  auto f = [&](double s) { return p.deriv(s) + eps_lambda; };
  const std::array<std::pair<double, double>, 3> win = {
      std::pair{a - span, 0.5 * (a + c)}, std::pair{0.5 * (a + c), 0.5 * (c + b)},
      std::pair{0.5 * (c + b), b + span}};
  std::array<double, 3> roots{};
  for (int k = 0; k < 3; ++k) {
    const auto br = sign_change_brackets(f, win[k].first, win[k].second, 4000);
    if (br.size() != 1) {
      std::ostringstream os;
      os << "W' + eps*lambda has " << br.size() << " sign changes near "
         << (k == 0 ? "a" : k == 1 ? "c" : "b") << " (eps*lambda = " << eps_lambda << ")";
      throw RootCountChanged(os.str());
    }
    roots[k] = brent(f, br[0].first, br[0].second, 1e-16);
  }
  return {roots[0], roots[1], roots[2]};
}

// Leading-order roots: a - lambda|lambda|^{1/q-1} (q/ell)^{1/q} eps^{1/q},
// the same offset at b, and c - eps lambda / W''(c).
inline WellRoots well_roots_first_order(const Potential& p, double eps, double lambda) {
  const WellData& wd = p.wells();
  const double off = lambda * std::pow(std::abs(lambda), 1.0 / wd.q - 1.0) *
                     std::pow(wd.q / wd.ell, 1.0 / wd.q) * std::pow(eps, 1.0 / wd.q);
  const double d2c = p.deriv2(wd.c).value_or(NAN);
  return {wd.a - off, wd.c - eps * lambda / d2c, wd.b - off};
}

struct MinimizeOptions {
  double tol = 1e-10;       // max-norm of the normalized EL residual
  int max_iter = 200;
  double delta_loc = 0.0;   // <= 0: automatic
  double bound_slack = 1e-10;
};

struct MinimizerResult {
  Field1D field;
  double lambda_eps = 0.0;       // dual variable of the mass constraint
  double lambda_bulk = 0.0;      // EL identity averaged away from the layer
  double el_residual = 0.0;
  double neumann_defect = 0.0;   // max one-sided |v'| at the two ends
  int iterations = 0;
  bool converged = false;
  WellRoots roots;
  double bound_violation = 0.0;  // max excursion outside [a_eps, b_eps]
  bool bounds_ok = true;
  double delta_loc = 0.0;
  double locality_distance = 0.0;
  int transitions = 0;           // sign changes of v - c_eps
  double max_gap_outside_layer = 0.0;
  std::vector<double> energy_history;
};

// (b - a) eta(t0) r / 4 with r the distance from t0 to the nearer end.
inline double default_locality_radius(const Weight& w, const Potential& p, double t0) {
  const double r = std::min(t0 - w.lo, w.hi - t0);
  return (p.b() - p.a()) * w(t0) * r / 4.0;
}

namespace detail {

struct Multiplier {
  double mu = 0.0;       // dual
  double mu_bulk = 0.0;  // bulk average
  double residual = 0.0;
};

inline Multiplier multiplier_of(const std::vector<double>& g, const std::vector<double>& c,
                                const std::vector<double>& t, double t0, double layer) {
  long double gc = 0, cc = 0, gb = 0, cb = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gc += static_cast<long double>(g[i]) * c[i];
    cc += static_cast<long double>(c[i]) * c[i];
    if (std::abs(t[i] - t0) > layer) {
      gb += g[i];
      cb += c[i];
    }
  }
  Multiplier m;
  m.mu = static_cast<double>(gc / cc);
  m.mu_bulk = cb > 0 ? static_cast<double>(gb / cb) : m.mu;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (c[i] > 0.0) m.residual = std::max(m.residual, std::abs(g[i] / c[i] - m.mu));
  return m;
}

}  // namespace detail

// Projected Newton on {c . v = m}: with H the tridiagonal Hessian,
//   d = -(H^{-1} g - H^{-1} c (c . H^{-1} g) / (c . H^{-1} c)),
// regularized until d is a descent direction, with Armijo backtracking.
inline MinimizerResult minimize_localized(const DiscreteEnergy& E, const Weight& w,
                                          const Potential& p, double m, const Field1D& v_init,
                                          const MinimizeOptions& opt = {}) {
  const auto& t = E.nodes();
  const auto& c = E.mass_weights();
  const double eps = E.eps();
  const double t0 = E.grid().t0;
  const double layer = 10.0 * eps * std::abs(std::log(eps));
  if (v_init.v.size() != t.size()) throw InvalidArgument("initial field does not match the grid");

  MinimizerResult res;
  res.delta_loc = opt.delta_loc > 0.0 ? opt.delta_loc : default_locality_radius(w, p, t0);
  std::vector<double> v = v_init.v;
  E.project_mass(v, m);
  if (E.l1_distance_to_sharp(v, p.a(), p.b()) > res.delta_loc)
    throw LeftLocalityBall("initial field lies outside the locality ball");

  double f = E.energy(v);
  res.energy_history.push_back(f);
  double best_residual = INFINITY;
  int stalled = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    const auto g = E.gradient(v);
    const auto mult = detail::multiplier_of(g, c, t, t0, layer);
    res.el_residual = mult.residual;
    res.iterations = it;
    if (mult.residual < opt.tol) {
      res.converged = true;
      break;
    }
    if (mult.residual < 0.5 * best_residual) {
      best_residual = mult.residual;
      stalled = 0;
    } else if (++stalled >= 4 && mult.residual < 100.0 * opt.tol) {
      // Round-off floor of the second differences.
      res.converged = true;
      break;
    }

    Tridiagonal H = E.hessian(v);
    std::vector<double> d;
    double sigma = 0.0;
    for (int reg = 0; reg < 60; ++reg) {
      Tridiagonal Hr = H;
      if (sigma > 0.0)
        for (std::size_t i = 0; i < Hr.diag.size(); ++i) Hr.diag[i] += sigma * c[i];
      bool ok = true;
      try {
        const auto x2 = solve(Hr, c);
        long double cx2 = 0;
        for (std::size_t i = 0; i < c.size(); ++i) cx2 += static_cast<long double>(c[i]) * x2[i];
        // Solves H d + c r = rhs, c . d = e; returns (d, r).
        auto kkt = [&](const std::vector<double>& rhs, double e) {
          const auto x1 = solve(Hr, rhs);
          long double cx1 = 0;
          for (std::size_t i = 0; i < c.size(); ++i) cx1 += static_cast<long double>(c[i]) * x1[i];
          const double r = static_cast<double>((cx1 - e) / cx2);
          std::vector<double> out(x1.size());
          for (std::size_t i = 0; i < x1.size(); ++i) out[i] = x1[i] - x2[i] * r;
          return std::pair{out, r};
        };
        std::vector<double> rhs(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) rhs[i] = -g[i];
        auto [dd, r] = kkt(rhs, 0.0);
        // Iterative refinement; the translation mode makes H nearly singular.
        for (int ref = 0; ref < 2; ++ref) {
          const std::size_t n = dd.size();
          std::vector<double> res_k(n);
          long double e = 0;
          for (std::size_t i = 0; i < n; ++i) {
            long double hd = static_cast<long double>(Hr.diag[i]) * dd[i];
            if (i > 0) hd += static_cast<long double>(Hr.lower[i - 1]) * dd[i - 1];
            if (i + 1 < n) hd += static_cast<long double>(Hr.upper[i]) * dd[i + 1];
            res_k[i] = static_cast<double>(rhs[i] - hd - static_cast<long double>(c[i]) * r);
            e += static_cast<long double>(c[i]) * dd[i];
          }
          auto [cd, cr] = kkt(res_k, -static_cast<double>(e));
          for (std::size_t i = 0; i < n; ++i) dd[i] += cd[i];
          r += cr;
        }
        d = std::move(dd);
        long double gd = 0;
        for (std::size_t i = 0; i < v.size(); ++i) gd += static_cast<long double>(g[i]) * d[i];
        ok = gd < 0 && std::isfinite(static_cast<double>(gd));
      } catch (const NoConvergence&) {
        ok = false;
      }
      if (ok) break;
      sigma = sigma == 0.0 ? 1e-6 : 4.0 * sigma;
      d.clear();
    }
    if (d.empty()) throw NoConvergence("no descent direction in projected Newton");

    long double gd = 0;
    for (std::size_t i = 0; i < v.size(); ++i) gd += static_cast<long double>(g[i]) * d[i];
    double alpha = 1.0;
    std::vector<double> trial(v.size());
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < v.size(); ++i) trial[i] = v[i] + alpha * d[i];
      E.project_mass(trial, m);
      const double ft = E.energy(trial);
      const double armijo = f + 1e-4 * alpha * static_cast<double>(gd);
      // Near convergence the energy change drops below round-off; there the
      // EL residual decides.
      const bool tiny = std::abs(static_cast<double>(gd)) < 1e-13 * std::max(1.0, std::abs(f));
      bool ok = ft <= armijo;
      if (!ok && tiny) {
        const auto gt = E.gradient(trial);
        ok = detail::multiplier_of(gt, c, t, t0, layer).residual < mult.residual;
      }
      if (ok) {
        if (E.l1_distance_to_sharp(trial, p.a(), p.b()) <= res.delta_loc) {
          accepted = true;
          f = ft;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (E.l1_distance_to_sharp(trial, p.a(), p.b()) > res.delta_loc)
        throw LeftLocalityBall("iterates left the locality ball around the sharp interface");
      throw NoConvergence("line search failed");
    }
    v.swap(trial);
    res.energy_history.push_back(E.energy(v));
  }
  if (!res.converged)
    throw NoConvergence("projected Newton hit the iteration cap, EL residual " +
                        detail::fmt17(res.el_residual));

  const auto g = E.gradient(v);
  const auto mult = detail::multiplier_of(g, c, t, t0, layer);
  res.el_residual = mult.residual;
  res.lambda_eps = -mult.mu / eps;
  res.lambda_bulk = -mult.mu_bulk / eps;
  res.locality_distance = E.l1_distance_to_sharp(v, p.a(), p.b());
  const std::size_t n = v.size();
  res.neumann_defect = std::max(std::abs(v[1] - v[0]) / (t[1] - t[0]),
                                std::abs(v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]));
  res.roots = well_roots(p, eps * res.lambda_eps);
  for (double x : v) {
    res.bound_violation = std::max({res.bound_violation, res.roots.a_eps - x, x - res.roots.b_eps});
  }
  res.bounds_ok = res.bound_violation <= opt.bound_slack;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if ((v[i] - res.roots.c_eps) * (v[i + 1] - res.roots.c_eps) < 0.0) ++res.transitions;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(t[i] - t0) <= layer) continue;
    res.max_gap_outside_layer = std::max(
        res.max_gap_outside_layer,
        std::min(std::abs(v[i] - res.roots.a_eps), std::abs(v[i] - res.roots.b_eps)));
  }
  res.field = E.field(std::move(v));
  return res;
}

struct MultiplierEstimate {
  double dual = 0.0;
  double bulk = 0.0;
  double discrepancy = 0.0;
};

inline MultiplierEstimate extract_multiplier(const MinimizerResult& r) {
  return {r.lambda_eps, r.lambda_bulk, std::abs(r.lambda_eps - r.lambda_bulk)};
}

// lambda_0 = 2 eta'(t0) c_W / ((b - a) eta(t0)).
inline double limiting_multiplier(const Weight& w, const Potential& p, double t0, double c_w) {
  return 2.0 * w.deriv(t0) * c_w / ((p.b() - p.a()) * w(t0));
}

// v(t) = z((t - t0)/eps - tau) - sigma with sigma = lambda0 eps / W''(a) for
// q = 1 and sigma = 0 for q < 1; tau is chosen to meet the mass exactly.
class RecoverySequence {
 public:
  RecoverySequence(const Profile& prof, const Potential& p, const Weight& w, double t0, double eps,
                   double m, double lambda0, double tau0)
      : prof_(&prof), p_(&p), w_(&w), t0_(t0), eps_(eps), m_(m), lambda0_(lambda0) {
    const WellData& wd = prof.wells();
    sigma_ = wd.q < 1.0 ? 0.0 : lambda0 * eps / p.curvature_at_wells();
    cut_lo_ = prof.support_lo();
    cut_hi_ = prof.support_hi();
    if (wd.q == 1.0) {
      // Drop the exponential tails once the gap is below 1e-18.
      const double mu = prof.tail_rate();
      cut_lo_ = prof.t_lo() - std::max(0.0, std::log(prof.gap_at_table_ends_lo() / 1e-18)) / mu;
      cut_hi_ = prof.t_hi() + std::max(0.0, std::log(prof.gap_at_table_ends_hi() / 1e-18)) / mu;
    }
    total_ = w.total();
    auto res = [&](double tau) { return mass_at(tau) - m_; };
    tau_ = brent(res, tau0 - 5.0, tau0 + 5.0, 1e-15);
    mass_residual_ = res(tau_);
    if (std::abs(mass_residual_) > 1e-12 * std::max(1.0, std::abs(m_))) {
      // One secant refinement on the Brent answer.
      const double h = 1e-9;
      const double d = (res(tau_ + h) - res(tau_ - h)) / (2 * h);
      if (d != 0.0) tau_ -= mass_residual_ / d;
      mass_residual_ = res(tau_);
    }
  }

  double operator()(double t) const { return prof_->z((t - t0_) / eps_ - tau_) - sigma_; }
  double deriv(double t) const { return prof_->dz((t - t0_) / eps_ - tau_) / eps_; }
  double tau() const { return tau_; }
  double vertical_shift() const { return sigma_; }
  double mass_residual() const { return mass_residual_; }
  double eps() const { return eps_; }
  double t0() const { return t0_; }
  double lambda0() const { return lambda0_; }

  double mass() const { return mass_at(tau_); }

  // G^(1) = int (W(v)/eps + eps v'^2) eta dt, evaluated in the stretched
  // variable y = (t - t0)/eps - tau inside the layer.
  double first_order_energy() const {
    const double s = t0_ + eps_ * tau_;
    const double ylo = std::max((w_->lo - s) / eps_, cut_lo_);
    const double yhi = std::min((w_->hi - s) / eps_, cut_hi_);
    const WellData& wd = prof_->wells();
    double out = 0.0;
    out += p_->eval(wd.a - sigma_) / eps_ * w_->integral(w_->lo, s + eps_ * ylo);
    out += p_->eval(wd.b - sigma_) / eps_ * w_->integral(s + eps_ * yhi, w_->hi);
    auto g = [&](double y) {
      const double dz = prof_->dz(y);
      return (p_->eval(prof_->z(y) - sigma_) + dz * dz) * (*w_)(s + eps_ * y);
    };
    out += layer_integral(g, s, ylo, yhi);
    return out;
  }

  std::vector<double> nodal(const std::vector<double>& t) const {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = (*this)(t[i]);
    return v;
  }

 private:
  double mass_at(double tau) const {
    const double s = t0_ + eps_ * tau;
    const WellData& wd = prof_->wells();
    double out = wd.a * w_->integral(w_->lo, s) + wd.b * w_->integral(s, w_->hi) - sigma_ * total_;
    const double ylo = std::max((w_->lo - s) / eps_, cut_lo_);
    const double yhi = std::min((w_->hi - s) / eps_, cut_hi_);
    auto g = [&](double y) {
      const double step = y < 0.0 ? wd.a : wd.b;
      return (prof_->z(y) - step) * (*w_)(s + eps_ * y);
    };
    out += eps_ * layer_integral(g, s, ylo, yhi);
    return out;
  }

  template <class G>
  double layer_integral(G&& g, double s, double ylo, double yhi) const {
    if (!(yhi > ylo)) return 0.0;
    std::vector<double> br = {0.0, prof_->t_lo(), prof_->t_hi()};
    for (double k = std::ceil(ylo); k < yhi; k += 4.0) br.push_back(k);
    for (double b : w_->breakpoints) br.push_back((b - s) / eps_);
    QuadOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-14;
    opt.max_intervals = 20000;
    return integrate(g, ylo, yhi, std::span<const double>(br), opt).value;
  }

  const Profile* prof_;
  const Potential* p_;
  const Weight* w_;
  double t0_, eps_, m_, lambda0_;
  double sigma_ = 0.0, tau_ = 0.0, mass_residual_ = 0.0, total_ = 1.0;
  double cut_lo_ = 0.0, cut_hi_ = 0.0;
};

// Field on a grid from a recovery sequence, with the discrete mass restored
// by a constant shift.
inline Field1D recovery_field(const RecoverySequence& rec, const DiscreteEnergy& E, double m) {
  auto v = rec.nodal(E.nodes());
  E.project_mass(v, m);
  return E.field(std::move(v));
}

}  // namespace gamma2
