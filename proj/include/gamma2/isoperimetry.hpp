#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gamma2/error.hpp"
#include "gamma2/numerics/interpolation.hpp"
#include "gamma2/numerics/ode.hpp"
#include "gamma2/numerics/quadrature.hpp"
#include "gamma2/numerics/roots.hpp"
#include "gamma2/potential.hpp"
#include "gamma2/weight.hpp"

namespace gamma2 {

// Isoperimetric profile of a domain of unit measure, stored on [0, 1/2] and
// extended by v -> 1 - v. Near v = 0 it behaves as C v^{(n-1)/n} for
// v <= tail_threshold.
class IsoProfile {
 public:
  // df(v, side) is the derivative on [0, 1/2]; side = -1/+1 selects the
  // one-sided value at a kink.
  using Fn = std::function<double(double)>;
  using SidedFn = std::function<double(double, int)>;

  IsoProfile() = default;
  IsoProfile(std::string name, Fn f, SidedFn df, int n, std::vector<double> kinks,
             double tail_constant, double tail_threshold)
      : name_(std::move(name)),
        f_(std::move(f)),
        df_(std::move(df)),
        n_(n),
        kinks_(std::move(kinks)),
        tail_constant_(tail_constant),
        tail_threshold_(tail_threshold) {}

  double eval(double v) const { return v <= 0.5 ? f_(v) : f_(1.0 - v); }
  double operator()(double v) const { return eval(v); }

  double deriv_left(double v) const { return v <= 0.5 ? df_(v, -1) : -df_(1.0 - v, +1); }
  double deriv_right(double v) const { return v < 0.5 ? df_(v, +1) : -df_(1.0 - v, -1); }
  double deriv(double v) const { return deriv_right(v); }

  // Kinks on (0, 1), mirrored.
  std::vector<double> kinks() const {
    std::vector<double> k;
    for (double x : kinks_) {
      k.push_back(x);
      if (x != 0.5) k.push_back(1.0 - x);
    }
    std::sort(k.begin(), k.end());
    return k;
  }
  bool is_kink(double v, double tol = 1e-9) const {
    for (double k : kinks())
      if (std::abs(v - k) <= tol) return true;
    return false;
  }

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  double tail_constant() const { return tail_constant_; }
  double tail_exponent() const { return n_ >= 1 ? (n_ - 1.0) / n_ : 0.0; }
  double tail_threshold() const { return tail_threshold_; }

  // Largest C1 with I(v) >= C1 min(v, 1-v)^{(n-1)/n} on a sample grid.
  double lower_bound_constant(int samples = 2000) const {
    double c = INFINITY;
    for (int i = 1; i <= samples; ++i) {
      const double v = 0.5 * i / samples;
      c = std::min(c, eval(v) / std::pow(v, tail_exponent()));
    }
    return c;
  }

 private:
  std::string name_;
  Fn f_;
  SidedFn df_;
  int n_ = 2;
  std::vector<double> kinks_;
  double tail_constant_ = 0.0;
  double tail_threshold_ = 0.0;
};

// Unit square: I(v) = min(sqrt(pi v), 1) for v <= 1/2. Corner quarter-disks
// win below v = 1/pi, straight cuts above.
inline IsoProfile square_iso_profile() {
  const double kink = 1.0 / M_PI;
  auto f = [](double v) { return std::min(std::sqrt(M_PI * std::max(v, 0.0)), 1.0); };
  auto df = [kink](double v, int side) {
    const bool curved = v < kink || (v == kink && side < 0);
    return curved ? 0.5 * std::sqrt(M_PI / v) : 0.0;
  };
  return IsoProfile("square", f, df, 2, {kink}, std::sqrt(M_PI), kink);
}

// Slab weight: a unit interval has I = 1 (one boundary point) for every v.
inline IsoProfile slab_iso_profile() {
  return IsoProfile("slab", [](double) { return 1.0; }, [](double, int) { return 0.0; }, 1, {}, 1.0,
                    0.5);
}

// I(v) = C v^{(n-1)/n} on [0, 1/2], mirrored.
inline IsoProfile power_iso_profile(double c, int n) {
  const double e = (n - 1.0) / n;
  return IsoProfile(
      "power", [c, e](double v) { return c * std::pow(std::max(v, 0.0), e); },
      [c, e](double v, int) { return c * e * std::pow(v, e - 1.0); }, n, {0.5}, c, 0.5);
}

// User table (v_i, I_i) covering [0, 1/2] or [0, 1]; values are symmetrized
// and interpolated monotonically.
inline IsoProfile iso_profile_from_table(const std::vector<double>& v, const std::vector<double>& iv,
                                         int n) {
  if (v.size() != iv.size() || v.size() < 3) throw InvalidArgument("iso table needs >= 3 rows");
  auto raw = CubicHermite::monotone(v, iv);
  const bool full = v.back() > 0.5 + 1e-12;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.5 + 1e-12) break;
    x.push_back(v[i]);
    y.push_back(full ? 0.5 * (raw(v[i]) + raw(1.0 - v[i])) : iv[i]);
  }
  if (x.back() < 0.5) {
    x.push_back(0.5);
    y.push_back(full ? raw(0.5) : y.back());
  }
  auto h = CubicHermite::monotone(x, y);
  const double e = (n - 1.0) / n;
  const double v1 = x.size() > 1 ? x[1] : 0.5;
  const double c = h(v1) / std::pow(v1, e);
  return IsoProfile(
      "table", [h](double s) { return h(s); }, [h](double s, int) { return h.deriv(s); }, n, {}, c,
      v1);
}

// Smooth positive minorant I* of I touching it to first order at v_m:
//   near v_m:  I_hat(v) = I(v_m) + I'(v_m)(v - v_m) - 2 C0 |v - v_m|^{1+beta}
//   tail:      L(v) = C_L psi(v)^{(n-1)/n},  psi(v) = v on (0, delta]
// and I* = chi I_hat + (1 - chi) L with chi a quintic smoothstep in
// |v - v_m| (1 inside r, 0 outside 2r). psi continues past delta as a
// monotone cubic with zero slope at 1/2, so L is C^1 under v -> 1 - v.
class ModifiedIsoProfile {
 public:
  double eval(double v) const {
    if (v > 0.5) v = 1.0 - v;
    if (v <= 0.0) return 0.0;
    const double d = std::abs(v - vm_);
    const double chi = blend(d);
    double out = 0.0;
    if (chi > 0.0) out += chi * local(v);
    if (chi < 1.0) out += (1.0 - chi) * tail(v);
    return out;
  }
  double operator()(double v) const { return eval(v); }

  double deriv(double v) const {
    double sgn = 1.0;
    if (v > 0.5) {
      v = 1.0 - v;
      sgn = -1.0;
    }
    const double d = std::abs(v - vm_);
    const double chi = blend(d);
    const double dchi = blend_deriv(d) * (v >= vm_ ? 1.0 : -1.0);
    double out = 0.0;
    if (chi > 0.0) out += chi * local_deriv(v);
    if (chi < 1.0) out += (1.0 - chi) * tail_deriv(v);
    if (dchi != 0.0) out += dchi * (local(v) - tail(v));
    return sgn * out;
  }

  const IsoProfile& base() const { return base_; }
  double v_m() const { return vm_input_; }
  double beta() const { return beta_; }
  double C0() const { return c0_; }
  double delta_tail() const { return delta_; }
  double blend_radius() const { return r_; }
  int n() const { return base_.n(); }
  double tail_constant() const { return cl_; }
  double tail_exponent() const { return base_.tail_exponent(); }
  double tail_threshold() const { return delta_; }

  // Points where I* is only C^{1,beta}: v_m, the blend edges and delta,
  // mirrored.
  std::vector<double> kinks() const {
    std::vector<double> k;
    for (double x : {delta_, vm_ - 2 * r_, vm_ - r_, vm_, vm_ + r_, vm_ + 2 * r_}) {
      if (x > 0.0 && x < 0.5) {
        k.push_back(x);
        k.push_back(1.0 - x);
      }
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  }

 private:
  friend ModifiedIsoProfile build_modified_profile(const IsoProfile&, double, double, double, double);

  static double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
  }
  static double smoothstep_deriv(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 30.0 * x * x * (1.0 - x) * (1.0 - x);
  }
  double blend(double d) const {
    if (d <= r_) return 1.0;
    if (d >= 2 * r_) return 0.0;
    return smoothstep((2 * r_ - d) / r_);
  }
  double blend_deriv(double d) const { return -smoothstep_deriv((2 * r_ - d) / r_) / r_; }

  double local(double v) const {
    const double d = v - vm_;
    return i_vm_ + di_vm_ * d - 2.0 * c0_ * std::pow(std::abs(d), 1.0 + beta_);
  }
  double local_deriv(double v) const {
    const double d = v - vm_;
    const double s = d >= 0.0 ? 1.0 : -1.0;
    return di_vm_ - 2.0 * c0_ * (1.0 + beta_) * std::pow(std::abs(d), beta_) * s;
  }

  double psi(double v) const { return v <= delta_ ? v : psi_bridge_(v); }
  double psi_deriv(double v) const { return v <= delta_ ? 1.0 : psi_bridge_.deriv(v); }
  double tail(double v) const { return cl_ * std::pow(psi(v), tail_exponent()); }
  double tail_deriv(double v) const {
    const double e = tail_exponent();
    if (e == 0.0) return 0.0;
    return cl_ * e * std::pow(psi(v), e - 1.0) * psi_deriv(v);
  }

  IsoProfile base_;
  double vm_input_ = 0.5;
  double vm_ = 0.5;  // min(v_m, 1 - v_m)
  double beta_ = 1.0;
  double c0_ = 0.0;
  double delta_ = 0.0;
  double r_ = 0.0;
  double cl_ = 0.0;
  double i_vm_ = 0.0;
  double di_vm_ = 0.0;
  CubicHermite psi_bridge_;
};

inline std::string kink_message(const IsoProfile& base, double vm) {
  std::ostringstream os;
  os.precision(17);
  os << "v_m = " << vm << " is a kink of the '" << base.name()
     << "' profile; one-sided derivatives [" << base.deriv_left(vm) << ", " << base.deriv_right(vm)
     << "]";
  return os.str();
}

// C0 <= 0 selects the measured Taylor constant; delta_tail <= 0 selects an
// automatic tail threshold.
inline ModifiedIsoProfile build_modified_profile(const IsoProfile& base, double v_m, double beta = 1.0,
                                                 double C0 = 0.0, double delta_tail = 0.0) {
  if (!(v_m > 0.0 && v_m < 1.0)) throw InvalidArgument("v_m must lie in (0, 1)");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in (0, 1]");
  if (base.is_kink(v_m) && !(v_m == 0.5 && base.deriv_left(0.5) == base.deriv_right(0.5)))
    throw KinkAtMass(kink_message(base, v_m));

  ModifiedIsoProfile m;
  m.base_ = base;
  m.vm_input_ = v_m;
  m.vm_ = std::min(v_m, 1.0 - v_m);
  m.beta_ = beta;
  const double vm = m.vm_;
  m.i_vm_ = base.eval(vm);
  m.di_vm_ = vm == 0.5 ? 0.0 : base.deriv(vm);

  // Taylor constant measured on a neighbourhood of v_m.
  const double rho = std::min({0.1, 0.5 * vm, vm < 0.5 ? 0.5 - vm : 0.25});
  double c0 = 0.0;
  for (int i = -1000; i <= 1000; ++i) {
    if (i == 0) continue;
    const double d = rho * i / 1000.0;
    const double v = vm + d;
    if (v <= 0.0 || v >= 1.0) continue;
    const double defect = std::abs(base.eval(v) - m.i_vm_ - m.di_vm_ * d);
    c0 = std::max(c0, defect / std::pow(std::abs(d), 1.0 + beta));
  }
  // A positive floor keeps the contact with I isolated at v_m.
  c0 = std::max(c0, 1e-2 * std::max(m.i_vm_, 1e-3) / std::pow(rho, 1.0 + beta));
  m.c0_ = C0 > 0.0 ? C0 : c0;

  // Blend radius: largest r (shrinking geometrically) with I_hat <= I and
  // I_hat >= I(v_m)/4 on [v_m - 2r, v_m + 2r], staying inside (0, 1/2].
  double r = 0.5 * rho;
  if (vm < 0.5) r = std::min(r, 0.5 * (0.5 - vm));
  r = std::min(r, 0.25 * vm);
  for (;; r *= 0.8) {
    if (r < 1e-8) throw HypothesisViolation("no blend radius keeps the local piece below I");
    bool ok = true;
    for (int i = -2000; i <= 2000 && ok; ++i) {
      const double v = vm + 2.0 * r * i / 2000.0;
      if (v > 0.5) continue;
      const double loc = m.i_vm_ + m.di_vm_ * (v - vm) - 2.0 * m.c0_ * std::pow(std::abs(v - vm), 1 + beta);
      if (loc > base.eval(v) + 1e-14 || loc < 0.25 * m.i_vm_) ok = false;
    }
    if (ok) break;
  }
  m.r_ = r;

  const double dmax = vm - 2.0 * r;
  double delta = delta_tail > 0.0 ? std::min(delta_tail, dmax) : 0.5 * dmax;
  delta = std::min(delta, base.tail_threshold());
  m.delta_ = delta;

  // psi: identity up to delta, then a monotone cubic to slope 0 at 1/2.
  if (delta < 0.5) {
    const double len = 0.5 - delta;
    m.psi_bridge_ = CubicHermite({delta, 0.5}, {delta, delta + 0.5 * len}, {1.0, 0.0});
  }

  // Tail constant: L <= I/2 on a fine grid.
  double cl = INFINITY;
  const double e = base.tail_exponent();
  for (int i = 1; i <= 20000; ++i) {
    const double v = 0.5 * i / 20000.0;
    const double ps = v <= delta ? v : m.psi_bridge_(v);
    cl = std::min(cl, base.eval(v) / std::pow(ps, e));
  }
  m.cl_ = 0.5 * cl;
  return m;
}

class RearrangedDomain;
template <class P>
RearrangedDomain solve_volume_function(const P& istar, double tol = 1e-12);

// Rearranged domain: V' = I*(V), V(0) = 1/2 on (-T, T). Inside the tail
// V^{1/n} is linear in t, which gives V and T in closed form there.
class RearrangedDomain {
 public:
  double V(double t) const {
    if (t <= -T_) return 0.0;
    if (t >= T_) return 1.0;
    if (t < t_left_) return tail_volume(t_left_ - t, v_left_);
    if (t > t_right_) return 1.0 - tail_volume(t - t_right_, 1.0 - v_right_);
    return table_(t);
  }
  double eta(double t) const { return t <= -T_ || t >= T_ ? 0.0 : I_(V(t)); }
  double eta_deriv(double t) const {
    if (t <= -T_ || t >= T_) return 0.0;
    const double v = V(t);
    return dI_(v) * I_(v);
  }
  double T() const { return T_; }
  int n() const { return n_; }
  double alpha_nm1() const { return alpha_; }
  double T_quadrature() const { return T_quad_; }
  double symmetry_defect() const { return sym_defect_; }

  // Slice radius with alpha_{n-1} r^{n-1} = I*(V(t)); undefined for n = 1.
  double radius(double t) const {
    if (n_ < 2) return NAN;
    return std::pow(eta(t) / alpha_, 1.0 / (n_ - 1.0));
  }

  // V^{-1}(v) by bisection on the monotone table, polished by Newton.
  double inverse(double v) const {
    if (v <= 0.0) return -T_;
    if (v >= 1.0) return T_;
    double t = bisect([&](double s) { return V(s) - v; }, -T_, T_, 1e-15);
    for (int i = 0; i < 3; ++i) {
      const double e = eta(t);
      if (e <= 0.0) break;
      t -= (V(t) - v) / e;
    }
    return t;
  }

  const std::vector<double>& kinks_t() const { return kinks_t_; }

  std::function<double(double)> profile_eval() const { return I_; }

 private:
  template <class P>
  friend RearrangedDomain solve_volume_function(const P& istar, double tol);

  double tail_volume(double dist, double v_edge) const {
    // (v_edge^{1/n} - (C/n) dist)^n, clipped at zero.
    const double w = std::pow(v_edge, 1.0 / n_) - (C_ / n_) * dist;
    return w > 0.0 ? std::pow(w, n_) : 0.0;
  }

  std::function<double(double)> I_, dI_;
  QuinticHermite table_;
  double T_ = 0.0, T_quad_ = 0.0, sym_defect_ = 0.0;
  double t_left_ = 0.0, t_right_ = 0.0, v_left_ = 0.0, v_right_ = 1.0;
  double C_ = 0.0;
  int n_ = 2;
  double alpha_ = 2.0;
  std::vector<double> kinks_t_;
};

// Measure of the unit ball in dimension k.
inline double unit_ball_measure(int k) { return std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k + 1.0); }

// T = int_0^{1/2} dv / I*(v), computed in w = v^{1/n} so the endpoint
// singularity disappears.
template <class P>
double half_width_by_quadrature(const P& istar) {
  const int n = istar.n();
  if (istar.tail_exponent() >= 1.0) throw NonIntegrableTail("tail exponent >= 1");
  auto g = [&](double w) {
    const double v = std::pow(w, n);
    return n * std::pow(w, n - 1) / istar.eval(v);
  };
  std::vector<double> br;
  for (double k : istar.kinks())
    if (k > 0.0 && k < 0.5) br.push_back(std::pow(k, 1.0 / n));
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-14;
  opt.max_intervals = 20000;
  auto res = integrate(g, 0.0, std::pow(0.5, 1.0 / n), std::span<const double>(br), opt);
  if (!res.converged || !std::isfinite(res.value))
    throw NonIntegrableTail("quadrature for T did not converge");
  return res.value;
}

template <class P>
RearrangedDomain solve_volume_function(const P& istar, double tol) {
  const int n = istar.n();
  const double e = istar.tail_exponent();
  if (e >= 1.0) throw NonIntegrableTail("tail exponent (n-1)/n >= 1");
  const double C = istar.tail_constant();
  const double delta = istar.tail_threshold();
  if (!(C > 0.0) || !(delta > 0.0)) throw NonIntegrableTail("tail constant must be positive");

  auto rhs = [&](double, double v) { return istar.eval(std::clamp(v, 0.0, 1.0)); };
  OdeOptions opt;
  opt.rtol = std::max(0.1 * tol, 1e-15);
  opt.atol = opt.rtol;
  opt.h_max = 0.01;
  const double big = 1e3;

  // Runs to the tail threshold; the final step is recomputed exactly from
  // the last accepted point to the located crossing time.
  auto run = [&](double dir) {
    auto tr = integrate_dopri(rhs, 0.0, 0.5, dir * big, opt, [&](double, double v) {
      return dir > 0 ? (1.0 - delta) - v : v - delta;
    });
    if (!tr.event_hit) throw NonIntegrableTail("volume function did not reach the tail");
    if (tr.t.size() > 2) {
      const double te = tr.t.back();
      tr.t.pop_back();
      tr.y.pop_back();
      tr.dy.pop_back();
      auto last = integrate_dopri(rhs, tr.t.back(), tr.y.back(), te, opt);
      tr.t.push_back(last.t.back());
      tr.y.push_back(last.y.back());
      tr.dy.push_back(last.dy.back());
    }
    return tr;
  };
  auto bwd = run(-1.0);
  auto fwd = run(1.0);

  std::vector<double> t, v, dv, d2v;
  for (std::size_t i = bwd.t.size(); i-- > 1;) {
    t.push_back(bwd.t[i]);
    v.push_back(bwd.y[i]);
  }
  for (std::size_t i = 0; i < fwd.t.size(); ++i) {
    t.push_back(fwd.t[i]);
    v.push_back(fwd.y[i]);
  }
  for (double x : v) {
    const double i = istar.eval(x);
    dv.push_back(i);
    d2v.push_back(istar.deriv(x) * i);
  }

  RearrangedDomain dom;
  dom.I_ = [istar](double x) { return istar.eval(x); };
  dom.dI_ = [istar](double x) { return istar.deriv(x); };
  dom.n_ = n;
  dom.C_ = C;
  dom.alpha_ = n >= 2 ? unit_ball_measure(n - 1) : 1.0;
  dom.t_left_ = t.front();
  dom.v_left_ = v.front();
  dom.t_right_ = t.back();
  dom.v_right_ = v.back();
  dom.table_ = QuinticHermite(std::move(t), std::move(v), std::move(dv), std::move(d2v));
  const double T_left = -dom.t_left_ + n * std::pow(dom.v_left_, 1.0 / n) / C;
  const double T_right = dom.t_right_ + n * std::pow(1.0 - dom.v_right_, 1.0 / n) / C;
  dom.T_ = T_left;
  dom.sym_defect_ = std::abs(T_right - T_left);
  dom.T_quad_ = half_width_by_quadrature(istar);

  for (double k : istar.kinks()) {
    if (k > 0.0 && k < 1.0) dom.kinks_t_.push_back(dom.inverse(k));
  }
  dom.kinks_t_.push_back(dom.t_left_);
  dom.kinks_t_.push_back(dom.t_right_);
  std::sort(dom.kinks_t_.begin(), dom.kinks_t_.end());
  return dom;
}

// (V(t), I*(V(t))): volume and relative perimeter of the slice {y_n < t}.
inline std::pair<double, double> perimeter_volume_pair(const RearrangedDomain& dom, double t) {
  if (t < -dom.T() || t > dom.T()) throw InvalidArgument("t outside [-T, T]");
  return {dom.V(t), dom.eta(t)};
}

// eta = I*(V(t)) on (-T, T).
template <class P>
Weight rearranged_weight(const RearrangedDomain& dom, const P& istar, bool check = true) {
  (void)istar;
  Weight w;
  auto d = std::make_shared<RearrangedDomain>(dom);
  w.eval = [d](double t) { return d->eta(t); };
  w.deriv = [d](double t) { return d->eta_deriv(t); };
  w.lo = -dom.T();
  w.hi = dom.T();
  w.source = WeightSource::rearranged;
  w.label = "rearranged";
  w.breakpoints = dom.kinks_t();
  return finalize_weight(std::move(w), check);
}

// Canonical subsets E of a domain for which eta(t) = H^{n-1}({d_E = t}) is
// known in closed form.
struct CanonicalSet {
  enum class Kind { strip, quarter_disk, centered_disk, centered_ball };
  Kind kind = Kind::quarter_disk;
  double param = 0.5;  // strip position s or radius r

  static CanonicalSet parse(const std::string& name, double param) {
    if (name == "strip") return {Kind::strip, param};
    if (name == "quarter_disk") return {Kind::quarter_disk, param};
    if (name == "disk" || name == "centered_disk") return {Kind::centered_disk, param};
    if (name == "ball" || name == "centered_ball") return {Kind::centered_ball, param};
    throw UnsupportedSet("unknown set '" + name + "'");
  }
  std::string name() const {
    switch (kind) {
      case Kind::strip: return "strip";
      case Kind::quarter_disk: return "quarter_disk";
      case Kind::centered_disk: return "centered_disk";
      case Kind::centered_ball: return "centered_ball";
    }
    return "unknown";
  }
};

struct LevelSetWeight {
  Weight weight;
  double perimeter = 0.0;  // eta(0)
  double kappa = 0.0;      // mean curvature of the interface
  double volume = 0.0;     // measure of E
  double domain_measure = 1.0;
  int n = 2;
};

inline LevelSetWeight levelset_weight(const CanonicalSet& set) {
  LevelSetWeight out;
  Weight& w = out.weight;
  w.source = WeightSource::levelset;
  w.label = set.name();
  const double r = set.param;
  switch (set.kind) {
    case CanonicalSet::Kind::strip: {
      // {x1 < s} in the unit square; level sets are vertical unit segments.
      if (!(r > 0.0 && r < 1.0)) throw UnsupportedSet("strip position must lie in (0, 1)");
      w.eval = [](double) { return 1.0; };
      w.deriv = [](double) { return 0.0; };
      w.lo = -r;
      w.hi = 1.0 - r;
      out.perimeter = 1.0;
      out.kappa = 0.0;
      out.volume = r;
      break;
    }
    case CanonicalSet::Kind::quarter_disk: {
      // Quarter-disk at a corner of the unit square; arcs of radius r + t
      // are clipped by the far sides once r + t > 1.
      if (!(r > 0.0 && r < 1.0)) throw UnsupportedSet("quarter-disk radius must lie in (0, 1)");
      w.eval = [r](double t) {
        const double rho = r + t;
        if (rho <= 1.0) return 0.5 * M_PI * rho;
        return rho * (0.5 * M_PI - 2.0 * std::acos(1.0 / rho));
      };
      w.deriv = [r](double t) {
        const double rho = r + t;
        if (rho <= 1.0) return 0.5 * M_PI;
        return 0.5 * M_PI - 2.0 * std::acos(1.0 / rho) - 2.0 / std::sqrt(rho * rho - 1.0);
      };
      w.lo = -r;
      w.hi = std::sqrt(2.0) - r;
      w.breakpoints = {1.0 - r};
      out.perimeter = 0.5 * M_PI * r;
      out.kappa = 1.0 / r;
      out.volume = 0.25 * M_PI * r * r;
      break;
    }
    case CanonicalSet::Kind::centered_disk: {
      // Disk centred in the unit square; circles of radius r + t meet all
      // four sides once r + t > 1/2.
      if (!(r > 0.0 && r < 0.5)) throw UnsupportedSet("centered disk radius must lie in (0, 1/2)");
      w.eval = [r](double t) {
        const double rho = r + t;
        if (rho <= 0.5) return 2.0 * M_PI * rho;
        return rho * (2.0 * M_PI - 8.0 * std::acos(0.5 / rho));
      };
      w.deriv = [r](double t) {
        const double rho = r + t;
        if (rho <= 0.5) return 2.0 * M_PI;
        return 2.0 * M_PI - 8.0 * std::acos(0.5 / rho) - 8.0 / std::sqrt(4.0 * rho * rho - 1.0);
      };
      w.lo = -r;
      w.hi = std::sqrt(0.5) - r;
      w.breakpoints = {0.5 - r};
      out.perimeter = 2.0 * M_PI * r;
      out.kappa = 1.0 / r;
      out.volume = M_PI * r * r;
      break;
    }
    case CanonicalSet::Kind::centered_ball: {
      // Ball of radius r centred in the unit ball of R^3.
      if (!(r > 0.0 && r < 1.0)) throw UnsupportedSet("ball radius must lie in (0, 1)");
      w.eval = [r](double t) { return 4.0 * M_PI * (r + t) * (r + t); };
      w.deriv = [r](double t) { return 8.0 * M_PI * (r + t); };
      w.lo = -r;
      w.hi = 1.0 - r;
      out.perimeter = 4.0 * M_PI * r * r;
      out.kappa = 1.0 / r;
      out.volume = 4.0 * M_PI * r * r * r / 3.0;
      out.domain_measure = 4.0 * M_PI / 3.0;
      out.n = 3;
      break;
    }
  }
  w = finalize_weight(std::move(w), false);
  return out;
}

}  // namespace gamma2
