#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gamma2/error.hpp"
#include "gamma2/isoperimetry.hpp"
#include "gamma2/numerics/quadrature.hpp"
#include "gamma2/numerics/roots.hpp"
#include "gamma2/potential.hpp"

namespace gamma2 {

// Nodal samples on the unit square, read as the piecewise-linear interpolant
// over the triangulation that splits cell (i, j) along its (i, j)-(i+1, j+1)
// diagonal. Values are stored row-major: values[j * (nx + 1) + i].
struct GridFunction {
  int nx = 0, ny = 0;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(int nx_, int ny_, std::vector<double> v) : nx(nx_), ny(ny_), values(std::move(v)) {
    if (nx < 1 || ny < 1) throw InvalidArgument("grid needs at least one cell per axis");
    if (values.size() != static_cast<std::size_t>((nx + 1) * (ny + 1)))
      throw InvalidArgument("grid value count does not match (nx+1)*(ny+1)");
    for (double x : values)
      if (!std::isfinite(x)) throw NonFiniteEvaluation("grid function has a non-finite value");
  }

  template <class F>
  static GridFunction sample(int nx, int ny, F&& fn) {
    std::vector<double> v;
    v.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) v.push_back(fn(double(i) / nx, double(j) / ny));
    return GridFunction(nx, ny, std::move(v));
  }

  // Whitespace- or comma-separated matrix, one grid row (fixed y) per line.
  static GridFunction from_csv_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      std::vector<double> row;
      double x;
      while (ls >> x) row.push_back(x);
      if (!ls.eof()) throw InvalidArgument("non-numeric entry in grid matrix");
      if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw InvalidArgument("grid matrix needs at least 2 rows");
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw InvalidArgument("ragged grid matrix");
      v.insert(v.end(), r.begin(), r.end());
    }
    return GridFunction(int(rows.front().size()) - 1, int(rows.size()) - 1, std::move(v));
  }

  double at(int i, int j) const { return values[j * (nx + 1) + i]; }
  double hx() const { return 1.0 / nx; }
  double hy() const { return 1.0 / ny; }
  double cell_measure() const { return hx() * hy(); }
  double cell_diameter() const { return std::hypot(hx(), hy()); }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }

  // fn(area, {u0, u1, u2}, gx, gy) for each triangle.
  template <class F>
  void for_each_triangle(F&& fn) const {
    const double a = 0.5 * cell_measure();
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double u00 = at(i, j), u10 = at(i + 1, j), u01 = at(i, j + 1), u11 = at(i + 1, j + 1);
        // Lower triangle (i,j), (i+1,j), (i+1,j+1).
        fn(a, std::array<double, 3>{u00, u10, u11}, (u10 - u00) / hx(), (u11 - u10) / hy());
        // Upper triangle (i,j), (i+1,j+1), (i,j+1).
        fn(a, std::array<double, 3>{u00, u11, u01}, (u11 - u01) / hx(), (u01 - u00) / hy());
      }
    }
  }

  double max_gradient() const {
    double g = 0.0;
    for_each_triangle([&](double, const std::array<double, 3>&, double gx, double gy) {
      g = std::max(g, std::hypot(gx, gy));
    });
    return g;
  }

  // Nodal gradient by central differences (one-sided on the boundary).
  std::vector<std::array<double, 2>> central_difference_gradient() const {
    std::vector<std::array<double, 2>> g(values.size());
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const int il = std::max(i - 1, 0), ir = std::min(i + 1, nx);
        const int jl = std::max(j - 1, 0), jr = std::min(j + 1, ny);
        g[j * (nx + 1) + i] = {(at(ir, j) - at(il, j)) / ((ir - il) * hx()),
                               (at(i, jr) - at(i, jl)) / ((jr - jl) * hy())};
      }
    }
    return g;
  }

  // Default inequality slack: (max|grad u| + 1) * cell diameter.
  double grid_tolerance() const { return (max_gradient() + 1.0) * cell_diameter(); }

  double integral() const {
    double s = 0.0;
    for_each_triangle([&](double a, const std::array<double, 3>& u, double, double) {
      s += a * (u[0] + u[1] + u[2]) / 3.0;
    });
    return s;
  }

  // Integral of g(u) with a collapsed Gauss rule exact for degree 9.
  template <class G>
  double integral_of(G&& g) const {
    const GaussRule& r = gauss_legendre(5);
    double s = 0.0;
    for_each_triangle([&](double a, const std::array<double, 3>& u, double, double) {
      double t = 0.0;
      for (std::size_t p = 0; p < r.nodes.size(); ++p) {
        for (std::size_t q = 0; q < r.nodes.size(); ++q) {
          const double xi = r.nodes[p], eta = r.nodes[q] * (1.0 - xi);
          const double w = r.weights[p] * r.weights[q] * (1.0 - xi);
          t += w * g(u[0] + (u[1] - u[0]) * xi + (u[2] - u[0]) * eta);
        }
      }
      s += 2.0 * a * t;
    });
    return s;
  }

  double dirichlet_energy() const {
    double s = 0.0;
    for_each_triangle([&](double a, const std::array<double, 3>&, double gx, double gy) {
      s += a * (gx * gx + gy * gy);
    });
    return s;
  }
};

namespace detail {

// Integral over [lo, inf) of the measure of {u > s} inside one triangle
// with sorted vertex values d0 <= d1 <= d2.
inline double triangle_upper_mass(double area, double d0, double d1, double d2, double lo) {
  double out = 0.0;
  if (lo < d0) {
    out += area * (d0 - lo);
    lo = d0;
  }
  if (lo < d1 && d1 > d0) {
    const double k = area / (3.0 * (d1 - d0) * (d2 - d0));
    auto anti = [&](double s) { return area * s - k * std::pow(s - d0, 3); };
    out += anti(d1) - anti(lo);
    lo = d1;
  }
  if (lo < d2 && d2 > d1) {
    const double k = area / (3.0 * (d2 - d0) * (d2 - d1));
    out += k * std::pow(d2 - lo, 3);
  }
  return out;
}

// Measure of {u > s} inside one triangle.
inline double triangle_level_measure(double area, std::array<double, 3> u, double s) {
  std::sort(u.begin(), u.end());
  if (s < u[0]) return area;
  if (s >= u[2]) return 0.0;
  if (s < u[1]) return area - area * (s - u[0]) * (s - u[0]) / ((u[1] - u[0]) * (u[2] - u[0]));
  return area * (u[2] - s) * (u[2] - s) / ((u[2] - u[0]) * (u[2] - u[1]));
}

}  // namespace detail

// rho(s) = measure{u > s} of a piecewise-linear grid function. Between
// consecutive vertex values rho is an exact quadratic; triangles on which u
// is constant contribute jumps (atoms).
class DistributionFunction {
 public:
  struct Event {
    double s;
    double d_slope;  // jump of rho'
    double d_curv;   // jump of rho''
    double atom;     // measure with u == s
  };

  DistributionFunction() = default;

  // events need not be sorted; total is the measure of the domain.
  DistributionFunction(std::vector<Event> events, double total) : total_(total) {
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.s < b.s; });
    long double rho = total, slope = 0.0L, curv = 0.0L;
    double prev = events.empty() ? 0.0 : events.front().s;
    for (const Event& e : events) {
      if (s_.empty() || e.s > s_.back()) {
        const long double d = static_cast<long double>(e.s) - prev;
        rho += slope * d + 0.5L * curv * d * d;
        slope += curv * d;
        s_.push_back(e.s);
        atom_.push_back(0.0);
        r0_.push_back(0.0);
        r1_.push_back(0.0);
        r2_.push_back(0.0);
        prev = e.s;
      }
      slope += e.d_slope;
      curv += e.d_curv;
      rho -= e.atom;
      atom_.back() += e.atom;
      r0_.back() = static_cast<double>(rho);
      r1_.back() = static_cast<double>(slope);
      r2_.back() = static_cast<double>(curv);
    }
    closure_ = static_cast<double>(std::abs(rho));
    // The tail after the last event is zero by construction.
    if (!r0_.empty()) {
      r0_.back() = 0.0;
      r1_.back() = 0.0;
      r2_.back() = 0.0;
    }
    for (std::size_t k = 0; k < s_.size(); ++k) left_.push_back(r0_[k] + atom_[k]);
    // Round-off can leave tiny negative values.
    for (auto& x : r0_) x = std::clamp(x, 0.0, total_);
  }

  double total() const { return total_; }
  double min_value() const { return s_.front(); }
  double max_value() const { return s_.back(); }
  const std::vector<double>& breakpoints() const { return s_; }
  const std::vector<double>& atoms() const { return atom_; }
  // |rho| left over after the last vertex value; a round-off diagnostic.
  double closure_defect() const { return closure_; }

  double operator()(double s) const {
    if (s_.empty() || s < s_.front()) return total_;
    if (s >= s_.back()) return 0.0;
    const std::size_t k = index(s);
    const double d = s - s_[k];
    return std::clamp(r0_[k] + r1_[k] * d + 0.5 * r2_[k] * d * d, 0.0, total_);
  }
  double left_limit(double s) const {
    if (s_.empty() || s <= s_.front()) return total_;
    auto it = std::lower_bound(s_.begin(), s_.end(), s);
    if (it != s_.end() && *it == s) return left_[it - s_.begin()];
    return (*this)(s);
  }
  double deriv(double s) const {
    if (s_.empty() || s < s_.front() || s >= s_.back()) return 0.0;
    const std::size_t k = index(s);
    return r1_[k] + r2_[k] * (s - s_[k]);
  }

  // sup{s : rho(s) > v}; the left end of the range for v >= total.
  double quantile(double v) const {
    if (v >= total_) return s_.front();
    if (v < 0.0) return s_.back();
    // Last event whose left limit exceeds v (left limits are non-increasing).
    std::size_t lo = 0, hi = s_.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (left_[mid] > v) lo = mid; else hi = mid;
    }
    const std::size_t k = lo;
    if (r0_[k] <= v || k + 1 >= s_.size()) return s_[k];
    const double len = s_[k + 1] - s_[k];
    auto f = [&](double d) { return r0_[k] + r1_[k] * d + 0.5 * r2_[k] * d * d - v; };
    if (f(len) > 0.0) return s_[k + 1];
    return s_[k] + brent(f, 0.0, len, 1e-15 * std::max(1.0, std::abs(s_[k])));
  }

  // Integral of g(s) against the measure -d rho (the value distribution).
  template <class G>
  double integrate_distribution(G&& g, int order = 6) const {
    const GaussRule& r = gauss_legendre(order);
    double out = 0.0;
    for (std::size_t k = 0; k < s_.size(); ++k) {
      out += g(s_[k]) * atom_[k];
      if (k + 1 == s_.size()) break;
      const double len = s_[k + 1] - s_[k];
      for (std::size_t p = 0; p < r.nodes.size(); ++p) {
        const double d = r.nodes[p] * len;
        out += r.weights[p] * len * g(s_[k] + d) * std::abs(r1_[k] + r2_[k] * d);
      }
    }
    return out;
  }

  // Sum over the continuous pieces of int h(s, rho(s), rho'(s)) ds.
  template <class H>
  double integrate_pieces(H&& h, int order = 8) const {
    const GaussRule& r = gauss_legendre(order);
    double out = 0.0;
    for (std::size_t k = 0; k + 1 < s_.size(); ++k) {
      const double len = s_[k + 1] - s_[k];
      for (std::size_t p = 0; p < r.nodes.size(); ++p) {
        const double d = r.nodes[p] * len;
        const double rho = std::clamp(r0_[k] + r1_[k] * d + 0.5 * r2_[k] * d * d, 0.0, total_);
        out += r.weights[p] * len * h(s_[k] + d, rho, r1_[k] + r2_[k] * d);
      }
    }
    return out;
  }

 private:
  std::size_t index(double s) const {
    return std::upper_bound(s_.begin(), s_.end(), s) - s_.begin() - 1;
  }

  double total_ = 1.0;
  std::vector<double> s_, atom_, r0_, r1_, r2_, left_;
  double closure_ = 0.0;
};

// Spans below snap * (max - min) inside a triangle are treated as flat.
inline DistributionFunction distribution_function(const GridFunction& u, double snap = 1e-7) {
  const double range = u.max() - u.min();
  const double tiny = snap * range;
  std::vector<DistributionFunction::Event> ev;
  ev.reserve(6 * u.nx * u.ny);
  double total = 0.0;
  u.for_each_triangle([&](double area, std::array<double, 3> v, double, double) {
    total += area;
    std::sort(v.begin(), v.end());
    if (v[2] - v[0] <= tiny) {
      ev.push_back({v[0], 0.0, 0.0, area});
      return;
    }
    if (v[1] - v[0] <= tiny) v[1] = v[0];
    if (v[2] - v[1] <= tiny) v[1] = v[2];
    const double span = v[2] - v[0];
    if (v[1] == v[0]) {
      const double cu = 2.0 * area / (span * span);
      ev.push_back({v[0], -2.0 * area / span, cu, 0.0});
      ev.push_back({v[2], 0.0, -cu, 0.0});
    } else if (v[1] == v[2]) {
      const double cl = -2.0 * area / (span * span);
      ev.push_back({v[0], 0.0, cl, 0.0});
      ev.push_back({v[2], 2.0 * area / span, -cl, 0.0});
    } else {
      const double cl = -2.0 * area / ((v[1] - v[0]) * span);
      const double cu = 2.0 * area / (span * (v[2] - v[1]));
      ev.push_back({v[0], 0.0, cl, 0.0});
      ev.push_back({v[1], 0.0, cu - cl, 0.0});
      ev.push_back({v[2], 0.0, -cu, 0.0});
    }
  });
  return DistributionFunction(std::move(ev), total);
}

// Decreasing rearrangement g(t) = sup{s : rho(s) > V(t)} on (-T, T) and its
// increasing mirror f(t) = g(-t).
class Rearranged1D {
 public:
  Rearranged1D(std::shared_ptr<const DistributionFunction> rho,
               std::shared_ptr<const RearrangedDomain> dom)
      : rho_(std::move(rho)), dom_(std::move(dom)) {}

  double g(double t) const { return rho_->quantile(dom_->V(t)); }
  double f(double t) const { return g(-t); }
  double operator()(double t) const { return f(t); }
  // f'(t) = eta(-t) / |rho'(f(t))|; zero on flat pieces.
  double f_deriv(double t) const {
    const double dr = rho_->deriv(f(t));
    return dr < 0.0 ? dom_->eta(-t) / -dr : 0.0;
  }
  double eta(double t) const { return dom_->eta(t); }
  double lo() const { return -dom_->T(); }
  double hi() const { return dom_->T(); }

  const DistributionFunction& distribution() const { return *rho_; }
  const RearrangedDomain& domain() const { return *dom_; }

  // inf{t : f(t) > s}.
  double first_above(double s) const {
    double a = lo(), b = hi();
    if (f(a) > s) return a;
    if (!(f(b) > s)) return b;
    for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
      const double m = 0.5 * (a + b);
      (f(m) > s ? b : a) = m;
    }
    return b;
  }

  // eta-measure of {f > s}.
  double upper_measure(double s) const { return 1.0 - dom_->V(first_above(s)); }

  // Squared-gradient term int (f')^2 eta dt, evaluated in the value
  // variable as int I*(rho)^2 / |rho'| ds.
  double dirichlet_energy() const {
    auto iso = dom_->profile_eval();
    return rho_->integrate_pieces([&](double, double r, double dr) {
      if (dr >= 0.0) return 0.0;
      const double i = iso(std::clamp(r, 0.0, 1.0));
      return i * i / -dr;
    });
  }
  // int G(f) eta dt for any G, as an integral against the value distribution.
  template <class G>
  double integral_of(G&& g) const {
    return rho_->integrate_distribution(std::forward<G>(g));
  }

 private:
  std::shared_ptr<const DistributionFunction> rho_;
  std::shared_ptr<const RearrangedDomain> dom_;
};

inline Rearranged1D rearrange(const GridFunction& u, const RearrangedDomain& dom) {
  return Rearranged1D(std::make_shared<DistributionFunction>(distribution_function(u)),
                      std::make_shared<RearrangedDomain>(dom));
}

struct InequalityPair {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds() const { return lhs <= rhs + slack; }
};

// (||f_{u1} - f_{u2}||_{L1(eta)}, ||u1 - u2||_{L1}). The left side is
// int_0^1 |Q1(v) - Q2(v)| dv with Q the quantile functions.
inline InequalityPair check_contraction(const GridFunction& u1, const GridFunction& u2,
                                        const RearrangedDomain& dom) {
  if (u1.nx != u2.nx || u1.ny != u2.ny) throw InvalidArgument("contraction needs a shared grid");
  (void)dom;
  const auto r1 = distribution_function(u1), r2 = distribution_function(u2);
  std::vector<double> cuts = {0.0, 1.0};
  for (const auto* r : {&r1, &r2}) {
    for (double s : r->breakpoints()) {
      cuts.push_back(std::clamp((*r)(s), 0.0, 1.0));
      cuts.push_back(std::clamp(r->left_limit(s), 0.0, 1.0));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const GaussRule& g = gauss_legendre(6);
  double lhs = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    for (std::size_t p = 0; p < g.nodes.size(); ++p) {
      const double v = cuts[k] + g.nodes[p] * len;
      lhs += g.weights[p] * len * std::abs(r1.quantile(v) - r2.quantile(v));
    }
  }
  double rhs = 0.0;
  GridFunction d = u1;
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = u1.values[i] - u2.values[i];
  d.for_each_triangle([&](double a, std::array<double, 3> v, double, double) {
    std::sort(v.begin(), v.end());
    rhs += detail::triangle_upper_mass(a, v[0], v[1], v[2], 0.0) +
           detail::triangle_upper_mass(a, -v[2], -v[1], -v[0], 0.0);
  });
  return {lhs, rhs, std::max(u1.grid_tolerance(), u2.grid_tolerance())};
}

struct TruncationCheck {
  bool passed = true;
  double max_defect = 0.0;
  double slack = 0.0;
};

// Compares clamp(f_u, s1, s2) with f of the nodally clamped u on a t grid.
inline TruncationCheck check_truncation(const GridFunction& u, double s1, double s2,
                                        const RearrangedDomain& dom, int samples = 2001) {
  if (!(s1 < s2)) throw InvalidArgument("truncation needs s1 < s2");
  GridFunction tu = u;
  for (double& x : tu.values) x = std::clamp(x, s1, s2);
  const auto fu = rearrange(u, dom);
  const auto ft = rearrange(tu, dom);
  TruncationCheck out;
  out.slack = u.grid_tolerance();
  for (int i = 0; i < samples; ++i) {
    const double t = -dom.T() + 2.0 * dom.T() * (i + 0.5) / samples;
    const double d = std::abs(std::clamp(fu(t), s1, s2) - ft(t));
    out.max_defect = std::max(out.max_defect, d);
  }
  out.passed = out.max_defect <= out.slack;
  return out;
}

struct EnergyPair {
  double lhs = 0.0;             // int W(u) + eps^2 |grad u|^2 over the square
  double rhs = 0.0;             // int (W(f) + eps^2 f'^2) eta over (-T, T)
  double potential_lhs = 0.0;   // int W(u)
  double potential_rhs = 0.0;   // int W(f) eta
  double gradient_lhs = 0.0;    // int |grad u|^2
  double gradient_rhs = 0.0;    // int f'^2 eta
  double mass_lhs = 0.0;        // int u
  double mass_rhs = 0.0;        // int f eta
  double slack = 0.0;
  bool holds() const { return rhs <= lhs + slack; }
};

inline EnergyPair rearranged_energy_pair(const GridFunction& u, double eps, const Potential& p,
                                         const RearrangedDomain& dom) {
  const auto f = rearrange(u, dom);
  EnergyPair e;
  e.potential_lhs = u.integral_of([&](double s) { return p(s); });
  e.gradient_lhs = u.dirichlet_energy();
  e.mass_lhs = u.integral();
  e.potential_rhs = f.integral_of([&](double s) { return p(s); });
  e.gradient_rhs = f.dirichlet_energy();
  e.mass_rhs = f.integral_of([](double s) { return s; });
  e.lhs = e.potential_lhs + eps * eps * e.gradient_lhs;
  e.rhs = e.potential_rhs + eps * eps * e.gradient_rhs;
  e.slack = 1e-9 * std::max(1.0, e.lhs);
  return e;
}

struct EquimeasurabilityReport {
  double max_defect = 0.0;   // max |measure{u > s} - eta-measure{f > s}|
  double cell_measure = 0.0;
  bool passed = true;
};

// Thresholds are spread uniformly through the open value range; the grid
// side is summed triangle by triangle.
inline EquimeasurabilityReport check_equimeasurability(const GridFunction& u,
                                                       const Rearranged1D& f, int thresholds = 64) {
  EquimeasurabilityReport r;
  r.cell_measure = u.cell_measure();
  const double lo = u.min(), hi = u.max();
  for (int k = 0; k < thresholds; ++k) {
    const double s = lo + (hi - lo) * (k + 0.5) / thresholds;
    double m = 0.0;
    u.for_each_triangle([&](double a, const std::array<double, 3>& v, double, double) {
      m += detail::triangle_level_measure(a, v, s);
    });
    r.max_defect = std::max(r.max_defect, std::abs(m - f.upper_measure(s)));
  }
  r.passed = r.max_defect <= r.cell_measure;
  return r;
}

// Smooth random field: a sum of low Fourier modes with decaying amplitude.
inline GridFunction random_smooth_field(std::mt19937_64& rng, int nx, int ny, int modes = 4,
                                        double amplitude = 1.0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
  struct Mode {
    int kx, ky;
    double c, phase;
  };
  std::vector<Mode> ms;
  for (int kx = 0; kx <= modes; ++kx)
    for (int ky = 0; ky <= modes; ++ky)
      ms.push_back({kx, ky, amplitude * nd(rng) / (1.0 + kx * kx + ky * ky), ph(rng)});
  return GridFunction::sample(nx, ny, [&](double x, double y) {
    double s = 0.0;
    for (const Mode& m : ms) s += m.c * std::cos(M_PI * (m.kx * x + m.ky * y) + m.phase);
    return s;
  });
}

}  // namespace gamma2
