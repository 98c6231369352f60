// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "gamma2/gamma2.hpp"

namespace {

using namespace gamma2;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Accumulates named sub-checks into a single verdict with a readable detail.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += (ok ? "" : "FAILED ") + what;
  }
  Outcome done() const { return {pass_, detail_}; }

 private:
  bool pass_ = true;
  std::string detail_;
};

Outcome quartic_constants() {
  Checks c;
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  const double cw = compute_cw(p).value;
  const double cs = compute_csym(prof, p).value;
  c.expect(std::abs(cw - 2.0 * std::sqrt(2.0) / 3.0) <= 1e-10, "c_W = " + num(cw));
  c.expect(std::abs(cs) <= 1e-10, "c_sym = " + num(cs));
  const auto d2a = p.deriv2(-1.0), d2b = p.deriv2(1.0);
  c.expect(d2a && d2b && *d2a == 4.0 && *d2b == 4.0, "W''(-1) = W''(1) = 4");
  const double z = prof.z(std::sqrt(2.0));
  c.expect(std::abs(z - std::tanh(1.0)) <= 1e-8, "|z(sqrt 2) - tanh 1| = " + num(std::abs(z - std::tanh(1.0))));
  return c.done();
}

Outcome square_half_width() {
  Checks c;
  const double exact = 0.5 + 1.0 / M_PI;
  const auto dom = solve_volume_function(square_iso_profile());
  c.expect(std::abs(dom.T() - exact) <= 1e-6, "T = " + num(dom.T()));
  const double tq = half_width_by_quadrature(square_iso_profile());
  c.expect(std::abs(tq - exact) <= 1e-6, "quadrature T = " + num(tq));
  return c.done();
}

Outcome curvature_formula() {
  Checks c;
  const Potential p = Potential::quartic();
  const Profile prof = solve_profile(p);
  double worst = 0.0;
  for (int n : {2, 3})
    for (double kappa : {0.5, 1.0, 2.0}) {
      const double got = second_order_prediction(p, prof, n, kappa, 1.0).second_order;
      worst = std::max(worst, std::abs(got + (n - 1) * (n - 1) * kappa * kappa / 9.0));
    }
  c.expect(worst <= 1e-10, "max deviation from -(n-1)^2 kappa^2 / 9 = " + num(worst));
  for (double q : {0.3, 0.5, 0.7}) {
    const Potential s = Potential::subquadratic(q);
    const double v = second_order_prediction(s, solve_profile(s), 2, 1.0, 1.0).second_order;
    c.expect(v == 0.0, "q = " + num(q) + " gives " + num(v));
  }
  return c.done();
}

struct SkewScenario {
  Potential p = Potential::quartic();
  Profile prof = solve_profile(p);
  Weight w = linear_weight(1.0, 1.0, -1.0, 1.0);
};

Outcome recovery_sweep() {
  Checks c;
  const SkewScenario s;
  const auto rep = verify_expansion_1d(s.w, s.p, s.prof, 1.0, geometric_eps(), SweepMode::recovery);
  c.expect(rep.within(0.02), "L = " + num(rep.extrapolated_limit) + ", relative gap " + num(rep.gap));
  return c.done();
}

// Minimizer sweep shared by criteria 5 and 10.
const ExpansionReport& minimizer_sweep() {
  static const ExpansionReport rep = [] {
    const SkewScenario s;
    return verify_expansion_1d(s.w, s.p, s.prof, 1.0, geometric_eps(), SweepMode::minimize);
  }();
  return rep;
}

Outcome minimizer_sweep_check() {
  Checks c;
  const auto& rep = minimizer_sweep();
  int failed = 0;
  for (const auto& r : rep.rows) failed += !r.ok;
  c.expect(failed == 0, std::to_string(failed) + " failed eps");
  c.expect(rep.within(0.05), "L = " + num(rep.extrapolated_limit) + ", relative gap " + num(rep.gap));
  c.expect(rep.minimizer_below_recovery, "minimizer energy <= recovery energy at every eps");
  const double lambda0 = 2.0 * std::sqrt(2.0) / 3.0;
  const auto& last = rep.rows.back();
  const double rel = std::abs(last.lambda - lambda0) / lambda0;
  c.expect(last.ok && std::abs(last.eps - 1e-3) < 1e-15 && rel <= 0.02,
           "lambda at eps = 1e-3 is " + num(last.lambda) + " (relative " + num(rel) + ")");
  return c.done();
}

Outcome subquadratic_null() {
  Checks c;
  const Potential p = Potential::subquadratic(0.5);
  const auto rep = verify_expansion_1d(linear_weight(1.0, 1.0, -1.0, 1.0), p, solve_profile(p), 1.0,
                                       geometric_eps(), SweepMode::recovery);
  c.expect(rep.has_fit && std::abs(rep.extrapolated_limit) < 1e-2,
           "|L| = " + num(std::abs(rep.extrapolated_limit)));
  return c.done();
}

Outcome skewed_potential() {
  Checks c;
  const Potential p = Potential::skewed();
  const Profile prof = solve_profile(p);
  const double cs = compute_csym(prof, p).value;
  c.expect(std::abs(cs) > 1e-6, "c_sym = " + num(cs));

  const Weight flat = constant_weight(1.0, -1.0, 1.0);
  const double m_flat = mass_for_interface(flat, p.a(), p.b(), 0.0);
  const auto ctl = verify_expansion_1d(flat, p, prof, m_flat, geometric_eps(), SweepMode::recovery);
  c.expect(ctl.has_fit && std::abs(ctl.extrapolated_limit) < 1e-2,
           "flat weight |L| = " + num(std::abs(ctl.extrapolated_limit)));

  const Weight skew = linear_weight(1.0, 1.0, -1.0, 1.0);
  const double m = mass_for_interface(skew, p.a(), p.b(), 0.0);
  const auto rep = verify_expansion_1d(skew, p, prof, m, geometric_eps(), SweepMode::recovery);
  c.expect(rep.within(0.10), "skew weight L = " + num(rep.extrapolated_limit) + " vs " +
                                 num(rep.prediction.second_order) + ", relative gap " + num(rep.gap));
  return c.done();
}

Outcome quarter_disk() {
  Checks c;
  const Potential p = Potential::quartic();
  const auto set = CanonicalSet::parse("quarter_disk", 0.5);
  const LevelSetWeight lw = levelset_weight(set);
  c.expect(lw.weight.deriv(0.0) == 0.5 * M_PI, "eta'(0) = " + num(lw.weight.deriv(0.0)));
  const auto rep = verify_expansion_nd(set, p, solve_profile(p), geometric_eps());
  c.expect(std::abs(rep.prediction.second_order + 4.0 / 9.0) <= 1e-10,
           "prediction " + num(rep.prediction.second_order));
  c.expect(rep.has_fit && std::abs(rep.extrapolated_limit + 4.0 / 9.0) <= 0.05 * 4.0 / 9.0,
           "L = " + num(rep.extrapolated_limit) + ", relative gap " + num(rep.gap));
  return c.done();
}

Outcome rearrangement_suite() {
  Checks c;
  const IsoProfile base = square_iso_profile();
  const auto dom = solve_volume_function(build_modified_profile(base, 0.4));
  const std::uint64_t seed = 20240601;
  const int fields = 100;
  std::vector<cli::SuiteInstance> res(fields);
  parallel_for(fields, [&](std::size_t k) {
    res[k] = cli::run_suite_instance("smooth", cli::splitmix64(seed + k), 128, 4, dom);
  });
  std::map<std::string, int> by_check;
  for (const auto& r : res)
    for (const auto& f : r.failed) ++by_check[f];
  for (const char* name : {"equimeasurability", "contraction", "truncation", "polya_szego"})
    c.expect(by_check[name] == 0, std::string(name) + " violations " + std::to_string(by_check[name]));
  return c.done();
}

Outcome solver_integrity() {
  Checks c;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Weight w = linear_weight(1.0, 1.0, -1.0, 1.0);
  double worst_fd = 0.0;
  for (const auto& p : {Potential::quartic(), Potential::skewed(), Potential::subquadratic(0.5)}) {
    const double eps = 0.05;
    const DiscreteEnergy E(build_grid(-1.0, 1.0, 0.0, eps), w, p, eps);
    for (int k = 0; k < 10; ++k) {
      const double a0 = u(rng), a1 = u(rng), a2 = u(rng);
      std::vector<double> v;
      for (double t : E.nodes()) {
        const double s = std::clamp(0.6 * std::sin(3 * a0 * t + a1) + 0.3 * std::cos(7 * a2 * t), -0.95, 0.95);
        v.push_back(0.5 * (p.a() + p.b()) + 0.5 * (p.b() - p.a()) * s);
      }
      const auto g = E.gradient(v);
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < v.size(); i += std::max<std::size_t>(1, v.size() / 40)) {
        auto vp = v, vm = v;
        vp[i] += 1e-6;
        vm[i] -= 1e-6;
        err = std::max(err, std::abs((E.energy(vp) - E.energy(vm)) / 2e-6 - g[i]));
        scale = std::max(scale, std::abs(g[i]));
      }
      worst_fd = std::max(worst_fd, err / scale);
    }
  }
  c.expect(worst_fd < 1e-6, "worst finite-difference gradient error " + num(worst_fd));

  double worst_el = 0.0, worst_bound = 0.0;
  int converged = 0;
  for (const auto& r : minimizer_sweep().rows) {
    if (!r.ok) continue;
    ++converged;
    worst_el = std::max(worst_el, r.el_residual);
    worst_bound = std::max(worst_bound, r.bound_violation);
  }
  c.expect(converged > 0 && worst_el < 1e-8, "worst EL residual " + num(worst_el) + " over " +
                                                 std::to_string(converged) + " runs");
  c.expect(worst_bound <= MinimizeOptions{}.bound_slack, "worst bound excursion " + num(worst_bound));

  const Potential p = Potential::quartic();
  const double el = 1e-4;
  const auto exact = well_roots(p, el);
  const auto first = well_roots_first_order(p, 1.0, el);
  const double correction = std::abs(exact.a_eps - p.a());
  const double rel = std::abs(exact.a_eps - first.a_eps) / correction;
  c.expect(rel <= 0.1, "a_eps first-order error " + num(rel) + " of the correction");
  return c.done();
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {
      quartic_constants, square_half_width, curvature_formula, recovery_sweep,
      minimizer_sweep_check, subquadratic_null, skewed_potential, quarter_disk,
      rearrangement_suite, solver_integrity};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("Criterion %zu: %s (%.2f s) %s\n", i + 1, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
