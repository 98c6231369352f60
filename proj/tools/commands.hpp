#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cli_support.hpp"

namespace gamma2::cli {

inline int cmd_constants(const Context& ctx) {
  const Config& c = ctx.cfg;
  const Potential p = potential_from(c);
  const auto val = validate_potential(p);
  const Profile prof = profile_from(c, p);
  const QuadResult cw = compute_cw(p);
  const QuadResult cs = compute_csym(prof, p);

  json geometry;
  Prediction pr;
  std::optional<Prediction> pr1;
  std::optional<WeightSetup> ws;
  if (c.has("weight.kind")) ws = weight_from(c);
  if (ws && ws->levelset) {
    const auto& lw = *ws->levelset;
    pr = second_order_prediction(p, prof, lw.n, lw.kappa, lw.perimeter, lw.domain_measure);
    geometry = weight_json(*ws);
  } else {
    const int n = static_cast<int>(c.integer("geometry.n", 2));
    const double kappa = c.number("geometry.kappa", 1.0);
    const double perimeter = c.number("geometry.perimeter", 1.0);
    const double total = c.number("geometry.total", 1.0);
    pr = second_order_prediction(p, prof, n, kappa, perimeter, total);
    geometry = {{"n", n}, {"kappa", kappa}, {"perimeter", perimeter}, {"total", total}};
  }
  if (ws && !ws->levelset) {
    const double m = mass_from(c, *ws, p);
    pr1 = second_order_prediction_1d(ws->weight, p, prof, reference_interface(ws->weight, p, m));
    geometry["weight"] = weight_json(*ws);
    geometry["mass"] = m;
  }

  const WellData& wd = p.wells();
  const bool tabulated = p.name() == "tabulated";
  const std::string wells_method = tabulated ? "zeros of the sampled table" : "closed form";
  // The prediction inherits the quadrature errors of c_W and c_sym and the
  // root tolerance of tau through its linear dependence on each.
  const double tau_tol = 1e-10;
  const double f2_tol = 2.0 * std::abs(pr.eta_prime_t0) *
                            (cs.abs_error + std::abs(pr.tau) * cw.abs_error + pr.c_w * tau_tol) +
                        2.0 * std::abs(pr.bulk_term) * cw.abs_error / std::max(pr.c_w, 1e-300);
  json doc{
      {"command", "constants"},
      {"potential", potential_json(p)},
      {"geometry", geometry},
      {"a", quantity(wd.a, tabulated ? 1e-12 : 0.0, wells_method)},
      {"b", quantity(wd.b, tabulated ? 1e-12 : 0.0, wells_method)},
      {"c", quantity(wd.c, 1e-12, "bisection on W' then secant polish")},
      {"q", quantity(wd.q, 0.0, "configuration")},
      {"ell", quantity(wd.ell, tabulated ? 1e-6 : 0.0,
                       tabulated ? "one-sided difference quotient at the wells" : "closed form")},
      {"c_W", quantity(cw.value, cw.abs_error, "adaptive Gauss-Kronrod of sqrt(W) over [a, b]")},
      {"c_sym", quantity(cs.value, cs.abs_error, "adaptive Gauss-Kronrod along the profile")},
      {"tau_u", quantity(pr.tau, tau_tol, "Brent root of the shift equation")},
      {"Lambda_u", quantity(pr.lambda0, 2.0 * cw.abs_error * std::abs(pr.lambda0) /
                                            std::max(pr.c_w, 1e-300),
                            "2 c_W (n-1) kappa / (b - a)")},
      {"lambda0", quantity(pr1 ? pr1->lambda0 : pr.lambda0,
                           2.0 * cw.abs_error * std::abs(pr1 ? pr1->lambda0 : pr.lambda0) /
                               std::max(pr.c_w, 1e-300),
                           pr1 ? "2 eta'(t0) c_W / ((b - a) eta(t0))" : "equal to Lambda_u")},
      {"F2", quantity(pr.second_order, f2_tol, "tau, c_sym and bulk terms")},
      {"prediction", prediction_json(pr)},
      {"profile",
       {{"max_ode_residual", prof.max_ode_residual()},
        {"max_first_integral_defect", prof.max_first_integral_defect()},
        {"tolerance", prof.tolerance()}}},
      {"validation", {{"passed", val.passed}, {"warnings", val.warnings}}},
  };
  for (const auto& chk : val.checks)
    doc["validation"]["checks"].push_back(
        {{"name", chk.name}, {"passed", chk.passed}, {"warning_only", chk.warning_only},
         {"detail", chk.detail}});
  if (pr1) {
    doc["prediction_1d"] = prediction_json(*pr1);
    doc["F2_1d"] = quantity(pr1->second_order, f2_tol, "one-dimensional weighted form");
  }
  write_json(ctx.out_dir / "constants.json", doc);
  *ctx.out << "c_W = " << format_double(cw.value) << "\nc_sym = " << format_double(cs.value)
           << "\ntau_u = " << format_double(pr.tau) << "\nF2 = " << format_double(pr.second_order)
           << "\n";
  if (pr1) *ctx.out << "F2 (1-D weight) = " << format_double(pr1->second_order) << "\n";
  return val.passed ? kOk : kCheckFailed;
}

inline int cmd_profile(const Context& ctx) {
  const Config& c = ctx.cfg;
  const Potential p = checked_potential(c);
  const Profile prof = profile_from(c, p);
  const auto cst = compute_constants(prof, p);
  const long samples = c.integer("profile.samples", 2001);
  if (samples < 2) throw ConfigError("profile.samples must be at least 2");
  const double lo = prof.t_a().value_or(prof.t_lo());
  const double hi = prof.t_b().value_or(prof.t_hi());
  CsvTable csv({"t", "z", "dz", "residual"});
  double max_res = 0.0;
  for (long k = 0; k < samples; ++k) {
    const double t = lo + (hi - lo) * double(k) / double(samples - 1);
    const double z = prof.z(t), dz = prof.dz(t);
    const double w = p.eval(z);
    const double res = dz - (w > 0.0 ? std::sqrt(w) : 0.0);
    max_res = std::max(max_res, std::abs(res));
    csv.row({t, z, dz, res});
  }
  csv.write(ctx.out_dir / "profile.csv");
  auto opt = [](std::optional<double> x) { return x ? json(*x) : json(nullptr); };
  json doc{{"command", "profile"},
           {"potential", potential_json(p)},
           {"t_lo", prof.t_lo()},
           {"t_hi", prof.t_hi()},
           {"t_a", opt(prof.t_a())},
           {"t_b", opt(prof.t_b())},
           {"tail_rate", prof.tail_rate()},
           {"decay_rates", {{"c1", prof.decay_rates().c1}, {"c2", prof.decay_rates().c2}}},
           {"gap_at_table_ends", {{"lo", prof.gap_at_table_ends_lo()}, {"hi", prof.gap_at_table_ends_hi()}}},
           {"max_ode_residual", quantity(prof.max_ode_residual(), prof.tolerance(),
                                         "z' - sqrt(W(z)) at the table nodes")},
           {"max_sampled_residual", quantity(max_res, prof.tolerance(), "z' - sqrt(W(z)) on the CSV samples")},
           {"max_first_integral_defect", prof.max_first_integral_defect()},
           {"c_W", quantity(cst.c_w, cst.c_w_error, "adaptive Gauss-Kronrod of sqrt(W)")},
           {"c_W_from_profile", cw_from_profile(prof, p)},
           {"c_sym", quantity(cst.c_sym, cst.c_sym_error, "adaptive Gauss-Kronrod along the profile")},
           {"samples", samples}};
  write_json(ctx.out_dir / "profile.json", doc);
  *ctx.out << "profile on [" << format_double(lo) << ", " << format_double(hi)
           << "], max residual " << format_double(max_res) << "\n";
  return kOk;
}

inline int cmd_iso(const Context& ctx) {
  const Config& c = ctx.cfg;
  const IsoSetup iso = iso_from(c);
  const RearrangedDomain& dom = iso.domain;
  const long samples = c.integer("iso.samples", 1001);
  if (samples < 2) throw ConfigError("iso.samples must be at least 2");
  CsvTable prof_csv({"v", "I", "I_star", "dI_star"});
  for (long k = 0; k < samples; ++k) {
    const double v = (k + 0.5) / double(samples);
    prof_csv.row({v, iso.base.eval(v), iso.eval(v), iso.deriv(v)});
  }
  prof_csv.write(ctx.out_dir / "iso.csv");
  CsvTable dom_csv({"t", "V", "r", "eta"});
  for (long k = 0; k < samples; ++k) {
    const double t = -dom.T() + 2.0 * dom.T() * double(k) / double(samples - 1);
    dom_csv.row({t, dom.V(t), dom.radius(t), dom.eta(t)});
  }
  dom_csv.write(ctx.out_dir / "domain.csv");
  const double t_quad =
      iso.modified ? half_width_by_quadrature(*iso.modified) : half_width_by_quadrature(iso.base);
  json doc{{"command", "iso"},
           {"base", iso.base.name()},
           {"n", dom.n()},
           {"base_kinks", iso.base.kinks()},
           {"T", quantity(dom.T(), 1e-10, "integrated volume ODE from both ends")},
           {"T_quadrature", quantity(t_quad, 1e-12, "Gauss-Kronrod of dv / I* in w = v^(1/n)")},
           {"symmetry_defect", dom.symmetry_defect()},
           {"alpha_nm1", dom.alpha_nm1()},
           {"kinks_t", dom.kinks_t()},
           {"modified", iso.modified.has_value()}};
  if (iso.modified) {
    const auto& m = *iso.modified;
    doc["v_m"] = m.v_m();
    doc["beta"] = m.beta();
    doc["C0"] = m.C0();
    doc["delta_tail"] = m.delta_tail();
    doc["blend_radius"] = m.blend_radius();
    doc["tail_constant"] = m.tail_constant();
    doc["tail_exponent"] = m.tail_exponent();
  }
  write_json(ctx.out_dir / "iso.json", doc);
  *ctx.out << "T = " << format_double(dom.T()) << " (quadrature " << format_double(t_quad) << ")\n";
  return kOk;
}

inline std::uint64_t seed_from(const Context& ctx, const std::string& key, std::uint64_t fallback) {
  if (ctx.seed) return *ctx.seed;
  const long s = ctx.cfg.integer(key, static_cast<long>(fallback));
  if (s < 0) throw ConfigError("key '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(s);
}

inline int cmd_rearrange(const Context& ctx) {
  const Config& c = ctx.cfg;
  const IsoSetup iso = iso_from(c);
  GridFunction u;
  json input;
  if (c.has("rearrange.grid")) {
    const auto path = c.file("rearrange.grid");
    std::ifstream in(path);
    u = GridFunction::from_csv_matrix(in);
    input = {{"source", "file"}, {"path", path.filename().string()}};
  } else {
    const std::uint64_t seed = seed_from(ctx, "rearrange.seed", 1);
    const int n = static_cast<int>(c.integer("rearrange.grid_size", 64));
    std::mt19937_64 rng(seed);
    u = random_smooth_field(rng, n, n, static_cast<int>(c.integer("rearrange.modes", 4)));
    input = {{"source", "random_smooth_field"}, {"seed", seed}};
  }
  input["nx"] = u.nx;
  input["ny"] = u.ny;
  const Rearranged1D f = rearrange(u, iso.domain);
  const long samples = c.integer("rearrange.samples", 1001);
  if (samples < 2) throw ConfigError("rearrange.samples must be at least 2");
  CsvTable csv({"t", "f", "eta"});
  for (long k = 0; k < samples; ++k) {
    const double t = f.lo() + (f.hi() - f.lo()) * double(k) / double(samples - 1);
    csv.row({t, f(t), f.eta(t)});
  }
  csv.write(ctx.out_dir / "rearranged.csv");

  const auto eq = check_equimeasurability(u, f);
  const double slack = 1e-9;
  const double g_lhs = u.dirichlet_energy(), g_rhs = f.dirichlet_energy();
  const double m_lhs = u.integral(), m_rhs = f.integral_of([](double s) { return s; });
  json doc{{"command", "rearrange"},
           {"input", input},
           {"T", iso.domain.T()},
           {"mass", {{"grid", m_lhs},
                     {"rearranged", m_rhs},
                     {"defect", quantity(std::abs(m_lhs - m_rhs), u.cell_measure(),
                                         "exact P1 distribution of the grid function")}}},
           {"gradient", {{"grid", g_lhs},
                         {"rearranged", g_rhs},
                         {"holds", g_rhs <= g_lhs * (1.0 + slack) + slack},
                         {"slack", slack}}},
           {"equimeasurability", {{"max_defect", quantity(eq.max_defect, eq.cell_measure,
                                                          "64 thresholds; bound is one cell")},
                                  {"passed", eq.passed}}},
           {"closure_defect", f.distribution().closure_defect()}};
  if (c.has("potential.name")) {
    const Potential p = checked_potential(c);
    const double eps = c.number("rearrange.eps", 0.1);
    const auto e = rearranged_energy_pair(u, eps, p, iso.domain);
    doc["energy"] = {{"eps", eps},        {"grid", e.lhs},    {"rearranged", e.rhs},
                     {"slack", e.slack},  {"holds", e.holds()}, {"potential", potential_json(p)}};
  }
  write_json(ctx.out_dir / "rearrange.json", doc);
  const bool ok = eq.passed && doc["gradient"]["holds"].get<bool>() &&
                  (!doc.contains("energy") || doc["energy"]["holds"].get<bool>());
  *ctx.out << "rearranged " << u.nx << "x" << u.ny << " grid: gradient " << format_double(g_lhs)
           << " -> " << format_double(g_rhs) << (ok ? "" : " (check failed)") << "\n";
  return ok ? kOk : kCheckFailed;
}

inline int cmd_minimize(const Context& ctx) {
  const Config& c = ctx.cfg;
  const Potential p = checked_potential(c);
  const Profile prof = profile_from(c, p);
  const WeightSetup ws = weight_from(c);
  const Weight& w = ws.weight;
  const double m = mass_from(c, ws, p);
  double eps;
  if (ctx.eps_list) {
    if (ctx.eps_list->size() != 1) throw ConfigError("minimize takes a single eps");
    eps = ctx.eps_list->front();
  } else {
    eps = c.number("solver.eps");
  }
  if (!(eps > 0.0)) throw ConfigError("solver.eps must be positive");
  const double t0 = reference_interface(w, p, m);
  const Prediction pr = second_order_prediction_1d(w, p, prof, t0);
  RecoverySequence rec(prof, p, w, t0, eps, m, pr.lambda0, pr.tau);
  const Grid1D grid = build_grid(w.lo, w.hi, t0, eps, grid_options_from(c));
  const DiscreteEnergy E(grid, w, p, eps);
  const Field1D init = recovery_field(rec, E, m);
  const MinimizeOptions mopt = minimize_options_from(c);
  const MinimizerResult res = minimize_localized(E, w, p, m, init, mopt);

  CsvTable csv({"t", "v", "v_recovery", "eta"});
  for (std::size_t i = 0; i < res.field.t.size(); ++i)
    csv.row({res.field.t[i], res.field.v[i], init.v[i], w(res.field.t[i])});
  csv.write(ctx.out_dir / "field.csv");

  const double energy = res.field.energy() / eps;
  const auto fo = well_roots_first_order(p, eps, res.lambda_eps);
  json doc{{"command", "minimize"},
           {"potential", potential_json(p)},
           {"weight", weight_json(ws)},
           {"eps", eps},
           {"mass", m},
           {"t0", t0},
           {"nodes", grid.size()},
           {"fine_spacing", grid.fine_spacing},
           {"converged", res.converged},
           {"iterations", res.iterations},
           {"lambda_eps", quantity(res.lambda_eps, res.el_residual / eps,
                                   "mass-weighted least squares of the gradient")},
           {"lambda_bulk", res.lambda_bulk},
           {"lambda0", pr.lambda0},
           {"el_residual", quantity(res.el_residual, mopt.tol, "max nodal KKT residual")},
           {"neumann_defect", res.neumann_defect},
           {"mass_residual", res.field.mass - m},
           {"energy", energy},
           {"recovery_energy", init.energy() / eps},
           {"excess", (energy - pr.first_order) / eps},
           {"bounds", {{"a_eps", res.roots.a_eps},
                       {"c_eps", res.roots.c_eps},
                       {"b_eps", res.roots.b_eps},
                       {"a_eps_first_order", fo.a_eps},
                       {"b_eps_first_order", fo.b_eps},
                       {"violation", quantity(res.bound_violation, mopt.bound_slack, "nodewise")},
                       {"ok", res.bounds_ok}}},
           {"locality", {{"delta_loc", res.delta_loc}, {"distance", res.locality_distance}}},
           {"transitions", res.transitions},
           {"max_gap_outside_layer", res.max_gap_outside_layer},
           {"energy_history", res.energy_history}};
  write_json(ctx.out_dir / "minimize.json", doc);
  *ctx.out << "eps = " << format_double(eps) << ": lambda_eps = " << format_double(res.lambda_eps)
           << ", EL residual " << format_double(res.el_residual) << ", " << res.iterations
           << " iterations" << (res.converged ? "" : " (not converged)") << "\n";
  return res.converged && res.bounds_ok ? kOk : kCheckFailed;
}

inline int cmd_verify(const Context& ctx) {
  const Config& c = ctx.cfg;
  const Potential p = checked_potential(c);
  const Profile prof = profile_from(c, p);
  const WeightSetup ws = weight_from(c);
  const std::vector<double> eps = eps_from(ctx);
  const SweepMode mode = sweep_mode_from(c);
  SweepOptions opt;
  opt.grid = grid_options_from(c);
  opt.minimize = minimize_options_from(c);
  opt.fit_window = static_cast<int>(c.integer("sweep.fit_window", 4));
  if (opt.fit_window < 3) throw ConfigError("sweep.fit_window must be at least 3");
  const double threshold = ctx.threshold ? *ctx.threshold : c.number("sweep.threshold", 0.02);
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be non-negative");

  ExpansionReport rep =
      ws.levelset ? verify_expansion_nd(*ws.set, p, prof, eps, opt, mode)
                  : verify_expansion_1d(ws.weight, p, prof, mass_from(c, ws, p), eps, mode, opt);

  CsvTable csv({"eps", "ok", "E2", "prediction", "first_order_energy", "tau_eps", "lambda",
                "mass_residual", "el_residual", "iterations", "recovery_E2_on_grid", "error"});
  json rows = json::array();
  for (const auto& r : rep.rows) {
    csv.row_text({format_double(r.eps), r.ok ? "1" : "0", format_double(r.excess),
                  format_double(rep.prediction.second_order), format_double(r.first_order_energy),
                  format_double(r.tau_eps), format_double(r.lambda), format_double(r.mass_residual),
                  format_double(r.el_residual), std::to_string(r.iterations),
                  format_double(r.recovery_excess_on_grid), r.error});
    json row{{"eps", r.eps}, {"ok", r.ok}};
    if (r.ok) {
      row.update({{"E2", r.excess},
                  {"first_order_energy", r.first_order_energy},
                  {"tau_eps", r.tau_eps},
                  {"lambda", r.lambda},
                  {"lambda_bulk", r.lambda_bulk},
                  {"mass_residual", r.mass_residual},
                  {"el_residual", r.el_residual},
                  {"bound_violation", r.bound_violation},
                  {"iterations", r.iterations},
                  {"transitions", r.transitions},
                  {"nodes", r.nodes},
                  {"recovery_E2_on_grid", r.recovery_excess_on_grid}});
    } else {
      row["error"] = r.error;
    }
    rows.push_back(row);
  }
  csv.write(ctx.out_dir / "report.csv");

  const bool pass = rep.within(threshold);
  json doc{{"command", "verify"},
           {"mode", to_string(rep.mode)},
           {"label", rep.label},
           {"potential", potential_json(p)},
           {"weight", weight_json(ws)},
           {"t0", rep.t0},
           {"mass", rep.mass},
           {"eps", eps},
           {"rows", rows},
           {"failed_eps", std::count_if(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return !r.ok; })},
           {"prediction", prediction_json(rep.prediction)},
           {"has_fit", rep.has_fit},
           {"extrapolated_limit",
            quantity(rep.extrapolated_limit, rep.has_fit ? std::abs(rep.raw_last - rep.extrapolated_limit) : NAN,
                     "least squares L + c eps^p over the last " + std::to_string(opt.fit_window) +
                         " points; tolerance is the distance to the last raw value")},
           {"fit", {{"limit", rep.fit.limit},
                    {"coeff", rep.fit.coeff},
                    {"exponent", rep.fit.exponent},
                    {"rss", rep.fit.rss},
                    {"points", rep.fit.points}}},
           {"raw_last", rep.raw_last},
           {"gap", rep.has_fit ? json(rep.gap) : json(nullptr)},
           {"gap_kind", rep.gap_absolute ? "absolute" : "relative"},
           {"threshold", threshold},
           {"minimizer_below_recovery", rep.minimizer_below_recovery},
           {"pass", pass}};
  if (rep.prediction_1d) doc["prediction_1d"] = prediction_json(*rep.prediction_1d);
  write_json(ctx.out_dir / "report.json", doc);

  for (const auto& r : rep.rows)
    if (!r.ok) *ctx.err << "eps = " << format_double(r.eps) << ": " << r.error << "\n";
  *ctx.out << rep.label << " (" << to_string(rep.mode) << "): prediction "
           << format_double(rep.prediction.second_order) << ", extrapolated "
           << format_double(rep.extrapolated_limit) << ", " << (rep.gap_absolute ? "absolute" : "relative")
           << " gap " << format_double(rep.gap) << " -> " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kOk : kCheckFailed;
}

// One property-suite instance: a grid field and a partner for the
// contraction check, generated from a single replayable seed.
struct SuiteInstance {
  std::string family;
  std::uint64_t seed = 0;
  double equimeasurability_defect = 0.0, cell_measure = 0.0;
  double contraction_lhs = 0.0, contraction_rhs = 0.0, contraction_slack = 0.0;
  double truncation_defect = 0.0, truncation_slack = 0.0;
  double gradient_grid = 0.0, gradient_rearranged = 0.0, ps_slack = 0.0;
  std::vector<std::string> failed;
};

inline GridFunction suite_field(const std::string& family, std::mt19937_64& rng, int n, int modes) {
  GridFunction u = random_smooth_field(rng, n, n, modes);
  if (family == "plateau") {
    // Clamping produces flat regions, which become atoms of the distribution.
    const double lo = u.min(), hi = u.max();
    for (double& x : u.values) x = std::clamp(x, lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo));
  } else if (family == "front") {
    // Steep fronts concentrate the gradient on a few cells.
    for (double& x : u.values) x = std::tanh(8.0 * x);
  }
  return u;
}

inline SuiteInstance run_suite_instance(const std::string& family, std::uint64_t seed, int n,
                                        int modes, const RearrangedDomain& dom) {
  SuiteInstance r;
  r.family = family;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  const GridFunction u = suite_field(family, rng, n, modes);
  const GridFunction u2 = suite_field(family, rng, n, modes);
  const Rearranged1D f = rearrange(u, dom);

  const auto eq = check_equimeasurability(u, f);
  r.equimeasurability_defect = eq.max_defect;
  r.cell_measure = eq.cell_measure;
  if (!eq.passed) r.failed.push_back("equimeasurability");

  const auto con = check_contraction(u, u2, dom);
  r.contraction_lhs = con.lhs;
  r.contraction_rhs = con.rhs;
  r.contraction_slack = con.slack;
  if (!con.holds()) r.failed.push_back("contraction");

  const double lo = u.min(), hi = u.max();
  const auto tr = check_truncation(u, lo + 0.3 * (hi - lo), lo + 0.7 * (hi - lo), dom);
  r.truncation_defect = tr.max_defect;
  r.truncation_slack = tr.slack;
  if (!tr.passed) r.failed.push_back("truncation");

  r.gradient_grid = u.dirichlet_energy();
  r.gradient_rearranged = f.dirichlet_energy();
  r.ps_slack = 1e-9 * std::max(1.0, r.gradient_grid);
  if (!(r.gradient_rearranged <= r.gradient_grid + r.ps_slack)) r.failed.push_back("polya_szego");
  return r;
}

inline int cmd_suite(const Context& ctx) {
  const Config& c = ctx.cfg;
  const std::uint64_t seed = seed_from(ctx, "suite.seed", 20240601);
  const int fields = static_cast<int>(c.integer("suite.fields", 100));
  const int adversarial = static_cast<int>(c.integer("suite.adversarial", 8));
  const int n = static_cast<int>(c.integer("suite.grid", 128));
  const int modes = static_cast<int>(c.integer("suite.modes", 4));
  if (fields < 0 || adversarial < 0 || n < 2 || modes < 1)
    throw ConfigError("suite.fields, suite.adversarial, suite.grid and suite.modes out of range");
  const IsoSetup iso = iso_from(c);

  // Instance k draws from splitmix64(seed + k); a listed suite.replay seed
  // reruns exactly that instance.
  std::vector<std::pair<std::string, std::uint64_t>> plan;
  if (c.has("suite.replay")) {
    const std::string family = c.get("suite.replay_family", "smooth");
    for (const auto& s : detail::split(c.require("suite.replay"), ',')) {
      try {
        plan.emplace_back(family, std::stoull(s));
      } catch (const std::exception&) {
        throw ConfigError("suite.replay expects unsigned integer seeds, got '" + s + "'");
      }
    }
  } else {
    for (int k = 0; k < fields; ++k) plan.emplace_back("smooth", splitmix64(seed + k));
    for (int k = 0; k < adversarial; ++k)
      plan.emplace_back(k % 2 ? "front" : "plateau", splitmix64(seed + fields + k));
  }

  std::vector<SuiteInstance> results(plan.size());
  parallel_for(plan.size(), [&](std::size_t k) {
    results[k] = run_suite_instance(plan[k].first, plan[k].second, n, modes, iso.domain);
  });

  CsvTable csv({"instance", "family", "seed", "equimeasurability_defect", "cell_measure",
                "contraction_lhs", "contraction_rhs", "contraction_slack", "truncation_defect",
                "truncation_slack", "gradient_grid", "gradient_rearranged", "ps_slack", "violations"});
  json replays = json::array();
  int violations = 0;
  std::map<std::string, int> by_check;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    csv.row_text({std::to_string(k), r.family, std::to_string(r.seed),
                  format_double(r.equimeasurability_defect), format_double(r.cell_measure),
                  format_double(r.contraction_lhs), format_double(r.contraction_rhs),
                  format_double(r.contraction_slack), format_double(r.truncation_defect),
                  format_double(r.truncation_slack), format_double(r.gradient_grid),
                  format_double(r.gradient_rearranged), format_double(r.ps_slack),
                  std::to_string(r.failed.size())});
    violations += static_cast<int>(r.failed.size());
    for (const auto& f : r.failed) ++by_check[f];
    if (!r.failed.empty() || r.family != "smooth")
      replays.push_back({{"instance", k},
                         {"family", r.family},
                         {"seed", r.seed},
                         {"failed", r.failed},
                         {"replay", "suite.replay = " + std::to_string(r.seed) +
                                        ", suite.replay_family = " + r.family}});
  }

  // Constant pairs: both sides of the contraction are exactly |c1 - c2|.
  json constant_rows = json::array();
  const std::vector<std::pair<double, double>> pairs = {{0.0, 0.0}, {0.3, -0.2}, {1.0, 1.0}, {-0.75, 0.5}};
  for (const auto& [c1, c2] : pairs) {
    const auto u1 = GridFunction::sample(8, 8, [c1](double, double) { return c1; });
    const auto u2 = GridFunction::sample(8, 8, [c2](double, double) { return c2; });
    const auto con = check_contraction(u1, u2, iso.domain);
    const double expect = std::abs(c1 - c2);
    const bool exact = std::abs(con.lhs - expect) <= 1e-14 && std::abs(con.rhs - expect) <= 1e-14;
    if (!exact) ++violations, ++by_check["constant_pairs"];
    constant_rows.push_back({{"c1", c1}, {"c2", c2}, {"lhs", con.lhs}, {"rhs", con.rhs}, {"exact", exact}});
  }

  // Profile invariants for the configured potential, or the built-in family.
  std::vector<Potential> pots;
  if (c.has("potential.name"))
    pots.push_back(checked_potential(c));
  else
    pots = {Potential::quartic(), Potential::subquadratic(0.5), Potential::skewed()};
  json profile_rows = json::array();
  for (const auto& p : pots) {
    const Profile prof = solve_profile(p);
    const WellData& wd = p.wells();
    const double lo = prof.t_a().value_or(prof.t_lo()), hi = prof.t_b().value_or(prof.t_hi());
    bool monotone = true;
    double prev = -INFINITY;
    for (int k = 0; k <= 2000; ++k) {
      const double z = prof.z(lo + (hi - lo) * k / 2000.0);
      if (z < prev) monotone = false;
      prev = z;
    }
    const double cw = compute_cw(p).value;
    const double cw_defect = std::abs(cw_from_profile(prof, p) - cw) / cw;
    const double center = std::abs(prof.z(0.0) - wd.c);
    const double ends = std::max(prof.z(lo) - wd.a, wd.b - prof.z(hi)) / (wd.b - wd.a);
    std::vector<std::string> failed;
    if (!monotone) failed.push_back("monotone");
    if (!(prof.max_ode_residual() <= 1e-8)) failed.push_back("ode_residual");
    if (!(cw_defect <= 1e-8)) failed.push_back("c_w_consistency");
    if (!(center <= 1e-12)) failed.push_back("center");
    if (!(ends <= 1e-6)) failed.push_back("well_limits");
    violations += static_cast<int>(failed.size());
    for (const auto& f : failed) ++by_check["profile_" + f];
    profile_rows.push_back({{"potential", p.name()},
                            {"monotone", monotone},
                            {"max_ode_residual", quantity(prof.max_ode_residual(), 1e-8, "bound")},
                            {"c_w_relative_defect", quantity(cw_defect, 1e-8, "bound")},
                            {"center_defect", quantity(center, 1e-12, "bound")},
                            {"well_gap", quantity(ends, 1e-6, "bound, relative to b - a")},
                            {"failed", failed}});
  }
  csv.write(ctx.out_dir / "suite.csv");

  json doc{{"command", "suite"},
           {"seed", seed},
           {"grid", n},
           {"modes", modes},
           {"instances", results.size()},
           {"violations", violations},
           {"violations_by_check", by_check},
           {"tolerances",
            {{"equimeasurability", "one cell measure"},
             {"contraction", "(max |grad u| + 1) * cell diameter"},
             {"truncation", "(max |grad u| + 1) * cell diameter"},
             {"polya_szego", "1e-9 * max(1, grid Dirichlet energy)"},
             {"constant_pairs", 1e-14}}},
           {"replays", replays},
           {"constant_pairs", constant_rows},
           {"profiles", profile_rows},
           {"pass", violations == 0}};
  write_json(ctx.out_dir / "suite.json", doc);
  *ctx.out << results.size() << " instances, " << violations << " violations -> "
           << (violations == 0 ? "PASS" : "FAIL") << "\n";
  return violations == 0 ? kOk : kCheckFailed;
}

}  // namespace gamma2::cli
