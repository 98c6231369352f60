#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gamma2/gamma2.hpp"
#include "json.hpp"

namespace gamma2::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kNumericalError = 3,
  kIoError = 4,
};

// Everything a subcommand needs: the parsed config plus command-line
// overrides, which win over config keys.
struct Context {
  Config cfg;
  fs::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<std::vector<double>> eps_list;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

// A number together with how it was obtained and how far it can be trusted.
inline json quantity(double value, double tolerance, const std::string& method) {
  return json{{"value", value}, {"tolerance", tolerance}, {"method", method}};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Stamps the report and writes it atomically. The timestamp is the only
// field that differs between identical runs.
inline void write_json(const fs::path& path, json doc) {
  doc["generated_at"] = utc_timestamp();
  write_file_atomic(path, doc.dump(2) + "\n");
}

inline const std::vector<double>& csv_column(const std::map<std::string, std::vector<double>>& cols,
                                             const std::string& name, const std::string& key) {
  auto it = cols.find(name);
  if (it == cols.end())
    throw ConfigError("CSV file for '" + key + "' lacks column '" + name + "'");
  return it->second;
}

inline Potential potential_from(const Config& c) {
  const std::string name = c.require("potential.name");
  if (name == "quartic") return Potential::quartic();
  if (name == "subquadratic") return Potential::subquadratic(c.number("potential.q"));
  if (name == "skewed")
    return Potential::skewed(c.number("potential.p", 1.0), c.number("potential.a", 0.0),
                             c.number("potential.b", 1.0));
  if (name == "table") {
    const auto cols = read_csv_columns(c.file("potential.table"));
    return tabulated_potential(csv_column(cols, "s", "potential.table"),
                               csv_column(cols, "W", "potential.table"),
                               csv_column(cols, "dW", "potential.table"),
                               c.number("potential.q", 1.0));
  }
  throw ConfigError("unknown potential.name '" + name +
                    "' (expected quartic, subquadratic, skewed or table)");
}

// Potential that passed every hard hypothesis check.
inline Potential checked_potential(const Config& c) {
  Potential p = potential_from(c);
  const auto rep = validate_potential(p);
  if (!rep.passed) {
    std::string failed;
    for (const auto& chk : rep.checks)
      if (!chk.passed && !chk.warning_only) failed += (failed.empty() ? "" : ", ") + chk.name;
    throw HypothesisViolation("potential '" + p.name() + "' fails: " + failed);
  }
  return p;
}

inline Profile profile_from(const Config& c, const Potential& p) {
  return solve_profile(p, c.number("profile.horizon", 40.0), c.number("profile.tol", 1e-12));
}

inline IsoProfile iso_base_from(const Config& c) {
  const std::string base = c.get("iso.base", "square");
  if (base == "square") return square_iso_profile();
  if (base == "slab") return slab_iso_profile();
  if (base == "power")
    return power_iso_profile(c.number("iso.c"), static_cast<int>(c.integer("iso.n", 2)));
  if (base == "table") {
    const auto cols = read_csv_columns(c.file("iso.table"));
    return iso_profile_from_table(csv_column(cols, "v", "iso.table"),
                                  csv_column(cols, "I", "iso.table"),
                                  static_cast<int>(c.integer("iso.n", 2)));
  }
  throw ConfigError("unknown iso.base '" + base + "' (expected square, slab, power or table)");
}

inline ModifiedIsoProfile modified_from(const Config& c, const IsoProfile& base) {
  return build_modified_profile(base, c.number("iso.v_m", 0.4), c.number("iso.beta", 1.0),
                                c.number("iso.C0", 0.0), c.number("iso.delta_tail", 0.0));
}

struct IsoSetup {
  IsoProfile base;
  std::optional<ModifiedIsoProfile> modified;  // absent when iso.modify = false
  RearrangedDomain domain;

  double eval(double v) const { return modified ? modified->eval(v) : base.eval(v); }
  double deriv(double v) const { return modified ? modified->deriv(v) : base.deriv(v); }
};

inline IsoSetup iso_from(const Config& c) {
  IsoProfile base = iso_base_from(c);
  if (!c.flag("iso.modify", true)) {
    auto dom = solve_volume_function(base);
    return {std::move(base), std::nullopt, std::move(dom)};
  }
  auto mod = modified_from(c, base);
  auto dom = solve_volume_function(mod);
  return {std::move(base), std::move(mod), std::move(dom)};
}

struct WeightSetup {
  std::string kind;
  Weight weight;
  std::optional<CanonicalSet> set;
  std::optional<LevelSetWeight> levelset;
  std::optional<IsoSetup> iso;
};

inline WeightSetup weight_from(const Config& c) {
  WeightSetup ws;
  ws.kind = c.require("weight.kind");
  const double lo = c.number("weight.lo", -1.0), hi = c.number("weight.hi", 1.0);
  if (ws.kind == "linear") {
    ws.weight = linear_weight(c.number("weight.intercept", 1.0), c.number("weight.slope", 0.0), lo, hi);
  } else if (ws.kind == "constant") {
    ws.weight = constant_weight(c.number("weight.value", 1.0), lo, hi);
  } else if (ws.kind == "table") {
    const auto cols = read_csv_columns(c.file("weight.table"));
    ws.weight = table_weight(csv_column(cols, "t", "weight.table"),
                             csv_column(cols, "eta", "weight.table"));
  } else if (ws.kind == "levelset") {
    ws.set = CanonicalSet::parse(c.require("weight.set"), c.number("weight.param", 0.5));
    ws.levelset = levelset_weight(*ws.set);
    ws.weight = ws.levelset->weight;
  } else if (ws.kind == "rearranged") {
    ws.iso = iso_from(c);
    if (ws.iso->modified)
      ws.weight = rearranged_weight(ws.iso->domain, *ws.iso->modified);
    else
      ws.weight = rearranged_weight(ws.iso->domain, ws.iso->base);
  } else {
    throw ConfigError("unknown weight.kind '" + ws.kind +
                      "' (expected linear, constant, table, levelset or rearranged)");
  }
  return ws;
}

// Level-set runs put the interface at t = 0; otherwise the mass comes from
// solver.mass or from an interface position solver.t0.
inline double mass_from(const Config& c, const WeightSetup& ws, const Potential& p) {
  if (ws.levelset) return mass_for_interface(ws.weight, p.a(), p.b(), 0.0);
  if (c.has("solver.mass")) return c.number("solver.mass");
  if (c.has("solver.t0")) return mass_for_interface(ws.weight, p.a(), p.b(), c.number("solver.t0"));
  throw ConfigError("missing required key 'solver.mass' (or 'solver.t0') in " + c.origin());
}

inline std::vector<double> eps_from(const Context& ctx) {
  const Config& c = ctx.cfg;
  std::vector<double> e;
  if (ctx.eps_list) {
    e = *ctx.eps_list;
  } else if (c.has("sweep.eps")) {
    e = c.numbers("sweep.eps");
  } else {
    const long count = c.integer("sweep.count", 7);
    if (count < 1) throw ConfigError("sweep.count must be positive");
    e = geometric_eps(c.number("sweep.eps_hi", 1e-1), c.number("sweep.eps_lo", 1e-3),
                      static_cast<int>(count));
  }
  if (e.empty()) throw ConfigError("empty eps list");
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!(e[i] > 0.0) || !std::isfinite(e[i])) throw ConfigError("eps values must be positive");
    if (i > 0 && !(e[i] < e[i - 1])) throw ConfigError("eps values must be strictly decreasing");
  }
  return e;
}

inline GridOptions grid_options_from(const Config& c) {
  GridOptions g;
  g.fine_spacing_factor = c.number("mesh.fine_spacing_factor", g.fine_spacing_factor);
  g.fine_halfwidth = c.number("mesh.fine_halfwidth", g.fine_halfwidth);
  g.growth = c.number("mesh.growth", g.growth);
  g.max_spacing = c.number("mesh.max_spacing", g.max_spacing);
  g.endpoint_fraction = c.number("mesh.endpoint_fraction", g.endpoint_fraction);
  if (!(g.fine_spacing_factor > 0.0) || !(g.growth > 1.0) || !(g.max_spacing > 0.0))
    throw ConfigError("mesh options must be positive with mesh.growth > 1");
  return g;
}

inline MinimizeOptions minimize_options_from(const Config& c) {
  MinimizeOptions m;
  m.tol = c.number("solver.tol", m.tol);
  m.max_iter = static_cast<int>(c.integer("solver.max_iter", m.max_iter));
  m.delta_loc = c.number("solver.delta_loc", m.delta_loc);
  m.bound_slack = c.number("solver.bound_slack", m.bound_slack);
  if (!(m.tol > 0.0) || m.max_iter < 1) throw ConfigError("solver.tol and solver.max_iter must be positive");
  return m;
}

inline SweepMode sweep_mode_from(const Config& c) {
  const std::string m = c.get("sweep.mode", "recovery");
  if (m == "recovery") return SweepMode::recovery;
  if (m == "minimize") return SweepMode::minimize;
  throw ConfigError("unknown sweep.mode '" + m + "' (expected recovery or minimize)");
}

inline json potential_json(const Potential& p) {
  const WellData& wd = p.wells();
  return json{{"name", p.name()}, {"params", p.params()}, {"a", wd.a}, {"b", wd.b},
              {"c", wd.c},        {"q", wd.q},            {"ell", wd.ell}, {"symmetric", p.symmetric()}};
}

inline json prediction_json(const Prediction& pr) {
  return json{{"first_order", pr.first_order},
              {"second_order", pr.second_order},
              {"tau_term", pr.tau_term},
              {"csym_term", pr.csym_term},
              {"bulk_term", pr.bulk_term},
              {"c_w", pr.c_w},
              {"c_sym", pr.c_sym},
              {"tau", pr.tau},
              {"lambda0", pr.lambda0},
              {"kappa", pr.kappa},
              {"perimeter", pr.perimeter},
              {"n", pr.n},
              {"q", pr.q},
              {"total_eta", pr.total_eta},
              {"eta_t0", pr.eta_t0},
              {"eta_prime_t0", pr.eta_prime_t0},
              {"w2", pr.w2},
              {"span", pr.span},
              {"one_dimensional", pr.one_dimensional},
              {"degenerate", pr.degenerate}};
}

inline json weight_json(const WeightSetup& ws) {
  json j{{"kind", ws.kind},
         {"label", ws.weight.label},
         {"source", to_string(ws.weight.source)},
         {"lo", ws.weight.lo},
         {"hi", ws.weight.hi},
         {"tail", {{"n1", ws.weight.tail.n1}, {"n2", ws.weight.tail.n2}}}};
  if (ws.levelset) {
    j["set"] = ws.set->name();
    j["param"] = ws.set->param;
    j["perimeter"] = ws.levelset->perimeter;
    j["kappa"] = ws.levelset->kappa;
    j["volume"] = ws.levelset->volume;
    j["domain_measure"] = ws.levelset->domain_measure;
    j["n"] = ws.levelset->n;
  }
  return j;
}

// 64-bit mixer used to derive independent per-instance seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace gamma2::cli
