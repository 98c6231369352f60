#pragma once

#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace gamma2::cli {

using Command = std::function<int(const Context&)>;

inline const std::vector<std::pair<std::string, std::string>>& command_list() {
  static const std::vector<std::pair<std::string, std::string>> list = {
      {"constants", "well data, c_W, c_sym, tau and the second-order prediction"},
      {"profile", "tabulate the heteroclinic profile"},
      {"iso", "modified isoperimetric profile and rearranged domain"},
      {"rearrange", "monotone rearrangement of a grid function"},
      {"minimize", "localized 1-D minimizer at a single eps"},
      {"verify", "eps sweep and extrapolation of the second-order excess"},
      {"suite", "seeded rearrangement and profile property suite"},
  };
  return list;
}

// Every key some subcommand reads. Scenario files are shared between
// subcommands, so only keys outside this set are reported.
inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "geometry.kappa", "geometry.n", "geometry.perimeter", "geometry.total", "iso.C0", "iso.base",
      "iso.beta", "iso.c", "iso.delta_tail", "iso.modify", "iso.n", "iso.samples", "iso.table",
      "iso.v_m", "mesh.endpoint_fraction", "mesh.fine_halfwidth", "mesh.fine_spacing_factor",
      "mesh.growth", "mesh.max_spacing", "output.dir", "potential.a", "potential.b",
      "potential.name", "potential.p", "potential.q", "potential.table", "profile.horizon",
      "profile.samples", "profile.tol", "rearrange.eps", "rearrange.grid", "rearrange.grid_size",
      "rearrange.modes", "rearrange.samples", "rearrange.seed", "solver.bound_slack",
      "solver.delta_loc", "solver.eps", "solver.mass", "solver.max_iter", "solver.t0", "solver.tol",
      "suite.adversarial", "suite.fields", "suite.grid", "suite.modes", "suite.replay",
      "suite.replay_family", "suite.seed", "sweep.count", "sweep.eps", "sweep.eps_hi",
      "sweep.eps_lo", "sweep.fit_window", "sweep.mode", "sweep.threshold", "weight.hi",
      "weight.intercept", "weight.kind", "weight.lo", "weight.param", "weight.set", "weight.slope",
      "weight.table", "weight.value",
  };
  return keys;
}

inline Command command_for(const std::string& name) {
  static const std::map<std::string, Command> table = {
      {"constants", cmd_constants}, {"profile", cmd_profile}, {"iso", cmd_iso},
      {"rearrange", cmd_rearrange}, {"minimize", cmd_minimize}, {"verify", cmd_verify},
      {"suite", cmd_suite},
  };
  return table.at(name);
}

// Parses arguments, runs one subcommand and maps failures to exit codes:
// 1 failed check, 2 configuration error, 3 numerical or hypothesis error,
// 4 I/O or unexpected error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Second-order expansion toolkit for the mass-constrained Cahn-Hilliard energy",
               "gamma2"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".", eps_text;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed for property suites and random fields");
  app.add_option("--threshold", threshold, "gap threshold for verify");
  app.add_option("--eps-list", eps_text, "comma-separated decreasing eps values");
  app.add_option("--set", overrides, "extra key=value setting, overriding the config file");
  for (const auto& [name, desc] : command_list()) app.add_subcommand(name, desc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) ctx.cfg = Config::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      ctx.cfg.set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    ctx.out_dir = ctx.cfg.has("output.dir") && out_dir == "." ? fs::path(ctx.cfg.get("output.dir", "."))
                                                              : fs::path(out_dir);
    ctx.seed = seed;
    ctx.threshold = threshold;
    if (!eps_text.empty()) ctx.eps_list = Config::parse_number_list("--eps-list", eps_text);
    const int code = command_for(name)(ctx);
    for (const auto& key : ctx.cfg.unused_keys())
      if (!known_keys().count(key)) err << "warning: unknown config key '" << key << "'\n";
    return code;
  } catch (const ConfigError& e) {
    err << "gamma2 " << name << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "gamma2 " << name << ": " << e.what() << "\n";
    return e.kind() == "IoError" ? kIoError : kNumericalError;
  } catch (const std::exception& e) {
    err << "gamma2 " << name << ": unexpected error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace gamma2::cli
