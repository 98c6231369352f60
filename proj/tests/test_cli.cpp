#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace gamma2 {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kSource = GAMMA2_SOURCE_DIR;

struct Result {
  int code = 0;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gamma2_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d =
      fs::temp_directory_path() / ("gamma2_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Cells of one data row (0-based) of a CSV without quoted cells.
std::vector<std::string> csv_row(const fs::path& p, std::size_t row) {
  std::ifstream in(p);
  std::string line;
  for (std::size_t i = 0; i <= row + 1; ++i) std::getline(in, line);
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  return cells;
}

std::string config(const std::string& name) { return (kSource / "configs" / name).string(); }

TEST(Cli, MissingPotentialExitsTwoAndNamesTheKey) {
  const fs::path d = scratch_dir("missing");
  std::ofstream(d / "empty.cfg") << "# nothing\n";
  const auto r = run_cli({"constants", "--config", (d / "empty.cfg").string(), "--out", d.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("potential.name"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({"nonsense"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  const fs::path d = scratch_dir("usage");
  const auto r = run_cli({"verify", "--config", config("skew-weight-quartic.cfg"), "--out",
                          d.string(), "--eps-list", "0.1,0.2"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ConstantsForTheQuarticWell) {
  const fs::path d = scratch_dir("constants");
  const auto r = run_cli({"constants", "--set", "potential.name=quartic", "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = read_json(d / "constants.json");
  EXPECT_NEAR(doc["c_W"]["value"].get<double>(), 2.0 * std::sqrt(2.0) / 3.0, 1e-12);
  EXPECT_EQ(doc["c_sym"]["value"].get<double>(), 0.0);
  EXPECT_NEAR(doc["F2"]["value"].get<double>(), -1.0 / 9.0, 1e-10);
  EXPECT_TRUE(doc.contains("generated_at"));
  for (const char* k : {"value", "tolerance", "method"}) EXPECT_TRUE(doc["F2"].contains(k));
}

TEST(Cli, SubquadraticConstantsVanish) {
  const fs::path d = scratch_dir("subq");
  const auto r = run_cli({"constants", "--set", "potential.name=subquadratic", "--set",
                          "potential.q=0.5", "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(d / "constants.json")["F2"]["value"].get<double>(), 0.0);
}

TEST(Cli, VerifyRecoverySweepPasses) {
  const fs::path d = scratch_dir("verify");
  const auto r = run_cli({"verify", "--config", config("skew-weight-quartic.cfg"), "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const json doc = read_json(d / "report.json");
  EXPECT_LT(doc["gap"].get<double>(), 0.02);
  EXPECT_NEAR(doc["prediction"]["second_order"].get<double>(), -2.0 / 9.0, 1e-9);
  EXPECT_EQ(doc["rows"].size(), 7u);
}

TEST(Cli, ThresholdFlagCanFailTheCheck) {
  const fs::path d = scratch_dir("threshold");
  const auto r = run_cli({"verify", "--config", config("skew-weight-quartic.cfg"), "--out",
                          d.string(), "--threshold", "1e-12"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(read_json(d / "report.json")["pass"].get<bool>());
}

TEST(Cli, SubquadraticNullScenarioPasses) {
  const fs::path d = scratch_dir("null");
  const auto r = run_cli({"verify", "--config", config("subquadratic-null.cfg"), "--out", d.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(read_json(d / "report.json")["gap_kind"], "absolute");
}

TEST(Cli, CoarseGridReportsEveryUnresolvedEpsilon) {
  const fs::path d = scratch_dir("coarse");
  const auto r = run_cli({"verify", "--config", config("coarse-grid.cfg"), "--out", d.string()});
  EXPECT_EQ(r.code, 1);
  const json doc = read_json(d / "report.json");
  ASSERT_FALSE(doc["rows"].empty());
  for (const auto& row : doc["rows"]) {
    EXPECT_FALSE(row["ok"].get<bool>());
    EXPECT_NE(row["error"].get<std::string>().find("UnresolvedEpsilon"), std::string::npos);
  }
  EXPECT_NE(r.err.find("UnresolvedEpsilon"), std::string::npos);
}

TEST(Cli, MinimizeWritesAConvergedField) {
  const fs::path d = scratch_dir("minimize");
  const auto r = run_cli({"minimize", "--config", config("skew-weight-quartic-minimize.cfg"),
                          "--out", d.string(), "--eps-list", "0.02"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(d / "field.csv"), "t,v,v_recovery,eta");
}

json without_timestamp(json j) {
  j.erase("generated_at");
  return j;
}

TEST(Cli, SuiteIsDeterministicAcrossThreadCountsAndReplays) {
  const fs::path d1 = scratch_dir("suite1"), d2 = scratch_dir("suite2"), d3 = scratch_dir("suite3");
  const std::vector<std::string> common = {"--config", config("suite.cfg"), "--set", "suite.fields=6",
                                           "--set", "suite.grid=32", "--seed", "77"};
  auto with_out = [&](const fs::path& d) {
    auto a = common;
    a.insert(a.begin(), "suite");
    a.push_back("--out");
    a.push_back(d.string());
    return a;
  };
  ::setenv("GAMMA2_THREADS", "1", 1);
  ASSERT_EQ(run_cli(with_out(d1)).code, 0);
  ::setenv("GAMMA2_THREADS", "3", 1);
  ASSERT_EQ(run_cli(with_out(d2)).code, 0);
  ::unsetenv("GAMMA2_THREADS");
  const json j1 = read_json(d1 / "suite.json");
  EXPECT_EQ(without_timestamp(j1), without_timestamp(read_json(d2 / "suite.json")));
  EXPECT_EQ(slurp(d1 / "suite.csv"), slurp(d2 / "suite.csv"));

  // Replaying one adversarial instance reproduces its row.
  const json rep = j1["replays"].at(0);
  const std::string seed = std::to_string(rep["seed"].get<std::uint64_t>());
  const auto r = run_cli({"suite", "--config", config("suite.cfg"), "--set", "suite.grid=32", "--set",
                          "suite.replay=" + seed, "--set",
                          "suite.replay_family=" + rep["family"].get<std::string>(), "--out",
                          d3.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto all = csv_row(d1 / "suite.csv", rep["instance"].get<std::size_t>());
  auto one = csv_row(d3 / "suite.csv", 0);
  ASSERT_EQ(all.size(), one.size());
  all.erase(all.begin());  // instance index differs
  one.erase(one.begin());
  EXPECT_EQ(one, all);
}

TEST(Cli, CsvHeadersMatchTheBundledSchema) {
  const json schema = read_json(kSource / "schema" / "csv_columns.json");
  const fs::path d = scratch_dir("schema");
  ASSERT_EQ(run_cli({"profile", "--set", "potential.name=quartic", "--out", d.string()}).code, 0);
  ASSERT_EQ(run_cli({"iso", "--set", "iso.base=square", "--out", d.string()}).code, 0);
  ASSERT_EQ(run_cli({"rearrange", "--set", "iso.base=square", "--set", "rearrange.grid_size=16",
                     "--seed", "5", "--out", d.string()})
                .code,
            0);
  ASSERT_EQ(run_cli({"verify", "--config", config("skew-weight-quartic.cfg"), "--eps-list",
                     "0.1,0.05,0.025,0.0125", "--out", d.string()})
                .code,
            0);
  ASSERT_EQ(run_cli({"minimize", "--config", config("skew-weight-quartic-minimize.cfg"),
                     "--eps-list", "0.05", "--out", d.string()})
                .code,
            0);
  ASSERT_EQ(run_cli({"suite", "--set", "suite.fields=2", "--set", "suite.adversarial=0", "--set",
                     "suite.grid=16", "--out", d.string()})
                .code,
            0);
  int checked = 0;
  for (const auto& [file, entry] : schema["files"].items()) {
    ASSERT_TRUE(fs::exists(d / file)) << file;
    std::string expected;
    for (const auto& col : entry["columns"]) {
      if (!expected.empty()) expected += ",";
      expected += col["name"].get<std::string>();
    }
    EXPECT_EQ(first_line(d / file), expected) << file;
    ++checked;
  }
  EXPECT_EQ(checked, 7);
}

}  // namespace
}  // namespace gamma2
