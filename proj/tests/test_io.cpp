#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gamma2/io.hpp"

namespace gamma2 {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("gamma2_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

TEST(Config, SectionsInlinePrefixesAndComments) {
  std::istringstream in(
      "# scenario\n"
      "potential.name = quartic   # inline comment\n"
      "[solver]\n"
      "mass = 1\n"
      "tol=1e-10\n"
      "[sweep]\n"
      "eps = 0.1, 0.05,0.01\n");
  const Config c = Config::parse(in);
  EXPECT_EQ(c.require("potential.name"), "quartic");
  EXPECT_EQ(c.number("solver.mass"), 1.0);
  EXPECT_EQ(c.number("solver.tol"), 1e-10);
  EXPECT_EQ(c.numbers("sweep.eps"), (std::vector<double>{0.1, 0.05, 0.01}));
  EXPECT_EQ(c.number("solver.max_iter", 200), 200);
}

TEST(Config, MissingKeyIsNamed) {
  const Config c;
  try {
    c.require("potential.name");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("potential.name"), std::string::npos);
  }
}

TEST(Config, MalformedInputIsRejected) {
  std::istringstream dup("a.b = 1\na.b = 2\n");
  EXPECT_THROW(Config::parse(dup), ConfigError);
  std::istringstream noeq("a.b 1\n");
  EXPECT_THROW(Config::parse(noeq), ConfigError);
  std::istringstream bad("a.b = one\n");
  const Config c = Config::parse(bad);
  EXPECT_THROW(c.number("a.b"), ConfigError);
  std::istringstream frac("a.n = 2.5\n");
  EXPECT_THROW(Config::parse(frac).integer("a.n", 0), ConfigError);
}

TEST(Config, FlagsAndUnusedKeys) {
  std::istringstream in("iso.modify = no\nextra.key = 3\n");
  const Config c = Config::parse(in);
  EXPECT_FALSE(c.flag("iso.modify", true));
  EXPECT_EQ(c.unused_keys(), std::vector<std::string>{"extra.key"});
}

TEST(Config, RelativeFilesResolveAgainstTheConfig) {
  const fs::path d = scratch_dir("files");
  std::ofstream(d / "w.csv") << "t,eta\n0,1\n";
  std::ofstream(d / "run.cfg") << "weight.table = w.csv\nweight.other = nope.csv\n";
  const Config c = Config::load(d / "run.cfg");
  EXPECT_EQ(c.file("weight.table"), d / "w.csv");
  EXPECT_THROW(c.file("weight.other"), ConfigError);
  EXPECT_THROW(Config::load(d / "absent.cfg"), ConfigError);
}

TEST(Csv, SeventeenSignificantDigitsRoundTrip) {
  CsvTable t({"x", "y"});
  t.row({0.1, 1.0 / 3.0});
  t.row_text({"a,b", "say \"hi\""});
  const std::string s = t.str();
  EXPECT_NE(s.find("0.10000000000000001,0.33333333333333331"), std::string::npos);
  EXPECT_NE(s.find("\"a,b\",\"say \"\"hi\"\"\""), std::string::npos);
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_THROW(t.row({1.0}), InvalidArgument);
}

TEST(Csv, ReadColumnsByName) {
  const fs::path d = scratch_dir("read");
  std::ofstream(d / "p.csv") << "# comment\ns,W\n0,1\n1, 0.5\n";
  const auto cols = read_csv_columns(d / "p.csv");
  EXPECT_EQ(cols.at("W"), (std::vector<double>{1.0, 0.5}));
  std::ofstream(d / "bad.csv") << "s,W\n0\n";
  EXPECT_THROW(read_csv_columns(d / "bad.csv"), ConfigError);
}

TEST(AtomicWrite, ReplacesWholeFileWithoutLeftovers) {
  const fs::path d = scratch_dir("atomic");
  const fs::path f = d / "sub" / "out.txt";
  write_file_atomic(f, "first");
  write_file_atomic(f, "second");
  std::ifstream in(f);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(content, "second");
  int files = 0;
  for (const auto& e : fs::directory_iterator(d / "sub")) files += e.is_regular_file();
  EXPECT_EQ(files, 1);
}

}  // namespace
}  // namespace gamma2
