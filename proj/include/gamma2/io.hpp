#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "gamma2/error.hpp"

namespace gamma2 {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::optional<double> parse_double(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Flat key=value settings. Keys carry a section prefix either inline
// ("solver.tol = 1e-10") or from a preceding "[solver]" header. '#' starts a
// comment. Relative file paths resolve against the config file's directory.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, std::string origin = "<config>",
                      std::filesystem::path base_dir = ".") {
    Config c;
    c.origin_ = std::move(origin);
    c.base_dir_ = std::move(base_dir);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string t = detail::trim(line);
      if (t.empty()) continue;
      const std::string where = c.origin_ + ":" + std::to_string(lineno);
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError(where + ": unterminated section header");
        section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      std::string key = detail::trim(std::string_view(t).substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      if (!section.empty()) key = section + "." + key;
      if (c.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
      c.values_[key] = detail::trim(std::string_view(t).substr(eq + 1));
    }
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse(in, path.string(), path.parent_path().empty() ? "." : path.parent_path());
  }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> find(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  std::string require(const std::string& key) const {
    auto v = find(key);
    if (!v) throw ConfigError("missing required key '" + key + "' in " + origin_);
    return *v;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
  }

  double number(const std::string& key) const { return to_number(key, require(key)); }
  double number(const std::string& key, double fallback) const {
    auto v = find(key);
    return v ? to_number(key, *v) : fallback;
  }

  long integer(const std::string& key, long fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    const double x = to_number(key, *v);
    if (x != std::floor(x)) throw ConfigError("key '" + key + "' must be an integer");
    return static_cast<long>(x);
  }

  bool flag(const std::string& key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("key '" + key + "' must be a boolean, got '" + *v + "'");
  }

  std::vector<double> numbers(const std::string& key) const {
    return parse_number_list(key, require(key));
  }

  // Existing file referenced by a key, resolved against the config location.
  std::filesystem::path file(const std::string& key) const {
    std::filesystem::path p = require(key);
    if (p.is_relative()) p = base_dir_ / p;
    if (!std::filesystem::is_regular_file(p))
      throw ConfigError("file for key '" + key + "' not found: " + p.string());
    return p;
  }

  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& origin() const { return origin_; }

  static std::vector<double> parse_number_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : detail::split(text, ',')) out.push_back(to_number(key, item));
    return out;
  }

 private:
  static double to_number(const std::string& key, const std::string& text) {
    auto v = detail::parse_double(text);
    if (!v) throw ConfigError("key '" + key + "' expects a number, got '" + text + "'");
    return *v;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string origin_ = "<config>";
  std::filesystem::path base_dir_ = ".";
};

// Writes the whole file to a sibling temporary and renames it into place, so
// readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  static std::atomic<unsigned> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("IoError", "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("IoError", "cannot move " + tmp.string() + " to " + path.string() + ": " +
                               ec.message());
  }
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Column-oriented CSV buffer. Numbers use 17 significant digits so values
// round-trip exactly.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  CsvTable& row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) throw InvalidArgument("CSV row width mismatch");
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    rows_.push_back(std::move(cells));
    return *this;
  }

  CsvTable& row_text(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw InvalidArgument("CSV row width mismatch");
    for (auto& c : cells) {
      if (c.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char ch : c) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        c = q + "\"";
      }
    }
    rows_.push_back(std::move(cells));
    return *this;
  }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    emit(columns_);
    for (const auto& r : rows_) emit(r);
    return out;
  }

  void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Numeric CSV with a header row; returns the columns by name.
inline std::map<std::string, std::vector<double>> read_csv_columns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file '" + path.string() + "'");
  std::string line;
  std::vector<std::string> names;
  while (names.empty() && std::getline(in, line)) {
    if (detail::trim(line).empty() || detail::trim(line)[0] == '#') continue;
    names = detail::split(line, ',');
  }
  if (names.empty()) throw ConfigError("CSV file '" + path.string() + "' has no header");
  std::map<std::string, std::vector<double>> cols;
  for (const auto& n : names) cols[n];
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = detail::split(t, ',');
    if (cells.size() != names.size())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(names.size()) + " fields");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      auto v = detail::parse_double(cells[i]);
      if (!v)
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                          cells[i] + "'");
      cols[names[i]].push_back(*v);
    }
  }
  return cols;
}

}  // namespace gamma2
