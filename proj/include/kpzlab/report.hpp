// Run reports: named pass/fail checks, long-format CSV tables with
// deterministic float formatting, and a JSON summary carrying the config and
// seed so a run can be reproduced from its outputs alone.
#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpzlab/errors.hpp"

namespace kpzlab {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& begin_row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& add(const std::string& v) {
    rows_.back().push_back(v);
    return *this;
  }
  CsvTable& add(double v) { return add(format_double(v)); }
  CsvTable& add(long v) { return add(std::to_string(v)); }
  CsvTable& add(int v) { return add(std::to_string(v)); }
  CsvTable& add(unsigned long v) { return add(std::to_string(v)); }
  CsvTable& add(unsigned long long v) { return add(std::to_string(v)); }

  std::string body() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (i) out += ',';
      out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += row[i];
      }
      out += '\n';
    }
    return out;
  }

  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;
};

struct RunReport {
  std::string kind;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string config_text;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> tables;  // filename -> csv body
  double wall_seconds = 0.0;

  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return !checks.empty();
  }

  void check(const std::string& name, bool pass, const std::string& details = "") {
    checks.push_back({name, pass, details});
  }

  void table(const std::string& filename, const CsvTable& t) {
    tables.emplace_back(filename, t.body());
  }
};

// Writes tables and a JSON summary under out_dir; returns the summary text.
inline std::string report_render(const RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  for (const auto& [name, body] : report.tables) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) throw IoError("cannot write table " + name);
    out << body;
  }

  nlohmann::json j;
  j["kind"] = report.kind;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["config"] = report.config_text;
  j["wall_seconds"] = report.wall_seconds;
  j["all_pass"] = report.all_pass();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
  }
  j["tables"] = nlohmann::json::array();
  for (const auto& [name, body] : report.tables) {
    (void)body;
    j["tables"].push_back(name);
  }
  const std::string summary = j.dump(2) + "\n";
  std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
  if (!out) throw IoError("cannot write summary.json");
  out << summary;
  return summary;
}

inline std::string render_text(const RunReport& report) {
  std::string out = "suite " + report.kind + "  (config " + std::to_string(report.config_hash) +
                    ", seed " + std::to_string(report.seed) + ")\n";
  for (const auto& c : report.checks) {
    out += std::string(c.pass ? "  [pass] " : "  [FAIL] ") + c.name;
    if (!c.details.empty()) out += "  " + c.details;
    out += '\n';
  }
  if (report.checks.empty()) out += "  (no checks executed)\n";
  return out;
}

}  // namespace kpzlab
