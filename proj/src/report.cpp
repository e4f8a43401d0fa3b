#include "gph/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "gph/kernels.hpp"
#include "gph/parallel.hpp"

namespace gph {

using nlohmann::json;

bool Report::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const CheckRecord& check) {
  json thresholds = json::array();
  for (const auto& t : check.thresholds) {
    thresholds.push_back({{"name", t.name}, {"relation", t.relation}, {"value", t.value}, {"provenance", t.provenance}});
  }
  json tables = json::array();
  for (const auto& t : check.tables) tables.push_back(t.name);
  return {{"name", check.name},         {"pass", check.pass},   {"summary", check.summary},
          {"measured", check.measured}, {"thresholds", thresholds}, {"tables", tables}};
}

json to_json(const Report& report, bool timestamp) {
  json checks = json::array();
  for (const auto& c : report.checks) checks.push_back(to_json(c));
  json out = {
      {"tool", "gph"},
      {"version", GPH_VERSION},
      {"kind", std::string(kind_name(report.config.kind))},
      {"config", to_json(report.config)},
      {"checks", checks},
      {"constants", report.constants},
      {"environment",
       {{"threads", thread_count()},
        {"simd", std::string(kernels::backend_name(kernels::active_backend()))},
        {"seed", report.config.seed},
        {"compiler", __VERSION__}}},
      {"pass", report.pass()},
  };
  if (!report.artifacts.empty()) out["artifacts"] = report.artifacts;
  if (timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    out["timestamp"] = buf;
  }
  return out;
}

void write_table_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

std::vector<std::filesystem::path> write_csv(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& check : report.checks) {
    for (const auto& t : check.tables) {
      const auto path = dir / (t.name + ".csv");
      write_table_csv(t, path);
      written.push_back(path);
    }
  }
  return written;
}

json merge_reports(const std::vector<json>& reports) {
  json merged = json::array();
  bool pass = true;
  std::size_t checks = 0, failed = 0;
  for (const auto& r : reports) {
    if (!r.is_object() || !r.contains("checks") || !r.contains("pass")) {
      throw std::invalid_argument("not a gph report (missing 'checks' or 'pass')");
    }
    pass = pass && r.at("pass").get<bool>();
    for (const auto& c : r.at("checks")) {
      ++checks;
      if (!c.value("pass", false)) ++failed;
    }
    merged.push_back(r);
  }
  return {{"tool", "gph"}, {"kind", "report-merge"}, {"reports", merged},
          {"summary", {{"reports", reports.size()}, {"checks", checks}, {"failed", failed}}}, {"pass", pass}};
}

}  // namespace gph
