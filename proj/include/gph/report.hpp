#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gph/config.hpp"

namespace gph {

/// "[DERIVED]", "[PAPER]" or "[TRIVIAL]".
struct Threshold {
  std::string name;
  std::string relation;  // "<=", "<", ">=", "in", "=="
  nlohmann::json value;
  std::string provenance;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckRecord {
  std::string name;
  bool pass = false;
  std::string summary;
  nlohmann::json measured = nlohmann::json::object();
  std::vector<Threshold> thresholds;
  std::vector<Table> tables;
  /// Wall time; kept out of the JSON so reports stay reproducible.
  double seconds = 0.0;
};

struct Report {
  ExperimentConfig config;
  std::vector<CheckRecord> checks;
  nlohmann::json constants = nlohmann::json::object();
  nlohmann::json artifacts = nlohmann::json::object();
  bool pass() const;
};

nlohmann::json to_json(const CheckRecord& check);
/// The timestamp field is the only part that varies between identical runs.
nlohmann::json to_json(const Report& report, bool timestamp = true);

/// Writes one CSV per table (all checks), 17 significant digits.
std::vector<std::filesystem::path> write_csv(const Report& report, const std::filesystem::path& dir);
void write_table_csv(const Table& table, const std::filesystem::path& path);

/// Combines several report JSONs; passes iff all do.
nlohmann::json merge_reports(const std::vector<nlohmann::json>& reports);

std::string format_double(double v);

}  // namespace gph
