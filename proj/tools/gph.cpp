// gph: experiment driver for the truncated hierarchy.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gph/config.hpp"
#include "gph/experiment.hpp"
#include "gph/io.hpp"
#include "gph/report.hpp"

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config;
  std::string out;
  std::string csv;
  std::optional<std::uint64_t> seed;
  bool example1 = false;
  bool no_timestamp = false;
  std::vector<std::string> overrides;
  std::vector<std::string> inputs;
};

void write_output(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw gph::ConfigError({"out: cannot write " + path});
  out << text;
}

int run(gph::ExperimentKind kind, const Options& o) {
  gph::ExperimentConfig cfg;
  try {
    json j = o.config.empty() ? json::object() : gph::read_json_file(o.config);
    if (!j.is_object()) throw gph::ConfigError({"config: top level must be an object"});
    j["kind"] = std::string(gph::kind_name(kind));
    for (const auto& a : o.overrides) gph::apply_override(j, a);
    if (o.seed) j["seed"] = *o.seed;
    if (o.example1) j["expand"]["example1"] = true;
    cfg = gph::config_from_json(j);
    cfg.validate();
  } catch (const gph::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw gph::ConfigError({std::string("config: ") + e.what()});
  }

  const gph::Report report = gph::run_experiment(cfg);
  for (const auto& c : report.checks) {
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.summary << "\n";
  }
  write_output(gph::to_json(report, !o.no_timestamp), o.out);
  if (!o.csv.empty()) {
    for (const auto& p : gph::write_csv(report, o.csv)) std::cerr << "wrote " << p.string() << "\n";
  }
  return report.pass() ? kExitPass : kExitFail;
}

int merge(const Options& o) {
  std::vector<json> reports;
  for (const auto& path : o.inputs) {
    try {
      reports.push_back(gph::read_json_file(path));
    } catch (const std::exception& e) {
      throw gph::ConfigError({path + ": " + e.what()});
    }
  }
  json merged;
  try {
    merged = gph::merge_reports(reports);
  } catch (const std::invalid_argument& e) {
    throw gph::ConfigError({e.what()});
  }
  write_output(merged, o.out);
  return merged.at("pass").get<bool>() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-lattice experiments for the randomized Gross-Pitaevskii hierarchy"};
  app.require_subcommand(1);
  Options o;

  struct Entry {
    gph::ExperimentKind kind;
    const char* help;
  };
  const std::vector<Entry> entries = {
      {gph::ExperimentKind::verify, "Run every verification suite on the configured lattice"},
      {gph::ExperimentKind::estimate_c0, "Measure the randomized collision constant"},
      {gph::ExperimentKind::decay, "Factorial decay of the Duhamel iterates"},
      {gph::ExperimentKind::converge, "Duhamel vs ODE and the Cauchy property in N"},
      {gph::ExperimentKind::residual, "Integral-equation residual of the truncated solution"},
      {gph::ExperimentKind::continuity, "Continuity lemma and modulus scaling"},
      {gph::ExperimentKind::nls, "Factorized NLS states through the hierarchy"},
      {gph::ExperimentKind::expand, "Symbolic expansion of an operator chain"},
  };
  std::vector<std::pair<CLI::App*, gph::ExperimentKind>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(std::string(gph::kind_name(e.kind)), e.help);
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Report path (stdout when omitted)");
    sub->add_option("--csv", o.csv, "Directory for CSV tables");
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_flag("--no-timestamp", o.no_timestamp, "Omit the timestamp field");
    if (e.kind == gph::ExperimentKind::expand) sub->add_flag("--example1", o.example1, "Preset chain of Example 1");
    sub->add_option("overrides", o.overrides, "Dotted overrides, e.g. N=4 nls.mass=2");
    subs.emplace_back(sub, e.kind);
  }
  auto* merge_cmd = app.add_subcommand("report-merge", "Merge JSON reports");
  merge_cmd->add_option("reports", o.inputs, "Report files")->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--out", o.out, "Merged report path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (merge_cmd->parsed()) return merge(o);
    for (const auto& [sub, kind] : subs) {
      if (sub->parsed()) return run(kind, o);
    }
  } catch (const gph::ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << "config error: " << p << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitConfig;
}
