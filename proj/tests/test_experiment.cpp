#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "gph/config.hpp"
#include "gph/experiment.hpp"
#include "gph/report.hpp"

namespace gph {
namespace {

using nlohmann::json;

bool mentions(const ConfigError& e, const std::string& field) {
  return std::any_of(e.problems().begin(), e.problems().end(),
                     [&](const std::string& p) { return p.rfind(field + ":", 0) == 0; });
}

TEST(Config, DefaultsValidate) {
  EXPECT_NO_THROW(ExperimentConfig{}.validate());
  EXPECT_NO_THROW(config_from_json(json::object()));
}

TEST(Config, KmaxBelowNNamesKmax) {
  ExperimentConfig c;
  c.kind = ExperimentKind::converge;
  c.K_max = 2;
  c.N = 3;
  try {
    run_experiment(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "K_max"));
  }
}

TEST(Config, WeightAndRegularityOrdering) {
  ExperimentConfig c;
  c.xi = 2.0;
  c.alpha0 = 0.5;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "xi_prime"));
    EXPECT_TRUE(mentions(e, "alpha0"));
  }
  c.xi_prime.reset();
  c.alpha0.reset();
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, UnknownFieldRejected) {
  try {
    config_from_json({{"N", 3}, {"bogus", 1}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "bogus"));
  }
  EXPECT_THROW(config_from_json({{"nls", {{"massive", 1}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"mode", "sideways"}}), ConfigError);
}

TEST(Config, JsonRoundTripAndOverrides) {
  json j = json::object();
  apply_override(j, "N=2");
  apply_override(j, "nls.mass=2.5");
  apply_override(j, "mode=independent");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.N, 2);
  EXPECT_EQ(c.nls.mass, 2.5);
  EXPECT_EQ(c.mode, HierarchyMode::Kind::independent);
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Config, KindNames) {
  for (auto k : {ExperimentKind::verify, ExperimentKind::estimate_c0, ExperimentKind::decay, ExperimentKind::converge,
                 ExperimentKind::residual, ExperimentKind::continuity, ExperimentKind::nls, ExperimentKind::expand}) {
    EXPECT_EQ(parse_kind(kind_name(k)), k);
  }
  EXPECT_EQ(kind_name(ExperimentKind::estimate_c0), "estimate-c0");
  EXPECT_FALSE(parse_kind("plot").has_value());
}

TEST(Report, DeterministicWithoutTimestamp) {
  ExperimentConfig c;
  c.kind = ExperimentKind::residual;
  const auto a = to_json(run_experiment(c), false).dump();
  const auto b = to_json(run_experiment(c), false).dump();
  EXPECT_EQ(a, b);
  const auto with = to_json(run_experiment(c), true);
  EXPECT_TRUE(with.contains("timestamp"));
  EXPECT_FALSE(json::parse(a).contains("timestamp"));
}

TEST(Report, ThresholdsCarryProvenance) {
  ExperimentConfig c;
  c.kind = ExperimentKind::continuity;
  const auto r = run_experiment(c);
  ASSERT_FALSE(r.checks.empty());
  for (const auto& check : r.checks) {
    for (const auto& t : check.thresholds) {
      EXPECT_TRUE(t.provenance == "[PAPER]" || t.provenance == "[DERIVED]" || t.provenance == "[TRIVIAL]")
          << t.provenance;
    }
  }
  EXPECT_TRUE(r.constants.contains("modulus_ratios"));
}

TEST(Report, CsvHasHeaderAndFullPrecision) {
  Report r;
  CheckRecord c;
  c.tables.push_back({"t", {"x", "y"}, {{0.1, 1.0 / 3.0}}});
  r.checks.push_back(c);
  const auto dir = std::filesystem::temp_directory_path() / "gph_csv_test";
  const auto files = write_csv(r, dir);
  ASSERT_EQ(files.size(), 1u);
  std::ifstream in(files.front());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::filesystem::remove_all(dir);
  EXPECT_EQ(header, "x,y");
  EXPECT_EQ(row, "0.10000000000000001,0.33333333333333331");
}

TEST(Report, MergeCountsFailures) {
  const json pass = {{"pass", true}, {"checks", {{{"name", "a"}, {"pass", true}}}}};
  const json fail = {{"pass", false}, {"checks", {{{"name", "b"}, {"pass", false}}, {{"name", "c"}, {"pass", true}}}}};
  const auto m = merge_reports({pass, fail});
  EXPECT_FALSE(m["pass"].get<bool>());
  EXPECT_EQ(m["summary"]["checks"], 3);
  EXPECT_EQ(m["summary"]["failed"], 1);
  EXPECT_THROW(merge_reports({json::object()}), std::invalid_argument);
}

TEST(Experiment, TinyVerifyPasses) {
  const auto r = run_experiment(ExperimentConfig{});
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.summary;
  EXPECT_TRUE(r.pass());
  EXPECT_GE(r.checks.size(), 12u);
  EXPECT_TRUE(r.constants.contains("admissibility"));
}

TEST(Experiment, ExpandCustomChain) {
  ExperimentConfig c;
  c.kind = ExperimentKind::expand;
  c.expand.k = 1;
  c.expand.steps = {"+1,2", "-2,3"};
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.pass());
  EXPECT_TRUE(r.artifacts.contains("expansion"));
  EXPECT_TRUE(r.constants.contains("C3_empirical"));
  c.expand.steps = {"+3,2"};
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Experiment, MissingInitialFileIsConfigError) {
  ExperimentConfig c;
  c.kind = ExperimentKind::residual;
  c.initial = "/nonexistent/initial.json";
  try {
    run_experiment(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "initial"));
  }
}

}  // namespace
}  // namespace gph
