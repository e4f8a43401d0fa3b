#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gph/dynamics.hpp"
#include "gph/random.hpp"

namespace gph {

/// Config problems, one message per offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class ExperimentKind { verify, estimate_c0, decay, converge, residual, continuity, nls, expand };

std::string_view kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);

struct NlsConfig {
  int k_max = 2;
  double mass = 1.0;
  /// Envelope <xi>^{-decay} of the random initial coefficients.
  double decay = 2.0;
  double coupling = 1.0;
  /// Step for the order check; kept well above the step where rounding takes over.
  double order_dt = 0.01;
  std::string initial;  // optional phi JSON file
};

struct ExpandConfig {
  bool example1 = false;
  int k = 2;
  /// "+1,2" style step list, outermost first.
  std::vector<std::string> steps;
  double delta = 0.1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::verify;
  int d = 1;
  int M = 1;
  int K_max = 4;
  int N = 3;
  double alpha = 1.0;
  std::optional<double> alpha0 = 2.0;
  double xi = 0.5;
  std::optional<double> xi_prime = 1.0;
  double T = 0.1;
  double dt = 1e-3;
  int q = 12;
  int j_max = 3;
  std::uint64_t mc_samples = 2000;
  std::uint64_t seed = 1;
  HierarchyMode::Kind mode = HierarchyMode::Kind::dependent;
  OmegaMethod omega = OmegaMethod::exact;
  int grid_points = 5;
  /// Initial levels get H^alpha norm level_ratio^k unless a file is given.
  double level_ratio = 1.0;
  /// Nonzeros per level when the level is too large to store dense.
  int sparse_nnz = 48;
  std::string initial;
  NlsConfig nls;
  ExpandConfig expand;

  void validate() const;
  TimeGrid grid() const { return TimeGrid::uniform(T, grid_points); }
};

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Missing fields keep their defaults; unknown fields are an error.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Applies "a.b=value" overrides; value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace gph
