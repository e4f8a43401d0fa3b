#pragma once

#include <string>

#include "gph/config.hpp"
#include "gph/expansion.hpp"
#include "gph/report.hpp"

namespace gph {

/// "+1,2" or "-4,5": sign, then l and n (1-based).
ChainStep parse_step(const std::string& text);

/// Runs one experiment kind; deterministic for a given config, seed and thread count.
Report run_experiment(const ExperimentConfig& config);

}  // namespace gph
