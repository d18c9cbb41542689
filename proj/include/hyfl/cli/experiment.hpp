#pragma once

#include <cstddef>
#include <vector>

#include "hyfl/cli/config.hpp"
#include "hyfl/metrics.hpp"
#include "hyfl/tuning.hpp"

namespace hyfl::cli {

// Runs config.algorithm (hyfdca or fedavg) on prepared data.
RunHistory run_configured(const ExperimentConfig& config, const PreparedExperiment& prepared);

// P_C* from the config, a saved central run, or a fresh centralized solve, in that order.
double reference_optimum(const ExperimentConfig& config, const PreparedExperiment& prepared);

struct SearchOutcome {
  std::vector<SearchPoint> points;
  std::vector<RunHistory> histories;  // aligned with points
  std::size_t selected = 0;
};

// config.tune.budget random points for `algorithm`, evaluated on up to `jobs` threads and
// selected by grey relational analysis. Loss metrics are relative to `central_optimum`.
SearchOutcome random_search(const ExperimentConfig& config, const PreparedExperiment& prepared, Algorithm algorithm,
                            std::size_t jobs, double central_optimum);

}  // namespace hyfl::cli
