#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hyfl/cli/config.hpp"

namespace hyfl::cli {

// Commands throw ConfigError for bad input (exit code 2) and other Errors for runtime
// failures (exit code 1). `log` receives the human-readable summary.

// Writes <algorithm>_seed<seed>.csv and .json into out_dir.
void cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// Writes central.json.
void cmd_central(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// Writes tune_<algorithm>.csv and tune_<algorithm>_selected.json.
void cmd_tune(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::size_t jobs,
              std::ostream& log);

// Prints the partition summary and writes partition.json.
void cmd_partition_info(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

enum class XAxis { iteration, time };  // t_R or T_R

struct PlotOptions {
  std::size_t window = 50;
  std::optional<double> p_star;  // plot P_R instead of P when set
  XAxis x_axis = XAxis::iteration;
  std::string title;
};

// Writes loss.svg and accuracy.svg. Runs of unequal length are truncated to the shortest.
void cmd_plot(const std::vector<std::filesystem::path>& histories, const PlotOptions& options,
              const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace hyfl::cli
