#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hyfl/centralized.hpp"
#include "hyfl/dataset.hpp"
#include "hyfl/fedavg.hpp"
#include "hyfl/hyfdca.hpp"
#include "hyfl/partition.hpp"
#include "hyfl/run.hpp"
#include "hyfl/schedule.hpp"
#include "json.hpp"

namespace hyfl::cli {

struct DatasetConfig {
  std::string path;               // LIBSVM file; relative paths are resolved against HYFL_DATA_DIR
  std::optional<SynthSpec> synth;  // used instead of `path` when set
  LabelMapping labels = LabelMapping::binary();
  std::optional<std::size_t> expected_features;
  bool normalize = true;

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct SplitConfig {
  double train_fraction = 0.8;  // 1 keeps everything for training
  std::uint64_t seed = 0;

  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

struct PartitionConfig {
  PartitionScheme scheme = PartitionScheme::nonzero_split;
  std::size_t sample_groups = 1;   // K
  std::size_t feature_groups = 1;  // Q
  std::size_t total_clients = 4;   // quadrant scheme only
  double bias_value = 10.0;        // quadrant scheme only
  std::optional<std::uint64_t> seed = 0;  // nonzero_split and vertical; null = no shuffle

  friend bool operator==(const PartitionConfig&, const PartitionConfig&) = default;
};

struct ScheduleConfig {
  Schedule::Kind kind = Schedule::Kind::full;
  double fraction = 1.0;
  std::size_t cycles = 1;
  std::uint64_t seed = 0;

  Schedule build() const;
  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

enum class Algorithm { hyfdca, fedavg, central };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct TuneConfig {
  std::size_t budget = 20;
  std::uint64_t seed = 0;
  std::size_t window = 50;  // smoothing window for the divergence test

  friend bool operator==(const TuneConfig&, const TuneConfig&) = default;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  SplitConfig split;
  PartitionConfig partition;
  Algorithm algorithm = Algorithm::hyfdca;
  HyfdcaParams hyfdca;
  std::optional<double> hyfdca_iic;  // overrides hyfdca.inner_iterations
  FedAvgParams fedavg;
  std::optional<double> fedavg_iic;
  CentralOptions central;
  ScheduleConfig schedule;
  double lambda = 1e-3;
  StopRule stop;
  double latency_per_rtc_s = 0.0;
  double seconds_per_op = 1e-8;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::optional<double> p_c_star;
  std::string central_run;  // JSON written by the `central` command
  TuneConfig tune;

  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// HYFL_DATA_DIR / path for relative paths when the variable is set.
std::filesystem::path resolve_data_path(const std::string& path);

// Training data, validation data and the partition of the training data, ready to run.
struct PreparedExperiment {
  SparseDataset train;
  SparseDataset validation;  // empty when train_fraction == 1
  Partition partition;

  const SparseDataset* validation_or_null() const { return validation.n_samples() > 0 ? &validation : nullptr; }
};

// Load (or synthesize), split, partition and normalize. The quadrant scheme appends its bias
// feature to both splits before normalization.
PreparedExperiment prepare(const ExperimentConfig& config);

RunOptions run_options(const ExperimentConfig& config, const PreparedExperiment& prepared);
HyfdcaParams resolved_hyfdca(const ExperimentConfig& config, const PreparedExperiment& prepared);
FedAvgParams resolved_fedavg(const ExperimentConfig& config, const PreparedExperiment& prepared);

}  // namespace hyfl::cli
