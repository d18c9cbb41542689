#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hyfl/dataset.hpp"
#include "hyfl/objective.hpp"
#include "json.hpp"

namespace hyfl {

struct CentralRun {
  std::vector<double> w_star;
  std::vector<double> alpha_star;
  double P_star = 0.0;
  double D_star = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;  // coordinate steps taken
  bool converged = false;      // gap reached the target
};

struct CentralOptions {
  std::size_t max_iterations = 10'000'000;
  std::uint64_t seed = 0;
  double gap_target = 1e-6;
  std::size_t check_every = 0;  // coordinate steps between gap checks; 0 = once per N steps

  friend bool operator==(const CentralOptions&, const CentralOptions&) = default;
};

// Single-machine dual coordinate ascent: uniform random coordinate, exact closed-form step
// with the sample's true ||x_i||^2.
CentralRun run_sdca_central(const SparseDataset& data, const Regularization& reg, const CentralOptions& options = {});

struct LambdaChoice {
  double lambda = 0.0;
  std::vector<double> accuracies;  // aligned with the candidates
};

// Trains centrally per candidate and keeps the best validation accuracy; ties go to the smaller lambda.
LambdaChoice tune_lambda(const SparseDataset& train, const SparseDataset& validation, std::span<const double> candidates,
                         const CentralOptions& options = {});

nlohmann::json to_json(const CentralRun& run);
CentralRun central_run_from_json(const nlohmann::json& j);
CentralRun load_central_run(const std::filesystem::path& path);

}  // namespace hyfl
