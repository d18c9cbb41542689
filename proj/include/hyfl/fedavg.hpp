#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hyfl/dataset.hpp"
#include "hyfl/metrics.hpp"
#include "hyfl/partition.hpp"
#include "hyfl/run.hpp"
#include "hyfl/schedule.hpp"
#include "json.hpp"

namespace hyfl {

struct FedAvgParams {
  std::size_t inner_iterations = 1;  // H local SGD steps, batch size 1
  double a = 1.0;
  double b = 1.0;

  // gamma_t = a / (b + sqrt(t))
  double rate(std::size_t t) const noexcept { return a / (b + std::sqrt(static_cast<double>(t))); }
  void validate() const;

  friend bool operator==(const FedAvgParams&, const FedAvgParams&) = default;
};

// H steps of w <- w - gamma_t (lambda w + g x_{k,i}) on samples drawn with replacement from the
// client's block, where g is the hinge subgradient at the client's partial inner product.
// w_local is indexed by local feature position. Returns the work done (multiply-adds).
std::size_t local_sgd(const ClientBlock& block, std::span<double> w_local, const FedAvgParams& params, double lambda,
                      std::size_t t, std::uint64_t seed);

// w[m] = mean of local_w[k][m] over active holders of m; features without an active holder keep w[m].
void average_overlaps(std::span<const std::size_t> active, const std::vector<std::vector<double>>& local_w,
                      const FederatedLayout& layout, std::span<double> w);

// Zero encryption cost, one round trip per iteration.
RunHistory run_fedavg(const SparseDataset& data, const Partition& partition, const FedAvgParams& params,
                      const Schedule& schedule, const RunOptions& options);

nlohmann::json to_json(const FedAvgParams& p);
FedAvgParams fedavg_params_from_json(const nlohmann::json& j);

}  // namespace hyfl
