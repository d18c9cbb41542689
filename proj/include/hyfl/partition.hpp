#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyfl/dataset.hpp"
#include "json.hpp"

namespace hyfl {

enum class PartitionScheme { quadrant, nonzero_split, horizontal, vertical };

std::string to_string(PartitionScheme s);
PartitionScheme parse_partition_scheme(const std::string& s);

struct ClientHolding {
  std::vector<std::size_t> samples;   // sorted global sample ids held by the client
  std::vector<std::size_t> features;  // sorted union of the features it holds
  // Per-sample feature lists aligned with `samples`. Empty when the client is rectangular,
  // i.e. every held sample carries exactly `features`.
  std::vector<std::vector<std::size_t>> sample_features;

  bool rectangular() const noexcept { return sample_features.empty(); }
};

// Who holds which (sample, feature) cells. Immutable after construction.
class Partition {
 public:
  Partition(PartitionScheme scheme, std::size_t n_samples, std::size_t n_features,
            std::size_t sample_groups, std::size_t feature_groups, std::vector<ClientHolding> clients);

  PartitionScheme scheme() const noexcept { return scheme_; }
  std::size_t n_clients() const noexcept { return clients_.size(); }
  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t sample_groups() const noexcept { return sample_groups_; }
  std::size_t feature_groups() const noexcept { return feature_groups_; }

  const ClientHolding& client(std::size_t k) const { return clients_.at(k); }

  // Features client k holds for its local_i-th sample.
  std::span<const std::size_t> held_features(std::size_t k, std::size_t local_i) const;

  std::span<const std::size_t> sample_clients(std::size_t i) const;   // clients holding sample i
  std::span<const std::size_t> feature_clients(std::size_t m) const;  // clients holding feature m

  // Throws ContractViolation unless every nonzero of `data` is held by exactly one client.
  void check_coverage(const SparseDataset& data) const;

  friend bool operator==(const Partition& a, const Partition& b);

 private:
  PartitionScheme scheme_;
  std::size_t n_samples_, n_features_, sample_groups_, feature_groups_;
  std::vector<ClientHolding> clients_;
  std::vector<std::size_t> sample_offsets_, sample_index_;
  std::vector<std::size_t> feature_offsets_, feature_index_;
};

// Contiguous near-equal groups; earlier groups take the remainder.
std::vector<std::size_t> group_sizes(std::size_t n, std::size_t groups);

// Appends one feature at index M holding `value` for every sample.
SparseDataset append_bias_feature(const SparseDataset& data, double value);

struct QuadrantPartition {
  SparseDataset data;  // bias-augmented, M = 785
  Partition partition;
};

// 28x28 images cut into four 14x14 quadrants; the bias goes with quadrant 4.
QuadrantPartition partition_quadrant(const SparseDataset& images, std::size_t total_clients, double bias_value);

// Column indices of a 28x28 image quadrant (0..3, row-major: top-left, top-right,
// bottom-left, bottom-right).
std::vector<std::size_t> quadrant_columns(std::size_t quadrant);

Partition partition_nonzero_split(const SparseDataset& data, std::size_t sample_groups,
                                  std::size_t feature_groups, std::uint64_t seed);

Partition partition_horizontal(const SparseDataset& data, std::size_t clients);

// nullopt keeps the natural feature order (no shuffle).
Partition partition_vertical(const SparseDataset& data, std::size_t clients, std::optional<std::uint64_t> seed);

// Local view of the cells one client holds. Feature indices inside `entries` are positions
// in `features`, so client-side vectors are sized |M_k| and never see foreign coordinates.
struct ClientBlock {
  std::vector<std::size_t> samples;
  std::vector<std::size_t> features;
  std::vector<int> labels;
  std::vector<std::size_t> row_start;
  std::vector<Feature> entries;

  std::size_t n_samples() const noexcept { return samples.size(); }
  std::size_t n_features() const noexcept { return features.size(); }
  std::size_t nonzeros() const noexcept { return entries.size(); }

  std::span<const Feature> row(std::size_t local_i) const {
    return {entries.data() + row_start[local_i], row_start[local_i + 1] - row_start[local_i]};
  }
  double dot(std::size_t local_i, std::span<const double> w_local) const {
    double s = 0.0;
    for (const auto& f : row(local_i)) s += f.value * w_local[f.index];
    return s;
  }
};

struct Holder {
  std::size_t client;
  std::size_t local;
};

class FederatedLayout {
 public:
  FederatedLayout(const SparseDataset& data, const Partition& partition);

  std::size_t n_clients() const noexcept { return blocks_.size(); }
  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const ClientBlock& block(std::size_t k) const { return blocks_[k]; }

  std::span<const Holder> sample_holders(std::size_t i) const {
    return {sample_holders_.data() + sample_offsets_[i], sample_offsets_[i + 1] - sample_offsets_[i]};
  }
  std::span<const Holder> feature_holders(std::size_t m) const {
    return {feature_holders_.data() + feature_offsets_[m], feature_offsets_[m + 1] - feature_offsets_[m]};
  }

  std::optional<std::size_t> local_sample(std::size_t k, std::size_t global_i) const;
  std::optional<std::size_t> local_feature(std::size_t k, std::size_t global_m) const;

 private:
  std::size_t n_samples_, n_features_;
  std::vector<ClientBlock> blocks_;
  std::vector<std::size_t> sample_offsets_, feature_offsets_;
  std::vector<Holder> sample_holders_, feature_holders_;
};

// Per-client sample/feature/nonzero counts.
nlohmann::json partition_summary(const Partition& partition, const FederatedLayout& layout);

}  // namespace hyfl
