#include "hyfl/partition.hpp"

#include <algorithm>
#include <numeric>

#include "hyfl/error.hpp"
#include "hyfl/rng.hpp"

namespace hyfl {

namespace {

constexpr std::size_t kImageSide = 28;
constexpr std::size_t kImagePixels = kImageSide * kImageSide;

// CSR inverse index: for each key in [0, n), the clients listing it.
void invert(std::size_t n, const std::vector<ClientHolding>& clients,
            const std::vector<std::size_t> ClientHolding::*member, std::vector<std::size_t>& offsets,
            std::vector<std::size_t>& index) {
  offsets.assign(n + 1, 0);
  for (const auto& c : clients)
    for (std::size_t key : c.*member) {
      if (key >= n) throw ContractViolation("partition references index " + std::to_string(key) + " >= " + std::to_string(n));
      ++offsets[key + 1];
    }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  index.assign(offsets[n], 0);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (std::size_t k = 0; k < clients.size(); ++k)
    for (std::size_t key : clients[k].*member) index[fill[key]++] = k;
}

std::vector<std::size_t> group_starts(std::size_t n, std::size_t groups) {
  auto sizes = group_sizes(n, groups);
  std::vector<std::size_t> starts(groups + 1, 0);
  for (std::size_t g = 0; g < groups; ++g) starts[g + 1] = starts[g] + sizes[g];
  return starts;
}

}  // namespace

std::string to_string(PartitionScheme s) {
  switch (s) {
    case PartitionScheme::quadrant: return "quadrant";
    case PartitionScheme::nonzero_split: return "nonzero_split";
    case PartitionScheme::horizontal: return "horizontal";
    case PartitionScheme::vertical: return "vertical";
  }
  return "?";
}

PartitionScheme parse_partition_scheme(const std::string& s) {
  if (s == "quadrant") return PartitionScheme::quadrant;
  if (s == "nonzero_split") return PartitionScheme::nonzero_split;
  if (s == "horizontal") return PartitionScheme::horizontal;
  if (s == "vertical") return PartitionScheme::vertical;
  throw ConfigError("unknown partition scheme '" + s + "'");
}

Partition::Partition(PartitionScheme scheme, std::size_t n_samples, std::size_t n_features,
                     std::size_t sample_groups, std::size_t feature_groups, std::vector<ClientHolding> clients)
    : scheme_(scheme),
      n_samples_(n_samples),
      n_features_(n_features),
      sample_groups_(sample_groups),
      feature_groups_(feature_groups),
      clients_(std::move(clients)) {
  for (const auto& c : clients_) {
    if (!std::is_sorted(c.samples.begin(), c.samples.end()) || !std::is_sorted(c.features.begin(), c.features.end()))
      throw ContractViolation("client holdings must be sorted");
    if (!c.rectangular() && c.sample_features.size() != c.samples.size())
      throw ContractViolation("per-sample feature lists must align with samples");
  }
  invert(n_samples_, clients_, &ClientHolding::samples, sample_offsets_, sample_index_);
  invert(n_features_, clients_, &ClientHolding::features, feature_offsets_, feature_index_);
}

std::span<const std::size_t> Partition::held_features(std::size_t k, std::size_t local_i) const {
  const auto& c = clients_.at(k);
  if (c.rectangular()) return c.features;
  return c.sample_features.at(local_i);
}

std::span<const std::size_t> Partition::sample_clients(std::size_t i) const {
  return {sample_index_.data() + sample_offsets_[i], sample_offsets_[i + 1] - sample_offsets_[i]};
}

std::span<const std::size_t> Partition::feature_clients(std::size_t m) const {
  return {feature_index_.data() + feature_offsets_[m], feature_offsets_[m + 1] - feature_offsets_[m]};
}

void Partition::check_coverage(const SparseDataset& data) const {
  if (data.n_samples() != n_samples_ || data.n_features != n_features_)
    throw DimensionError("partition shape does not match dataset");
  for (std::size_t i = 0; i < n_samples_; ++i) {
    for (const auto& f : data.samples[i]) {
      std::size_t holders = 0;
      for (std::size_t k : sample_clients(i)) {
        const auto& c = clients_[k];
        const auto li = static_cast<std::size_t>(
            std::lower_bound(c.samples.begin(), c.samples.end(), i) - c.samples.begin());
        auto feats = held_features(k, li);
        if (std::binary_search(feats.begin(), feats.end(), f.index)) ++holders;
      }
      if (holders != 1)
        throw ContractViolation("cell (" + std::to_string(i) + ", " + std::to_string(f.index) + ") held by " +
                                std::to_string(holders) + " clients");
    }
  }
}

bool operator==(const Partition& a, const Partition& b) {
  if (a.scheme_ != b.scheme_ || a.n_samples_ != b.n_samples_ || a.n_features_ != b.n_features_ ||
      a.clients_.size() != b.clients_.size())
    return false;
  for (std::size_t k = 0; k < a.clients_.size(); ++k) {
    const auto& x = a.clients_[k];
    const auto& y = b.clients_[k];
    if (x.samples != y.samples || x.features != y.features || x.sample_features != y.sample_features) return false;
  }
  return true;
}

std::vector<std::size_t> group_sizes(std::size_t n, std::size_t groups) {
  std::vector<std::size_t> sizes(groups, groups ? n / groups : 0);
  for (std::size_t g = 0; g < (groups ? n % groups : 0); ++g) ++sizes[g];
  return sizes;
}

SparseDataset append_bias_feature(const SparseDataset& data, double value) {
  SparseDataset out = data;
  for (auto& x : out.samples)
    if (value != 0.0) x.push_back({data.n_features, value});
  out.n_features = data.n_features + 1;
  return out;
}

std::vector<std::size_t> quadrant_columns(std::size_t quadrant) {
  if (quadrant > 3) throw ConfigError("quadrant must be 0..3");
  const std::size_t half = kImageSide / 2;
  const std::size_t r0 = (quadrant / 2) * half;
  const std::size_t c0 = (quadrant % 2) * half;
  std::vector<std::size_t> cols;
  cols.reserve(half * half);
  for (std::size_t r = r0; r < r0 + half; ++r)
    for (std::size_t c = c0; c < c0 + half; ++c) cols.push_back(r * kImageSide + c);
  return cols;
}

QuadrantPartition partition_quadrant(const SparseDataset& images, std::size_t total_clients, double bias_value) {
  if (images.n_features != kImagePixels)
    throw ConfigError("quadrant partition needs 784 features, got " + std::to_string(images.n_features));
  if (total_clients == 0 || total_clients % 4 != 0)
    throw ConfigError("quadrant partition needs a positive multiple of 4 clients, got " + std::to_string(total_clients));
  const std::size_t groups = total_clients / 4;
  if (groups > images.n_samples()) throw ConfigError("more sample groups than samples");

  SparseDataset data = append_bias_feature(images, bias_value);
  const auto starts = group_starts(data.n_samples(), groups);

  std::vector<ClientHolding> clients(total_clients);
  for (std::size_t c = 0; c < total_clients; ++c) {
    const std::size_t quadrant = c / groups;
    const std::size_t g = c % groups;
    auto& h = clients[c];
    h.samples.resize(starts[g + 1] - starts[g]);
    std::iota(h.samples.begin(), h.samples.end(), starts[g]);
    h.features = quadrant_columns(quadrant);
    std::sort(h.features.begin(), h.features.end());
    if (quadrant == 3) h.features.push_back(kImagePixels);
  }
  Partition p(PartitionScheme::quadrant, data.n_samples(), data.n_features, groups, 4, std::move(clients));
  return {std::move(data), std::move(p)};
}

Partition partition_nonzero_split(const SparseDataset& data, std::size_t sample_groups,
                                  std::size_t feature_groups, std::uint64_t seed) {
  if (sample_groups == 0 || feature_groups == 0) throw ConfigError("K and Q must be >= 1");
  if (sample_groups > data.n_samples())
    throw ConfigError("K = " + std::to_string(sample_groups) + " exceeds N = " + std::to_string(data.n_samples()));
  const auto starts = group_starts(data.n_samples(), sample_groups);

  std::vector<ClientHolding> clients(sample_groups * feature_groups);
  for (std::size_t g = 0; g < sample_groups; ++g) {
    for (std::size_t q = 0; q < feature_groups; ++q) {
      auto& h = clients[g * feature_groups + q];
      h.samples.resize(starts[g + 1] - starts[g]);
      std::iota(h.samples.begin(), h.samples.end(), starts[g]);
      h.sample_features.resize(h.samples.size());
    }
    for (std::size_t i = starts[g]; i < starts[g + 1]; ++i) {
      std::vector<std::size_t> nz;
      nz.reserve(data.samples[i].size());
      for (const auto& f : data.samples[i]) nz.push_back(f.index);
      Rng rng(derive_seed(seed, {0x2e70, i}));
      rng.shuffle(nz);
      for (std::size_t p = 0; p < nz.size(); ++p)
        clients[g * feature_groups + p % feature_groups].sample_features[i - starts[g]].push_back(nz[p]);
    }
  }
  for (auto& h : clients) {
    std::vector<std::size_t> all;
    for (auto& fs : h.sample_features) {
      std::sort(fs.begin(), fs.end());
      all.insert(all.end(), fs.begin(), fs.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    h.features = std::move(all);
  }
  return Partition(PartitionScheme::nonzero_split, data.n_samples(), data.n_features, sample_groups,
                   feature_groups, std::move(clients));
}

Partition partition_horizontal(const SparseDataset& data, std::size_t n_clients) {
  if (n_clients == 0 || n_clients > data.n_samples())
    throw ConfigError("horizontal partition needs 1 <= K <= N");
  const auto starts = group_starts(data.n_samples(), n_clients);
  std::vector<std::size_t> all_features(data.n_features);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});
  std::vector<ClientHolding> clients(n_clients);
  for (std::size_t k = 0; k < n_clients; ++k) {
    clients[k].samples.resize(starts[k + 1] - starts[k]);
    std::iota(clients[k].samples.begin(), clients[k].samples.end(), starts[k]);
    clients[k].features = all_features;
  }
  return Partition(PartitionScheme::horizontal, data.n_samples(), data.n_features, n_clients, 1, std::move(clients));
}

Partition partition_vertical(const SparseDataset& data, std::size_t n_clients, std::optional<std::uint64_t> seed) {
  if (n_clients == 0 || n_clients > data.n_features)
    throw ConfigError("vertical partition needs 1 <= Q <= M");
  std::vector<std::size_t> order(data.n_features);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (seed) {
    Rng rng(derive_seed(*seed, {0x7e47}));
    rng.shuffle(order);
  }
  const auto starts = group_starts(data.n_features, n_clients);
  std::vector<std::size_t> all_samples(data.n_samples());
  std::iota(all_samples.begin(), all_samples.end(), std::size_t{0});
  std::vector<ClientHolding> clients(n_clients);
  for (std::size_t q = 0; q < n_clients; ++q) {
    clients[q].samples = all_samples;
    clients[q].features.assign(order.begin() + static_cast<std::ptrdiff_t>(starts[q]),
                               order.begin() + static_cast<std::ptrdiff_t>(starts[q + 1]));
    std::sort(clients[q].features.begin(), clients[q].features.end());
  }
  return Partition(PartitionScheme::vertical, data.n_samples(), data.n_features, 1, n_clients, std::move(clients));
}

FederatedLayout::FederatedLayout(const SparseDataset& data, const Partition& partition)
    : n_samples_(data.n_samples()), n_features_(data.n_features) {
  if (partition.n_samples() != data.n_samples() || partition.n_features() != data.n_features)
    throw DimensionError("partition shape does not match dataset");
  const std::size_t K = partition.n_clients();
  blocks_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& h = partition.client(k);
    auto& b = blocks_[k];
    b.samples = h.samples;
    b.features = h.features;
    b.labels.reserve(h.samples.size());
    b.row_start.assign(1, 0);
    for (std::size_t li = 0; li < h.samples.size(); ++li) {
      const std::size_t i = h.samples[li];
      b.labels.push_back(data.labels[i]);
      auto held = partition.held_features(k, li);
      // Merge-walk the sample's nonzeros against the held feature list.
      auto hit = held.begin();
      for (const auto& f : data.samples[i]) {
        while (hit != held.end() && *hit < f.index) ++hit;
        if (hit == held.end()) break;
        if (*hit == f.index) {
          auto pos = std::lower_bound(h.features.begin(), h.features.end(), f.index) - h.features.begin();
          b.entries.push_back({static_cast<std::size_t>(pos), f.value});
        }
      }
      b.row_start.push_back(b.entries.size());
    }
  }

  auto build = [K, this](std::size_t n, auto keys_of, std::vector<std::size_t>& offsets, std::vector<Holder>& out) {
    offsets.assign(n + 1, 0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t key : keys_of(blocks_[k])) ++offsets[key + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    out.resize(offsets[n]);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& keys = keys_of(blocks_[k]);
      for (std::size_t local = 0; local < keys.size(); ++local) out[fill[keys[local]]++] = {k, local};
    }
  };
  build(n_samples_, [](const ClientBlock& b) -> const std::vector<std::size_t>& { return b.samples; },
        sample_offsets_, sample_holders_);
  build(n_features_, [](const ClientBlock& b) -> const std::vector<std::size_t>& { return b.features; },
        feature_offsets_, feature_holders_);
}

std::optional<std::size_t> FederatedLayout::local_sample(std::size_t k, std::size_t global_i) const {
  const auto& s = blocks_.at(k).samples;
  auto it = std::lower_bound(s.begin(), s.end(), global_i);
  if (it == s.end() || *it != global_i) return std::nullopt;
  return static_cast<std::size_t>(it - s.begin());
}

std::optional<std::size_t> FederatedLayout::local_feature(std::size_t k, std::size_t global_m) const {
  const auto& f = blocks_.at(k).features;
  auto it = std::lower_bound(f.begin(), f.end(), global_m);
  if (it == f.end() || *it != global_m) return std::nullopt;
  return static_cast<std::size_t>(it - f.begin());
}

nlohmann::json partition_summary(const Partition& partition, const FederatedLayout& layout) {
  nlohmann::json clients = nlohmann::json::array();
  for (std::size_t k = 0; k < layout.n_clients(); ++k) {
    const auto& b = layout.block(k);
    clients.push_back({{"client", k},
                       {"samples", b.n_samples()},
                       {"features", b.n_features()},
                       {"nonzeros", b.nonzeros()}});
  }
  return {{"scheme", to_string(partition.scheme())},
          {"n_clients", partition.n_clients()},
          {"n_samples", partition.n_samples()},
          {"n_features", partition.n_features()},
          {"sample_groups", partition.sample_groups()},
          {"feature_groups", partition.feature_groups()},
          {"clients", clients}};
}

}  // namespace hyfl
