#include "hyfl/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyfl/error.hpp"
#include "hyfl/partition.hpp"
#include "hyfl/rng.hpp"

namespace hyfl {

Schedule Schedule::random_fraction(double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("client fraction must lie in (0, 1]");
  return Schedule(Kind::random_fraction, fraction, 1, seed);
}

Schedule Schedule::cyclic(std::size_t cycles, std::uint64_t seed) {
  if (cycles < 1) throw ConfigError("cyclic schedule needs C >= 1");
  return Schedule(Kind::cyclic, 1.0, cycles, seed);
}

std::vector<std::vector<std::size_t>> Schedule::cyclic_groups(std::size_t n_clients) const {
  if (cycles_ > n_clients) throw ConfigError("more cyclic groups than clients");
  std::vector<std::size_t> order(n_clients);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed_, {0xc7c1e}));
  rng.shuffle(order);
  auto sizes = group_sizes(n_clients, cycles_);
  std::vector<std::vector<std::size_t>> groups(cycles_);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < cycles_; ++g) {
    groups[g].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                     order.begin() + static_cast<std::ptrdiff_t>(pos + sizes[g]));
    std::sort(groups[g].begin(), groups[g].end());
    pos += sizes[g];
  }
  return groups;
}

std::vector<std::size_t> Schedule::active(std::size_t t, std::size_t n_clients) const {
  switch (kind_) {
    case Kind::full: {
      std::vector<std::size_t> all(n_clients);
      std::iota(all.begin(), all.end(), std::size_t{0});
      return all;
    }
    case Kind::random_fraction: {
      const auto count = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(fraction_ * static_cast<double>(n_clients))));
      Rng rng(derive_seed(seed_, {0xf2ac, t}));
      auto picked = rng.sample_without_replacement(n_clients, std::min(count, n_clients));
      std::sort(picked.begin(), picked.end());
      return picked;
    }
    case Kind::cyclic: {
      auto groups = cyclic_groups(n_clients);
      return groups[t % cycles_];
    }
  }
  return {};
}

double Schedule::expected_active(std::size_t n_clients) const {
  switch (kind_) {
    case Kind::full: return static_cast<double>(n_clients);
    case Kind::random_fraction:
      return static_cast<double>(std::min(
          n_clients,
          std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction_ * static_cast<double>(n_clients))))));
    case Kind::cyclic: return static_cast<double>(n_clients) / static_cast<double>(cycles_);
  }
  return 0.0;
}

std::string Schedule::describe() const {
  switch (kind_) {
    case Kind::full: return "full";
    case Kind::random_fraction: return "fraction(" + std::to_string(fraction_) + ")";
    case Kind::cyclic: return "cyclic(" + std::to_string(cycles_) + ")";
  }
  return "?";
}

}  // namespace hyfl
