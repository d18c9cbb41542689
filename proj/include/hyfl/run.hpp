#pragma once

#include <cstddef>
#include <cstdint>

#include "hyfl/dataset.hpp"
#include "hyfl/metrics.hpp"

namespace hyfl {

// Stop after `iterations` outer iterations (0 = no limit), or once simulated wall time
// reaches `wall_time_s` (when positive), whichever comes first.
struct StopRule {
  std::size_t iterations = 100;
  double wall_time_s = 0.0;

  bool done(std::size_t t, double elapsed_s) const noexcept {
    if (iterations > 0 && t >= iterations) return true;
    if (wall_time_s > 0.0 && elapsed_s >= wall_time_s) return true;
    return iterations == 0 && wall_time_s <= 0.0;
  }

  friend bool operator==(const StopRule&, const StopRule&) = default;
};

struct RunOptions {
  double lambda = 1e-3;
  StopRule stop;
  TimingModel timing;
  std::uint64_t seed = 0;
  const SparseDataset* validation = nullptr;  // accuracy falls back to the training set
};

}  // namespace hyfl
