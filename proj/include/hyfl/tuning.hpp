#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hyfl/metrics.hpp"

namespace hyfl {

struct Bounds {
  double min = 1.0;
  double max = 1.0;
};

// 10^u with u uniform on [log10 min, log10 max].
std::vector<double> sample_log_uniform(Bounds bounds, std::uint64_t seed, std::size_t count);

// H = ceil(IIC * N / clients), at least 1.
std::size_t inner_iterations(double iic, std::size_t n_samples, std::size_t total_clients);

enum class Orientation { smaller_better, larger_better };

inline constexpr std::size_t kMetricCount = 7;

// The seven selection metrics, in order.
struct MetricVector {
  double runtime_no_latency = 0.0;       // mean seconds per iteration at 0 s per round trip
  double runtime_long_distance = 0.0;    // at 0.2575 s
  double runtime_geo_satellite = 0.0;    // at 0.8 s
  double final_loss = 0.0;               // mean of the last 5 loss values
  double max_accuracy = 0.0;
  double volatility = 0.0;
  double iterations_to_90 = 0.0;

  std::vector<double> values() const;
  static const std::vector<Orientation>& orientations();
  static const std::vector<std::string>& names();
};

// Runtimes are re-priced from a history under each latency scenario, using the history's own
// compute and encryption columns. Loss values are relative when a positive reference is given.
MetricVector evaluate_metrics(const RunHistory& history, double rtc_per_iteration, double central_optimum = 0.0);

// Any non-finite loss, or a final smoothed loss above 10x the initial loss.
bool is_divergent(std::span<const double> loss, std::size_t window = 1);

struct GraResult {
  std::size_t best = 0;
  std::vector<double> grades;
};

// Grey relational grade of each row with zeta = 0.5 and equal weights; rows are runs,
// columns are metrics. Ties keep the first row.
GraResult gra_select(const std::vector<std::vector<double>>& metrics, std::span<const Orientation> orientation,
                     double zeta = 0.5);

struct SearchPoint {
  double iic = 0.0;
  double a = 0.0;  // FedAvg only
  double b = 0.0;
  std::size_t inner_iterations = 0;
  MetricVector metrics;
  double grade = 0.0;
  bool divergent = false;
};

struct SearchSpace {
  Bounds iic;
  Bounds a{1e-5, 25.0};
  Bounds b{1e-5, 25.0};
  bool with_rates = false;  // sample a and b (FedAvg)

  // HyFDCA: IIC in [clients / samples, 1]; FedAvg: IIC in [clients / samples, 5], a, b in [1e-5, 25].
  static SearchSpace hyfdca(std::size_t n_samples, std::size_t total_clients);
  static SearchSpace fedavg(std::size_t n_samples, std::size_t total_clients);
};

// `count` points drawn independently per hyperparameter from a seed.
std::vector<SearchPoint> sample_search_points(const SearchSpace& space, std::size_t count, std::uint64_t seed,
                                              std::size_t n_samples, std::size_t total_clients);

// Grades non-divergent points in place and returns the selected index.
std::size_t select_point(std::vector<SearchPoint>& points);

// One row per point: iic,a,b,H, the seven metrics, grade, divergent.
void write_search_csv(std::ostream& out, std::span<const SearchPoint> points);

}  // namespace hyfl
