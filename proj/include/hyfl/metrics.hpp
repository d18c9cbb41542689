#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hyfl/dataset.hpp"
#include "hyfl/encryption.hpp"
#include "json.hpp"

namespace hyfl {

struct IterationRecord {
  std::size_t t = 0;
  double primal = 0.0;
  double dual = std::numeric_limits<double>::quiet_NaN();  // HyFDCA only
  double gap = std::numeric_limits<double>::quiet_NaN();
  double accuracy = 0.0;
  double compute_s = 0.0;
  double encryption_s = 0.0;
  double latency_s = 0.0;
  double cumulative_s = 0.0;
  OpCounts ops;
  std::size_t active_clients = 0;
  bool skipped = false;
};

struct RunHistory {
  std::string algorithm;
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<IterationRecord> rows;
  std::vector<double> final_w;  // model after the last row

  std::vector<double> primal() const;
  std::vector<double> dual() const;
  std::vector<double> accuracy() const;
  std::vector<double> cumulative_time() const;
};

// Per-iteration charge in simulated seconds.
struct IterationCharge {
  double compute_s = 0.0;
  double encryption_s = 0.0;
  double latency_s = 0.0;
  double total_s = 0.0;
};

struct TimingModel {
  static constexpr double kNoLatency = 0.0;
  static constexpr double kLongDistanceLatency = 0.2575;  // US-Singapore round trip
  static constexpr double kGeoSatelliteLatency = 0.8;
  static constexpr double kHyfdcaRoundTrips = 4.5;
  static constexpr double kFedAvgRoundTrips = 1.0;

  double latency_per_rtc_s = kNoLatency;
  double rtc_per_iteration = kHyfdcaRoundTrips;
  // Simulated client work: seconds per multiply-add touched by the slowest active client.
  double seconds_per_op = 1e-8;

  IterationCharge charge(double compute_s, const OpCounts& ops) const;
};

// (P - P_C*) / P_C*
double relative_loss(double primal, double central_optimum);

// Trailing mean over min(window, t + 1) points; window < 2 is the identity.
std::vector<double> moving_average(std::span<const double> series, std::size_t window);

// Population standard deviation of consecutive differences.
double volatility(std::span<const double> series);

// First t with series[t] <= series[0] - fraction * (series[0] - min(series)).
std::size_t iterations_to_progress(std::span<const double> series, double fraction = 0.9);

struct RelativeSeries {
  std::vector<double> time;       // T_R = T / max over runs of total time
  std::vector<double> iteration;  // t_R = t / (t_max - window)
};

std::vector<RelativeSeries> relative_measures(std::span<const RunHistory> runs, std::size_t window);

// Fraction of samples with sign(x'w) == y, sign(0) = +1.
double accuracy(std::span<const double> w, const SparseDataset& data);

// Sublinear dual-suboptimality bound 2G / (1 + (H / 2N)(t - t0)) with G = 2 L^2 / lambda.
struct ConvergenceBound {
  double G = 0.0;
  std::size_t t0 = 0;
  double h_over_n = 0.0;

  double at(std::size_t t) const;
};

ConvergenceBound make_convergence_bound(double initial_dual_gap, double inner_iterations, std::size_t n,
                                        double lambda, double lipschitz = 1.0);

struct BoundReport {
  ConvergenceBound bound;
  std::vector<double> mean_suboptimality;  // index t, t = 0 is the zero initialization
  double max_ratio = 0.0;
  std::size_t worst_t = 0;
  bool degenerate = false;  // lambda so small that the bound is vacuous
  bool passed = false;
};

// Averages eps_D(t) = D* - D(alpha^t) over runs and compares it with the bound for t >= t0.
// `inner_iterations` is H (or P * H for partial participation). dual_optimum must be finite.
BoundReport check_convergence_bound(std::span<const RunHistory> runs, double dual_optimum, double inner_iterations,
                                 std::size_t n, double lambda, double lipschitz = 1.0);

// Columns: t,P,D,gap,acc,compute_s,enc_s,latency_s,cum_s
void write_history_csv(std::ostream& out, const RunHistory& history);
RunHistory read_history_csv(std::istream& in);
nlohmann::json history_metadata(const RunHistory& history);

std::string format_double(double v);

}  // namespace hyfl
