#include "hyfl/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hyfl/error.hpp"
#include "hyfl/rng.hpp"

namespace hyfl {

std::vector<double> sample_log_uniform(Bounds bounds, std::uint64_t seed, std::size_t count) {
  if (!(bounds.min > 0.0) || bounds.max < bounds.min) throw ConfigError("log-uniform bounds need 0 < min <= max");
  const double lo = std::log10(bounds.min);
  const double hi = std::log10(bounds.max);
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = std::pow(10.0, rng.uniform(lo, hi));
    out.push_back(std::clamp(v, bounds.min, bounds.max));
  }
  return out;
}

std::size_t inner_iterations(double iic, std::size_t n_samples, std::size_t total_clients) {
  if (!(iic > 0.0) || n_samples == 0 || total_clients == 0)
    throw ConfigError("inner iterations need positive IIC, N and client count");
  const double h = std::ceil(iic * static_cast<double>(n_samples) / static_cast<double>(total_clients));
  return std::max<std::size_t>(1, static_cast<std::size_t>(h));
}

std::vector<double> MetricVector::values() const {
  return {runtime_no_latency, runtime_long_distance, runtime_geo_satellite, final_loss,
          max_accuracy,       volatility,            iterations_to_90};
}

const std::vector<Orientation>& MetricVector::orientations() {
  static const std::vector<Orientation> o{Orientation::smaller_better, Orientation::smaller_better,
                                          Orientation::smaller_better, Orientation::smaller_better,
                                          Orientation::larger_better,  Orientation::smaller_better,
                                          Orientation::smaller_better};
  return o;
}

const std::vector<std::string>& MetricVector::names() {
  static const std::vector<std::string> n{"runtime_0",  "runtime_0.2575", "runtime_0.8",      "final_loss",
                                          "max_accuracy", "volatility",   "iterations_to_90"};
  return n;
}

MetricVector evaluate_metrics(const RunHistory& history, double rtc_per_iteration, double central_optimum) {
  if (history.rows.empty()) throw ConfigError("cannot evaluate an empty history");
  MetricVector m;
  double base = 0.0;
  for (const auto& r : history.rows) base += r.compute_s + r.encryption_s;
  const double n = static_cast<double>(history.rows.size());
  m.runtime_no_latency = (base + n * rtc_per_iteration * TimingModel::kNoLatency) / n;
  m.runtime_long_distance = (base + n * rtc_per_iteration * TimingModel::kLongDistanceLatency) / n;
  m.runtime_geo_satellite = (base + n * rtc_per_iteration * TimingModel::kGeoSatelliteLatency) / n;

  std::vector<double> loss = history.primal();
  if (central_optimum > 0.0)
    for (auto& v : loss) v = relative_loss(v, central_optimum);
  const std::size_t tail = std::min<std::size_t>(5, loss.size());
  double s = 0.0;
  for (std::size_t i = loss.size() - tail; i < loss.size(); ++i) s += loss[i];
  m.final_loss = s / static_cast<double>(tail);

  const auto acc = history.accuracy();
  m.max_accuracy = *std::max_element(acc.begin(), acc.end());
  m.volatility = loss.size() >= 2 ? volatility(loss) : 0.0;
  m.iterations_to_90 = static_cast<double>(iterations_to_progress(loss, 0.9));
  return m;
}

bool is_divergent(std::span<const double> loss, std::size_t window) {
  if (loss.empty()) return false;
  for (double v : loss)
    if (!std::isfinite(v)) return true;
  const auto smooth = moving_average(loss, window);
  return smooth.back() > 10.0 * loss.front();
}

GraResult gra_select(const std::vector<std::vector<double>>& metrics, std::span<const Orientation> orientation,
                     double zeta) {
  if (metrics.empty()) throw ConfigError("grey relational analysis needs at least one run");
  const std::size_t cols = orientation.size();
  for (const auto& row : metrics)
    if (row.size() != cols) throw DimensionError("metric row length does not match the orientation list");
  const std::size_t rows = metrics.size();

  // Normalized so that 1 is ideal; deviation from the ideal is 1 - normalized.
  std::vector<std::vector<double>> delta(rows, std::vector<double>(cols, 0.0));
  for (std::size_t j = 0; j < cols; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : metrics) {
      lo = std::min(lo, row[j]);
      hi = std::max(hi, row[j]);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      double norm = 1.0;
      if (hi > lo)
        norm = orientation[j] == Orientation::larger_better ? (metrics[i][j] - lo) / (hi - lo)
                                                            : (hi - metrics[i][j]) / (hi - lo);
      delta[i][j] = 1.0 - norm;
    }
  }
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (const auto& row : delta)
    for (double d : row) {
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }

  GraResult out;
  out.grades.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j)
      sum += dmax == 0.0 ? 1.0 : (dmin + zeta * dmax) / (delta[i][j] + zeta * dmax);
    out.grades[i] = cols > 0 ? sum / static_cast<double>(cols) : 1.0;
    if (out.grades[i] > out.grades[out.best]) out.best = i;
  }
  return out;
}

SearchSpace SearchSpace::hyfdca(std::size_t n_samples, std::size_t total_clients) {
  SearchSpace s;
  s.iic = {static_cast<double>(total_clients) / static_cast<double>(n_samples), 1.0};
  return s;
}

SearchSpace SearchSpace::fedavg(std::size_t n_samples, std::size_t total_clients) {
  SearchSpace s;
  s.iic = {static_cast<double>(total_clients) / static_cast<double>(n_samples), 5.0};
  s.with_rates = true;
  return s;
}

std::vector<SearchPoint> sample_search_points(const SearchSpace& space, std::size_t count, std::uint64_t seed,
                                              std::size_t n_samples, std::size_t total_clients) {
  const auto iic = sample_log_uniform(space.iic, derive_seed(seed, {1}), count);
  std::vector<double> a, b;
  if (space.with_rates) {
    a = sample_log_uniform(space.a, derive_seed(seed, {2}), count);
    b = sample_log_uniform(space.b, derive_seed(seed, {3}), count);
  }
  std::vector<SearchPoint> points(count);
  for (std::size_t i = 0; i < count; ++i) {
    points[i].iic = iic[i];
    points[i].inner_iterations = inner_iterations(iic[i], n_samples, total_clients);
    if (space.with_rates) {
      points[i].a = a[i];
      points[i].b = b[i];
    }
  }
  return points;
}

std::size_t select_point(std::vector<SearchPoint>& points) {
  std::vector<std::size_t> kept;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].grade = 0.0;
    if (points[i].divergent) continue;
    kept.push_back(i);
    rows.push_back(points[i].metrics.values());
  }
  if (kept.empty()) throw Error("every search point diverged");
  const auto res = gra_select(rows, MetricVector::orientations());
  for (std::size_t j = 0; j < kept.size(); ++j) points[kept[j]].grade = res.grades[j];
  return kept[res.best];
}

void write_search_csv(std::ostream& out, std::span<const SearchPoint> points) {
  out << "iic,a,b,H";
  for (const auto& n : MetricVector::names()) out << ',' << n;
  out << ",grade,divergent\n";
  for (const auto& p : points) {
    out << format_double(p.iic) << ',' << format_double(p.a) << ',' << format_double(p.b) << ','
        << p.inner_iterations;
    for (double v : p.metrics.values()) out << ',' << format_double(v);
    out << ',' << format_double(p.grade) << ',' << (p.divergent ? 1 : 0) << '\n';
  }
}

}  // namespace hyfl
