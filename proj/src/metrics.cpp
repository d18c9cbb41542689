#include "hyfl/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "hyfl/error.hpp"

namespace hyfl {

namespace {

template <class F>
std::vector<double> column(const RunHistory& h, F f) {
  std::vector<double> out;
  out.reserve(h.rows.size());
  for (const auto& r : h.rows) out.push_back(f(r));
  return out;
}

}  // namespace

std::vector<double> RunHistory::primal() const { return column(*this, [](const auto& r) { return r.primal; }); }
std::vector<double> RunHistory::dual() const { return column(*this, [](const auto& r) { return r.dual; }); }
std::vector<double> RunHistory::accuracy() const { return column(*this, [](const auto& r) { return r.accuracy; }); }
std::vector<double> RunHistory::cumulative_time() const {
  return column(*this, [](const auto& r) { return r.cumulative_s; });
}

IterationCharge TimingModel::charge(double compute_s, const OpCounts& ops) const {
  IterationCharge c;
  c.compute_s = compute_s;
  c.encryption_s = encryption_seconds(ops);
  c.latency_s = rtc_per_iteration * latency_per_rtc_s;
  c.total_s = c.compute_s + c.encryption_s + c.latency_s;
  return c;
}

double relative_loss(double primal, double central_optimum) {
  if (!(central_optimum > 0.0)) throw ConfigError("relative loss needs a positive reference optimum");
  return (primal - central_optimum) / central_optimum;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  std::vector<double> out(series.begin(), series.end());
  if (window < 2) return out;
  double sum = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    sum += series[t];
    if (t >= window) sum -= series[t - window];
    const std::size_t count = std::min(window, t + 1);
    out[t] = sum / static_cast<double>(count);
  }
  return out;
}

double volatility(std::span<const double> series) {
  if (series.size() < 2) throw ConfigError("volatility needs at least two values");
  const std::size_t n = series.size() - 1;
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) mean += series[t + 1] - series[t];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = series[t + 1] - series[t] - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(n));
}

std::size_t iterations_to_progress(std::span<const double> series, double fraction) {
  if (series.empty()) return 0;
  const double lowest = *std::min_element(series.begin(), series.end());
  const double target = series[0] - fraction * (series[0] - lowest);
  for (std::size_t t = 0; t < series.size(); ++t)
    if (series[t] <= target) return t;
  return series.size() - 1;
}

std::vector<RelativeSeries> relative_measures(std::span<const RunHistory> runs, std::size_t window) {
  double max_total = 0.0;
  std::size_t t_max = 0;
  for (const auto& r : runs) {
    if (!r.rows.empty()) max_total = std::max(max_total, r.rows.back().cumulative_s);
    t_max = std::max(t_max, r.rows.size());
  }
  const double denom_t = t_max > window ? static_cast<double>(t_max - window) : 1.0;
  std::vector<RelativeSeries> out;
  for (const auto& r : runs) {
    RelativeSeries s;
    for (const auto& row : r.rows) {
      s.time.push_back(max_total > 0.0 ? row.cumulative_s / max_total : 0.0);
      s.iteration.push_back(static_cast<double>(row.t) / denom_t);
    }
    out.push_back(std::move(s));
  }
  return out;
}

double accuracy(std::span<const double> w, const SparseDataset& data) {
  if (data.n_samples() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    const int predicted = dot(data.samples[i], w) >= 0.0 ? 1 : -1;
    if (predicted == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.n_samples());
}

double ConvergenceBound::at(std::size_t t) const {
  const double dt = t >= t0 ? static_cast<double>(t - t0) : 0.0;
  return 2.0 * G / (1.0 + 0.5 * h_over_n * dt);
}

ConvergenceBound make_convergence_bound(double initial_dual_gap, double inner_iterations, std::size_t n,
                                        double lambda, double lipschitz) {
  if (!(lambda > 0.0) || n == 0) throw ConfigError("convergence bound needs lambda > 0 and N >= 1");
  ConvergenceBound b;
  b.G = 2.0 * lipschitz * lipschitz / lambda;
  b.h_over_n = inner_iterations / static_cast<double>(n);
  const double lg = initial_dual_gap > 0.0 ? std::ceil(std::log(initial_dual_gap / b.G)) : 0.0;
  b.t0 = lg > 0.0 ? static_cast<std::size_t>(lg) : 0;
  return b;
}

BoundReport check_convergence_bound(std::span<const RunHistory> runs, double dual_optimum, double inner_iterations,
                                 std::size_t n, double lambda, double lipschitz) {
  if (!std::isfinite(dual_optimum)) throw ConfigError("bound check needs a finite dual optimum from the oracle");
  if (runs.empty()) throw ConfigError("bound check needs at least one run");
  std::size_t len = runs.front().rows.size();
  for (const auto& r : runs) len = std::min(len, r.rows.size());

  BoundReport rep;
  rep.mean_suboptimality.assign(len + 1, 0.0);
  // alpha^0 = 0 gives D = 0 for every run.
  rep.mean_suboptimality[0] = dual_optimum;
  for (const auto& r : runs)
    for (std::size_t t = 1; t <= len; ++t) rep.mean_suboptimality[t] += (dual_optimum - r.rows[t - 1].dual);
  for (std::size_t t = 1; t <= len; ++t) rep.mean_suboptimality[t] /= static_cast<double>(runs.size());

  rep.bound = make_convergence_bound(rep.mean_suboptimality[0], inner_iterations, n, lambda, lipschitz);
  rep.degenerate = !std::isfinite(rep.bound.G) || rep.bound.G > 1e12;
  for (std::size_t t = rep.bound.t0; t <= len; ++t) {
    const double ratio = rep.mean_suboptimality[t] / rep.bound.at(t);
    if (t == rep.bound.t0 || ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_t = t;
    }
  }
  rep.passed = rep.max_ratio <= 1.0;
  return rep;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_history_csv(std::ostream& out, const RunHistory& h) {
  out << "t,P,D,gap,acc,compute_s,enc_s,latency_s,cum_s\n";
  for (const auto& r : h.rows) {
    out << r.t << ',' << format_double(r.primal) << ',' << format_double(r.dual) << ',' << format_double(r.gap) << ','
        << format_double(r.accuracy) << ',' << format_double(r.compute_s) << ',' << format_double(r.encryption_s)
        << ',' << format_double(r.latency_s) << ',' << format_double(r.cumulative_s) << '\n';
  }
}

RunHistory read_history_csv(std::istream& in) {
  RunHistory h;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,P,D", 0) != 0) throw ParseError(1, "missing history CSV header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      double d = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ParseError(line_no, "bad number '" + cell + "'");
      v.push_back(d);
    }
    if (v.size() != 9) throw ParseError(line_no, "expected 9 columns");
    IterationRecord r;
    r.t = static_cast<std::size_t>(v[0]);
    r.primal = v[1];
    r.dual = v[2];
    r.gap = v[3];
    r.accuracy = v[4];
    r.compute_s = v[5];
    r.encryption_s = v[6];
    r.latency_s = v[7];
    r.cumulative_s = v[8];
    h.rows.push_back(r);
  }
  return h;
}

nlohmann::json history_metadata(const RunHistory& h) {
  OpCounts total;
  std::size_t skipped = 0;
  for (const auto& r : h.rows) {
    total += r.ops;
    skipped += r.skipped ? 1 : 0;
  }
  nlohmann::json j = h.metadata;
  j["algorithm"] = h.algorithm;
  j["seed"] = h.seed;
  j["iterations"] = h.rows.size();
  j["skipped_rounds"] = skipped;
  j["encryption_ops"] = {{"enc", total.enc}, {"dec", total.dec}, {"add", total.add}};
  if (!h.rows.empty()) j["total_time_s"] = h.rows.back().cumulative_s;
  return j;
}

}  // namespace hyfl
