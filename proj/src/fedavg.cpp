#include "hyfl/fedavg.hpp"

#include <algorithm>

#include "hyfl/error.hpp"
#include "hyfl/objective.hpp"
#include "hyfl/rng.hpp"

namespace hyfl {

namespace {
constexpr std::uint64_t kSgdStream = 0x7367640000000002ULL;
}

void FedAvgParams::validate() const {
  if (inner_iterations == 0) throw ConfigError("FedAvg needs H >= 1");
  if (!(a > 0.0)) throw ConfigError("FedAvg needs a > 0");
  if (!(b >= 0.0)) throw ConfigError("FedAvg needs b >= 0");
}

std::size_t local_sgd(const ClientBlock& block, std::span<double> w_local, const FedAvgParams& params, double lambda,
                      std::size_t t, std::uint64_t seed) {
  if (block.n_samples() == 0) return 0;
  Rng rng(seed);
  const double gamma = params.rate(t);
  std::size_t work = 0;
  for (std::size_t h = 0; h < params.inner_iterations; ++h) {
    const std::size_t li = rng.below(block.n_samples());
    const double z = block.dot(li, w_local);
    const double g = hinge_subgradient(block.labels[li], z);
    const double shrink = 1.0 - gamma * lambda;
    for (auto& v : w_local) v *= shrink;
    if (g != 0.0)
      for (const auto& f : block.row(li)) w_local[f.index] -= gamma * g * f.value;
    work += w_local.size() + 2 * block.row(li).size();
  }
  return work;
}

void average_overlaps(std::span<const std::size_t> active, const std::vector<std::vector<double>>& local_w,
                      const FederatedLayout& layout, std::span<double> w) {
  std::vector<bool> is_active(layout.n_clients(), false);
  for (std::size_t k : active) is_active[k] = true;
  for (std::size_t m = 0; m < layout.n_features(); ++m) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& h : layout.feature_holders(m)) {
      if (!is_active[h.client]) continue;
      sum += local_w[h.client][h.local];
      ++count;
    }
    if (count > 0) w[m] = sum / static_cast<double>(count);
  }
}

RunHistory run_fedavg(const SparseDataset& data, const Partition& partition, const FedAvgParams& params,
                      const Schedule& schedule, const RunOptions& options) {
  params.validate();
  const Regularization reg{options.lambda, data.n_samples()};
  reg.validate();
  partition.check_coverage(data);
  const FederatedLayout layout(data, partition);
  const std::size_t K = layout.n_clients();
  TimingModel timing = options.timing;
  timing.rtc_per_iteration = TimingModel::kFedAvgRoundTrips;
  const SparseDataset& eval = options.validation ? *options.validation : data;

  RunHistory h;
  h.algorithm = "fedavg";
  h.seed = options.seed;
  std::vector<double> w(data.n_features, 0.0);
  std::vector<std::vector<double>> local_w(K);
  double elapsed = 0.0;
  for (std::size_t t = 1; !options.stop.done(t - 1, elapsed); ++t) {
    const auto active = schedule.active(t, K);
    IterationRecord rec;
    rec.t = t;
    rec.active_clients = active.size();
    std::size_t slowest = 0;
    if (active.empty()) {
      rec.skipped = true;
    } else {
      for (std::size_t k : active) {
        const auto& block = layout.block(k);
        auto& wk = local_w[k];
        wk.resize(block.n_features());
        for (std::size_t lm = 0; lm < block.n_features(); ++lm) wk[lm] = w[block.features[lm]];
        const std::size_t work =
            local_sgd(block, wk, params, options.lambda, t, derive_seed(options.seed, {kSgdStream, k, t}));
        slowest = std::max(slowest, work);
      }
      average_overlaps(active, local_w, layout, w);
    }
    const auto charge = rec.skipped ? IterationCharge{}
                                    : timing.charge(static_cast<double>(slowest) * timing.seconds_per_op, rec.ops);
    rec.compute_s = charge.compute_s;
    rec.encryption_s = charge.encryption_s;
    rec.latency_s = charge.latency_s;
    elapsed += charge.total_s;
    rec.cumulative_s = elapsed;
    rec.primal = primal_objective(w, data, reg);
    rec.accuracy = accuracy(w, eval);
    h.rows.push_back(rec);
  }

  h.final_w = std::move(w);
  h.metadata["params"] = to_json(params);
  h.metadata["schedule"] = schedule.describe();
  h.metadata["lambda"] = options.lambda;
  h.metadata["n_clients"] = K;
  h.metadata["partition"] = to_string(partition.scheme());
  h.metadata["rtc_per_iteration"] = timing.rtc_per_iteration;
  h.metadata["latency_per_rtc_s"] = timing.latency_per_rtc_s;
  return h;
}

nlohmann::json to_json(const FedAvgParams& p) {
  return {{"inner_iterations", p.inner_iterations}, {"a", p.a}, {"b", p.b}};
}

FedAvgParams fedavg_params_from_json(const nlohmann::json& j) {
  FedAvgParams p;
  try {
    if (j.contains("inner_iterations")) p.inner_iterations = j.at("inner_iterations").get<std::size_t>();
    if (j.contains("a")) p.a = j.at("a").get<double>();
    if (j.contains("b")) p.b = j.at("b").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("fedavg params: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace hyfl
