#include "hyfl/cli/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "hyfl/centralized.hpp"
#include "hyfl/error.hpp"

namespace hyfl::cli {

RunHistory run_configured(const ExperimentConfig& config, const PreparedExperiment& prepared) {
  const auto options = run_options(config, prepared);
  const auto schedule = config.schedule.build();
  switch (config.algorithm) {
    case Algorithm::hyfdca:
      return run_hyfdca(prepared.train, prepared.partition, resolved_hyfdca(config, prepared), schedule, options);
    case Algorithm::fedavg:
      return run_fedavg(prepared.train, prepared.partition, resolved_fedavg(config, prepared), schedule, options);
    case Algorithm::central: break;
  }
  throw ConfigError("run_configured handles hyfdca and fedavg only");
}

double reference_optimum(const ExperimentConfig& config, const PreparedExperiment& prepared) {
  if (config.p_c_star) return *config.p_c_star;
  if (!config.central_run.empty()) return load_central_run(config.central_run).P_star;
  const auto run = run_sdca_central(prepared.train, {config.lambda, prepared.train.n_samples()}, config.central);
  return run.P_star;
}

SearchOutcome random_search(const ExperimentConfig& config, const PreparedExperiment& prepared, Algorithm algorithm,
                            std::size_t jobs, double central_optimum) {
  if (algorithm == Algorithm::central) throw ConfigError("tuning applies to hyfdca and fedavg");
  const std::size_t N = prepared.train.n_samples();
  const std::size_t clients = prepared.partition.n_clients();
  const auto space = algorithm == Algorithm::hyfdca ? SearchSpace::hyfdca(N, clients) : SearchSpace::fedavg(N, clients);

  SearchOutcome out;
  out.points = sample_search_points(space, config.tune.budget, config.tune.seed, N, clients);
  out.histories.resize(out.points.size());
  const double rtc = algorithm == Algorithm::hyfdca ? TimingModel::kHyfdcaRoundTrips : TimingModel::kFedAvgRoundTrips;

  auto evaluate = [&](std::size_t i) {
    ExperimentConfig c = config;
    c.algorithm = algorithm;
    auto& point = out.points[i];
    if (algorithm == Algorithm::hyfdca) {
      c.hyfdca_iic.reset();
      c.hyfdca.inner_iterations = point.inner_iterations;
    } else {
      c.fedavg_iic.reset();
      c.fedavg.inner_iterations = point.inner_iterations;
      c.fedavg.a = point.a;
      c.fedavg.b = point.b;
    }
    out.histories[i] = run_configured(c, prepared);
    const auto loss = out.histories[i].primal();
    point.divergent = is_divergent(loss, config.tune.window);
    if (!point.divergent) point.metrics = evaluate_metrics(out.histories[i], rtc, central_optimum);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, out.points.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < out.points.size(); i = next++) {
      try {
        evaluate(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  out.selected = select_point(out.points);
  return out;
}

}  // namespace hyfl::cli
