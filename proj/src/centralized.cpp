#include "hyfl/centralized.hpp"

#include <fstream>

#include "hyfl/error.hpp"
#include "hyfl/metrics.hpp"
#include "hyfl/rng.hpp"

namespace hyfl {

CentralRun run_sdca_central(const SparseDataset& data, const Regularization& reg, const CentralOptions& options) {
  reg.validate();
  if (reg.n != data.n_samples()) throw DimensionError("regularization N does not match the dataset");
  const std::size_t N = data.n_samples();
  CentralRun run;
  run.alpha_star.assign(N, 0.0);
  run.w_star.assign(data.n_features, 0.0);
  std::vector<double> norm_sq(N);
  for (std::size_t i = 0; i < N; ++i) norm_sq[i] = squared_norm(data.samples[i]);

  const double inv_ln = 1.0 / reg.lambda_n();
  const std::size_t check = options.check_every > 0 ? options.check_every : N;
  Rng rng(options.seed);

  auto measure = [&] {
    run.P_star = primal_objective(run.w_star, data, reg);
    run.D_star = dual_objective(run.alpha_star, data, reg);
    run.gap = run.P_star - run.D_star;
    return run.gap <= options.gap_target;
  };

  run.converged = measure();
  while (!run.converged && run.iterations < options.max_iterations) {
    const std::size_t i = rng.below(N);
    ++run.iterations;
    if (norm_sq[i] == 0.0) continue;
    const double ip = dot(data.samples[i], run.w_star);
    const double d = closed_form_dual_step(data.labels[i], run.alpha_star[i], ip, reg, norm_sq[i]);
    if (d != 0.0) {
      run.alpha_star[i] += d;
      axpy(d * inv_ln, data.samples[i], run.w_star);
    }
    if (run.iterations % check == 0) run.converged = measure();
  }
  if (!run.converged) run.converged = measure();
  // Resynchronize w with alpha to remove accumulated rounding.
  run.w_star = dual_to_primal(run.alpha_star, data, reg);
  measure();
  return run;
}

LambdaChoice tune_lambda(const SparseDataset& train, const SparseDataset& validation, std::span<const double> candidates,
                         const CentralOptions& options) {
  if (candidates.empty()) throw ConfigError("lambda tuning needs at least one candidate");
  LambdaChoice best;
  double best_acc = -1.0;
  for (double lambda : candidates) {
    const auto run = run_sdca_central(train, {lambda, train.n_samples()}, options);
    const double acc = accuracy(run.w_star, validation);
    best.accuracies.push_back(acc);
    if (acc > best_acc || (acc == best_acc && lambda < best.lambda)) {
      best_acc = acc;
      best.lambda = lambda;
    }
  }
  return best;
}

nlohmann::json to_json(const CentralRun& run) {
  return {{"P_star", run.P_star},         {"D_star", run.D_star},     {"gap", run.gap},
          {"iterations", run.iterations}, {"converged", run.converged}, {"w_star", run.w_star},
          {"alpha_star", run.alpha_star}};
}

CentralRun central_run_from_json(const nlohmann::json& j) {
  CentralRun run;
  try {
    run.P_star = j.at("P_star").get<double>();
    run.D_star = j.value("D_star", run.P_star);
    run.gap = j.value("gap", 0.0);
    run.iterations = j.value("iterations", std::size_t{0});
    run.converged = j.value("converged", true);
    if (j.contains("w_star")) run.w_star = j.at("w_star").get<std::vector<double>>();
    if (j.contains("alpha_star")) run.alpha_star = j.at("alpha_star").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("central run: ") + e.what());
  }
  return run;
}

CentralRun load_central_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("central run not found: " + path.string());
  try {
    return central_run_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("central run " + path.string() + ": " + e.what());
  }
}

}  // namespace hyfl
