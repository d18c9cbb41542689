#include "hyfl/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "hyfl/centralized.hpp"
#include "hyfl/cli/experiment.hpp"
#include "hyfl/cli/plot.hpp"
#include "hyfl/error.hpp"

namespace hyfl::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace

void cmd_run(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  if (config.algorithm == Algorithm::central) {
    cmd_central(config, out_dir, log);
    return;
  }
  const auto prepared = prepare(config);
  const auto history = run_configured(config, prepared);
  const std::string stem = to_string(config.algorithm) + "_seed" + std::to_string(config.seed);
  {
    auto out = open_output(out_dir / (stem + ".csv"));
    write_history_csv(out, history);
  }
  auto meta = history_metadata(history);
  meta["config"] = to_json(config);
  write_json(out_dir / (stem + ".json"), meta);

  const auto& last = history.rows.back();
  log << "algorithm " << history.algorithm << ", " << history.rows.size() << " iterations\n";
  log << "final P " << format_double(last.primal) << '\n';
  if (config.p_c_star || !config.central_run.empty())
    log << "final P_R " << format_double(relative_loss(last.primal, reference_optimum(config, prepared))) << '\n';
  log << "final accuracy " << format_double(last.accuracy) << '\n';
  log << "simulated time " << format_double(last.cumulative_s) << " s\n";
}

void cmd_central(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto prepared = prepare(config);
  const auto run = run_sdca_central(prepared.train, {config.lambda, prepared.train.n_samples()}, config.central);
  auto j = to_json(run);
  j["lambda"] = config.lambda;
  j["train_accuracy"] = accuracy(run.w_star, prepared.train);
  if (prepared.validation.n_samples() > 0) j["validation_accuracy"] = accuracy(run.w_star, prepared.validation);
  write_json(out_dir / "central.json", j);
  log << "P_C* " << format_double(run.P_star) << ", gap " << format_double(run.gap) << ", " << run.iterations
      << " coordinate steps" << (run.converged ? "" : " (gap target not reached)") << '\n';
}

void cmd_tune(const ExperimentConfig& config, const fs::path& out_dir, std::size_t jobs, std::ostream& log) {
  if (config.algorithm == Algorithm::central) throw ConfigError("tune needs algorithm hyfdca or fedavg");
  const auto prepared = prepare(config);
  const double reference = reference_optimum(config, prepared);
  const auto outcome = random_search(config, prepared, config.algorithm, jobs, reference);
  const std::string stem = "tune_" + to_string(config.algorithm);
  {
    auto out = open_output(out_dir / (stem + ".csv"));
    write_search_csv(out, outcome.points);
  }
  const auto& best = outcome.points[outcome.selected];
  nlohmann::json selected = {{"index", outcome.selected},
                             {"iic", best.iic},
                             {"inner_iterations", best.inner_iterations},
                             {"grade", best.grade},
                             {"p_c_star", reference}};
  if (config.algorithm == Algorithm::fedavg) {
    selected["a"] = best.a;
    selected["b"] = best.b;
  }
  const auto values = best.metrics.values();
  for (std::size_t m = 0; m < values.size(); ++m) selected["metrics"][MetricVector::names()[m]] = values[m];
  write_json(out_dir / (stem + "_selected.json"), selected);

  std::size_t divergent = 0;
  for (const auto& p : outcome.points) divergent += p.divergent ? 1 : 0;
  log << "evaluated " << outcome.points.size() << " points (" << divergent << " divergent)\n";
  log << "selected #" << outcome.selected << ": IIC " << format_double(best.iic) << ", H " << best.inner_iterations;
  if (config.algorithm == Algorithm::fedavg) log << ", a " << format_double(best.a) << ", b " << format_double(best.b);
  log << ", grade " << format_double(best.grade) << '\n';
}

void cmd_partition_info(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto prepared = prepare(config);
  const FederatedLayout layout(prepared.train, prepared.partition);
  const auto summary = partition_summary(prepared.partition, layout);
  write_json(out_dir / "partition.json", summary);
  log << summary.dump(2) << '\n';
}

void cmd_plot(const std::vector<fs::path>& paths, const PlotOptions& options, const fs::path& out_dir,
              std::ostream& log) {
  if (paths.empty()) throw ConfigError("plot needs at least one history CSV");
  std::vector<RunHistory> runs;
  std::vector<std::string> names;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw ConfigError("history not found: " + p.string());
    runs.push_back(read_history_csv(in));
    names.push_back(p.stem().string());
  }
  std::size_t shortest = runs.front().rows.size();
  for (const auto& r : runs) shortest = std::min(shortest, r.rows.size());
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].rows.size() != shortest) {
      log << "warning: " << names[i] << " has " << runs[i].rows.size() << " rows; truncating to " << shortest << '\n';
      runs[i].rows.resize(shortest);
    }

  const auto rel = relative_measures(runs, options.window);
  std::vector<Series> loss, acc;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& x = options.x_axis == XAxis::iteration ? rel[i].iteration : rel[i].time;
    auto p = runs[i].primal();
    if (options.p_star)
      for (auto& v : p) v = relative_loss(v, *options.p_star);
    loss.push_back({names[i], x, moving_average(p, options.window)});
    acc.push_back({names[i], x, moving_average(runs[i].accuracy(), options.window)});
  }
  const std::string x_label = options.x_axis == XAxis::iteration ? "t_R" : "T_R";
  const std::string loss_label = options.p_star ? "P_R (smoothed)" : "P (smoothed)";
  {
    auto out = open_output(out_dir / "loss.svg");
    out << render_svg(loss, {options.title, x_label, loss_label});
  }
  {
    auto out = open_output(out_dir / "accuracy.svg");
    out << render_svg(acc, {options.title, x_label, "validation accuracy (smoothed)"});
  }
  log << "wrote " << (out_dir / "loss.svg").string() << " and " << (out_dir / "accuracy.svg").string() << '\n';
}

}  // namespace hyfl::cli
