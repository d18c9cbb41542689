#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hyfl/cli/commands.hpp"
#include "hyfl/cli/config.hpp"
#include "hyfl/error.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

double parse_latency(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || v < 0.0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw hyfl::ConfigError("--latency expects a non-negative number of seconds, got '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string latency;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    cmd->add_option("--seed", seed, "Master seed (overrides seed)");
    cmd->add_option("--latency", latency, "Seconds per round trip: 0, 0.2575, 0.8 or custom");
  };

  auto* run = app.add_subcommand("run", "Run the configured algorithm and write its history");
  add_common(run);
  auto* central = app.add_subcommand("central", "Solve centrally and write the reference optimum");
  add_common(central);
  auto* tune = app.add_subcommand("tune", "Random search plus grey relational selection");
  add_common(tune);
  tune->add_option("--jobs", jobs, "Parallel evaluations")->check(CLI::PositiveNumber);
  auto* info = app.add_subcommand("partition-info", "Summarize the client partition");
  add_common(info);

  auto* plot = app.add_subcommand("plot", "Render history CSVs to SVG");
  std::vector<std::string> histories;
  hyfl::cli::PlotOptions plot_options;
  std::string x_axis = "iteration";
  std::optional<double> p_star;
  plot->add_option("histories", histories, "History CSV files")->required();
  plot->add_option("--out", out_dir, "Output directory")->required();
  plot->add_option("--window", plot_options.window, "Moving-average window");
  plot->add_option("--p-star", p_star, "Central optimum; plots relative loss");
  plot->add_option("--x-axis", x_axis, "iteration (t_R) or time (T_R)")
      ->check(CLI::IsMember({"iteration", "time"}));
  plot->add_option("--title", plot_options.title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (plot->parsed()) {
      plot_options.p_star = p_star;
      plot_options.x_axis = x_axis == "time" ? hyfl::cli::XAxis::time : hyfl::cli::XAxis::iteration;
      std::vector<std::filesystem::path> paths(histories.begin(), histories.end());
      hyfl::cli::cmd_plot(paths, plot_options, out_dir, std::cout);
      return 0;
    }

    auto config = hyfl::cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!latency.empty()) config.latency_per_rtc_s = parse_latency(latency);
    if (!out_dir.empty()) config.output_dir = out_dir;

    if (run->parsed()) hyfl::cli::cmd_run(config, config.output_dir, std::cout);
    if (central->parsed()) hyfl::cli::cmd_central(config, config.output_dir, std::cout);
    if (tune->parsed()) hyfl::cli::cmd_tune(config, config.output_dir, jobs, std::cout);
    if (info->parsed()) hyfl::cli::cmd_partition_info(config, config.output_dir, std::cout);
  } catch (const hyfl::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
