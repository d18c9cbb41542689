#include "hyfl/cli/config.hpp"

#include <cstdlib>
#include <fstream>

#include "hyfl/error.hpp"
#include "hyfl/tuning.hpp"

namespace hyfl::cli {

namespace {

using nlohmann::json;

std::string kind_name(Schedule::Kind k) {
  switch (k) {
    case Schedule::Kind::full: return "full";
    case Schedule::Kind::random_fraction: return "random_fraction";
    case Schedule::Kind::cyclic: return "cyclic";
  }
  return "full";
}

Schedule::Kind parse_kind(const std::string& s) {
  if (s == "full") return Schedule::Kind::full;
  if (s == "random_fraction" || s == "fraction") return Schedule::Kind::random_fraction;
  if (s == "cyclic") return Schedule::Kind::cyclic;
  throw ConfigError("unknown schedule kind '" + s + "'");
}

json labels_json(const LabelMapping& m) {
  switch (m.kind) {
    case LabelMapping::Kind::binary: return {{"kind", "binary"}};
    case LabelMapping::Kind::threshold: return {{"kind", "threshold"}, {"threshold", m.threshold}};
    case LabelMapping::Kind::sets: return {{"kind", "sets"}, {"positive", m.positive}, {"negative", m.negative}};
  }
  return {};
}

LabelMapping labels_from(const json& j) {
  const auto kind = j.value("kind", std::string("binary"));
  if (kind == "binary") return LabelMapping::binary();
  if (kind == "threshold") return LabelMapping::above(j.at("threshold").get<double>());
  if (kind == "mnist") return LabelMapping::mnist_default();
  if (kind == "sets")
    return LabelMapping::explicit_sets(j.at("positive").get<std::vector<double>>(),
                                       j.at("negative").get<std::vector<double>>());
  throw ConfigError("unknown label mapping '" + kind + "'");
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

Schedule ScheduleConfig::build() const {
  switch (kind) {
    case Schedule::Kind::full: return Schedule::full();
    case Schedule::Kind::random_fraction: return Schedule::random_fraction(fraction, seed);
    case Schedule::Kind::cyclic: return Schedule::cyclic(cycles, seed);
  }
  return Schedule::full();
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::hyfdca: return "hyfdca";
    case Algorithm::fedavg: return "fedavg";
    case Algorithm::central: return "central";
  }
  return "hyfdca";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "hyfdca") return Algorithm::hyfdca;
  if (s == "fedavg") return Algorithm::fedavg;
  if (s == "central") return Algorithm::central;
  throw ConfigError("unknown algorithm '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (dataset.path.empty() && !dataset.synth) throw ConfigError("dataset needs a path or a synth spec");
  if (!(split.train_fraction > 0.0) || split.train_fraction > 1.0)
    throw ConfigError("split.train_fraction must be in (0, 1]");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (stop.iterations == 0 && !(stop.wall_time_s > 0.0)) throw ConfigError("stop needs iterations or wall_time_s");
  if (latency_per_rtc_s < 0.0 || seconds_per_op < 0.0) throw ConfigError("timing values must be non-negative");
  if (schedule.kind == Schedule::Kind::random_fraction && !(schedule.fraction > 0.0 && schedule.fraction <= 1.0))
    throw ConfigError("schedule.fraction must be in (0, 1]");
  if (schedule.kind == Schedule::Kind::cyclic && schedule.cycles == 0) throw ConfigError("schedule.cycles must be >= 1");
  if (hyfdca_iic && !(*hyfdca_iic > 0.0)) throw ConfigError("hyfdca.iic must be positive");
  if (fedavg_iic && !(*fedavg_iic > 0.0)) throw ConfigError("fedavg.iic must be positive");
  if (p_c_star && !(*p_c_star > 0.0)) throw ConfigError("reference.p_c_star must be positive");
  hyfdca.validate();
  fedavg.validate();
}

json to_json(const ExperimentConfig& c) {
  json dataset = {{"path", c.dataset.path},
                  {"label_mapping", labels_json(c.dataset.labels)},
                  {"expected_features", optional_json(c.dataset.expected_features)},
                  {"normalize", c.dataset.normalize}};
  if (c.dataset.synth) {
    const auto& s = *c.dataset.synth;
    dataset["synth"] = {{"seed", s.seed},
                        {"n_samples", s.n_samples},
                        {"n_features", s.n_features},
                        {"margin", s.margin},
                        {"noise_rate", s.noise_rate}};
  } else {
    dataset["synth"] = nullptr;
  }
  json hy = hyfl::to_json(c.hyfdca);
  hy["iic"] = optional_json(c.hyfdca_iic);
  json fa = hyfl::to_json(c.fedavg);
  fa["iic"] = optional_json(c.fedavg_iic);
  return {
      {"dataset", dataset},
      {"split", {{"train_fraction", c.split.train_fraction}, {"seed", c.split.seed}}},
      {"partition",
       {{"scheme", to_string(c.partition.scheme)},
        {"sample_groups", c.partition.sample_groups},
        {"feature_groups", c.partition.feature_groups},
        {"total_clients", c.partition.total_clients},
        {"bias_value", c.partition.bias_value},
        {"seed", optional_json(c.partition.seed)}}},
      {"algorithm", to_string(c.algorithm)},
      {"hyfdca", hy},
      {"fedavg", fa},
      {"central",
       {{"max_iterations", c.central.max_iterations},
        {"seed", c.central.seed},
        {"gap_target", c.central.gap_target},
        {"check_every", c.central.check_every}}},
      {"schedule",
       {{"kind", kind_name(c.schedule.kind)},
        {"fraction", c.schedule.fraction},
        {"cycles", c.schedule.cycles},
        {"seed", c.schedule.seed}}},
      {"lambda", c.lambda},
      {"stop", {{"iterations", c.stop.iterations}, {"wall_time_s", c.stop.wall_time_s}}},
      {"timing", {{"latency_per_rtc_s", c.latency_per_rtc_s}, {"seconds_per_op", c.seconds_per_op}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"reference", {{"p_c_star", optional_json(c.p_c_star)}, {"central_run", c.central_run}}},
      {"tune", {{"budget", c.tune.budget}, {"seed", c.tune.seed}, {"window", c.tune.window}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      c.dataset.path = d.value("path", std::string());
      if (d.contains("synth") && !d.at("synth").is_null()) {
        const auto& s = d.at("synth");
        SynthSpec spec;
        spec.seed = s.value("seed", std::uint64_t{0});
        spec.n_samples = s.at("n_samples").get<std::size_t>();
        spec.n_features = s.at("n_features").get<std::size_t>();
        spec.margin = s.value("margin", 0.0);
        spec.noise_rate = s.value("noise_rate", 0.0);
        c.dataset.synth = spec;
      }
      if (d.contains("label_mapping")) c.dataset.labels = labels_from(d.at("label_mapping"));
      c.dataset.expected_features = optional_from<std::size_t>(d, "expected_features");
      c.dataset.normalize = d.value("normalize", true);
    }
    if (j.contains("split")) {
      c.split.train_fraction = j.at("split").value("train_fraction", c.split.train_fraction);
      c.split.seed = j.at("split").value("seed", c.split.seed);
    }
    if (j.contains("partition")) {
      const auto& p = j.at("partition");
      if (p.contains("scheme")) c.partition.scheme = parse_partition_scheme(p.at("scheme").get<std::string>());
      c.partition.sample_groups = p.value("sample_groups", c.partition.sample_groups);
      c.partition.feature_groups = p.value("feature_groups", c.partition.feature_groups);
      c.partition.total_clients = p.value("total_clients", c.partition.total_clients);
      c.partition.bias_value = p.value("bias_value", c.partition.bias_value);
      if (p.contains("seed")) c.partition.seed = optional_from<std::uint64_t>(p, "seed");
    }
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("hyfdca")) {
      c.hyfdca = hyfdca_params_from_json(j.at("hyfdca"));
      c.hyfdca_iic = optional_from<double>(j.at("hyfdca"), "iic");
    }
    if (j.contains("fedavg")) {
      c.fedavg = fedavg_params_from_json(j.at("fedavg"));
      c.fedavg_iic = optional_from<double>(j.at("fedavg"), "iic");
    }
    if (j.contains("central")) {
      const auto& ce = j.at("central");
      c.central.max_iterations = ce.value("max_iterations", c.central.max_iterations);
      c.central.seed = ce.value("seed", c.central.seed);
      c.central.gap_target = ce.value("gap_target", c.central.gap_target);
      c.central.check_every = ce.value("check_every", c.central.check_every);
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      if (s.contains("kind")) c.schedule.kind = parse_kind(s.at("kind").get<std::string>());
      c.schedule.fraction = s.value("fraction", c.schedule.fraction);
      c.schedule.cycles = s.value("cycles", c.schedule.cycles);
      c.schedule.seed = s.value("seed", c.schedule.seed);
    }
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("stop")) {
      c.stop.iterations = j.at("stop").value("iterations", std::size_t{0});
      c.stop.wall_time_s = j.at("stop").value("wall_time_s", 0.0);
    }
    if (j.contains("timing")) {
      const auto& t = j.at("timing");
      c.latency_per_rtc_s = t.value("latency_per_rtc_s", c.latency_per_rtc_s);
      c.seconds_per_op = t.value("seconds_per_op", c.seconds_per_op);
    }
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("reference")) {
      c.p_c_star = optional_from<double>(j.at("reference"), "p_c_star");
      c.central_run = j.at("reference").value("central_run", std::string());
    }
    if (j.contains("tune")) {
      const auto& t = j.at("tune");
      c.tune.budget = t.value("budget", c.tune.budget);
      c.tune.seed = t.value("seed", c.tune.seed);
      c.tune.window = t.value("window", c.tune.window);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

std::filesystem::path resolve_data_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative())
    if (const char* dir = std::getenv("HYFL_DATA_DIR"); dir && *dir) return std::filesystem::path(dir) / p;
  return p;
}

PreparedExperiment prepare(const ExperimentConfig& config) {
  config.validate();
  SparseDataset full;
  if (config.dataset.synth) {
    full = synth_dataset(*config.dataset.synth);
  } else {
    const auto path = resolve_data_path(config.dataset.path);
    if (!std::filesystem::exists(path)) throw ConfigError("dataset not found: " + path.string());
    full = load_libsvm(path, {config.dataset.expected_features, config.dataset.labels});
  }

  SparseDataset train, validation;
  if (config.split.train_fraction < 1.0) {
    auto split = train_validation_split(full, config.split.train_fraction, config.split.seed);
    train = std::move(split.train);
    validation = std::move(split.validation);
  } else {
    train = std::move(full);
  }

  const auto& pc = config.partition;
  auto finish = [&](SparseDataset& d) {
    if (config.dataset.normalize) d = normalize_samples(std::move(d));
  };

  if (pc.scheme == PartitionScheme::quadrant) {
    auto q = partition_quadrant(train, pc.total_clients, pc.bias_value);
    if (validation.n_samples() > 0) validation = append_bias_feature(validation, pc.bias_value);
    finish(q.data);
    finish(validation);
    return {std::move(q.data), std::move(validation), std::move(q.partition)};
  }

  finish(train);
  finish(validation);
  switch (pc.scheme) {
    case PartitionScheme::nonzero_split: {
      auto p = partition_nonzero_split(train, pc.sample_groups, pc.feature_groups, pc.seed.value_or(0));
      return {std::move(train), std::move(validation), std::move(p)};
    }
    case PartitionScheme::horizontal: {
      auto p = partition_horizontal(train, pc.sample_groups);
      return {std::move(train), std::move(validation), std::move(p)};
    }
    case PartitionScheme::vertical: {
      auto p = partition_vertical(train, pc.feature_groups, pc.seed);
      return {std::move(train), std::move(validation), std::move(p)};
    }
    case PartitionScheme::quadrant: break;
  }
  throw ConfigError("unsupported partition scheme");
}

RunOptions run_options(const ExperimentConfig& config, const PreparedExperiment& prepared) {
  RunOptions o;
  o.lambda = config.lambda;
  o.stop = config.stop;
  o.timing.latency_per_rtc_s = config.latency_per_rtc_s;
  o.timing.seconds_per_op = config.seconds_per_op;
  o.seed = config.seed;
  o.validation = prepared.validation_or_null();
  return o;
}

HyfdcaParams resolved_hyfdca(const ExperimentConfig& config, const PreparedExperiment& prepared) {
  HyfdcaParams p = config.hyfdca;
  if (config.hyfdca_iic)
    p.inner_iterations =
        inner_iterations(*config.hyfdca_iic, prepared.train.n_samples(), prepared.partition.n_clients());
  return p;
}

FedAvgParams resolved_fedavg(const ExperimentConfig& config, const PreparedExperiment& prepared) {
  FedAvgParams p = config.fedavg;
  if (config.fedavg_iic)
    p.inner_iterations =
        inner_iterations(*config.fedavg_iic, prepared.train.n_samples(), prepared.partition.n_clients());
  return p;
}

}  // namespace hyfl::cli
