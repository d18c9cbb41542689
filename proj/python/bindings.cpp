#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hyfl/centralized.hpp"
#include "hyfl/dataset.hpp"
#include "hyfl/error.hpp"
#include "hyfl/fedavg.hpp"
#include "hyfl/hyfdca.hpp"
#include "hyfl/metrics.hpp"
#include "hyfl/objective.hpp"
#include "hyfl/partition.hpp"
#include "hyfl/schedule.hpp"
#include "hyfl/tuning.hpp"

namespace py = pybind11;
using namespace hyfl;

namespace {

using Dense = py::array_t<double, py::array::c_style | py::array::forcecast>;

SparseDataset from_dense(const Dense& x, const std::vector<int>& y) {
  if (x.ndim() != 2) throw DimensionError("X must be two-dimensional");
  const auto r = x.unchecked<2>();
  if (static_cast<std::size_t>(r.shape(0)) != y.size()) throw DimensionError("X and y disagree on the sample count");
  SparseDataset d;
  d.n_features = static_cast<std::size_t>(r.shape(1));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    SparseVector row;
    for (py::ssize_t j = 0; j < r.shape(1); ++j)
      if (r(i, j) != 0.0) row.push_back({static_cast<std::size_t>(j), r(i, j)});
    d.samples.push_back(std::move(row));
  }
  d.labels = y;
  d.validate();
  return d;
}

py::array_t<double> to_dense(const SparseDataset& d) {
  py::array_t<double> out({d.n_samples(), d.n_features});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < d.n_samples(); ++i) {
    for (std::size_t j = 0; j < d.n_features; ++j) w(i, j) = 0.0;
    for (const auto& f : d.samples[i]) w(i, f.index) = f.value;
  }
  return out;
}

py::array_t<double> array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

RunOptions make_options(double lambda, std::size_t iterations, std::uint64_t seed, double latency) {
  RunOptions o;
  o.lambda = lambda;
  o.stop.iterations = iterations;
  o.seed = seed;
  o.timing.latency_per_rtc_s = latency;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid federated dual coordinate ascent simulator";

  auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", error.ptr());

  py::class_<SparseDataset>(m, "Dataset")
      .def(py::init(&from_dense), py::arg("X"), py::arg("y"))
      .def_property_readonly("n_samples", &SparseDataset::n_samples)
      .def_readonly("n_features", &SparseDataset::n_features)
      .def_property_readonly("nonzeros", &SparseDataset::nonzeros)
      .def_readonly("labels", &SparseDataset::labels)
      .def("to_dense", &to_dense)
      .def("normalized", [](const SparseDataset& d) { return normalize_samples(d); })
      .def("sparsity", [](const SparseDataset& d) { return compute_stats(d).sparsity; })
      .def(
          "split",
          [](const SparseDataset& d, double fraction, std::uint64_t seed) {
            auto s = train_validation_split(d, fraction, seed);
            return py::make_tuple(std::move(s.train), std::move(s.validation));
          },
          py::arg("train_fraction"), py::arg("seed") = 0)
      .def("__len__", &SparseDataset::n_samples);

  m.def(
      "synth_dataset",
      [](std::uint64_t seed, std::size_t n, std::size_t features, double margin, double noise) {
        return synth_dataset({seed, n, features, margin, noise});
      },
      py::arg("seed"), py::arg("n_samples"), py::arg("n_features"), py::arg("margin") = 0.0,
      py::arg("noise_rate") = 0.0);
  m.def(
      "load_libsvm",
      [](const std::filesystem::path& path, std::optional<double> threshold, std::optional<std::size_t> features) {
        ParseOptions o;
        o.expected_features = features;
        if (threshold) o.labels = LabelMapping::above(*threshold);
        return load_libsvm(path, o);
      },
      py::arg("path"), py::arg("label_threshold") = py::none(), py::arg("n_features") = py::none(),
      "Read a LIBSVM file (.gz is decompressed). With label_threshold, labels above it map to +1.");

  py::class_<Partition>(m, "Partition")
      .def_property_readonly("n_clients", &Partition::n_clients)
      .def_property_readonly("sample_groups", &Partition::sample_groups)
      .def_property_readonly("feature_groups", &Partition::feature_groups)
      .def_property_readonly("scheme", [](const Partition& p) { return to_string(p.scheme()); })
      .def("client_samples", [](const Partition& p, std::size_t k) { return p.client(k).samples; })
      .def("client_features", [](const Partition& p, std::size_t k) { return p.client(k).features; })
      .def("check_coverage", &Partition::check_coverage);

  m.def("partition_nonzero_split", &partition_nonzero_split, py::arg("data"), py::arg("sample_groups"),
        py::arg("feature_groups"), py::arg("seed") = 0);
  m.def("partition_horizontal", &partition_horizontal, py::arg("data"), py::arg("clients"));
  m.def("partition_vertical", &partition_vertical, py::arg("data"), py::arg("clients"), py::arg("seed") = py::none());
  m.def(
      "partition_quadrant",
      [](const SparseDataset& images, std::size_t clients, double bias) {
        auto q = partition_quadrant(images, clients, bias);
        return py::make_tuple(normalize_samples(std::move(q.data)), std::move(q.partition));
      },
      py::arg("images"), py::arg("total_clients"), py::arg("bias_value") = 10.0,
      "Returns (bias-augmented normalized dataset, partition).");

  py::class_<Schedule>(m, "Schedule")
      .def_static("full", &Schedule::full)
      .def_static("random_fraction", &Schedule::random_fraction, py::arg("fraction"), py::arg("seed") = 0)
      .def_static("cyclic", &Schedule::cyclic, py::arg("cycles"), py::arg("seed") = 0)
      .def("active", &Schedule::active, py::arg("t"), py::arg("n_clients"))
      .def("__repr__", &Schedule::describe);

  py::class_<HyfdcaParams>(m, "HyfdcaParams")
      .def(py::init([](std::size_t h, const std::string& gamma, const std::string& weight, const std::string& step) {
             HyfdcaParams p;
             p.inner_iterations = h;
             p.gamma = parse_gamma_rule(gamma);
             p.client_weight = parse_client_weight(weight);
             p.step = parse_step_rule(step);
             p.validate();
             return p;
           }),
           py::arg("inner_iterations") = 1, py::arg("gamma") = "constant", py::arg("client_weight") = "sample_share",
           py::arg("step") = "closed_form")
      .def_readwrite("inner_iterations", &HyfdcaParams::inner_iterations)
      .def("__repr__", [](const HyfdcaParams& p) { return "HyfdcaParams(" + to_json(p).dump() + ")"; });

  py::class_<FedAvgParams>(m, "FedAvgParams")
      .def(py::init([](std::size_t h, double a, double b) {
             FedAvgParams p{h, a, b};
             p.validate();
             return p;
           }),
           py::arg("inner_iterations") = 1, py::arg("a") = 1.0, py::arg("b") = 1.0)
      .def_readwrite("inner_iterations", &FedAvgParams::inner_iterations)
      .def_readwrite("a", &FedAvgParams::a)
      .def_readwrite("b", &FedAvgParams::b)
      .def("rate", &FedAvgParams::rate);

  py::class_<RunHistory>(m, "RunHistory")
      .def_readonly("algorithm", &RunHistory::algorithm)
      .def_readonly("seed", &RunHistory::seed)
      .def_property_readonly("primal", [](const RunHistory& h) { return array(h.primal()); })
      .def_property_readonly("dual", [](const RunHistory& h) { return array(h.dual()); })
      .def_property_readonly("accuracy", [](const RunHistory& h) { return array(h.accuracy()); })
      .def_property_readonly("cumulative_time", [](const RunHistory& h) { return array(h.cumulative_time()); })
      .def_property_readonly("final_w", [](const RunHistory& h) { return array(h.final_w); })
      .def_property_readonly("metadata_json", [](const RunHistory& h) { return h.metadata.dump(); })
      .def("__len__", [](const RunHistory& h) { return h.rows.size(); });

  m.def(
      "run_hyfdca",
      [](const SparseDataset& d, const Partition& p, const HyfdcaParams& params, const Schedule& s, double lambda,
         std::size_t iterations, std::uint64_t seed, double latency) {
        py::gil_scoped_release release;
        return run_hyfdca(d, p, params, s, make_options(lambda, iterations, seed, latency));
      },
      py::arg("data"), py::arg("partition"), py::arg("params"), py::arg("schedule") = Schedule::full(),
      py::arg("lambda_") = 1e-3, py::arg("iterations") = 100, py::arg("seed") = 0, py::arg("latency_per_rtc_s") = 0.0);
  m.def(
      "run_fedavg",
      [](const SparseDataset& d, const Partition& p, const FedAvgParams& params, const Schedule& s, double lambda,
         std::size_t iterations, std::uint64_t seed, double latency) {
        py::gil_scoped_release release;
        return run_fedavg(d, p, params, s, make_options(lambda, iterations, seed, latency));
      },
      py::arg("data"), py::arg("partition"), py::arg("params"), py::arg("schedule") = Schedule::full(),
      py::arg("lambda_") = 1e-3, py::arg("iterations") = 100, py::arg("seed") = 0, py::arg("latency_per_rtc_s") = 0.0);

  py::class_<CentralRun>(m, "CentralRun")
      .def_readonly("P_star", &CentralRun::P_star)
      .def_readonly("D_star", &CentralRun::D_star)
      .def_readonly("gap", &CentralRun::gap)
      .def_readonly("iterations", &CentralRun::iterations)
      .def_readonly("converged", &CentralRun::converged)
      .def_property_readonly("w_star", [](const CentralRun& r) { return array(r.w_star); })
      .def_property_readonly("alpha_star", [](const CentralRun& r) { return array(r.alpha_star); });
  m.def(
      "run_sdca_central",
      [](const SparseDataset& d, double lambda, double gap_target, std::uint64_t seed) {
        CentralOptions o;
        o.gap_target = gap_target;
        o.seed = seed;
        py::gil_scoped_release release;
        return run_sdca_central(d, {lambda, d.n_samples()}, o);
      },
      py::arg("data"), py::arg("lambda_"), py::arg("gap_target") = 1e-6, py::arg("seed") = 0);

  m.def(
      "primal_objective",
      [](const std::vector<double>& w, const SparseDataset& d, double lambda) {
        return primal_objective(w, d, {lambda, d.n_samples()});
      },
      py::arg("w"), py::arg("data"), py::arg("lambda_"));
  m.def(
      "dual_objective",
      [](const std::vector<double>& a, const SparseDataset& d, double lambda) {
        return dual_objective(a, d, {lambda, d.n_samples()});
      },
      py::arg("alpha"), py::arg("data"), py::arg("lambda_"));
  m.def(
      "closed_form_dual_step",
      [](int y, double alpha, double ip, double lambda, std::size_t n, double x_norm_sq) {
        return closed_form_dual_step(y, alpha, ip, {lambda, n}, x_norm_sq);
      },
      py::arg("y"), py::arg("alpha"), py::arg("inner_product"), py::arg("lambda_"), py::arg("n"),
      py::arg("x_norm_sq") = 1.0);
  m.def("accuracy", [](const std::vector<double>& w, const SparseDataset& d) { return accuracy(w, d); });
  m.def("relative_loss", &relative_loss, py::arg("primal"), py::arg("central_optimum"));
  m.def(
      "moving_average", [](const std::vector<double>& s, std::size_t window) { return array(moving_average(s, window)); },
      py::arg("series"), py::arg("window"));
  m.def(
      "encryption_seconds",
      [](std::uint64_t enc, std::uint64_t dec, std::uint64_t add) { return encryption_seconds({enc, dec, add}); },
      py::arg("enc"), py::arg("dec"), py::arg("add"));
  m.def(
      "iteration_charge",
      [](double compute_s, std::uint64_t enc, std::uint64_t dec, std::uint64_t add, double latency, double rtc) {
        TimingModel t;
        t.latency_per_rtc_s = latency;
        t.rtc_per_iteration = rtc;
        return t.charge(compute_s, {enc, dec, add}).total_s;
      },
      py::arg("compute_s"), py::arg("enc"), py::arg("dec"), py::arg("add"), py::arg("latency_per_rtc_s"),
      py::arg("rtc_per_iteration") = TimingModel::kHyfdcaRoundTrips);

  m.def(
      "gra_select",
      [](const std::vector<std::vector<double>>& metrics, const std::vector<bool>& larger_better, double zeta) {
        std::vector<Orientation> o;
        for (bool b : larger_better) o.push_back(b ? Orientation::larger_better : Orientation::smaller_better);
        const auto r = gra_select(metrics, o, zeta);
        return py::make_tuple(r.best, r.grades);
      },
      py::arg("metrics"), py::arg("larger_better"), py::arg("zeta") = 0.5,
      "Grey relational analysis. Returns (best index, grades).");
  m.def("sample_log_uniform", [](double lo, double hi, std::uint64_t seed, std::size_t count) {
    return sample_log_uniform({lo, hi}, seed, count);
  });
  m.def("inner_iterations", &inner_iterations, py::arg("iic"), py::arg("n_samples"), py::arg("total_clients"));

  m.attr("ENCRYPT_SECONDS") = kEncryptSeconds;
  m.attr("DECRYPT_SECONDS") = kDecryptSeconds;
  m.attr("ADD_SECONDS") = kAddSeconds;
}
