#include <doctest.h>

#include <cmath>

#include "hyfl/dataset.hpp"
#include "hyfl/error.hpp"
#include "hyfl/fedavg.hpp"
#include "hyfl/objective.hpp"
#include "hyfl/partition.hpp"
#include "hyfl/rng.hpp"

using namespace hyfl;

namespace {

SparseDataset dense_set(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  SparseDataset d;
  d.n_features = m;
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector x;
    for (std::size_t j = 0; j < m; ++j) x.push_back({j, rng.uniform(-1.0, 1.0)});
    d.samples.push_back(x);
    d.labels.push_back(rng.uniform() < 0.5 ? 1 : -1);
  }
  return normalize_samples(d);
}

}  // namespace

TEST_CASE("learning rate examples") {
  FedAvgParams p;
  CHECK(p.rate(1) == 0.5);
  CHECK(p.rate(4) == doctest::Approx(1.0 / 3.0));
  p.a = 2.0;
  p.b = 0.0;
  CHECK(p.rate(16) == 0.5);
  CHECK_THROWS_AS((FedAvgParams{0, 1, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((FedAvgParams{1, 0, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((FedAvgParams{1, 1, -1}.validate()), ConfigError);
}

TEST_CASE("a satisfied margin only shrinks the weights") {
  SparseDataset d;
  d.n_features = 2;
  d.samples = {{{0, 1.0}}};
  d.labels = {1};
  const FederatedLayout layout(d, partition_horizontal(d, 1));
  std::vector<double> w{5.0, -2.0};
  FedAvgParams p{3, 1.0, 1.0};
  local_sgd(layout.block(0), w, p, 0.1, 1, 7);
  const double s = std::pow(1.0 - 0.5 * 0.1, 3);
  CHECK(w[0] == doctest::Approx(5.0 * s));
  CHECK(w[1] == doctest::Approx(-2.0 * s));
}

TEST_CASE("a violated margin moves toward the label") {
  SparseDataset d;
  d.n_features = 1;
  d.samples = {{{0, 1.0}}};
  d.labels = {-1};
  const FederatedLayout layout(d, partition_horizontal(d, 1));
  std::vector<double> w{0.0};
  local_sgd(layout.block(0), w, FedAvgParams{1, 1.0, 1.0}, 0.1, 1, 0);
  CHECK(w[0] == doctest::Approx(-0.5));
}

TEST_CASE("overlap averaging examples") {
  SparseDataset d;
  d.n_features = 3;
  d.samples = {{{0, 1.0}, {1, 1.0}, {2, 1.0}}, {{0, 1.0}, {1, 1.0}, {2, 1.0}}};
  d.labels = {1, 1};
  const auto p = partition_horizontal(d, 2);
  const FederatedLayout layout(d, p);
  std::vector<std::vector<double>> local{{1.0, 2.0, 3.0}, {3.0, 4.0, 5.0}};
  std::vector<double> w{9.0, 9.0, 9.0};
  std::vector<std::size_t> both{0, 1};
  average_overlaps(both, local, layout, w);
  CHECK(w == std::vector<double>{2.0, 3.0, 4.0});
  std::vector<std::size_t> one{1};
  average_overlaps(one, local, layout, w);
  CHECK(w == std::vector<double>{3.0, 4.0, 5.0});

  const auto v = partition_vertical(d, 3, std::nullopt);
  const FederatedLayout vl(d, v);
  std::vector<std::vector<double>> vloc{{1.0}, {2.0}, {3.0}};
  std::vector<double> vw{0.0, 0.0, 0.0};
  std::vector<std::size_t> first_two{0, 1};
  average_overlaps(first_two, vloc, vl, vw);
  CHECK(vw == std::vector<double>{1.0, 2.0, 0.0});
}

TEST_CASE("averaging ignores the order of active clients") {
  const auto d = dense_set(12, 4, 1);
  const FederatedLayout layout(d, partition_nonzero_split(d, 2, 2, 3));
  Rng rng(4);
  std::vector<std::vector<double>> local(layout.n_clients());
  for (std::size_t k = 0; k < local.size(); ++k) {
    local[k].resize(layout.block(k).n_features());
    for (auto& v : local[k]) v = rng.uniform(-1, 1);
  }
  std::vector<double> a(4, 0.0), b(4, 0.0);
  std::vector<std::size_t> fwd{0, 1, 2, 3}, rev{3, 2, 1, 0};
  average_overlaps(fwd, local, layout, a);
  average_overlaps(rev, local, layout, b);
  for (std::size_t m = 0; m < 4; ++m) CHECK(a[m] == doctest::Approx(b[m]).epsilon(1e-15));
}

TEST_CASE("a single client reproduces plain SGD") {
  const auto d = dense_set(25, 5, 2);
  const FedAvgParams params{3, 0.7, 2.0};
  const double lambda = 0.01;
  const std::uint64_t seed = 42;
  RunOptions o;
  o.lambda = lambda;
  o.seed = seed;
  o.stop.iterations = 100;
  const auto h = run_fedavg(d, partition_horizontal(d, 1), params, Schedule::full(), o);

  std::vector<double> w(5, 0.0);
  for (std::size_t t = 1; t <= 100; ++t) {
    Rng rng(derive_seed(seed, {0x7367640000000002ULL, 0, t}));
    const double gamma = 0.7 / (2.0 + std::sqrt(static_cast<double>(t)));
    for (int s = 0; s < 3; ++s) {
      const auto i = rng.below(d.n_samples());
      double z = 0.0;
      for (const auto& f : d.samples[i]) z += f.value * w[f.index];
      const double y = d.labels[i];
      const double g = y * z < 1.0 ? -y : (y * z > 1.0 ? 0.0 : -y);
      for (auto& v : w) v *= 1.0 - gamma * lambda;
      for (const auto& f : d.samples[i]) w[f.index] -= gamma * g * f.value;
    }
  }
  for (std::size_t m = 0; m < 5; ++m) CHECK(std::abs(h.final_w[m] - w[m]) <= 1e-12);
  CHECK(h.rows.back().primal == doctest::Approx(primal_objective(w, d, Regularization{lambda, 25})));
}

TEST_CASE("fedavg charges no encryption and one round trip") {
  const auto d = dense_set(20, 4, 3);
  RunOptions o;
  o.stop.iterations = 4;
  o.timing.latency_per_rtc_s = 0.8;
  const auto h = run_fedavg(d, partition_nonzero_split(d, 2, 2, 1), FedAvgParams{}, Schedule::full(), o);
  for (const auto& r : h.rows) {
    CHECK(r.encryption_s == 0.0);
    CHECK(r.latency_s == doctest::Approx(0.8));
    CHECK(std::isnan(r.dual));
  }
}

TEST_CASE("fedavg runs are deterministic") {
  const auto d = dense_set(40, 6, 5);
  const auto p = partition_nonzero_split(d, 2, 2, 2);
  RunOptions o;
  o.seed = 3;
  o.stop.iterations = 25;
  const auto s = Schedule::random_fraction(0.5, 1);
  const FedAvgParams params{5, 1.0, 1.0};
  CHECK(run_fedavg(d, p, params, s, o).final_w == run_fedavg(d, p, params, s, o).final_w);
  CHECK(fedavg_params_from_json(to_json(params)) == params);
}
