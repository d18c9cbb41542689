#include <doctest.h>

#include <cmath>

#include "hyfl/dataset.hpp"
#include "hyfl/error.hpp"
#include "hyfl/hyfdca.hpp"
#include "hyfl/objective.hpp"
#include "hyfl/partition.hpp"
#include "hyfl/rng.hpp"

using namespace hyfl;

namespace {

SparseDataset dense(std::size_t n, std::size_t m, std::uint64_t seed) {
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

RunOptions options(double lambda, std::size_t iterations, std::uint64_t seed = 1) {
  RunOptions o;
  o.lambda = lambda;
  o.stop.iterations = iterations;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("secure inner product over two feature halves") {
  SparseDataset d;
  d.n_features = 4;
  d.samples = {{{0, 1.0}, {1, 2.0}, {2, 3.0}, {3, 4.0}}};
  d.labels = {1};
  const auto p = partition_vertical(d, 2, std::nullopt);
  const FederatedLayout layout(d, p);
  FederatedState state(layout);
  for (auto& w : state.client_w) std::fill(w.begin(), w.end(), 1.0);
  EncryptionLedger ledger;
  const std::vector<std::size_t> active{0, 1};
  secure_inner_product(state, layout, ledger, active, {{0}, {0}});
  CHECK(state.client_ip[0][0] == 10.0);
  CHECK(state.client_ip[1][0] == 10.0);
  CHECK(ledger.iteration() == OpCounts{2, 2, 1});
  CHECK(ledger.audit().violations() == 0);
}

TEST_CASE("inactive holders are served from the cache") {
  SparseDataset d;
  d.n_features = 4;
  d.samples = {{{0, 1.0}, {1, 2.0}, {2, 3.0}, {3, 4.0}}};
  d.labels = {1};
  const auto p = partition_vertical(d, 2, std::nullopt);
  const FederatedLayout layout(d, p);
  FederatedState state(layout);
  for (auto& w : state.client_w) std::fill(w.begin(), w.end(), 1.0);
  EncryptionLedger ledger;
  const std::vector<std::size_t> active{0};
  secure_inner_product(state, layout, ledger, active, {{0}, {}});
  CHECK(state.client_ip[0][0] == 3.0);  // peer's cached share is the initial zero
  CHECK(ledger.iteration() == OpCounts{1, 1, 1});
}

TEST_CASE("single holder needs no additions and zero w still costs an encryption") {
  SparseDataset d;
  d.n_features = 2;
  d.samples = {{{0, 0.5}, {1, 0.5}}};
  d.labels = {-1};
  const auto p = partition_horizontal(d, 1);
  const FederatedLayout layout(d, p);
  FederatedState state(layout);
  EncryptionLedger ledger;
  const std::vector<std::size_t> active{0};
  secure_inner_product(state, layout, ledger, active, {{0}});
  CHECK(state.client_ip[0][0] == 0.0);
  CHECK(ledger.iteration() == OpCounts{1, 1, 0});
}

TEST_CASE("secure inner product equals the direct dot product") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = dense(6 + rng.below(6), 3 + rng.below(5), trial);
    const auto p = partition_nonzero_split(d, 1 + rng.below(3), 1 + rng.below(3), trial);
    const FederatedLayout layout(d, p);
    FederatedState state(layout);
    std::vector<double> w(d.n_features);
    for (auto& v : w) v = rng.uniform(-2.0, 2.0);
    std::vector<std::size_t> active;
    std::vector<std::vector<std::size_t>> requests(layout.n_clients());
    for (std::size_t k = 0; k < layout.n_clients(); ++k) {
      active.push_back(k);
      const auto& b = layout.block(k);
      for (std::size_t lm = 0; lm < b.n_features(); ++lm) state.client_w[k][lm] = w[b.features[lm]];
      for (std::size_t li = 0; li < b.n_samples(); ++li) requests[k].push_back(li);
    }
    EncryptionLedger ledger;
    secure_inner_product(state, layout, ledger, active, requests);
    for (std::size_t k = 0; k < layout.n_clients(); ++k)
      for (std::size_t li = 0; li < layout.block(k).n_samples(); ++li) {
        const double direct = dot(d.samples[layout.block(k).samples[li]], w);
        CHECK(std::abs(state.client_ip[k][li] - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
      }
  }
}

TEST_CASE("full participation keeps w0 equal to the primal map of alpha") {
  const auto d = dense(40, 6, 5);
  const auto p = partition_nonzero_split(d, 2, 2, 5);
  HyfdcaParams params;
  params.inner_iterations = 5;
  HyfdcaSolver solver(d, p, params, Schedule::full(), options(0.05, 0));
  for (int t = 0; t < 30; ++t) {
    solver.step();
    const auto w = dual_to_primal(solver.alpha(), d, solver.regularization());
    for (std::size_t m = 0; m < w.size(); ++m) CHECK(std::abs(solver.w0()[m] - w[m]) <= 1e-9);
  }
}

TEST_CASE("returning clients decrypt exactly the entries that changed") {
  // two feature halves, alternating: each round one client steps on one sample
  const auto d = dense(4, 4, 8);
  const auto p = partition_vertical(d, 2, std::nullopt);
  HyfdcaParams params;
  params.inner_iterations = 1;
  HyfdcaSolver solver(d, p, params, Schedule::cyclic(2, 3), options(0.1, 0));
  // SIP: 1 enc, 1 add (cached peer share), 1 dec; delta: 1 enc, 1 add; own sync: 1 dec
  CHECK(solver.step().ops == OpCounts{2, 2, 2});
  // plus one decrypt for the entry the peer moved while this client was away
  for (int t = 2; t <= 6; ++t) CHECK(solver.step().ops == OpCounts{2, 3, 2});
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& b = solver.layout().block(k);
    if (solver.state().last_seen[k] != solver.iteration()) continue;
    for (std::size_t li = 0; li < b.n_samples(); ++li)
      CHECK(solver.state().client_alpha[k][li] == solver.alpha()[b.samples[li]]);
  }
}

TEST_CASE("horizontal partitions never add inner-product shares") {
  const auto d = dense(30, 5, 9);
  const auto p = partition_horizontal(d, 3);
  HyfdcaParams params;
  params.inner_iterations = 4;
  HyfdcaSolver solver(d, p, params, Schedule::full(), options(0.01, 0));
  for (int t = 0; t < 5; ++t) CHECK(solver.step().ops.add == 12);  // one per alpha delta
}

TEST_CASE("zero inner iterations leave the model untouched") {
  const auto d = dense(10, 3, 2);
  const auto p = partition_horizontal(d, 2);
  HyfdcaParams params;
  params.inner_iterations = 0;
  const auto h = run_hyfdca(d, p, params, Schedule::full(), options(0.1, 5));
  REQUIRE(h.rows.size() == 5);
  for (double v : h.final_w) CHECK(v == 0.0);
  for (const auto& r : h.rows) CHECK(r.primal == doctest::Approx(1.0));
}

TEST_CASE("runs are deterministic") {
  const auto d = dense(50, 6, 4);
  const auto p = partition_nonzero_split(d, 2, 2, 1);
  HyfdcaParams params;
  params.inner_iterations = 7;
  const auto s = Schedule::random_fraction(0.5, 2);
  const auto a = run_hyfdca(d, p, params, s, options(0.01, 20, 9));
  const auto b = run_hyfdca(d, p, params, s, options(0.01, 20, 9));
  CHECK(a.final_w == b.final_w);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    CHECK(a.rows[t].primal == b.rows[t].primal);
    CHECK(a.rows[t].cumulative_s == b.rows[t].cumulative_s);
  }
  const auto c = run_hyfdca(d, p, params, s, options(0.01, 20, 10));
  CHECK(c.final_w != a.final_w);
}

TEST_CASE("heavy regularization keeps the primal near one") {
  const auto d = dense(30, 4, 6);
  const auto p = partition_nonzero_split(d, 2, 2, 6);
  HyfdcaParams params;
  params.inner_iterations = 5;
  const auto h = run_hyfdca(d, p, params, Schedule::full(), options(1e3, 30));
  CHECK(h.rows.back().primal == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("every configuration keeps alpha feasible and the audit clean") {
  Rng rng(12);
  for (int trial = 0; trial < 24; ++trial) {
    const auto d = dense(20 + rng.below(20), 3 + rng.below(4), 100 + trial);
    const auto p = partition_nonzero_split(d, 1 + rng.below(3), 1 + rng.below(2), trial);
    HyfdcaParams params;
    params.inner_iterations = 1 + rng.below(8);
    params.gamma = trial % 2 ? GammaRule::inverse_t : GammaRule::constant;
    params.client_weight = trial % 3 ? ClientWeight::sample_share : ClientWeight::one;
    params.step = trial % 4 < 2 ? StepRule::closed_form : StepRule::line_search;
    params.second_inner_product = trial % 5 == 0;
    const Schedule s = trial % 3 == 0   ? Schedule::full()
                       : trial % 3 == 1 ? Schedule::random_fraction(0.5, trial)
                                        : Schedule::cyclic(2, trial);
    HyfdcaSolver solver(d, p, params, s, options(std::pow(10.0, rng.uniform(-3.0, 0.0)), 0, trial));
    for (int t = 0; t < 15; ++t) {
      const auto rec = solver.step();
      CHECK(rec.dual <= rec.primal + 1e-12);
    }
    const auto alpha = solver.alpha();
    for (std::size_t i = 0; i < alpha.size(); ++i) CHECK(dual_feasible(d.labels[i], alpha[i]));
    CHECK(solver.ledger().audit().violations() == 0);
    CHECK(solver.ledger().audit().alpha_uploads > 0);
  }
}

TEST_CASE("time accounting adds compute, encryption and latency") {
  const auto d = dense(20, 4, 1);
  const auto p = partition_nonzero_split(d, 2, 2, 1);
  auto o = options(0.1, 3);
  o.timing.latency_per_rtc_s = TimingModel::kLongDistanceLatency;
  const auto h = run_hyfdca(d, p, HyfdcaParams{}, Schedule::full(), o);
  double cum = 0.0;
  for (const auto& r : h.rows) {
    CHECK(r.latency_s == doctest::Approx(4.5 * 0.2575));
    CHECK(r.encryption_s == encryption_seconds(r.ops));
    cum += r.compute_s + r.encryption_s + r.latency_s;
    CHECK(r.cumulative_s == doctest::Approx(cum));
  }
  CHECK(h.metadata["rtc_per_iteration"] == 4.5);
}

TEST_CASE("parameter json round trip") {
  HyfdcaParams p;
  p.inner_iterations = 9;
  p.gamma = GammaRule::inverse_t;
  p.step = StepRule::line_search;
  p.curvature = LineSearchCurvature::per_sample;
  p.ip_scope = InnerProductScope::all;
  CHECK(hyfdca_params_from_json(to_json(p)) == p);
  CHECK_THROWS_AS(hyfdca_params_from_json({{"gamma", "sometimes"}}), ConfigError);
  CHECK_THROWS_AS(hyfdca_params_from_json({{"inner_iterations", "many"}}), ConfigError);
}
