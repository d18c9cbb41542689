#include <doctest.h>

#include <cmath>

#include "hyfl/centralized.hpp"
#include "hyfl/dataset.hpp"
#include "hyfl/error.hpp"
#include "hyfl/metrics.hpp"
#include "hyfl/objective.hpp"

using namespace hyfl;

TEST_CASE("one sample converges within a few coordinate steps") {
  SparseDataset d;
  d.n_features = 2;
  d.samples = {{{0, 0.6}, {1, 0.8}}};
  d.labels = {1};
  const Regularization reg{0.1, 1};
  CentralOptions o;
  o.gap_target = 1e-12;
  o.check_every = 1;
  const auto run = run_sdca_central(d, reg, o);
  CHECK(run.converged);
  CHECK(run.iterations <= 3);
  // the single coordinate solves to alpha = 0.1: w = 0.1 x / 0.1 = x, y x'w = 1
  CHECK(run.alpha_star[0] == doctest::Approx(0.1));
  CHECK(run.P_star == doctest::Approx(0.05));
}

TEST_CASE("separable data is classified perfectly") {
  const auto d = synth_dataset({3, 120, 8, 0.3, 0.0});
  const auto run = run_sdca_central(d, {1e-3, d.n_samples()});
  CHECK(run.converged);
  CHECK(run.gap <= 1e-6);
  CHECK(accuracy(run.w_star, d) == 1.0);
}

TEST_CASE("the dual never decreases along the coordinate path") {
  const auto d = synth_dataset({5, 60, 6, 0.1, 0.05});
  const Regularization reg{0.01, d.n_samples()};
  double previous = 0.0;
  for (std::size_t steps = 1; steps <= 200; steps += 7) {
    CentralOptions o;
    o.seed = 4;
    o.gap_target = 0.0;
    o.max_iterations = steps;
    const auto run = run_sdca_central(d, reg, o);
    CHECK(run.D_star >= previous - 1e-12);
    CHECK(run.D_star <= run.P_star + 1e-12);
    previous = run.D_star;
  }
}

TEST_CASE("lambda tuning") {
  const auto d = synth_dataset({6, 80, 5, 0.2, 0.0});
  const double one[] = {0.01};
  const auto single = tune_lambda(d, d, one);
  CHECK(single.lambda == 0.01);
  CHECK(single.accuracies.size() == 1);
  // separable: several candidates reach 1.0, the smaller one wins
  const double several[] = {1e-2, 1e-3, 1e-4};
  const auto tied = tune_lambda(d, d, several);
  CHECK(tied.accuracies[1] == 1.0);
  CHECK(tied.accuracies[2] == 1.0);
  CHECK(tied.lambda == 1e-4);
  CHECK_THROWS_AS(tune_lambda(d, d, std::span<const double>{}), ConfigError);
}

TEST_CASE("central run json round trip") {
  const auto d = synth_dataset({2, 30, 4, 0.0, 0.1});
  const auto run = run_sdca_central(d, {0.05, d.n_samples()});
  const auto back = central_run_from_json(to_json(run));
  CHECK(back.P_star == run.P_star);
  CHECK(back.D_star == run.D_star);
  CHECK(back.w_star == run.w_star);
  CHECK(back.alpha_star == run.alpha_star);
  CHECK(central_run_from_json({{"P_star", 0.5}}).D_star == 0.5);
  CHECK_THROWS_AS(central_run_from_json({{"gap", 1.0}}), ConfigError);
  CHECK_THROWS_AS(load_central_run("/nonexistent/central.json"), ConfigError);
  CHECK_THROWS_AS(run_sdca_central(d, {0.05, d.n_samples() + 1}), DimensionError);
}
