#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hyfl/error.hpp"
#include "hyfl/rng.hpp"
#include "hyfl/tuning.hpp"

using namespace hyfl;

namespace {
const std::vector<Orientation> kSmallSmall{Orientation::smaller_better, Orientation::smaller_better};
}

TEST_CASE("log-uniform samples stay in bounds and split at the geometric mean") {
  const auto v = sample_log_uniform({1e-4, 1.0}, 3, 20000);
  CHECK(std::all_of(v.begin(), v.end(), [](double x) { return x >= 1e-4 && x <= 1.0; }));
  const auto below = std::count_if(v.begin(), v.end(), [](double x) { return x < 1e-2; });
  CHECK(static_cast<double>(below) / 20000.0 == doctest::Approx(0.5).epsilon(0.03));
  auto sorted = v;
  std::nth_element(sorted.begin(), sorted.begin() + 10000, sorted.end());
  CHECK(std::log10(sorted[10000]) == doctest::Approx(-2.0).epsilon(0.05));
  CHECK(sample_log_uniform({2.0, 2.0}, 1, 3) == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(sample_log_uniform({1e-5, 25}, 9, 5) == sample_log_uniform({1e-5, 25}, 9, 5));
  CHECK_THROWS_AS(sample_log_uniform({0.0, 1.0}, 1, 1), ConfigError);
  CHECK_THROWS_AS(sample_log_uniform({2.0, 1.0}, 1, 1), ConfigError);
}

TEST_CASE("inner iteration examples") {
  CHECK(inner_iterations(0.1, 1000, 10) == 10);
  CHECK(inner_iterations(0.0001876, 70000, 5) == 3);
  CHECK(inner_iterations(1e-9, 10, 10) == 1);
  CHECK_THROWS_AS(inner_iterations(0.0, 10, 1), ConfigError);
}

TEST_CASE("search spaces") {
  const auto h = SearchSpace::hyfdca(1000, 8);
  CHECK(h.iic.min == 0.008);
  CHECK(h.iic.max == 1.0);
  CHECK_FALSE(h.with_rates);
  const auto f = SearchSpace::fedavg(1000, 8);
  CHECK(f.iic.max == 5.0);
  CHECK(f.with_rates);
  const auto pts = sample_search_points(f, 20, 4, 1000, 8);
  REQUIRE(pts.size() == 20);
  for (const auto& p : pts) {
    CHECK(p.a >= 1e-5);
    CHECK(p.b <= 25.0);
    CHECK(p.inner_iterations == inner_iterations(p.iic, 1000, 8));
  }
}

TEST_CASE("grey relational grade of two symmetric runs") {
  const auto g = gra_select({{1.0, 2.0}, {2.0, 1.0}}, kSmallSmall);
  CHECK(g.grades[0] == doctest::Approx(2.0 / 3.0));
  CHECK(g.grades[1] == doctest::Approx(2.0 / 3.0));
  CHECK(g.best == 0);
}

TEST_CASE("a dominant run is selected with grade one") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 2 + rng.below(8);
    std::vector<std::vector<double>> m(rows, std::vector<double>(kMetricCount));
    const std::size_t star = rng.below(rows);
    const auto& o = MetricVector::orientations();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < kMetricCount; ++j) {
        const double v = rng.uniform(1.0, 2.0);
        const bool good = i == star;
        m[i][j] = (o[j] == Orientation::larger_better) == good ? v + 5.0 : v;
      }
    const auto g = gra_select(m, o);
    CHECK(g.best == star);
    CHECK(g.grades[star] == doctest::Approx(1.0));
  }
}

TEST_CASE("grades ignore positive affine rescaling of a metric") {
  Rng rng(5);
  std::vector<std::vector<double>> m(6, std::vector<double>(3));
  for (auto& row : m)
    for (auto& v : row) v = rng.uniform();
  const std::vector<Orientation> o{Orientation::smaller_better, Orientation::larger_better,
                                   Orientation::smaller_better};
  auto scaled = m;
  for (auto& row : scaled) row[1] = 40.0 * row[1] - 7.0;
  const auto a = gra_select(m, o), b = gra_select(scaled, o);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a.grades[i] == doctest::Approx(b.grades[i]).epsilon(1e-12));
  CHECK(a.best == b.best);
}

TEST_CASE("degenerate grey relational inputs") {
  const auto single = gra_select({{3.0, 4.0}}, kSmallSmall);
  CHECK(single.best == 0);
  CHECK(single.grades[0] == 1.0);
  const auto same = gra_select({{1.0, 1.0}, {1.0, 1.0}}, kSmallSmall);
  CHECK(same.grades == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(gra_select({}, kSmallSmall), ConfigError);
  CHECK_THROWS_AS(gra_select({{1.0}}, kSmallSmall), DimensionError);
}

TEST_CASE("divergence detection") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(is_divergent(std::vector<double>{1.0, inf}));
  CHECK(is_divergent(std::vector<double>{1.0, std::nan("")}));
  CHECK(is_divergent(std::vector<double>{1.0, 5.0, 20.0}));
  CHECK_FALSE(is_divergent(std::vector<double>{1.0, 0.5, 0.2}));
  CHECK_FALSE(is_divergent(std::vector<double>{1.0, 30.0, 0.1, 0.1}, 4));
  CHECK_FALSE(is_divergent(std::vector<double>{}));
}

TEST_CASE("metrics of a short history") {
  RunHistory h;
  for (std::size_t t = 1; t <= 6; ++t) {
    IterationRecord r;
    r.t = t;
    r.primal = 2.0 / static_cast<double>(t);
    r.accuracy = 0.1 * static_cast<double>(t);
    r.compute_s = 0.5;
    r.encryption_s = 0.25;
    h.rows.push_back(r);
  }
  const auto m = evaluate_metrics(h, 4.5, 1.0);
  CHECK(m.runtime_no_latency == doctest::Approx(0.75));
  CHECK(m.runtime_long_distance == doctest::Approx(0.75 + 4.5 * 0.2575));
  CHECK(m.runtime_geo_satellite == doctest::Approx(0.75 + 4.5 * 0.8));
  // relative losses 1, 0, -1/3, -1/2, -3/5, -2/3; last five averaged
  CHECK(m.final_loss == doctest::Approx((0.0 - 1.0 / 3 - 0.5 - 0.6 - 2.0 / 3) / 5));
  CHECK(m.max_accuracy == doctest::Approx(0.6));
  CHECK(m.values().size() == kMetricCount);

  std::vector<SearchPoint> pts(2);
  pts[0].metrics = m;
  pts[1].metrics = m;
  pts[1].metrics.final_loss -= 1.0;
  pts[0].divergent = true;
  CHECK(select_point(pts) == 1);
  std::ostringstream csv;
  write_search_csv(csv, pts);
  const auto text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  pts[1].divergent = true;
  CHECK_THROWS(select_point(pts));
}
