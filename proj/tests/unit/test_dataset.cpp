#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hyfl/dataset.hpp"
#include "hyfl/error.hpp"
#include "hyfl/rng.hpp"

using namespace hyfl;

namespace {

SparseDataset parse(const std::string& text, ParseOptions opts = {}) {
  std::istringstream in(text);
  return parse_libsvm(in, opts);
}

SparseDataset random_dataset(std::uint64_t seed) {
  Rng rng(seed);
  SparseDataset d;
  d.n_features = 1 + rng.below(30);
  const std::size_t n = 1 + rng.below(20);
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector x;
    for (std::size_t m = 0; m < d.n_features; ++m)
      if (rng.uniform() < 0.3) x.push_back({m, rng.uniform(-5.0, 5.0)});
    d.samples.push_back(x);
    d.labels.push_back(rng.uniform() < 0.5 ? -1 : 1);
  }
  return d;
}

}  // namespace

TEST_CASE("parse_libsvm reads one sample with 1-based indices") {
  const auto d = parse("+1 1:0.5 3:1.0\n");
  REQUIRE(d.n_samples() == 1);
  CHECK(d.n_features == 3);
  CHECK(d.labels[0] == 1);
  CHECK(d.samples[0] == SparseVector{{0, 0.5}, {2, 1.0}});
}

TEST_CASE("a label with no features is a valid empty sample") {
  const auto d = parse("-1\n");
  REQUIRE(d.n_samples() == 1);
  CHECK(d.labels[0] == -1);
  CHECK(d.samples[0].empty());
}

TEST_CASE("expected_features fixes M") {
  const auto d = parse("1 2:1\n", {784, LabelMapping::binary()});
  CHECK(d.n_features == 784);
  CHECK_THROWS_AS(parse("1 785:1\n", {784, LabelMapping::binary()}), FormatError);
}

TEST_CASE("blank lines and comments are skipped") {
  const auto d = parse("# header\n\n1 1:2\n-1 2:3 # trailing\n");
  CHECK(d.n_samples() == 2);
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse("1 1:1\n1 2:x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("abc 1:1\n"), ParseError);
  CHECK_THROWS_AS(parse("1 3:1 2:1\n"), FormatError);
  CHECK_THROWS_AS(parse("1 2:1 2:1\n"), FormatError);
  CHECK_THROWS_AS(parse("2 1:1\n"), LabelError);
}

TEST_CASE("label mappings") {
  const auto mnist = LabelMapping::mnist_default();
  CHECK(mnist.map(4).value() == -1);
  CHECK(mnist.map(5).value() == 1);
  const auto sets = LabelMapping::explicit_sets({3}, {8});
  CHECK(sets.map(3).value() == 1);
  CHECK(sets.map(8).value() == -1);
  CHECK_FALSE(sets.map(1).has_value());
  const auto d = parse("7 1:1\n2 1:1\n", {std::nullopt, mnist});
  CHECK(d.labels == std::vector<int>{1, -1});
}

TEST_CASE("write/parse round trip is exact") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto d = random_dataset(seed);
    std::ostringstream out;
    write_libsvm(out, d);
    auto back = parse(out.str(), {d.n_features, LabelMapping::binary()});
    back.name = d.name;
    CHECK(back == d);
  }
}

TEST_CASE("normalize_samples") {
  SparseDataset d;
  d.n_features = 2;
  d.samples = {{{0, 3.0}, {1, 4.0}}, {{0, 0.3}, {1, 0.4}}, {}};
  d.labels = {1, -1, 1};
  const auto n = normalize_samples(d);
  CHECK(n.samples[0][0].value == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n.samples[0][1].value == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(n.samples[1] == d.samples[1]);
  CHECK(n.samples[2].empty());
}

TEST_CASE("normalize_samples is idempotent and bounds every norm") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto once = normalize_samples(random_dataset(seed));
    CHECK(normalize_samples(once) == once);
    for (const auto& x : once.samples) CHECK(std::sqrt(squared_norm(x)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("synth_dataset is deterministic and respects its spec") {
  const SynthSpec spec{7, 100, 10, 0.1, 0.0};
  const auto a = synth_dataset(spec);
  const auto b = synth_dataset(spec);
  CHECK(a == b);
  CHECK(a.n_samples() == 100);
  CHECK(a.n_features == 10);
  for (const auto& x : a.samples) CHECK(squared_norm(x) <= 1.0 + 1e-12);
  CHECK(synth_dataset({7, 1, 10, 0.1, 0.0}).n_samples() == 1);
  CHECK_FALSE(synth_dataset({8, 100, 10, 0.1, 0.0}) == a);
}

TEST_CASE("synth_dataset label noise flips labels relative to the clean draw") {
  const auto clean = synth_dataset({3, 200, 5, 0.05, 0.0});
  const auto noisy = synth_dataset({3, 200, 5, 0.05, 0.1});
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < clean.n_samples(); ++i) {
    CHECK(clean.samples[i] == noisy.samples[i]);
    flipped += clean.labels[i] != noisy.labels[i] ? 1 : 0;
  }
  CHECK(flipped == 20);
}

TEST_CASE("synth_dataset rejects invalid bounds") {
  CHECK_THROWS_AS(synth_dataset({0, 0, 5, 0.1, 0.0}), ConfigError);
  CHECK_THROWS_AS(synth_dataset({0, 10, 0, 0.1, 0.0}), ConfigError);
  CHECK_THROWS_AS(synth_dataset({0, 10, 5, 0.1, 0.5}), ConfigError);
}

TEST_CASE("compute_stats sparsity") {
  SparseDataset dense;
  dense.n_features = 2;
  dense.samples = {{{0, 1.0}, {1, 2.0}}, {{0, 3.0}, {1, 4.0}}};
  dense.labels = {1, -1};
  CHECK(compute_stats(dense).sparsity == 0.0);
  SparseDataset empty;
  empty.n_features = 3;
  empty.samples = {{}, {}};
  empty.labels = {1, 1};
  CHECK(compute_stats(empty).sparsity == 1.0);
  const auto d = random_dataset(5);
  const auto s = compute_stats(d);
  CHECK(s.sparsity ==
        doctest::Approx(1.0 - static_cast<double>(d.nonzeros()) / static_cast<double>(d.n_samples() * d.n_features))
            .epsilon(1e-9));
}

TEST_CASE("gzip subset loads with the MNIST label mapping") {
  const auto path = std::filesystem::path(HYFL_TEST_DATA_DIR) / "mnist_subset.libsvm.gz";
  const auto d = load_libsvm(path, {784, LabelMapping::mnist_default()});
  CHECK(d.n_samples() == 2500);
  CHECK(d.n_features == 784);
  // Full MNIST is 80.858% sparse; a 2500-image sample sits close to it.
  CHECK(compute_stats(d).sparsity == doctest::Approx(0.80858).epsilon(0.02));
}

TEST_CASE("missing files name the path") {
  try {
    load_libsvm("/nonexistent/data.libsvm");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/data.libsvm") != std::string::npos);
  }
}

TEST_CASE("train_validation_split") {
  const auto d = synth_dataset({1, 10, 3, 0.0, 0.0});
  const auto s = train_validation_split(d, 0.8, 4);
  CHECK(s.train.n_samples() == 8);
  CHECK(s.validation.n_samples() == 2);
  CHECK(train_validation_split(d, 0.8, 4).train == s.train);
}
