#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hyfl/sparse.hpp"

namespace hyfl {

// Sample-major sparse design matrix with +/-1 labels.
struct SparseDataset {
  std::size_t n_features = 0;
  std::vector<SparseVector> samples;
  std::vector<int> labels;
  std::string name;

  std::size_t n_samples() const noexcept { return samples.size(); }
  std::size_t nonzeros() const noexcept;

  // Throws FormatError/LabelError if an invariant is broken.
  void validate() const;

  friend bool operator==(const SparseDataset&, const SparseDataset&) = default;
};

struct DatasetStats {
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  double sparsity = 0.0;  // zero entries / (N * M)
};

// Maps raw file labels onto {-1, +1}.
struct LabelMapping {
  enum class Kind { binary, threshold, sets };

  Kind kind = Kind::binary;
  double threshold = 0.0;           // threshold: label > threshold -> +1, else -1
  std::vector<double> positive;     // sets: explicit members
  std::vector<double> negative;

  // Accepts exactly -1 and +1 (also "1"/"+1").
  static LabelMapping binary() { return {}; }
  static LabelMapping above(double t) { return {Kind::threshold, t, {}, {}}; }
  static LabelMapping explicit_sets(std::vector<double> pos, std::vector<double> neg) {
    return {Kind::sets, 0.0, std::move(pos), std::move(neg)};
  }
  // Digits 0-4 -> -1, 5-9 -> +1.
  static LabelMapping mnist_default() { return above(4.5); }

  // nullopt when the label is not covered.
  std::optional<int> map(double raw) const;

  friend bool operator==(const LabelMapping&, const LabelMapping&) = default;
};

struct ParseOptions {
  std::optional<std::size_t> expected_features;
  LabelMapping labels = LabelMapping::binary();
};

SparseDataset parse_libsvm(std::istream& in, const ParseOptions& options = {});

// Reads a LIBSVM file; ".gz" files are decompressed transparently.
SparseDataset load_libsvm(const std::filesystem::path& path, const ParseOptions& options = {});

// Writes 1-based LIBSVM text with round-trip precision.
void write_libsvm(std::ostream& out, const SparseDataset& data);

// Scales every sample with norm > 1 onto the unit sphere.
SparseDataset normalize_samples(SparseDataset data);

struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  double margin = 0.0;      // minimum |<w_true, x>| of kept samples, x unit norm
  double noise_rate = 0.0;  // fraction of labels flipped afterwards

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

// Linearly separable (before label noise) data drawn around a random unit hyperplane.
SparseDataset synth_dataset(const SynthSpec& spec);

DatasetStats compute_stats(const SparseDataset& data);

struct Split {
  SparseDataset train;
  SparseDataset validation;
};

// Seeded shuffle, then the first round(fraction * N) samples go to train.
Split train_validation_split(const SparseDataset& data, double train_fraction, std::uint64_t seed);

// Keeps the listed samples in the given order.
SparseDataset select_samples(const SparseDataset& data, const std::vector<std::size_t>& rows);

}  // namespace hyfl
