#include "hyfl/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "hyfl/error.hpp"
#include "hyfl/rng.hpp"

namespace hyfl {

namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_index(std::string_view tok, std::size_t& out) {
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

std::string read_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw Error("cannot open " + path.string());
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
  int err = 0;
  const char* msg = gzerror(f, &err);
  std::string what = (err != Z_OK && err != Z_STREAM_END) ? std::string(msg) : std::string();
  gzclose(f);
  if (n < 0 || !what.empty()) throw Error("gzip read failed for " + path.string() + ": " + what);
  return out;
}

}  // namespace

std::size_t SparseDataset::nonzeros() const noexcept {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.size();
  return n;
}

void SparseDataset::validate() const {
  if (labels.size() != samples.size())
    throw FormatError(0, "label count " + std::to_string(labels.size()) + " != sample count " +
                             std::to_string(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (labels[i] != 1 && labels[i] != -1)
      throw LabelError(i + 1, "label " + std::to_string(labels[i]) + " is not +/-1");
    const auto& s = samples[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j].index >= n_features)
        throw FormatError(i + 1, "feature index " + std::to_string(s[j].index) + " >= " +
                                     std::to_string(n_features));
      if (j > 0 && s[j].index <= s[j - 1].index)
        throw FormatError(i + 1, "feature indices not strictly increasing");
    }
  }
}

std::optional<int> LabelMapping::map(double raw) const {
  switch (kind) {
    case Kind::binary:
      if (raw == 1.0) return 1;
      if (raw == -1.0) return -1;
      return std::nullopt;
    case Kind::threshold:
      return raw > threshold ? 1 : -1;
    case Kind::sets:
      if (std::find(positive.begin(), positive.end(), raw) != positive.end()) return 1;
      if (std::find(negative.begin(), negative.end(), raw) != negative.end()) return -1;
      return std::nullopt;
  }
  return std::nullopt;
}

SparseDataset parse_libsvm(std::istream& in, const ParseOptions& options) {
  SparseDataset data;
  std::size_t max_index_plus_one = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      while (pos < rest.size() && std::isspace(static_cast<unsigned char>(rest[pos]))) ++pos;
      std::size_t end = pos;
      while (end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[end]))) ++end;
      if (end > pos) tokens.push_back(rest.substr(pos, end - pos));
      pos = end;
    }
    if (tokens.empty()) continue;

    double raw_label;
    if (!parse_double(tokens[0], raw_label))
      throw ParseError(line_no, "malformed label '" + std::string(tokens[0]) + "'");
    auto label = options.labels.map(raw_label);
    if (!label) throw LabelError(line_no, "unmapped label '" + std::string(tokens[0]) + "'");

    SparseVector x;
    x.reserve(tokens.size() - 1);
    std::size_t prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected idx:val, got '" + std::string(tokens[t]) + "'");
      std::size_t idx;
      double val;
      if (!parse_index(tokens[t].substr(0, colon), idx) || !parse_double(tokens[t].substr(colon + 1), val))
        throw ParseError(line_no, "malformed pair '" + std::string(tokens[t]) + "'");
      if (idx == 0) throw FormatError(line_no, "feature indices are 1-based");
      if (idx <= prev) throw FormatError(line_no, "feature indices not strictly increasing");
      if (options.expected_features && idx > *options.expected_features)
        throw FormatError(line_no, "feature index " + std::to_string(idx) + " exceeds " +
                                       std::to_string(*options.expected_features) + " features");
      prev = idx;
      if (val != 0.0) x.push_back({idx - 1, val});
    }
    max_index_plus_one = std::max(max_index_plus_one, prev);
    data.samples.push_back(std::move(x));
    data.labels.push_back(*label);
  }
  data.n_features = options.expected_features.value_or(max_index_plus_one);
  return data;
}

SparseDataset load_libsvm(const std::filesystem::path& path, const ParseOptions& options) {
  if (!std::filesystem::exists(path)) throw Error("dataset not found: " + path.string());
  SparseDataset data;
  if (path.extension() == ".gz") {
    std::istringstream in(read_gzip(path));
    data = parse_libsvm(in, options);
  } else {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    data = parse_libsvm(in, options);
  }
  data.name = path.filename().string();
  return data;
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    out << (data.labels[i] > 0 ? "+1" : "-1");
    for (const auto& f : data.samples[i]) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, f.value);
      out << ' ' << (f.index + 1) << ':' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

SparseDataset normalize_samples(SparseDataset data) {
  for (auto& x : data.samples) {
    const double norm = std::sqrt(squared_norm(x));
    if (norm > 1.0 + 1e-12) {  // rounding slack keeps this idempotent
      for (auto& f : x) f.value /= norm;
    }
  }
  return data;
}

SparseDataset synth_dataset(const SynthSpec& spec) {
  if (spec.n_samples < 1 || spec.n_features < 1)
    throw ConfigError("synth_dataset: n_samples and n_features must be >= 1");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 0.5))
    throw ConfigError("synth_dataset: noise_rate must lie in [0, 0.5)");
  if (!(spec.margin >= 0.0 && spec.margin < 1.0)) throw ConfigError("synth_dataset: margin must lie in [0, 1)");

  Rng rng(derive_seed(spec.seed, {0x5e7d}));
  const std::size_t m = spec.n_features;

  std::vector<double> truth(m);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& v : truth) {
      v = rng.normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  for (auto& v : truth) v /= std::sqrt(norm2);

  SparseDataset data;
  data.n_features = m;
  data.name = "synth";
  data.samples.reserve(spec.n_samples);
  data.labels.reserve(spec.n_samples);

  const std::size_t max_attempts = 100000 * spec.n_samples;
  std::size_t attempts = 0;
  std::vector<double> x(m);
  while (data.samples.size() < spec.n_samples) {
    if (++attempts > max_attempts)
      throw ConfigError("synth_dataset: margin too large to generate samples");
    double n2 = 0.0;
    for (auto& v : x) {
      v = rng.uniform(-1.0, 1.0);
      n2 += v * v;
    }
    if (n2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(n2);
    double score = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      x[j] *= inv;
      score += x[j] * truth[j];
    }
    if (std::abs(score) < spec.margin || score == 0.0) continue;
    SparseVector row;
    row.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
      if (x[j] != 0.0) row.push_back({j, x[j]});
    data.samples.push_back(std::move(row));
    data.labels.push_back(score > 0.0 ? 1 : -1);
  }

  const auto flips = static_cast<std::size_t>(std::llround(spec.noise_rate * static_cast<double>(spec.n_samples)));
  for (std::size_t i : rng.sample_without_replacement(spec.n_samples, flips)) data.labels[i] = -data.labels[i];
  return normalize_samples(std::move(data));
}

DatasetStats compute_stats(const SparseDataset& data) {
  DatasetStats s;
  s.n_samples = data.n_samples();
  s.n_features = data.n_features;
  const double total = static_cast<double>(s.n_samples) * static_cast<double>(s.n_features);
  s.sparsity = total > 0.0 ? 1.0 - static_cast<double>(data.nonzeros()) / total : 1.0;
  return s;
}

SparseDataset select_samples(const SparseDataset& data, const std::vector<std::size_t>& rows) {
  SparseDataset out;
  out.n_features = data.n_features;
  out.name = data.name;
  out.samples.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t i : rows) {
    out.samples.push_back(data.samples.at(i));
    out.labels.push_back(data.labels.at(i));
  }
  return out;
}

Split train_validation_split(const SparseDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw ConfigError("train fraction must lie in (0, 1]");
  std::vector<std::size_t> order(data.n_samples());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x5b1175}));
  rng.shuffle(order);
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
  n_train = std::clamp<std::size_t>(n_train, std::min<std::size_t>(1, order.size()), order.size());
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return {select_samples(data, train), select_samples(data, val)};
}

}  // namespace hyfl
