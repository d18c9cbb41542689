#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hyfl {

struct Feature {
  std::size_t index = 0;
  double value = 0.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Indices strictly increasing, 0-based.
using SparseVector = std::vector<Feature>;

inline double dot(const SparseVector& x, std::span<const double> w) {
  double s = 0.0;
  for (const auto& f : x) s += f.value * w[f.index];
  return s;
}

inline double squared_norm(const SparseVector& x) {
  double s = 0.0;
  for (const auto& f : x) s += f.value * f.value;
  return s;
}

// w += a * x
inline void axpy(double a, const SparseVector& x, std::span<double> w) {
  for (const auto& f : x) w[f.index] += a * f.value;
}

inline double squared_norm(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

}  // namespace hyfl
