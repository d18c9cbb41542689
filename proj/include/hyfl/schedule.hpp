#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hyfl {

// Which clients participate in outer iteration t (t >= 1).
class Schedule {
 public:
  enum class Kind { full, random_fraction, cyclic };

  static Schedule full() { return Schedule(Kind::full, 1.0, 1, 0); }
  // round(f * K) clients (at least one) drawn uniformly without replacement each round.
  static Schedule random_fraction(double fraction, std::uint64_t seed);
  // Clients shuffled once and cut into `cycles` groups; group (t mod C) is active.
  static Schedule cyclic(std::size_t cycles, std::uint64_t seed);

  Kind kind() const noexcept { return kind_; }
  double fraction() const noexcept { return fraction_; }
  std::size_t cycles() const noexcept { return cycles_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Sorted active client ids.
  std::vector<std::size_t> active(std::size_t t, std::size_t n_clients) const;

  // Number of clients active per round (the mean for random_fraction).
  double expected_active(std::size_t n_clients) const;

  // The cyclic groups for n_clients, in rotation order.
  std::vector<std::vector<std::size_t>> cyclic_groups(std::size_t n_clients) const;

  std::string describe() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  Schedule(Kind k, double f, std::size_t c, std::uint64_t s) : kind_(k), fraction_(f), cycles_(c), seed_(s) {}

  Kind kind_;
  double fraction_;
  std::size_t cycles_;
  std::uint64_t seed_;
};

}  // namespace hyfl
