#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace agetrack {

// Platform-stable pseudo-random stream. std::mt19937_64 is bit-exact across
// standard libraries; the distributions below are written out by hand because
// the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Uniform double in [0, 1).
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index drawn proportionally to non-negative weights.
  std::size_t weighted_index(const std::vector<double>& weights);

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(items.size()) - 1))];
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stateless keyed draws: the same (seed, tag, a, b) always yields the same
// value regardless of how much of any other stream was consumed.
std::uint64_t mix_hash(std::uint64_t seed, std::string_view tag, std::int64_t a = 0, std::int64_t b = 0);
double keyed_unit(std::uint64_t seed, std::string_view tag, std::int64_t a = 0, std::int64_t b = 0);

// 64-bit FNV-1a of a string, for seeding substreams from identifiers.
std::uint64_t fnv1a(std::string_view s);

}  // namespace agetrack
