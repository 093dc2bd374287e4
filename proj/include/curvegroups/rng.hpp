#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace curvegroups {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent seed and a path of
/// indices, e.g. derive_seed(seed, {kStreamBootstrap, b}). Children of
/// different paths are decorrelated, and the mapping is independent of any
/// scheduling, so parallel consumers get reproducible streams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

/// Seeded random stream (mt19937_64). Not thread-safe; give each worker its
/// own stream derived with derive_seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  double normal() { return normal_(engine_); }

  std::uint64_t binomial(std::uint64_t trials, double p);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace curvegroups
