#pragma once

#include <cstdint>
#include <random>

#include "lineleak/geometry.hpp"

namespace lineleak {

/// Seeded random source. Independent streams are derived from (seed, index)
/// so parallel work can draw deterministically regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed, 0)) {}

  /// Stream `index` of `seed`; streams of distinct indices are decorrelated.
  static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(mix(seed, index + 1), 0); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  Rng(std::uint64_t mixed, int) : engine_(mixed) {}

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t index);

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Uniform direction on the unit sphere: a normalized triple of independent
/// standard normals (resampled in the measure-zero near-zero case).
Direction3 sample_uniform_direction(Rng& rng);

}  // namespace lineleak
