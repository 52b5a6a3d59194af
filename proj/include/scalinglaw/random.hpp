#pragma once

// splitmix64 stream and the helpers built on it. The algorithms here are
// fixed: golden files (shard permutations, bootstrap intervals, Monte Carlo
// estimates) depend on every bit of them.

#include <cstdint>
#include <initializer_list>

namespace scalinglaw {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// splitmix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }
  constexpr std::uint64_t operator()() noexcept { return next(); }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  /// Uniform integer in [0, bound). Rejects draws below 2^64 mod bound so
  /// the remaining range is an exact multiple of bound.
  constexpr std::uint64_t bounded(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Seed of an independent substream, derived from a parent seed and a path
/// of indices (resample index, trial index, grid cell coordinates...).
constexpr std::uint64_t substream_seed(std::uint64_t seed,
                                       std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = seed;
  for (std::uint64_t index : path) s = mix64(s ^ mix64(index + kGoldenGamma));
  return s;
}

}  // namespace scalinglaw
