#pragma once

#include <cmath>
#include <cstdint>

namespace ieqa {

// Project-wide seeded generator (splitmix64). Every stochastic choice in the
// pipeline draws from one of these, so runs are reproducible from a single
// 64-bit seed regardless of platform RNG facilities.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Box-Muller, one variate per call; the sine half is discarded so the
  // stream position does not depend on call parity.
  double gaussian() {
    double u1 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586477 * u2);
  }
};

inline std::uint64_t scramble64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a child seed from (seed, tag...). Used for per-record counter-based
// seeding: stream i of a kernel never depends on how work is split across
// threads.
inline std::uint64_t derive_seed(std::uint64_t seed) {
  return scramble64(seed + 0x9E3779B97F4A7C15ULL);
}

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Rest... rest) {
  return derive_seed(scramble64(seed ^ (tag + 0x9E3779B97F4A7C15ULL)), rest...);
}

}  // namespace ieqa
