#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace coinflip {

using Rng = std::mt19937_64;

// Worker streams: worker i of a run seeded with `seed` uses seed ^ i.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ index; }
inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// 53-bit uniform in [0,1); identical across standard libraries, unlike
// std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Unbiased draw from {0, ..., bound-1}.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

// Uniform size-m subset of {0, ..., n-1}, returned sorted.
std::vector<std::size_t> sample_subset(Rng& rng, std::size_t n, std::size_t m);

// Stateless 64-bit mixer (splitmix64 finalizer), used for hash-defined functions.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace coinflip
