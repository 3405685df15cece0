#pragma once

// Deterministic RNG plumbing. Verification fans out over (case, draw) pairs;
// each pair gets an independent stream derived from (seed, case-id, draw
// index) so results are identical regardless of worker count or order.

#include <cstdint>
#include <random>
#include <string_view>

namespace twsolve {

/// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + 0x9E3779B97F4A7C15ull));
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  /// Uniform in [0, 1) with full 53-bit mantissa resolution.
  double next01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next01(); }

  /// Magnitude uniform in [lo, hi], sign flipped with probability 1/2.
  double uniform_signed(double lo, double hi) {
    const double x = uniform(lo, hi);
    return next01() < 0.5 ? -x : x;
  }

  double sign() { return next01() < 0.5 ? 1.0 : -1.0; }
};

}  // namespace twsolve
