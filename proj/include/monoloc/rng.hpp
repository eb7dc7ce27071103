#pragma once

#include <cmath>
#include <cstdint>

namespace monoloc {

/// mix64: SplitMix64 finalizer applied to `a + golden * (b + 1)`.
/// Used to derive independent child seeds (e.g. one per bootstrap replicate
/// or Monte-Carlo replication) from a master seed.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based 64-bit generator (SplitMix64): output(i) is a pure bit-mix
/// of seed + i * 0x9E3779B97F4A7C15, so streams are reproducible from the
/// seed alone on any platform.  Constants are Steele-Lea-Flood's.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0,1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Index uniform on {0,...,n-1}.
  std::size_t uniform_index(std::size_t n) {
    auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  /// Standard normal via Box-Muller.  Consumes exactly two uniforms per
  /// draw (the sine branch is discarded) so stream positions stay simple.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  /// Fair random sign, +1 or -1.
  double sign() { return uniform01() < 0.5 ? 1.0 : -1.0; }

 private:
  std::uint64_t state_;
};

}  // namespace monoloc
