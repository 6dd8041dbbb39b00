#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cadence {

/// SplitMix64. Chosen over <random> distributions because its output is
/// fully specified, so seeded artifacts are identical on every toolchain.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a domain tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  SplitMix64 mix(seed ^ (tag * 0xd6e8feb86659fd93ULL));
  return mix.next();
}

}  // namespace cadence
