#pragma once

// Pinned deterministic RNG: SplitMix64 for seeding/derivation, xoshiro256**
// for draws. Every seeded behavior in the project flows through this header,
// so the exact algorithms matter: identical seeds must give identical
// sequences on every platform and in every port.
//
// SplitMix64: Steele/Lea/Flood, public-domain reference by Sebastiano Vigna.
// xoshiro256**: Blackman/Vigna, public-domain reference.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace raceml {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// One step of the SplitMix64 recurrence. Advances `state` and returns the
// mixed output. From state 0 the first output is 0xE220A8397B1DCDAF.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += kGoldenGamma);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** stream, state filled by SplitMix64 expansion of a 64-bit seed.
// A stream is owned by exactly one logical task; streams are never shared
// across concurrent consumers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1) from the top 53 bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Always consumes exactly two uniform
  // draws, whether or not the second axis is needed.
  double next_gaussian() {
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform index in [0,n). floor(u*n) on the 53-bit uniform; the residual
  // bias is far below anything observable at project scales.
  std::size_t next_below(std::size_t n) {
    const auto k = static_cast<std::size_t>(next_double() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

// Independent stream for logical task `index` of round `round`. The seed is
// one SplitMix64 step over (master ^ round*gamma ^ index), then the stream
// constructor expands it to full generator state. Distinct (round, index)
// pairs give distinct streams, which is what makes parallel candidate
// processing order-independent: no stream is ever shared.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t round,
                               std::uint64_t index) {
  std::uint64_t mixed = master_seed ^ (round * kGoldenGamma) ^ index;
  return RngStream(splitmix64_next(mixed));
}

}  // namespace raceml
