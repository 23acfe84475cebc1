#pragma once

#include <array>
#include <cstdint>

namespace derivlab {

/// Identifier of the sampling scheme, recorded in every report so that
/// sample sets can be regenerated bit-for-bit by other implementations.
inline constexpr const char* kGeneratorId = "xoshiro256++/uniform53/v1";

/// xoshiro256++ with splitmix64 seeding. Fixed algorithm, fixed seeding,
/// no library-dependent state: identical streams on every platform.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    // splitmix64 expansion of the 64-bit seed into the 256-bit state
    std::uint64_t z = seed;
    for (auto& word : state_) {
      z += 0x9e3779b97f4a7c15ull;
      std::uint64_t x = z;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
      word = x ^ (x >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double uniform_symmetric() { return 2.0 * uniform01() - 1.0; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// Derives an independent substream seed; used to decouple the sample set,
/// the ground-truth maps and the perturbation directions of one experiment.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ull * (tag + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace derivlab
