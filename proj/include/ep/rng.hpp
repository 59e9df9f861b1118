#pragma once

#include <array>
#include <cstdint>

namespace ep {

// splitmix64 step; also the mixer used to derive independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++, seeded through splitmix64. Fully specified output sequence,
/// so results are bit-identical across platforms and standard libraries
/// (std::uniform_real_distribution would not be). One instance per stream;
/// streams for Monte Carlo rep r come from derive(seed, r).
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64(sm);
  }

  /// Independent stream for (seed, stream_index); every repetition owns its
  /// stream, so results do not depend on how reps are scheduled over threads.
  static Xoshiro256 derive(std::uint64_t seed, std::uint64_t stream_index) {
    std::uint64_t sm = seed;
    std::uint64_t a = splitmix64(sm);
    sm = stream_index ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t b = splitmix64(sm);
    return Xoshiro256(a ^ (b * 0x2545f4914f6cdd1dULL));
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

  /// uniform double in [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_;
};

}  // namespace ep
