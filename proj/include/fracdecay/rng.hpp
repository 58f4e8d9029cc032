#pragma once

#include <cstdint>

namespace fracdecay {

/// Counter-based uniform stream.
///
/// The draw for (seed, stream, counter) is a pure function of those three
/// integers: the SplitMix64 finalizer applied to a keyed combination. Any
/// shard of a computation can therefore regenerate exactly the draws it needs
/// without sharing generator state, and results do not depend on the order in
/// which shards run.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return mix(key_ ^ mix(stream * 0x9e3779b97f4a7c15ULL + 0xbb67ae8584caa73bULL) ^
               (counter * 0xd1b54a32d192ed03ULL));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  [[nodiscard]] constexpr double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
};

}  // namespace fracdecay
