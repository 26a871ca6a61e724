#pragma once

#include <cstdint>
#include <string_view>

namespace topogap {

// SplitMix64 (Steele, Lea, Flood 2014), version 1 of the toolkit's PRNG
// contract. 64-bit state, increment 0x9e3779b97f4a7c15, output finalizer
// below. Seeds reproduce across implementations that follow this recipe.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound) by rejection on the top of the range.
  std::uint64_t below(std::uint64_t bound);

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// Stream seed for a work unit: mix(seed ^ fnv1a(key) ^ mix(a + 1) ^ mix(mix(b + 1))).
/// Depends only on its arguments, never on scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t a,
                          std::uint64_t b = 0);

}  // namespace topogap
