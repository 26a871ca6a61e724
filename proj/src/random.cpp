#include "topogap/random.hpp"

namespace topogap {

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Largest multiple of bound that fits; values at or above it are redrawn.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x = (*this)();
  while (x >= limit) x = (*this)();
  return x % bound;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t a,
                          std::uint64_t b) {
  return SplitMix64::mix(seed ^ fnv1a(key) ^ SplitMix64::mix(a + 1) ^
                         SplitMix64::mix(SplitMix64::mix(b + 1)));
}

}  // namespace topogap
