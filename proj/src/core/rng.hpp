#ifndef MTC_CORE_RNG_HPP
#define MTC_CORE_RNG_HPP

#include <cstdint>

// Integer-only pseudorandom primitives. Everything derived from these is
// bit-exact across platforms, which the container format relies on.

namespace mtc {

// splitmix64 finalizer applied after the Weyl increment; a bijection on u64.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Plain splitmix64 sequence.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 significant bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next() % n; }

 private:
  uint64_t state_;
};

}  // namespace mtc

#endif
