#ifndef MTC_CORE_HASH_HPP
#define MTC_CORE_HASH_HPP

#include <cstdint>
#include <span>

namespace mtc {

// FNV-1a, 64-bit. Used for content binding (model ↔ container), not
// security.
inline uint64_t fnv1a64(std::span<const uint8_t> bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace mtc

#endif
