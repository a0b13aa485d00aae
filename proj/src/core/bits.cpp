#include "core/bits.hpp"

#include <algorithm>

namespace mtc {

size_t shared_prefix_len(std::span<const uint8_t> a, std::span<const uint8_t> b) {
  size_t n = std::min(a.size(), b.size());
  size_t i = 0;
  while (i < n && (a[i] & 1) == (b[i] & 1)) ++i;
  return i;
}

}  // namespace mtc
