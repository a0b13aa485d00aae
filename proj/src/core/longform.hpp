#ifndef MTC_CORE_LONGFORM_HPP
#define MTC_CORE_LONGFORM_HPP

#include <cstdint>

#include "core/bits.hpp"

// Per-token unbounded binary strings B(x), realized lazily by a keyed
// counter-mode pseudorandom function instead of stored tables. Encoder and
// decoder derive identical bits from the master seed alone; the exact
// derivation is pinned down in docs/FORMAT.md so the streams are
// reproducible bit-for-bit across machines.
//
// Key property: the 64-bit block at a fixed index is an injective function
// of the token id, so any two distinct tokens disagree somewhere in their
// first 64 bits. Shared prefixes are therefore finite by construction, and
// all prefix queries resolve within one block in practice.

namespace mtc {

class LongformTable {
 public:
  LongformTable(uint64_t master_seed, uint32_t alphabet_size);

  uint64_t master_seed() const { return master_seed_; }
  uint32_t alphabet_size() const { return alphabet_size_; }
  // ⌈log₂|alphabet|⌉, the nominal fixed-length code width. Informational.
  uint32_t base_len() const { return base_len_; }

  // 64 bits of B(token) covering positions 64·index+1 … 64·index+64,
  // most significant bit first.
  uint64_t block(uint32_t token, uint64_t index) const;

  // B(token)[position], 1-indexed.
  bool bit(uint32_t token, uint64_t position) const;

  // Longest shared prefix of B(a) and B(b); 0..63 for distinct tokens.
  uint32_t shared_prefix(uint32_t a, uint32_t b) const;

  // Longest shared prefix of B(token) and the remaining payload bits at
  // the cursor (cursor itself is not advanced). Truncates at the payload
  // boundary, so the result never exceeds cursor.remaining().
  uint64_t shared_prefix_with(uint32_t token, const BitCursor& z) const;

 private:
  void check_token(uint32_t token) const;

  uint64_t master_seed_;
  uint64_t key_;
  uint32_t alphabet_size_;
  uint32_t base_len_;
};

}  // namespace mtc

#endif
