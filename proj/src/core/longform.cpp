#include "core/longform.hpp"

#include <bit>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace mtc {

namespace {
constexpr uint64_t kDomainTag = 0xA0761D6478BD642Full;   // seed → key separation
constexpr uint64_t kTokenStride = 0x9E3779B97F4A7C15ull; // odd: token spreading stays injective
constexpr uint64_t kBlockStride = 0xD1B54A32D192ED03ull; // odd: block counter spreading
}  // namespace

LongformTable::LongformTable(uint64_t master_seed, uint32_t alphabet_size)
    : master_seed_(master_seed), alphabet_size_(alphabet_size) {
  if (alphabet_size < 2) fail(ErrorCode::invalid_argument, "alphabet size must be at least 2");
  key_ = mix64(master_seed ^ kDomainTag);
  base_len_ = static_cast<uint32_t>(std::bit_width(alphabet_size - 1));
}

uint64_t LongformTable::block(uint32_t token, uint64_t index) const {
  check_token(token);
  uint64_t token_key = mix64(key_ ^ ((static_cast<uint64_t>(token) + 1) * kTokenStride));
  return mix64(token_key ^ (index * kBlockStride));
}

bool LongformTable::bit(uint32_t token, uint64_t position) const {
  if (position == 0) fail(ErrorCode::invalid_argument, "longform positions are 1-indexed");
  uint64_t i = position - 1;
  return (block(token, i >> 6) >> (63 - (i & 63))) & 1;
}

uint32_t LongformTable::shared_prefix(uint32_t a, uint32_t b) const {
  if (a == b) fail(ErrorCode::invalid_argument, "shared prefix of a token with itself is unbounded");
  // Distinct tokens feed distinct inputs to the block function at index 0,
  // so the XOR below is never zero.
  return static_cast<uint32_t>(std::countl_zero(block(a, 0) ^ block(b, 0)));
}

uint64_t LongformTable::shared_prefix_with(uint32_t token, const BitCursor& z) const {
  uint64_t limit = z.remaining();
  uint64_t matched = 0;
  while (matched < limit) {
    uint64_t want = limit - matched;
    uint64_t take = want < 64 ? want : 64;
    uint64_t payload = 0;
    for (uint64_t i = 0; i < take; ++i)
      payload = (payload << 1) | static_cast<uint64_t>(z.bit_at(z.position() + matched + i));
    uint64_t mine = block(token, matched >> 6) >> (64 - take);
    if (mine == payload) {
      matched += take;
      continue;
    }
    uint64_t diff = (mine ^ payload) << (64 - take);
    return matched + static_cast<uint64_t>(std::countl_zero(diff));
  }
  return limit;
}

void LongformTable::check_token(uint32_t token) const {
  if (token >= alphabet_size_)
    fail(ErrorCode::invalid_token, "token id " + std::to_string(token) + " out of range");
}

}  // namespace mtc
