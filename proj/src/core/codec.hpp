#ifndef MTC_CORE_CODEC_HPP
#define MTC_CORE_CODEC_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "core/bits.hpp"
#include "core/buckets.hpp"
#include "core/longform.hpp"
#include "core/predictor.hpp"
#include "core/rational.hpp"

// The mismatch-tolerant token codec. Each token is written as
//
//   bucket codeword ⊕ longform prefix B(x)[1..m+1] ⊕ flipped bit ¬B(x)[m+2]
//
// where m is the longest longform prefix the true token shares with any
// competitor whose encoder-side probability lands near the token's bucket.
// The decoder rebuilds a candidate set from its own (possibly mismatched)
// probabilities and picks the candidate whose longform runs deepest into
// the remaining payload; the flipped bit both stops that run and marks the
// token boundary. As long as encoder and decoder probabilities stay within
// the certified multiplicative factor c, the decoder's candidate set is a
// subset of the encoder's competitors plus the true token, so the deepest
// run is the true token and decoding is exact.

namespace mtc {

struct CodecParams {
  BucketPartition partition;
  BucketCode code;
  LongformTable longforms;
  Rational certificate_c;

  void validate() const;
};

struct TokenStats {
  uint32_t bucket;
  int32_t m;        // longest competitor prefix; -1 when no competitors
  uint32_t u_size;  // competitor count |U|
  uint32_t bit_len;
};

struct EncodedToken {
  BitWriter bits;
  TokenStats stats;
};

// All tokens whose probability lies in the encoder expansion of bucket k.
// The caller removes the token being encoded.
std::vector<uint32_t> compute_U(std::span<const double> dist, uint32_t k,
                                const CodecParams& params);

EncodedToken encode_token(std::span<const double> dist, uint32_t x, const CodecParams& params);

struct DecodedToken {
  uint32_t token;
  uint32_t consumed_bits;
  bool integrity_flag;  // tie in the candidate argmax: certificate suspect
};

DecodedToken decode_token(std::span<const double> dist_prime, BitCursor& cursor,
                          const CodecParams& params);

struct EncodeResult {
  std::vector<uint8_t> payload;  // zero-padded to a byte boundary
  uint64_t payload_bits;
  std::vector<TokenStats> stats;
};

EncodeResult encode_sequence(const Predictor& model, std::span<const uint32_t> tokens,
                             const CodecParams& params);

struct DecodeReport {
  uint64_t flagged = 0;                 // tokens decoded with an integrity flag
  std::vector<uint64_t> flagged_positions;
  std::vector<uint32_t> consumed_bits;  // per token, for length accounting
};

// Decodes exactly `token_count` tokens; pad bits after `payload_bits` are
// never touched. The model sees the decoded prefix as context.
std::vector<uint32_t> decode_sequence(const Predictor& model, std::span<const uint8_t> payload,
                                      uint64_t payload_bits, uint64_t token_count,
                                      const CodecParams& params, DecodeReport* report = nullptr);

}  // namespace mtc

#endif
