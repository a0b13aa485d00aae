#include "core/codec.hpp"

#include <algorithm>
#include <bit>

#include "core/errors.hpp"

namespace mtc {

void CodecParams::validate() const {
  if (code.bucket_count() != partition.bucket_count())
    fail(ErrorCode::invalid_argument, "bucket code does not cover the partition");
  if (certificate_c.num < certificate_c.den)
    fail(ErrorCode::invalid_argument, "certificate factor must be at least 1");
}

std::vector<uint32_t> compute_U(std::span<const double> dist, uint32_t k,
                                const CodecParams& params) {
  Interval iv = params.partition.encoder_expansion(k, params.certificate_c);
  std::vector<uint32_t> out;
  for (uint32_t x = 0; x < dist.size(); ++x)
    if (iv.contains(dist[x])) out.push_back(x);
  return out;
}

EncodedToken encode_token(std::span<const double> dist, uint32_t x, const CodecParams& params) {
  params.validate();
  if (dist.size() != params.longforms.alphabet_size())
    fail(ErrorCode::invalid_argument, "distribution size does not match alphabet");
  if (x >= dist.size()) fail(ErrorCode::invalid_token, "token id out of range");
  validate_distribution(dist);

  uint32_t k = params.partition.bucket_of(dist[x]);
  Interval iv = params.partition.encoder_expansion(k, params.certificate_c);

  int32_t m = -1;
  uint32_t u_size = 0;
  for (uint32_t other = 0; other < dist.size(); ++other) {
    if (other == x || !iv.contains(dist[other])) continue;
    ++u_size;
    m = std::max(m, static_cast<int32_t>(params.longforms.shared_prefix(other, x)));
  }

  EncodedToken out;
  params.code.emit(k, out.bits);
  uint32_t code_len = static_cast<uint32_t>(out.bits.bit_size());
  // Longform prefix through the last bit any competitor can match, then
  // one flipped bit. Competitors diverge from the payload at or before
  // position m+1, the true token at exactly m+2; that gap is what the
  // decoder's argmax keys on, and the flipped bit doubles as the
  // end-of-token marker.
  for (int32_t j = 1; j <= m + 1; ++j) out.bits.push(params.longforms.bit(x, static_cast<uint64_t>(j)));
  out.bits.push(!params.longforms.bit(x, static_cast<uint64_t>(m) + 2));
  out.stats = {k, m, u_size, code_len + static_cast<uint32_t>(m) + 2};
  return out;
}

DecodedToken decode_token(std::span<const double> dist_prime, BitCursor& cursor,
                          const CodecParams& params) {
  params.validate();
  if (dist_prime.size() != params.longforms.alphabet_size())
    fail(ErrorCode::invalid_argument, "distribution size does not match alphabet");
  validate_distribution(dist_prime);

  auto [k, code_bits] = params.code.read(cursor);
  Interval iv = params.partition.decoder_expansion(k, params.certificate_c);

  // One scratch load of the next 64 payload bits; each candidate's shared
  // prefix then falls out of a single XOR. Runs past 64 bits are only
  // possible for a candidate agreeing with the payload through a full
  // block (certificate violations); those take the exact slow path.
  uint64_t remaining = cursor.remaining();
  uint64_t window_len = remaining < 64 ? remaining : 64;
  uint64_t window = 0;
  for (uint64_t i = 0; i < window_len; ++i)
    window = (window << 1) | static_cast<uint64_t>(cursor.bit_at(cursor.position() + i));
  if (window_len > 0 && window_len < 64) window <<= (64 - window_len);

  uint32_t best_token = 0;
  uint64_t best_star = 0;
  bool found = false;
  bool tie = false;
  for (uint32_t x = 0; x < dist_prime.size(); ++x) {
    if (!iv.contains(dist_prime[x])) continue;
    uint64_t diff = params.longforms.block(x, 0) ^ window;
    uint64_t star;
    if (diff == 0 && remaining > 64) {
      star = params.longforms.shared_prefix_with(x, cursor);  // exact, rare
    } else {
      star = diff == 0 ? 64 : static_cast<uint64_t>(std::countl_zero(diff));
      if (star > window_len) star = window_len;
    }
    if (!found || star > best_star) {
      best_token = x;
      best_star = star;
      found = true;
      tie = false;
    } else if (star == best_star) {
      tie = true;  // impossible under the certificate; keep lowest id
    }
  }
  if (!found)
    fail(ErrorCode::decode_integrity,
         "no candidate token for bucket " + std::to_string(k) + " at bit " +
             std::to_string(cursor.position()));
  if (best_star + 1 > remaining)
    fail(ErrorCode::truncated_stream, "token run past end of payload");
  cursor.advance(best_star + 1);
  return {best_token, code_bits + static_cast<uint32_t>(best_star) + 1, tie};
}

EncodeResult encode_sequence(const Predictor& model, std::span<const uint32_t> tokens,
                             const CodecParams& params) {
  params.validate();
  EncodeResult result;
  result.stats.reserve(tokens.size());
  BitWriter payload;
  std::vector<double> dist;
  for (size_t i = 0; i < tokens.size(); ++i) {
    model.next_distribution(i, tokens.subspan(0, i), dist);
    EncodedToken tok = encode_token(dist, tokens[i], params);
    payload.append(tok.bits);
    result.stats.push_back(tok.stats);
  }
  result.payload_bits = payload.bit_size();
  result.payload = payload.take_bytes();
  return result;
}

std::vector<uint32_t> decode_sequence(const Predictor& model, std::span<const uint8_t> payload,
                                      uint64_t payload_bits, uint64_t token_count,
                                      const CodecParams& params, DecodeReport* report) {
  params.validate();
  BitCursor cursor(payload, payload_bits);
  std::vector<uint32_t> decoded;
  decoded.reserve(token_count);
  std::vector<double> dist;
  for (uint64_t i = 0; i < token_count; ++i) {
    model.next_distribution(i, decoded, dist);
    DecodedToken tok;
    try {
      tok = decode_token(dist, cursor, params);
    } catch (const Error& e) {
      fail(e.code(), "token " + std::to_string(i) + ": " + e.what());
    }
    decoded.push_back(tok.token);
    if (report) {
      report->consumed_bits.push_back(tok.consumed_bits);
      if (tok.integrity_flag) {
        ++report->flagged;
        report->flagged_positions.push_back(i);
      }
    }
  }
  return decoded;
}

}  // namespace mtc
