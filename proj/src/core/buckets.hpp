#ifndef MTC_CORE_BUCKETS_HPP
#define MTC_CORE_BUCKETS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "core/bits.hpp"
#include "core/rational.hpp"

// Probability buckets over [0,1] and the prefix-free bucket code.
//
// Buckets are indexed 0..count-1 from the top: bucket 0 is the upper-closed
// interval ending at 1, the last bucket is closed at 0. Indexing from the
// top keeps codeword length growing with index under the default unary
// code, so high-probability tokens (the common case) get the short
// codewords.

namespace mtc {

// Half-open interval; `closed_hi` distinguishes (lo, hi] from (lo, hi).
struct Interval {
  double lo;
  double hi;
  bool closed_hi;

  bool contains(double p) const { return p > lo && (closed_hi ? p <= hi : p < hi); }
};

struct PartitionSpec {
  enum class Kind : uint8_t { geometric = 0, explicit_list = 1 };
  Kind kind = Kind::geometric;
  Rational gamma;                  // geometric only
  uint32_t count = 0;              // geometric only
  std::vector<double> boundaries;  // explicit only: ascending upper bounds, last = 1
};

class BucketPartition {
 public:
  // Boundaries {gamma^(count-1), ..., gamma^2, gamma, 1}. One power loop
  // serves encoder and decoder, so both sides see identical doubles.
  static BucketPartition geometric(const Rational& gamma, uint32_t count);
  // Explicit ascending bucket upper bounds; the last must be exactly 1.
  static BucketPartition explicit_list(std::vector<double> upper_bounds);
  static BucketPartition from_spec(const PartitionSpec& spec);

  uint32_t bucket_count() const { return static_cast<uint32_t>(ascending_.size()) - 1; }
  uint32_t bucket_of(double p) const;
  double lower(uint32_t k) const;  // greatest lower bound of bucket k
  double upper(uint32_t k) const;  // upper (closed) end of bucket k

  // Token-admission interval used while encoding: (lower/c², upper·c²),
  // both ends nudged two representational steps outward. Over-widening is
  // safe on this side — a larger candidate set only lengthens the
  // disambiguation prefix, never breaks uniqueness.
  Interval encoder_expansion(uint32_t k, const Rational& c) const;
  // Candidate interval used while decoding: (lower/c, upper·c], one step
  // outward. Kept strictly inside the encoder interval (by the extra
  // encoder step) so every decoder candidate was already disambiguated.
  Interval decoder_expansion(uint32_t k, const Rational& c) const;

  const PartitionSpec& spec() const { return spec_; }

 private:
  explicit BucketPartition(std::vector<double> ascending, PartitionSpec spec);

  std::vector<double> ascending_;  // b[0]=0 < b[1] < ... < b[count]=1
  PartitionSpec spec_;
};

enum class CodeKind : uint8_t { unary = 0, huffman = 1 };

// Canonical prefix-free code over bucket indices. The default unary code
// {0, 10, 110, ...} is truncated at the last bucket (its codeword drops the
// terminating 0) so the codeword set is complete: every bit stream resolves
// to exactly one bucket.
class BucketCode {
 public:
  static BucketCode unary(uint32_t bucket_count);
  // Huffman lengths from per-bucket frequency counts; zero counts are
  // floored to 1 so every bucket stays encodable.
  static BucketCode huffman(std::vector<uint64_t> counts);
  // Rebuild from transmitted per-bucket lengths (canonical assignment,
  // ties by bucket index). Rejects incomplete or over-full length sets.
  static BucketCode from_lengths(CodeKind kind, const std::vector<uint8_t>& lengths);

  CodeKind kind() const { return kind_; }
  uint32_t bucket_count() const { return static_cast<uint32_t>(lengths_.size()); }
  uint32_t length(uint32_t k) const { return lengths_.at(k); }
  const std::vector<uint8_t>& lengths() const { return lengths_; }

  void emit(uint32_t k, BitWriter& out) const;
  // Consumes exactly one codeword; returns (bucket index, bits consumed).
  std::pair<uint32_t, uint32_t> read(BitCursor& in) const;

  // Mean codeword length under the given counts, in bits.
  double expected_length(const std::vector<uint64_t>& counts) const;

 private:
  BucketCode(CodeKind kind, std::vector<uint8_t> lengths);
  void build_tables();

  CodeKind kind_;
  std::vector<uint8_t> lengths_;           // per bucket
  std::vector<uint64_t> codewords_;        // per bucket, right-aligned
  // Canonical decode tables indexed by codeword length.
  std::vector<uint64_t> first_code_;       // smallest codeword of each length
  std::vector<uint32_t> count_at_len_;     // codewords of each length
  std::vector<uint32_t> offset_at_len_;    // into symbols_ordered_
  std::vector<uint32_t> symbols_ordered_;  // buckets sorted by (length, index)
  uint32_t max_len_ = 0;
};

}  // namespace mtc

#endif
