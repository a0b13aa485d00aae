#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "core/bits.hpp"
#include "core/buckets.hpp"
#include "core/errors.hpp"
#include "core/rational.hpp"
#include "core/rng.hpp"
#include "doctest.h"

using namespace mtc;

namespace {

const Rational kEighth(1, 8);

std::string codeword_string(const BucketCode& code, uint32_t k) {
  BitWriter w;
  code.emit(k, w);
  std::string s;
  for (uint64_t i = 0; i < w.bit_size(); ++i) s += w.bit_at(i) ? '1' : '0';
  return s;
}

double entropy_bits(const std::vector<uint64_t>& counts) {
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  double h = 0.0;
  for (uint64_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

// Minimum total code length over every complete prefix code with depth <= 3,
// by exhaustive search over length assignments satisfying Kraft equality.
uint64_t brute_force_optimal_total(const std::vector<uint64_t>& counts) {
  const size_t n = counts.size();
  std::vector<uint32_t> lens(n, 1);
  uint64_t best = UINT64_MAX;
  // Odometer over {1,2,3}^n.
  while (true) {
    int kraft_num = 0;  // in units of 1/8
    for (uint32_t l : lens) kraft_num += 8 >> l;
    if (kraft_num == 8) {
      uint64_t total = 0;
      for (size_t i = 0; i < n; ++i) total += counts[i] * lens[i];
      best = std::min(best, total);
    }
    size_t i = 0;
    while (i < n && lens[i] == 3) lens[i++] = 1;
    if (i == n) break;
    ++lens[i];
  }
  return best;
}

}  // namespace

TEST_CASE("geometric partition expands to the documented boundaries") {
  auto part = BucketPartition::geometric(kEighth, 33);
  CHECK(part.bucket_count() == 33);
  CHECK(part.upper(0) == 1.0);
  CHECK(part.lower(0) == 0.125);
  CHECK(part.upper(1) == 0.125);
  CHECK(part.lower(32) == 0.0);
  // Boundaries strictly decrease with the index (one power of gamma each).
  for (uint32_t k = 0; k + 1 < 33; ++k) {
    CHECK(part.upper(k + 1) == part.lower(k));
    CHECK(part.lower(k) < part.upper(k));
  }
}

TEST_CASE("geometric partition rejects bad parameters") {
  CHECK_THROWS_AS(BucketPartition::geometric(Rational(8, 1), 4), Error);   // ratio > 1
  CHECK_THROWS_AS(BucketPartition::geometric(Rational(1, 1), 4), Error);   // ratio = 1
  CHECK_THROWS_AS(BucketPartition::geometric(kEighth, 0), Error);
  CHECK_THROWS_AS(BucketPartition::geometric(kEighth, 65), Error);
  // gamma^(K-1) underflows to 0 for tiny ratios and large counts.
  CHECK_THROWS_AS(BucketPartition::geometric(Rational(1, 1000000000), 40), Error);
}

TEST_CASE("bucket_of follows the upper-closed convention") {
  auto part = BucketPartition::geometric(kEighth, 33);
  CHECK(part.bucket_of(1.0) == 0);      // p = 1 → top bucket (1/8, 1]
  CHECK(part.bucket_of(0.5) == 0);
  CHECK(part.bucket_of(0.125) == 1);    // boundary belongs to the lower bucket
  CHECK(part.bucket_of(0.1) == 1);
  CHECK(part.bucket_of(1.0 / 64) == 2);
  CHECK(part.bucket_of(0.0) == 32);     // p = 0 → bottom bucket, closed at 0

  CHECK_THROWS_AS(part.bucket_of(-0.1), Error);
  CHECK_THROWS_AS(part.bucket_of(1.1), Error);
  CHECK_THROWS_AS(part.bucket_of(std::nan("")), Error);
}

TEST_CASE("every probability lands in exactly one bucket") {
  auto part = BucketPartition::geometric(kEighth, 33);
  SplitMix64 rng(7);
  for (int i = 0; i < 1000000; ++i) {
    // Mix uniform draws with draws concentrated near the tiny boundaries.
    double p = (i % 2 == 0) ? rng.next_unit()
                            : std::exp2(-64.0 * rng.next_unit());
    uint32_t k = part.bucket_of(p);
    int claims = 0;
    for (uint32_t j = 0; j < part.bucket_count(); ++j) {
      bool inside = p > part.lower(j) && p <= part.upper(j);
      if (j == part.bucket_count() - 1) inside = p >= 0.0 && p <= part.upper(j);
      if (inside) {
        ++claims;
        CHECK(j == k);
      }
    }
    CHECK(claims == 1);
  }
}

TEST_CASE("encoder expansion bounds computed against an extended-precision oracle") {
  auto part = BucketPartition::geometric(kEighth, 33);

  // c = 1: bucket (1/8, 1] widens to (1/8 - ulps, > 1).
  Interval top = part.encoder_expansion(0, Rational(1, 1));
  CHECK(top.lo < 0.125);
  CHECK(top.lo > 0.125 * (1 - 1e-14));
  CHECK(top.hi > 1.0);
  CHECK(!top.closed_hi);
  CHECK(top.contains(1.0));

  // c = 10/3, bucket (8^-2, 8^-1]: endpoints 8^-2 * (3/10)^2 and 8^-1 * (10/3)^2.
  Interval iv = part.encoder_expansion(1, Rational(10, 3));
  long double lo_oracle = (1.0L / 64.0L) * (9.0L / 100.0L);
  long double hi_oracle = (1.0L / 8.0L) * (100.0L / 9.0L);
  CHECK(iv.lo <= static_cast<double>(lo_oracle));
  CHECK(iv.lo >= static_cast<double>(lo_oracle) * (1 - 1e-14));
  CHECK(iv.hi >= static_cast<double>(hi_oracle));
  CHECK(iv.hi <= static_cast<double>(hi_oracle) * (1 + 1e-14));

  // Monotonicity in c.
  Interval c1 = part.encoder_expansion(1, Rational(1, 1));
  Interval c2 = part.encoder_expansion(1, Rational(2, 1));
  CHECK(c2.lo < c1.lo);
  CHECK(c2.hi > c1.hi);
}

TEST_CASE("decoder expansion nests strictly inside the encoder expansion") {
  auto part = BucketPartition::geometric(kEighth, 33);
  for (const Rational& c : {Rational(1, 1), Rational(2, 1), Rational(10, 3)}) {
    for (uint32_t k = 0; k < part.bucket_count(); ++k) {
      Interval enc = part.encoder_expansion(k, c);
      Interval dec = part.decoder_expansion(k, c);
      CHECK(enc.lo < dec.lo);
      CHECK(dec.hi < enc.hi);
      CHECK(dec.closed_hi);
      // The decoder's own closed end is an encoder point.
      CHECK(enc.contains(dec.hi));
    }
  }
}

TEST_CASE("decoder expansion at c = 1 is the bucket itself up to guard width") {
  auto part = BucketPartition::geometric(kEighth, 33);
  for (uint32_t k = 0; k < part.bucket_count(); ++k) {
    Interval dec = part.decoder_expansion(k, Rational(1, 1));
    // Interior points of bucket k are inside; interior points of the
    // neighboring buckets are not.
    double mid = 0.5 * (part.lower(k) + part.upper(k));
    CHECK(dec.contains(mid));
    if (k > 0) CHECK(!dec.contains(0.5 * (part.lower(k - 1) + part.upper(k - 1))));
    if (k + 1 < part.bucket_count() && part.lower(k + 1) > 0)
      CHECK(!dec.contains(0.75 * part.lower(k)));
  }
}

TEST_CASE("probabilities within ratio c always fall in the decoder expansion") {
  auto part = BucketPartition::geometric(kEighth, 33);
  SplitMix64 rng(11);
  for (const Rational& c : {Rational(2, 1), Rational(10, 3)}) {
    const double cv = c.value();
    const double lnc = std::log(cv);
    for (int i = 0; i < 100000; ++i) {
      double p = std::exp2(-40.0 * rng.next_unit());  // spread across buckets
      uint32_t k = part.bucket_of(p);
      double ratio = std::exp((2.0 * rng.next_unit() - 1.0) * lnc);
      double p_prime = std::min(p * ratio, 1.0);
      Interval dec = part.decoder_expansion(k, c);
      CHECK(dec.contains(p_prime));
    }
    // Exact closed endpoints of the ratio band, 1000 deterministic points.
    for (int i = 1; i <= 1000; ++i) {
      double p = std::exp2(-40.0 * (static_cast<double>(i) / 1000.0));
      uint32_t k = part.bucket_of(p);
      Interval dec = part.decoder_expansion(k, c);
      CHECK(dec.contains(std::min(p * cv, 1.0)));
      CHECK(dec.contains(p / cv));
    }
  }
}

TEST_CASE("unary code is the truncated {0, 10, 110, ...} codebook") {
  auto code = BucketCode::unary(33);
  CHECK(code.kind() == CodeKind::unary);
  CHECK(code.bucket_count() == 33);
  CHECK(codeword_string(code, 0) == "0");
  CHECK(codeword_string(code, 1) == "10");
  CHECK(codeword_string(code, 2) == "110");
  CHECK(code.length(31) == 32);
  // Final codeword drops the terminating zero so the code is complete.
  CHECK(code.length(32) == 32);
  CHECK(codeword_string(code, 32) == std::string(32, '1'));
}

TEST_CASE("reading 110 from a unary stream yields the third bucket") {
  auto code = BucketCode::unary(33);
  std::vector<uint8_t> payload = {0b11000000};
  BitCursor cur(payload, 8);
  auto [bucket, consumed] = code.read(cur);
  CHECK(bucket == 2);
  CHECK(consumed == 3);
  CHECK(cur.position() == 3);
}

TEST_CASE("emit then read is the identity for every bucket") {
  for (const BucketCode& code :
       {BucketCode::unary(33), BucketCode::huffman({9, 3, 3, 1, 0, 1})}) {
    for (uint32_t k = 0; k < code.bucket_count(); ++k) {
      BitWriter w;
      code.emit(k, w);
      BitCursor cur(w.bytes(), w.bit_size());
      auto [bucket, consumed] = code.read(cur);
      CHECK(bucket == k);
      CHECK(consumed == code.length(k));
      CHECK(cur.exhausted());
    }
  }
}

TEST_CASE("a random 10^4-codeword concatenation decodes to the original sequence") {
  auto code = BucketCode::huffman({100, 42, 17, 17, 8, 3, 1, 1});
  SplitMix64 rng(3);
  std::vector<uint32_t> sent;
  BitWriter w;
  for (int i = 0; i < 10000; ++i) {
    uint32_t k = static_cast<uint32_t>(rng.next_below(code.bucket_count()));
    sent.push_back(k);
    code.emit(k, w);
  }
  BitCursor cur(w.bytes(), w.bit_size());
  for (uint32_t k : sent) {
    auto [bucket, consumed] = code.read(cur);
    CHECK(bucket == k);
    CHECK(consumed == code.length(k));
  }
  CHECK(cur.exhausted());
}

TEST_CASE("reading past the declared payload fails mid-codeword") {
  auto code = BucketCode::unary(8);
  std::vector<uint8_t> payload = {0b11100000};
  BitCursor cur(payload, 2);  // codeword needs at least 3 bits
  CHECK_THROWS_AS(code.read(cur), Error);
}

TEST_CASE("huffman on two equal counts gives the codewords 0 and 1") {
  auto code = BucketCode::huffman({1, 1});
  CHECK(code.length(0) == 1);
  CHECK(code.length(1) == 1);
  CHECK(codeword_string(code, 0) == "0");
  CHECK(codeword_string(code, 1) == "1");
}

TEST_CASE("huffman lengths for counts [4,2,1,1] match the brute-force optimum") {
  std::vector<uint64_t> counts = {4, 2, 1, 1};
  auto code = BucketCode::huffman(counts);
  CHECK(code.lengths() == std::vector<uint8_t>{1, 2, 3, 3});
  uint64_t total = 0;
  for (uint32_t k = 0; k < 4; ++k) total += counts[k] * code.length(k);
  CHECK(total == brute_force_optimal_total(counts));
}

TEST_CASE("huffman on uniform counts over 2^j buckets is fixed-width") {
  auto code = BucketCode::huffman(std::vector<uint64_t>(8, 5));
  for (uint32_t k = 0; k < 8; ++k) CHECK(code.length(k) == 3);
  // Canonical tie-break: lower bucket index → lexicographically smaller.
  for (uint32_t k = 0; k + 1 < 8; ++k)
    CHECK(codeword_string(code, k) < codeword_string(code, k + 1));
}

TEST_CASE("huffman floors zero counts and rejects all-zero input") {
  CHECK_THROWS_AS(BucketCode::huffman({0, 0, 0}), Error);
  auto code = BucketCode::huffman({0, 9, 0, 0});
  // Every bucket remains encodable.
  for (uint32_t k = 0; k < 4; ++k) {
    BitWriter w;
    code.emit(k, w);
    CHECK(w.bit_size() == code.length(k));
    CHECK(w.bit_size() >= 1);
  }
}

TEST_CASE("huffman codewords are prefix-free") {
  auto code = BucketCode::huffman({50, 20, 10, 5, 5, 5, 3, 1, 1});
  for (uint32_t a = 0; a < code.bucket_count(); ++a)
    for (uint32_t b = 0; b < code.bucket_count(); ++b) {
      if (a == b) continue;
      std::string ca = codeword_string(code, a);
      std::string cb = codeword_string(code, b);
      CHECK(cb.substr(0, ca.size()) != ca);
    }
}

TEST_CASE("from_lengths accepts only complete prefix codes") {
  CHECK_THROWS_AS(BucketCode::from_lengths(CodeKind::huffman, {2, 2}), Error);     // under-full
  CHECK_THROWS_AS(BucketCode::from_lengths(CodeKind::huffman, {1, 1, 1}), Error);  // over-full
  CHECK_THROWS_AS(BucketCode::from_lengths(CodeKind::huffman, {}), Error);
  auto code = BucketCode::from_lengths(CodeKind::huffman, {1, 2, 2});
  CHECK(codeword_string(code, 0) == "0");
  CHECK(codeword_string(code, 1) == "10");
  CHECK(codeword_string(code, 2) == "11");
  // Unary lengths round-trip through the same validator.
  auto unary = BucketCode::unary(20);
  auto rebuilt = BucketCode::from_lengths(CodeKind::unary, unary.lengths());
  for (uint32_t k = 0; k < 20; ++k) CHECK(codeword_string(rebuilt, k) == codeword_string(unary, k));
}

TEST_CASE("expected_length averages codeword lengths under the counts") {
  auto code = BucketCode::huffman({4, 2, 1, 1});
  CHECK(code.expected_length({4, 2, 1, 1}) == doctest::Approx(14.0 / 8.0));
}

TEST_CASE("calibrated code stays within one bit of the bucket entropy") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    uint32_t n = 2 + static_cast<uint32_t>(rng.next_below(30));
    std::vector<uint64_t> counts(n);
    bool any = false;
    for (auto& c : counts) {
      c = rng.next_below(4) == 0 ? 0 : rng.next_below(10000);
      any = any || c > 0;
    }
    if (!any) counts[0] = 1;
    // The floor is part of the calibration distribution: measure the gap
    // against the floored counts the code was actually built from.
    std::vector<uint64_t> floored = counts;
    for (auto& c : floored)
      if (c == 0) c = 1;
    auto code = BucketCode::huffman(counts);
    double gap = code.expected_length(floored) - entropy_bits(floored);
    CHECK(gap >= 0.0);
    CHECK(gap < 1.0);
  }
}
