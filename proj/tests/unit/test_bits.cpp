#include <cstdint>
#include <vector>

#include "core/bits.hpp"
#include "core/errors.hpp"
#include "doctest.h"

using namespace mtc;

namespace {

std::vector<uint8_t> bits_of(std::initializer_list<int> bits) {
  std::vector<uint8_t> v;
  for (int b : bits) v.push_back(static_cast<uint8_t>(b));
  return v;
}

}  // namespace

TEST_CASE("BitWriter packs MSB-first and pads with zeros") {
  BitWriter w;
  // 1010 1100 1 → bytes 0xAC, 0x80
  for (int b : {1, 0, 1, 0, 1, 1, 0, 0, 1}) w.push(b != 0);
  CHECK(w.bit_size() == 9);
  REQUIRE(w.bytes().size() == 2);
  CHECK(w.bytes()[0] == 0xAC);
  CHECK(w.bytes()[1] == 0x80);
  CHECK(w.bit_at(0) == true);
  CHECK(w.bit_at(1) == false);
  CHECK(w.bit_at(8) == true);
}

TEST_CASE("BitWriter append concatenates at bit granularity") {
  BitWriter a, b;
  for (int bit : {1, 1, 0}) a.push(bit != 0);
  for (int bit : {1, 0, 1, 1, 1}) b.push(bit != 0);
  a.append(b);
  CHECK(a.bit_size() == 8);
  CHECK(a.bytes()[0] == 0b11010111);
}

TEST_CASE("BitCursor reads exactly the declared bits") {
  std::vector<uint8_t> bytes = {0b10110000};
  BitCursor cur(bytes, 4);
  CHECK(cur.read() == true);
  CHECK(cur.read() == false);
  CHECK(cur.read() == true);
  CHECK(cur.read() == true);
  CHECK(cur.exhausted());
  CHECK_THROWS_AS(cur.read(), Error);
}

TEST_CASE("BitCursor rejects advancing past the end") {
  std::vector<uint8_t> bytes = {0xFF};
  BitCursor cur(bytes, 6);
  cur.advance(5);
  CHECK(cur.remaining() == 1);
  CHECK_THROWS_AS(cur.advance(2), Error);
  // A failed advance leaves the position untouched.
  CHECK(cur.position() == 5);
}

TEST_CASE("BitCursor rejects a bit length longer than the buffer") {
  std::vector<uint8_t> bytes = {0x00};
  CHECK_THROWS_AS(BitCursor(bytes, 9), Error);
}

TEST_CASE("shared_prefix_len on the worked examples") {
  // (0110, 0111) → 3
  CHECK(shared_prefix_len(bits_of({0, 1, 1, 0}), bits_of({0, 1, 1, 1})) == 3);
  // (a, a) → |a|
  auto a = bits_of({1, 0, 0, 1, 1});
  CHECK(shared_prefix_len(a, a) == 5);
  // first-bit mismatch → 0
  CHECK(shared_prefix_len(bits_of({1, 0, 1}), bits_of({0, 0})) == 0);
  // truncation caps at the shorter operand
  CHECK(shared_prefix_len(bits_of({1, 1, 1, 1}), bits_of({1, 1})) == 2);
  CHECK(shared_prefix_len(bits_of({}), bits_of({1})) == 0);
}

TEST_CASE("shared_prefix_len is symmetric and ultrametric") {
  // ⋆(a,b) ≥ min(⋆(a,c), ⋆(c,b)) for all triples over short strings.
  std::vector<std::vector<uint8_t>> strs;
  for (int v = 0; v < 16; ++v)
    strs.push_back(bits_of({(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1}));
  for (const auto& a : strs)
    for (const auto& b : strs) {
      size_t ab = shared_prefix_len(a, b);
      CHECK(ab == shared_prefix_len(b, a));
      for (const auto& c : strs) {
        size_t ac = shared_prefix_len(a, c);
        size_t cb = shared_prefix_len(c, b);
        CHECK(ab >= std::min(ac, cb));
      }
    }
}
