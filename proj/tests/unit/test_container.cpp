#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/alphabet.hpp"
#include "core/container.hpp"
#include "core/errors.hpp"
#include "core/predictor.hpp"
#include "doctest.h"

using namespace mtc;

namespace {

Container sample_container() {
  Container c;
  c.header.alphabet_kind = AlphabetKind::byte_tokens;
  c.header.alphabet_size = 256;
  c.header.master_seed = 0x1234567890ABCDEFull;
  c.header.c = Rational(10, 3);
  c.header.partition.kind = PartitionSpec::Kind::geometric;
  c.header.partition.gamma = Rational(1, 8);
  c.header.partition.count = 33;
  c.header.code_kind = CodeKind::unary;
  c.header.model_kind = ModelBinding::ngram;
  c.header.model_hash = 0xFEEDFACE12345678ull;
  c.header.token_count = 3;
  c.header.payload_bits = 17;
  c.payload = {0xAB, 0xCD, 0x80};
  return c;
}

bool headers_equal(const ContainerHeader& a, const ContainerHeader& b) {
  return a.alphabet_kind == b.alphabet_kind && a.alphabet_size == b.alphabet_size &&
         a.longform_tag == b.longform_tag && a.master_seed == b.master_seed && a.c == b.c &&
         a.partition.kind == b.partition.kind && a.partition.gamma == b.partition.gamma &&
         a.partition.count == b.partition.count &&
         a.partition.boundaries == b.partition.boundaries && a.code_kind == b.code_kind &&
         a.code_lengths == b.code_lengths && a.model_kind == b.model_kind &&
         a.model_hash == b.model_hash && a.token_count == b.token_count &&
         a.payload_bits == b.payload_bits;
}

}  // namespace

TEST_CASE("crc32 matches the standard check value") {
  std::string s = "123456789";
  CHECK(crc32(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size())) ==
        0xCBF43926u);
}

TEST_CASE("container round-trips field-exactly with a geometric partition") {
  Container c = sample_container();
  auto bytes = serialize_container(c);
  Container back = parse_container(bytes);
  CHECK(headers_equal(back.header, c.header));
  CHECK(back.payload == c.payload);
  // Serialization is canonical: a second pass is byte-identical.
  CHECK(serialize_container(back) == bytes);
}

TEST_CASE("container round-trips an explicit partition and huffman lengths") {
  Container c = sample_container();
  c.header.alphabet_kind = AlphabetKind::word_tokens;
  c.header.alphabet_size = 5000;
  c.header.partition.kind = PartitionSpec::Kind::explicit_list;
  c.header.partition.gamma = Rational();
  c.header.partition.count = 0;
  c.header.partition.boundaries = {1e-30, 0.001, 0.125, 0.5, 1.0};
  c.header.code_kind = CodeKind::huffman;
  c.header.code_lengths = {2, 2, 3, 3, 1};
  c.header.model_kind = ModelBinding::replay;
  auto bytes = serialize_container(c);
  Container back = parse_container(bytes);
  CHECK(headers_equal(back.header, c.header));
  CHECK(back.payload == c.payload);
}

TEST_CASE("checksum failure is detected before any field is trusted") {
  Container c = sample_container();
  auto bytes = serialize_container(c);
  for (size_t pos : {size_t{5}, size_t{20}, bytes.size() - 6, bytes.size() - 1}) {
    auto corrupted = bytes;
    corrupted[pos] ^= 0x01;
    CHECK_THROWS_AS(parse_container(corrupted), Error);
  }
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(parse_container(truncated), Error);
  CHECK_THROWS_AS(parse_container(std::vector<uint8_t>{}), Error);
}

TEST_CASE("serialize rejects payload and bit-length disagreement") {
  Container c = sample_container();
  c.payload.push_back(0x00);  // one byte too many for 17 bits
  CHECK_THROWS_AS(serialize_container(c), Error);
}

TEST_CASE("params_from_header rebuilds the exact codec configuration") {
  Container c = sample_container();
  CodecParams params = params_from_header(c.header);
  CHECK(params.partition.bucket_count() == 33);
  CHECK(params.partition.upper(0) == 1.0);
  CHECK(params.partition.lower(0) == 0.125);
  CHECK(params.code.kind() == CodeKind::unary);
  CHECK(params.code.length(0) == 1);
  CHECK(params.longforms.master_seed() == c.header.master_seed);
  CHECK(params.longforms.alphabet_size() == 256);
  CHECK(params.certificate_c == Rational(10, 3));

  c.header.longform_tag = 2;
  CHECK_THROWS_AS(params_from_header(c.header), Error);
}

TEST_CASE("pad bits never affect the decoded sequence") {
  // Encode a real sequence whose payload does not end on a byte boundary,
  // then rewrite the container with every pad-bit pattern. The decoder must
  // return the same tokens each time.
  NGramModel model(TokenAlphabet::external(6), 1, 1.0);
  std::vector<uint32_t> base = {0, 1, 2, 3, 4, 5, 2, 4, 1, 3, 5, 0};
  model.train(base);
  model.finalize();

  CodecParams params{BucketPartition::geometric(Rational(1, 2), 8), BucketCode::unary(8),
                     LongformTable(0xCAFE, 6), Rational(1, 1)};
  // Trim until the payload ends off a byte boundary; the fuzz needs
  // trailing pad bits to flip.
  std::vector<uint32_t> data = base;
  EncodeResult encoded = encode_sequence(model, data, params);
  while (encoded.payload_bits % 8 == 0 && data.size() > 1) {
    data.pop_back();
    encoded = encode_sequence(model, data, params);
  }
  uint32_t pad = static_cast<uint32_t>(encoded.payload.size() * 8 - encoded.payload_bits);
  REQUIRE(pad > 0);

  Container c;
  c.header.alphabet_kind = AlphabetKind::external_tokens;
  c.header.alphabet_size = 6;
  c.header.master_seed = 0xCAFE;
  c.header.c = Rational(1, 1);
  c.header.partition.gamma = Rational(1, 2);
  c.header.partition.count = 8;
  c.header.token_count = data.size();
  c.header.payload_bits = encoded.payload_bits;
  c.payload = encoded.payload;

  for (uint32_t pattern = 0; pattern < (1u << pad); ++pattern) {
    Container fuzzed = c;
    fuzzed.payload.back() =
        static_cast<uint8_t>((fuzzed.payload.back() & ~((1u << pad) - 1)) | pattern);
    // Pad bits are covered by the checksum, so rebuild the trailer too.
    Container reparsed = parse_container(serialize_container(fuzzed));
    auto decoded = decode_sequence(model, reparsed.payload, reparsed.header.payload_bits,
                                   reparsed.header.token_count,
                                   params_from_header(reparsed.header));
    CHECK(decoded == data);
  }
}

TEST_CASE("container file write and read round-trip") {
  Container c = sample_container();
  auto path = std::filesystem::temp_directory_path() / "mtc_test_container.bin";
  write_container(c, path.string());
  Container back = read_container(path.string());
  CHECK(headers_equal(back.header, c.header));
  CHECK(back.payload == c.payload);
  std::filesystem::remove(path);
}
