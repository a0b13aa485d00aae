#include "core/container.hpp"

#include <array>
#include <bit>
#include <fstream>

#include "core/errors.hpp"
#include "core/longform.hpp"

namespace mtc {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'C', 'C'};
constexpr uint8_t kVersion = 1;

// Standard reflected CRC-32 (the zlib/gzip polynomial).
std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t v = i;
    for (int b = 0; b < 8; ++b) v = (v >> 1) ^ ((v & 1) ? 0xEDB88320u : 0u);
    table[i] = v;
  }
  return table;
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

struct Reader {
  std::span<const uint8_t> bytes;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > bytes.size()) fail(ErrorCode::bad_format, "container truncated");
  }
  uint8_t u8() {
    need(1);
    return bytes[pos++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[pos++]) << (8 * i);
    return v;
  }
};

}  // namespace

uint32_t crc32(std::span<const uint8_t> bytes) {
  static const std::array<uint32_t, 256> table = make_crc_table();
  uint32_t crc = 0xFFFFFFFFu;
  for (uint8_t b : bytes) crc = (crc >> 8) ^ table[(crc ^ b) & 0xFF];
  return crc ^ 0xFFFFFFFFu;
}

std::vector<uint8_t> serialize_container(const Container& c) {
  const ContainerHeader& h = c.header;
  uint64_t expect_bytes = (h.payload_bits + 7) / 8;
  if (c.payload.size() != expect_bytes)
    fail(ErrorCode::invalid_argument, "payload size does not match the declared bit length");

  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<uint8_t>(h.alphabet_kind));
  put_u32(out, h.alphabet_size);
  out.push_back(h.longform_tag);
  put_u64(out, h.master_seed);
  put_u32(out, h.c.num);
  put_u32(out, h.c.den);
  out.push_back(static_cast<uint8_t>(h.partition.kind));
  if (h.partition.kind == PartitionSpec::Kind::geometric) {
    put_u32(out, h.partition.gamma.num);
    put_u32(out, h.partition.gamma.den);
    put_u32(out, h.partition.count);
  } else {
    put_u32(out, static_cast<uint32_t>(h.partition.boundaries.size()));
    for (double b : h.partition.boundaries) put_u64(out, std::bit_cast<uint64_t>(b));
  }
  out.push_back(static_cast<uint8_t>(h.code_kind));
  if (h.code_kind == CodeKind::huffman) {
    put_u32(out, static_cast<uint32_t>(h.code_lengths.size()));
    out.insert(out.end(), h.code_lengths.begin(), h.code_lengths.end());
  }
  out.push_back(static_cast<uint8_t>(h.model_kind));
  put_u64(out, h.model_hash);
  put_u64(out, h.token_count);
  put_u64(out, h.payload_bits);
  out.insert(out.end(), c.payload.begin(), c.payload.end());
  put_u32(out, crc32(out));
  return out;
}

Container parse_container(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 + 1 + 4) fail(ErrorCode::bad_format, "container too short");
  // Checksum first: nothing else is interpreted until the bytes prove
  // intact. Transport corruption is outside what mismatch tolerance covers.
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i)
    stored |= static_cast<uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
  uint32_t computed = crc32(bytes.subspan(0, bytes.size() - 4));
  if (stored != computed) fail(ErrorCode::bad_format, "container checksum mismatch");

  Reader r{bytes.subspan(0, bytes.size() - 4)};
  if (r.u8() != kMagic[0] || r.u8() != kMagic[1] || r.u8() != kMagic[2] || r.u8() != kMagic[3])
    fail(ErrorCode::bad_format, "not a container file");
  if (r.u8() != kVersion) fail(ErrorCode::bad_format, "unsupported container version");

  Container c;
  ContainerHeader& h = c.header;
  uint8_t kind = r.u8();
  if (kind > 2) fail(ErrorCode::bad_format, "unknown alphabet kind");
  h.alphabet_kind = static_cast<AlphabetKind>(kind);
  h.alphabet_size = r.u32();
  h.longform_tag = r.u8();
  h.master_seed = r.u64();
  uint32_t num = r.u32(), den = r.u32();
  h.c = Rational(num, den);
  uint8_t pkind = r.u8();
  if (pkind > 1) fail(ErrorCode::bad_format, "unknown partition kind");
  h.partition.kind = static_cast<PartitionSpec::Kind>(pkind);
  if (h.partition.kind == PartitionSpec::Kind::geometric) {
    uint32_t gnum = r.u32(), gden = r.u32();
    h.partition.gamma = Rational(gnum, gden);
    h.partition.count = r.u32();
  } else {
    uint32_t n = r.u32();
    h.partition.boundaries.resize(n);
    for (uint32_t i = 0; i < n; ++i) h.partition.boundaries[i] = std::bit_cast<double>(r.u64());
  }
  uint8_t ckind = r.u8();
  if (ckind > 1) fail(ErrorCode::bad_format, "unknown code kind");
  h.code_kind = static_cast<CodeKind>(ckind);
  if (h.code_kind == CodeKind::huffman) {
    uint32_t n = r.u32();
    h.code_lengths.resize(n);
    for (uint32_t i = 0; i < n; ++i) h.code_lengths[i] = r.u8();
  }
  uint8_t mkind = r.u8();
  if (mkind > 1) fail(ErrorCode::bad_format, "unknown model binding kind");
  h.model_kind = static_cast<ModelBinding>(mkind);
  h.model_hash = r.u64();
  h.token_count = r.u64();
  h.payload_bits = r.u64();

  uint64_t expect_bytes = (h.payload_bits + 7) / 8;
  if (r.bytes.size() - r.pos != expect_bytes)
    fail(ErrorCode::bad_format, "payload size does not match the declared bit length");
  c.payload.assign(r.bytes.begin() + static_cast<ptrdiff_t>(r.pos), r.bytes.end());
  return c;
}

void write_container(const Container& c, const std::string& path) {
  auto bytes = serialize_container(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open container for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed: " + path);
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open container: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_container(bytes);
}

CodecParams params_from_header(const ContainerHeader& h) {
  if (h.longform_tag != 1) fail(ErrorCode::bad_format, "unknown longform generator tag");
  BucketPartition partition = BucketPartition::from_spec(h.partition);
  BucketCode code = h.code_kind == CodeKind::huffman
                        ? BucketCode::from_lengths(CodeKind::huffman, h.code_lengths)
                        : BucketCode::unary(partition.bucket_count());
  LongformTable longforms(h.master_seed, h.alphabet_size);
  return CodecParams{std::move(partition), std::move(code), std::move(longforms), h.c};
}

}  // namespace mtc
