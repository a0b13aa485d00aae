#ifndef MTC_CORE_CONTAINER_HPP
#define MTC_CORE_CONTAINER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/alphabet.hpp"
#include "core/buckets.hpp"
#include "core/codec.hpp"
#include "core/rational.hpp"

// The compressed file: a self-describing header carrying every codec
// parameter, the payload bitstream (zero-padded to a byte boundary), and a
// trailing CRC-32 over everything before it. The decoder rebuilds
// CodecParams from the header alone; the predictive model is the only
// out-of-band input, and it is bound by content hash so a wrong model file
// is rejected before decoding starts.

namespace mtc {

uint32_t crc32(std::span<const uint8_t> bytes);

enum class ModelBinding : uint8_t { ngram = 0, replay = 1 };

struct ContainerHeader {
  AlphabetKind alphabet_kind = AlphabetKind::byte_tokens;
  uint32_t alphabet_size = 0;
  uint8_t longform_tag = 1;  // generator algorithm id; 1 = keyed counter PRF
  uint64_t master_seed = 0;
  Rational c;
  PartitionSpec partition;
  CodeKind code_kind = CodeKind::unary;
  std::vector<uint8_t> code_lengths;  // per bucket; huffman only (unary is implied)
  ModelBinding model_kind = ModelBinding::ngram;
  // Content hash of the n-gram model, enforced on decode. For replay
  // sources this records the encoder's replay file but is not enforced:
  // the decoder legitimately replays different distributions.
  uint64_t model_hash = 0;
  uint64_t token_count = 0;
  uint64_t payload_bits = 0;
};

struct Container {
  ContainerHeader header;
  std::vector<uint8_t> payload;
};

std::vector<uint8_t> serialize_container(const Container& c);
// Verifies the checksum before interpreting any field.
Container parse_container(std::span<const uint8_t> bytes);

void write_container(const Container& c, const std::string& path);
Container read_container(const std::string& path);

// Rebuilds the codec configuration described by a header.
CodecParams params_from_header(const ContainerHeader& h);

}  // namespace mtc

#endif
