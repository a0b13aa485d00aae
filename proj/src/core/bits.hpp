#ifndef MTC_CORE_BITS_HPP
#define MTC_CORE_BITS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "core/errors.hpp"

// Bit-level I/O over byte buffers. Bits are packed MSB-first within each
// byte; the final partial byte is zero-padded.

namespace mtc {

class BitWriter {
 public:
  void push(bool bit) {
    size_t byte = nbits_ >> 3;
    if (byte == bytes_.size()) bytes_.push_back(0);
    if (bit) bytes_[byte] |= static_cast<uint8_t>(0x80u >> (nbits_ & 7));
    ++nbits_;
  }

  void append(const BitWriter& other) {
    for (uint64_t i = 0; i < other.nbits_; ++i) push(other.bit_at(i));
  }

  bool bit_at(uint64_t i) const {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1;
  }

  uint64_t bit_size() const { return nbits_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take_bytes() { nbits_ = 0; return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
  uint64_t nbits_ = 0;
};

// Read cursor over a fixed payload. Never reads past the declared bit
// length; pad bits beyond it are invisible.
class BitCursor {
 public:
  BitCursor() = default;
  BitCursor(std::span<const uint8_t> bytes, uint64_t bit_len) : bytes_(bytes), bit_len_(bit_len) {
    if (bit_len > bytes.size() * 8)
      fail(ErrorCode::invalid_argument, "bit length exceeds buffer");
  }

  bool read() {
    if (pos_ >= bit_len_) fail(ErrorCode::truncated_stream, "bit stream exhausted");
    return bit_at(pos_++);
  }

  bool bit_at(uint64_t i) const {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1;
  }

  void advance(uint64_t n) {
    if (n > remaining()) fail(ErrorCode::truncated_stream, "advance past end of stream");
    pos_ += n;
  }

  uint64_t position() const { return pos_; }
  uint64_t bit_size() const { return bit_len_; }
  uint64_t remaining() const { return bit_len_ - pos_; }
  bool exhausted() const { return pos_ >= bit_len_; }

 private:
  std::span<const uint8_t> bytes_;
  uint64_t bit_len_ = 0;
  uint64_t pos_ = 0;
};

// Longest shared prefix of two finite bit sequences; capped at the shorter
// length.
size_t shared_prefix_len(std::span<const uint8_t> a, std::span<const uint8_t> b);

}  // namespace mtc

#endif
