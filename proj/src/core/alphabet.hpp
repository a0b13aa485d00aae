#ifndef MTC_CORE_ALPHABET_HPP
#define MTC_CORE_ALPHABET_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

// Token alphabets and tokenizers. Three kinds:
//   byte  — ids 0..255 map to raw byte values, invertible on any input;
//   word  — whitespace-separated words looked up in an ordered dictionary;
//   external — ids arrive pre-tokenized (4-byte little-endian records),
//              detokenize reproduces the id stream.

namespace mtc {

enum class AlphabetKind : uint8_t { byte_tokens = 0, word_tokens = 1, external_tokens = 2 };

class TokenAlphabet {
 public:
  static TokenAlphabet bytes();
  static TokenAlphabet words(std::vector<std::string> dictionary);
  // Dictionary file: UTF-8, one token per line, line number = token id.
  static TokenAlphabet words_from_file(const std::string& path);
  static TokenAlphabet external(uint32_t size);

  uint32_t size() const { return size_; }
  AlphabetKind kind() const { return kind_; }
  const std::vector<std::string>& dictionary() const { return dictionary_; }

  std::vector<uint32_t> tokenize(const std::string& raw) const;
  std::string detokenize(const std::vector<uint32_t>& tokens) const;

 private:
  TokenAlphabet(AlphabetKind kind, uint32_t size) : kind_(kind), size_(size) {}

  AlphabetKind kind_;
  uint32_t size_;
  std::vector<std::string> dictionary_;
  std::unordered_map<std::string, uint32_t> index_;
};

}  // namespace mtc

#endif
