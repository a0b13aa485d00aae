#include "core/alphabet.hpp"

#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace mtc {

TokenAlphabet TokenAlphabet::bytes() { return TokenAlphabet(AlphabetKind::byte_tokens, 256); }

TokenAlphabet TokenAlphabet::words(std::vector<std::string> dictionary) {
  if (dictionary.size() < 2)
    fail(ErrorCode::invalid_argument, "word alphabet needs at least 2 entries");
  if (dictionary.size() > UINT32_MAX)
    fail(ErrorCode::invalid_argument, "dictionary too large");
  TokenAlphabet a(AlphabetKind::word_tokens, static_cast<uint32_t>(dictionary.size()));
  a.dictionary_ = std::move(dictionary);
  for (uint32_t i = 0; i < a.size_; ++i) {
    auto [it, fresh] = a.index_.emplace(a.dictionary_[i], i);
    if (!fresh) fail(ErrorCode::invalid_argument, "duplicate dictionary word: " + a.dictionary_[i]);
  }
  return a;
}

TokenAlphabet TokenAlphabet::words_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open dictionary file: " + path);
  std::vector<std::string> dict;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    dict.push_back(line);
  }
  return words(std::move(dict));
}

TokenAlphabet TokenAlphabet::external(uint32_t size) {
  if (size < 2) fail(ErrorCode::invalid_argument, "alphabet size must be at least 2");
  return TokenAlphabet(AlphabetKind::external_tokens, size);
}

std::vector<uint32_t> TokenAlphabet::tokenize(const std::string& raw) const {
  std::vector<uint32_t> out;
  switch (kind_) {
    case AlphabetKind::byte_tokens:
      out.reserve(raw.size());
      for (unsigned char b : raw) out.push_back(b);
      return out;
    case AlphabetKind::word_tokens: {
      std::istringstream ss(raw);
      std::string word;
      while (ss >> word) {
        auto it = index_.find(word);
        if (it == index_.end()) fail(ErrorCode::unknown_word, "word not in dictionary: " + word);
        out.push_back(it->second);
      }
      return out;
    }
    case AlphabetKind::external_tokens: {
      if (raw.size() % 4 != 0)
        fail(ErrorCode::bad_format, "external token stream length not a multiple of 4");
      out.reserve(raw.size() / 4);
      for (size_t i = 0; i < raw.size(); i += 4) {
        uint32_t id = static_cast<uint8_t>(raw[i]) | static_cast<uint32_t>(static_cast<uint8_t>(raw[i + 1])) << 8 |
                      static_cast<uint32_t>(static_cast<uint8_t>(raw[i + 2])) << 16 |
                      static_cast<uint32_t>(static_cast<uint8_t>(raw[i + 3])) << 24;
        if (id >= size_) fail(ErrorCode::invalid_token, "token id out of range: " + std::to_string(id));
        out.push_back(id);
      }
      return out;
    }
  }
  fail(ErrorCode::invalid_argument, "unreachable alphabet kind");
}

std::string TokenAlphabet::detokenize(const std::vector<uint32_t>& tokens) const {
  std::string out;
  switch (kind_) {
    case AlphabetKind::byte_tokens:
      out.reserve(tokens.size());
      for (uint32_t t : tokens) {
        if (t >= 256) fail(ErrorCode::invalid_token, "byte token out of range");
        out.push_back(static_cast<char>(static_cast<uint8_t>(t)));
      }
      return out;
    case AlphabetKind::word_tokens: {
      for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] >= size_) fail(ErrorCode::invalid_token, "word token out of range");
        if (i) out.push_back(' ');
        out += dictionary_[tokens[i]];
      }
      return out;
    }
    case AlphabetKind::external_tokens: {
      out.reserve(tokens.size() * 4);
      for (uint32_t t : tokens) {
        if (t >= size_) fail(ErrorCode::invalid_token, "token id out of range");
        out.push_back(static_cast<char>(t & 0xff));
        out.push_back(static_cast<char>((t >> 8) & 0xff));
        out.push_back(static_cast<char>((t >> 16) & 0xff));
        out.push_back(static_cast<char>((t >> 24) & 0xff));
      }
      return out;
    }
  }
  fail(ErrorCode::invalid_argument, "unreachable alphabet kind");
}

}  // namespace mtc
