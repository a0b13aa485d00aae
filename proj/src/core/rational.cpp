#include "core/rational.hpp"

#include <cctype>
#include <numeric>

#include "core/errors.hpp"

namespace mtc {

Rational::Rational(uint32_t n, uint32_t d) {
  if (d == 0) fail(ErrorCode::invalid_argument, "rational with zero denominator");
  uint32_t g = std::gcd(n, d);
  if (g == 0) g = 1;  // n == 0
  num = n / g;
  den = d / g;
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

namespace {

uint64_t parse_digits(const std::string& s, size_t lo, size_t hi) {
  if (lo == hi) fail(ErrorCode::invalid_argument, "empty number in '" + s + "'");
  uint64_t v = 0;
  for (size_t i = lo; i < hi; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      fail(ErrorCode::invalid_argument, "bad rational '" + s + "'");
    v = v * 10 + static_cast<uint64_t>(s[i] - '0');
    if (v > 0xffffffffull * 1000) fail(ErrorCode::invalid_argument, "rational overflow in '" + s + "'");
  }
  return v;
}

Rational from_u64(uint64_t n, uint64_t d, const std::string& src) {
  uint64_t g = std::gcd(n, d);
  if (g == 0) g = 1;
  n /= g;
  d /= g;
  if (n > 0xffffffffull || d > 0xffffffffull)
    fail(ErrorCode::invalid_argument, "rational '" + src + "' does not fit 32/32 bits");
  return Rational(static_cast<uint32_t>(n), static_cast<uint32_t>(d));
}

}  // namespace

Rational Rational::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    uint64_t n = parse_digits(text, 0, slash);
    uint64_t d = parse_digits(text, slash + 1, text.size());
    if (d == 0) fail(ErrorCode::invalid_argument, "zero denominator in '" + text + "'");
    return from_u64(n, d, text);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    uint64_t whole = dot > 0 ? parse_digits(text, 0, dot) : 0;
    uint64_t frac = 0, scale = 1;
    for (size_t i = dot + 1; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i])))
        fail(ErrorCode::invalid_argument, "bad rational '" + text + "'");
      frac = frac * 10 + static_cast<uint64_t>(text[i] - '0');
      scale *= 10;
      if (scale > 1000000000ull) fail(ErrorCode::invalid_argument, "too many decimals in '" + text + "'");
    }
    return from_u64(whole * scale + frac, scale, text);
  }
  return from_u64(parse_digits(text, 0, text.size()), 1, text);
}

}  // namespace mtc
