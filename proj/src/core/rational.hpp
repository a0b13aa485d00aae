#ifndef MTC_CORE_RATIONAL_HPP
#define MTC_CORE_RATIONAL_HPP

#include <cstdint>
#include <string>

namespace mtc {

// Exact nonnegative rational with 32-bit numerator/denominator, the header
// representation for the mismatch factor c and geometric bucket ratios.
// Values like 10/3 are not exact binary floats, so every float derived from
// a rational goes through one shared routine here.
struct Rational {
  uint32_t num = 1;
  uint32_t den = 1;

  Rational() = default;
  Rational(uint32_t n, uint32_t d);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // (num/den)^2 with a single rounding: the 64-bit squares are exact.
  double squared() const {
    return static_cast<double>(static_cast<uint64_t>(num) * num) /
           static_cast<double>(static_cast<uint64_t>(den) * den);
  }

  Rational inverse() const { return Rational(den, num); }

  bool is_one() const { return num == den; }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }

  std::string str() const;

  // Accepts "n", "n/d", and decimal strings ("0.3" becomes 3/10 exactly).
  static Rational parse(const std::string& text);
};

}  // namespace mtc

#endif
