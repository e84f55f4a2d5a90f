#ifndef MINPLUS_BIGINT_HPP
#define MINPLUS_BIGINT_HPP

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace minplus {

/// Signed arbitrary-precision integer.
///
/// Values that fit in a signed 64-bit word are kept inline; anything larger
/// is promoted to a sign + little-endian base-2^32 magnitude. Overflow is
/// detected, never wrapped.
class BigInt {
 public:
  BigInt() = default;
  BigInt(long long v) : small_(v) {}  // NOLINT: implicit by design
  BigInt(int v) : small_(v) {}        // NOLINT

  static BigInt from_decimal(std::string_view text);
  static BigInt factorial(std::uint64_t n);

  bool is_zero() const;
  bool is_negative() const;
  bool is_even() const;
  /// True when the value fits in long long (then value_ll() is exact).
  bool fits_ll() const { return mag_.empty(); }
  long long value_ll() const;

  BigInt operator+(const BigInt& o) const;
  BigInt operator-(const BigInt& o) const;
  BigInt operator-() const;
  BigInt operator*(const BigInt& o) const;
  BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
  BigInt& operator-=(const BigInt& o) { return *this = *this - o; }
  BigInt& operator*=(const BigInt& o) { return *this = *this * o; }

  BigInt abs() const;
  /// Floor division by 2 for non-negatives (arithmetic shift right by one).
  BigInt half() const;

  /// Number of bits in |value|; 0 for value 0.
  std::size_t bit_length() const;
  /// Bit i of |value| (little-endian).
  bool test_bit(std::size_t i) const;

  std::strong_ordering operator<=>(const BigInt& o) const;
  bool operator==(const BigInt& o) const { return (*this <=> o) == 0; }

  std::string to_decimal() const;
  /// Decimal, but numbers whose digit count exceeds `digit_cap` are rendered
  /// as d.dddddde+N.
  std::string to_display(std::size_t digit_cap = 1000000) const;

 private:
  // Inline representation: mag_ empty, value in small_.
  // Big representation: sign_ in {-1, +1}, mag_ = |value| base 2^32, top limb nonzero.
  long long small_ = 0;
  int sign_ = 0;
  std::vector<std::uint32_t> mag_;

  static BigInt make_big(int sign, std::vector<std::uint32_t> mag);
  std::vector<std::uint32_t> magnitude() const;  // |value| as limbs
  int sign() const;
  static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);
  static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b);
  static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b);
  static std::vector<std::uint32_t> mul_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b);
};

std::ostream& operator<<(std::ostream& os, const BigInt& v);

}  // namespace minplus

#endif  // MINPLUS_BIGINT_HPP
