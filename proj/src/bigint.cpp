#include "minplus/bigint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace minplus {

namespace {

void trim(std::vector<std::uint32_t>& m) {
  while (!m.empty() && m.back() == 0) m.pop_back();
}

std::vector<std::uint32_t> limbs_of_ull(unsigned long long v) {
  std::vector<std::uint32_t> m;
  while (v != 0) {
    m.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    v >>= 32;
  }
  return m;
}

}  // namespace

BigInt BigInt::make_big(int sign, std::vector<std::uint32_t> mag) {
  trim(mag);
  BigInt r;
  if (mag.empty()) return r;
  // Demote when the magnitude fits in long long.
  if (mag.size() <= 2) {
    unsigned long long v = mag[0];
    if (mag.size() == 2) v |= static_cast<unsigned long long>(mag[1]) << 32;
    if (v <= 0x7fffffffffffffffull) {
      r.small_ = sign < 0 ? -static_cast<long long>(v) : static_cast<long long>(v);
      return r;
    }
  }
  r.sign_ = sign;
  r.mag_ = std::move(mag);
  return r;
}

std::vector<std::uint32_t> BigInt::magnitude() const {
  if (!mag_.empty()) return mag_;
  unsigned long long v = small_ < 0 ? -static_cast<unsigned long long>(small_)
                                    : static_cast<unsigned long long>(small_);
  return limbs_of_ull(v);
}

int BigInt::sign() const {
  if (!mag_.empty()) return sign_;
  return small_ < 0 ? -1 : (small_ > 0 ? 1 : 0);
}

bool BigInt::is_zero() const { return mag_.empty() && small_ == 0; }
bool BigInt::is_negative() const { return sign() < 0; }

bool BigInt::is_even() const {
  if (mag_.empty()) return (small_ & 1) == 0;
  return (mag_[0] & 1u) == 0;
}

long long BigInt::value_ll() const {
  if (!fits_ll()) throw std::overflow_error("BigInt does not fit in long long");
  return small_;
}

int BigInt::cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

std::vector<std::uint32_t> BigInt::add_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
  const auto& lo = a.size() < b.size() ? a : b;
  const auto& hi = a.size() < b.size() ? b : a;
  std::vector<std::uint32_t> r(hi.size() + 1, 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < hi.size(); ++i) {
    std::uint64_t s = carry + hi[i] + (i < lo.size() ? lo[i] : 0u);
    r[i] = static_cast<std::uint32_t>(s);
    carry = s >> 32;
  }
  r[hi.size()] = static_cast<std::uint32_t>(carry);
  trim(r);
  return r;
}

// Requires a >= b.
std::vector<std::uint32_t> BigInt::sub_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> r(a.size(), 0);
  std::int64_t borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::int64_t d = static_cast<std::int64_t>(a[i]) - borrow - (i < b.size() ? b[i] : 0u);
    if (d < 0) {
      d += (std::int64_t{1} << 32);
      borrow = 1;
    } else {
      borrow = 0;
    }
    r[i] = static_cast<std::uint32_t>(d);
  }
  trim(r);
  return r;
}

std::vector<std::uint32_t> BigInt::mul_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<std::uint32_t> r(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint64_t carry = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::uint64_t cur = r[i + j] + static_cast<std::uint64_t>(a[i]) * b[j] + carry;
      r[i + j] = static_cast<std::uint32_t>(cur);
      carry = cur >> 32;
    }
    std::size_t k = i + b.size();
    while (carry != 0) {
      std::uint64_t cur = r[k] + carry;
      r[k] = static_cast<std::uint32_t>(cur);
      carry = cur >> 32;
      ++k;
    }
  }
  trim(r);
  return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
  if (mag_.empty() && o.mag_.empty()) {
    long long s;
    if (!__builtin_add_overflow(small_, o.small_, &s)) return BigInt(s);
  }
  int sa = sign(), sb = o.sign();
  if (sa == 0) return o;
  if (sb == 0) return *this;
  auto ma = magnitude(), mb = o.magnitude();
  if (sa == sb) return make_big(sa, add_mag(ma, mb));
  int c = cmp_mag(ma, mb);
  if (c == 0) return BigInt();
  if (c > 0) return make_big(sa, sub_mag(ma, mb));
  return make_big(sb, sub_mag(mb, ma));
}

BigInt BigInt::operator-() const {
  if (mag_.empty()) {
    if (small_ != std::numeric_limits<long long>::min()) return BigInt(-small_);
    return make_big(1, magnitude());
  }
  BigInt r = *this;
  r.sign_ = -r.sign_;
  return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
  if (mag_.empty() && o.mag_.empty()) {
    long long p;
    if (!__builtin_mul_overflow(small_, o.small_, &p)) return BigInt(p);
  }
  int s = sign() * o.sign();
  if (s == 0) return BigInt();
  return make_big(s, mul_mag(magnitude(), o.magnitude()));
}

BigInt BigInt::abs() const { return is_negative() ? -*this : *this; }

BigInt BigInt::half() const {
  if (is_negative()) throw std::domain_error("BigInt::half on negative value");
  if (mag_.empty()) return BigInt(small_ >> 1);
  auto m = mag_;
  std::uint32_t carry = 0;
  for (std::size_t i = m.size(); i-- > 0;) {
    std::uint32_t next = m[i] & 1u;
    m[i] = (m[i] >> 1) | (carry << 31);
    carry = next;
  }
  return make_big(1, std::move(m));
}

std::size_t BigInt::bit_length() const {
  auto m = magnitude();
  if (m.empty()) return 0;
  std::size_t bits = (m.size() - 1) * 32;
  std::uint32_t top = m.back();
  while (top != 0) {
    ++bits;
    top >>= 1;
  }
  return bits;
}

bool BigInt::test_bit(std::size_t i) const {
  auto m = magnitude();
  std::size_t limb = i / 32, off = i % 32;
  if (limb >= m.size()) return false;
  return (m[limb] >> off) & 1u;
}

std::strong_ordering BigInt::operator<=>(const BigInt& o) const {
  if (mag_.empty() && o.mag_.empty()) return small_ <=> o.small_;
  int sa = sign(), sb = o.sign();
  if (sa != sb) return sa <=> sb;
  int c = cmp_mag(magnitude(), o.magnitude());
  if (sa < 0) c = -c;
  return c <=> 0;
}

BigInt BigInt::from_decimal(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer literal");
  bool neg = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    neg = text[0] == '-';
    i = 1;
  }
  if (i == text.size()) throw std::invalid_argument("bad integer literal");
  BigInt r;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c < '0' || c > '9') throw std::invalid_argument("bad integer literal");
    r = r * BigInt(10) + BigInt(c - '0');
  }
  return neg ? -r : r;
}

BigInt BigInt::factorial(std::uint64_t n) {
  BigInt r(1);
  for (std::uint64_t k = 2; k <= n; ++k) r *= BigInt(static_cast<long long>(k));
  return r;
}

std::string BigInt::to_decimal() const {
  if (mag_.empty()) return std::to_string(small_);
  // Repeated division of the magnitude by 10^9.
  std::vector<std::uint32_t> m = mag_;
  std::string out;
  while (!m.empty()) {
    std::uint64_t rem = 0;
    for (std::size_t i = m.size(); i-- > 0;) {
      std::uint64_t cur = (rem << 32) | m[i];
      m[i] = static_cast<std::uint32_t>(cur / 1000000000ull);
      rem = cur % 1000000000ull;
    }
    trim(m);
    std::string chunk = std::to_string(rem);
    if (!m.empty()) chunk.insert(0, 9 - chunk.size(), '0');
    out.insert(0, chunk);
  }
  if (sign_ < 0) out.insert(0, 1, '-');
  return out;
}

std::string BigInt::to_display(std::size_t digit_cap) const {
  std::size_t approx_digits =
      static_cast<std::size_t>(static_cast<double>(bit_length()) * 0.30103) + 1;
  if (approx_digits <= digit_cap) {
    std::string dec = to_decimal();
    if (dec.size() - (dec[0] == '-' ? 1 : 0) <= digit_cap) return dec;
  }
  // Scientific rendering from the top limbs.
  auto m = magnitude();
  double top = 0;
  for (std::size_t i = m.size(); i-- > 0 && i + 3 >= m.size();) {
    top = top * 4294967296.0 + m[i];
  }
  std::size_t low_limbs = m.size() > 3 ? m.size() - 3 : 0;
  double log10v = std::log10(top) + static_cast<double>(low_limbs) * 32.0 * 0.30103;
  double exp10 = std::floor(log10v);
  double mant = std::pow(10.0, log10v - exp10);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.6fe+%.0f", sign() < 0 ? "-" : "", mant, exp10);
  return buf;
}

std::ostream& operator<<(std::ostream& os, const BigInt& v) { return os << v.to_decimal(); }

}  // namespace minplus
