#ifndef MINPLUS_WEIGHT_HPP
#define MINPLUS_WEIGHT_HPP

#include <compare>
#include <iosfwd>
#include <string>
#include <string_view>

#include "minplus/bigint.hpp"

namespace minplus {

/// An element of the min-plus semiring: an exact integer or infinity.
/// Addition saturates at infinity; min treats infinity as the largest value.
class Weight {
 public:
  Weight() = default;                      // 0
  Weight(long long v) : v_(v) {}           // NOLINT
  Weight(BigInt v) : v_(std::move(v)) {}   // NOLINT

  static Weight infinity() {
    Weight w;
    w.inf_ = true;
    return w;
  }

  bool is_infinite() const { return inf_; }
  bool is_finite() const { return !inf_; }
  const BigInt& value() const;

  Weight operator+(const Weight& o) const {
    if (inf_ || o.inf_) return infinity();
    return Weight(v_ + o.v_);
  }
  Weight& operator+=(const Weight& o) { return *this = *this + o; }
  Weight operator-() const;
  Weight operator-(const Weight& o) const;  // defined for finite o only
  Weight operator*(const BigInt& k) const;  // scalar scale, for repetition counts

  friend Weight min(const Weight& a, const Weight& b) { return a <= b ? a : b; }
  Weight abs() const { return inf_ ? infinity() : Weight(v_.abs()); }

  /// Total order with infinity greatest.
  std::strong_ordering operator<=>(const Weight& o) const {
    if (inf_ || o.inf_) return (inf_ ? 1 : 0) <=> (o.inf_ ? 1 : 0);
    return v_ <=> o.v_;
  }
  bool operator==(const Weight& o) const { return (*this <=> o) == 0; }

  std::string to_string() const { return inf_ ? "inf" : v_.to_decimal(); }
  static Weight parse(std::string_view text);

 private:
  bool inf_ = false;
  BigInt v_;
};

std::ostream& operator<<(std::ostream& os, const Weight& w);

}  // namespace minplus

#endif  // MINPLUS_WEIGHT_HPP
