#ifndef MINPLUS_MATRIX_HPP
#define MINPLUS_MATRIX_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "minplus/bigint.hpp"
#include "minplus/weight.hpp"

namespace minplus {

/// Dense square (or rectangular-free: always square here) matrix over the
/// min-plus semiring. The identity has 0 on the diagonal and infinity
/// elsewhere.
class MinPlusMatrix {
 public:
  explicit MinPlusMatrix(std::size_t dim) : dim_(dim), e_(dim * dim, Weight::infinity()) {}
  static MinPlusMatrix identity(std::size_t dim);
  static MinPlusMatrix all_infinity(std::size_t dim) { return MinPlusMatrix(dim); }

  std::size_t dim() const { return dim_; }
  Weight& at(std::size_t i, std::size_t j) { return e_[i * dim_ + j]; }
  const Weight& at(std::size_t i, std::size_t j) const { return e_[i * dim_ + j]; }

  bool operator==(const MinPlusMatrix& o) const = default;

 private:
  std::size_t dim_;
  std::vector<Weight> e_;
};

/// (i,j) = min_k a(i,k) + b(k,j), saturating at infinity.
MinPlusMatrix minplus_mul(const MinPlusMatrix& a, const MinPlusMatrix& b);

/// Exact e-th min-plus power by binary exponentiation; e may be astronomically
/// large, entries grow linearly in e and stay exact.
MinPlusMatrix minplus_pow(const MinPlusMatrix& m, const BigInt& e);

/// Square boolean matrix under the or-and semiring.
class BoolMatrix {
 public:
  explicit BoolMatrix(std::size_t dim)
      : dim_(dim), words_((dim + 63) / 64), rows_(dim * words_, 0) {}
  static BoolMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  bool get(std::size_t i, std::size_t j) const {
    return (rows_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }
  void set(std::size_t i, std::size_t j, bool v) {
    std::uint64_t& w = rows_[i * words_ + j / 64];
    if (v)
      w |= std::uint64_t{1} << (j % 64);
    else
      w &= ~(std::uint64_t{1} << (j % 64));
  }

  bool operator==(const BoolMatrix& o) const = default;

 private:
  std::size_t dim_;
  std::size_t words_;
  std::vector<std::uint64_t> rows_;

  friend BoolMatrix bool_mul(const BoolMatrix& a, const BoolMatrix& b);
};

BoolMatrix bool_mul(const BoolMatrix& a, const BoolMatrix& b);
BoolMatrix bool_pow(const BoolMatrix& b, const BigInt& e);

/// Index/period of the power sequence B, B^2, ... together with its unique
/// idempotent power.
struct IdempotentProfile {
  std::uint64_t index = 0;   // least i with B^i = B^{i+p}
  std::uint64_t period = 0;  // least such p
  BoolMatrix idempotent;     // E with E*E = E, E = B^k for least k >= i, p | k
};

IdempotentProfile idempotent_profile(const BoolMatrix& b);

/// A cycle found by negative-cycle detection: the state sequence
/// v0 -> v1 -> ... -> v0 (first vertex repeated at the end) and its weight.
struct NegativeCycle {
  std::vector<std::size_t> states;
  Weight weight;
};

/// Bellman-Ford relaxation (dim rounds) restricted to `support`; returns a
/// negative cycle inside the support if one exists.
std::optional<NegativeCycle> detect_negative_cycle(const MinPlusMatrix& m,
                                                   const std::vector<std::size_t>& support);
std::optional<NegativeCycle> detect_negative_cycle(const MinPlusMatrix& m);

struct NegativeCycleError : std::runtime_error {
  explicit NegativeCycleError(const std::string& what) : std::runtime_error(what) {}
};

/// Potentials v with v(p) + m(p,q) - v(q) >= 0 on every finite edge.
/// Throws NegativeCycleError when no such potentials exist.
std::vector<BigInt> johnson_reweight(const MinPlusMatrix& m);

/// Strongly connected components of the digraph of `b`, in topological order
/// (edges go from earlier components to later ones).
std::vector<std::vector<std::size_t>> scc_decompose(const BoolMatrix& b);

}  // namespace minplus

#endif  // MINPLUS_MATRIX_HPP
