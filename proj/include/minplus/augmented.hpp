#ifndef MINPLUS_AUGMENTED_HPP
#define MINPLUS_AUGMENTED_HPP

#include <cstdint>
#include <vector>

#include "minplus/bigint.hpp"
#include "minplus/matrix.hpp"
#include "minplus/wfa.hpp"

namespace minplus {

struct MixedBlocksError : std::runtime_error {
  explicit MixedBlocksError(const std::string& what) : std::runtime_error(what) {}
};
struct TargetNotInReachError : std::runtime_error {
  explicit TargetNotInReachError(const std::string& what) : std::runtime_error(what) {}
};
struct StateBudgetExceededError : std::runtime_error {
  explicit StateBudgetExceededError(const std::string& what) : std::runtime_error(what) {}
};

/// The deterministic part of an augmented state: the baseline state and the
/// reachable set (as a bitmask over the underlying states).
struct Block {
  StateId base;
  std::uint64_t reach;

  bool operator==(const Block&) const = default;
  bool contains(StateId q) const { return (reach >> q) & 1u; }
};

/// State of the baseline-augmented construction: an inner state plus the
/// block it lives in. Invariant: inner and base both belong to reach.
struct AugState {
  StateId inner;
  StateId base;
  std::uint64_t reach;

  Block block() const { return {base, reach}; }
  bool operator==(const AugState&) const = default;
  auto operator<=>(const AugState&) const = default;
};

struct AugTransition {
  AugState from;
  Transition letter;  // a finite-weight transition of the underlying WFA
  Weight wt;
  AugState to;
};

/// A run of the augmented automaton over a sequence of base letters.
using AugRun = std::vector<AugTransition>;

/// Lazy view of the baseline-augmented subset construction. The alphabet is
/// the set of finite-weight transitions of the underlying WFA; a letter is
/// readable only in states whose baseline matches its source, moves the inner
/// state along the letter's underlying symbol, and is weighted relative to
/// the baseline move.
class AugWfa {
 public:
  explicit AugWfa(const Wfa& a);

  const Wfa& underlying() const { return *a_; }
  AugState initial_state() const;

  /// Deterministic block successor; requires block.base == letter.from.
  Block step_block(Block b, const Transition& letter) const;
  /// All transitions from s on the letter (empty when the baseline does not
  /// match or the inner state cannot move).
  std::vector<std::pair<AugState, Weight>> successors(const AugState& s,
                                                      const Transition& letter) const;

  /// Finite-weight transitions of the underlying WFA, i.e. the alphabet.
  std::vector<Transition> base_letters() const;

  struct Materialized {
    std::vector<AugState> states;  // breadth-first discovery order
    std::vector<AugTransition> transitions;
  };
  /// Explicit reachable fragment, breadth-first from the initial state.
  /// Throws StateBudgetExceededError beyond max_states.
  Materialized materialize(std::size_t max_states) const;

  /// Exact size of the full augmented state space {(q,p,T) : q,p in T}.
  BigInt ambient_size() const;

 private:
  const Wfa* a_;
};

AugWfa build_augmented(const Wfa& a);

/// Projects a run of the augmented automaton over the base-letter word
/// rho_base back to a run of the underlying WFA (weights shifted up by the
/// baseline weights).
Run shift_run_from_aug(const Wfa& a, const AugRun& aug_run);

/// Lifts a run of the underlying WFA to the augmented automaton reading
/// rho_base (weights shifted down by the baseline weights). Both runs must
/// read the same word and start at the initial state.
AugRun shift_run_to_aug(const Wfa& a, const Run& run, const Run& rho_base);

/// Fills an augmented-state set sharing one block up to that block's full
/// inner range: {(q, base, T) : q in T}.
std::vector<AugState> ghost_closure(const std::vector<AugState>& states);

/// Transition matrix of the jump letter between two baselines of one block:
/// the identity on the block's inner states, infinity elsewhere. Rows and
/// columns are indexed by inner state id.
MinPlusMatrix jump_matrix(const Wfa& a, const Block& from, StateId to_base);

}  // namespace minplus

#endif  // MINPLUS_AUGMENTED_HPP
