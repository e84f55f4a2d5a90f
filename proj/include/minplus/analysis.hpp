#ifndef MINPLUS_ANALYSIS_HPP
#define MINPLUS_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "minplus/cactus.hpp"
#include "minplus/extword.hpp"
#include "minplus/wfa.hpp"

namespace minplus {

struct NoSeamlessBaselineError : std::runtime_error {
  explicit NoSeamlessBaselineError(const std::string& what) : std::runtime_error(what) {}
};
struct NotDeterministicError : std::runtime_error {
  explicit NotDeterministicError(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyPoolError : std::runtime_error {
  explicit EmptyPoolError(const std::string& what) : std::runtime_error(what) {}
};

/// A pair (x, y) and state q certifying a gap of more than `bound`: the
/// minimal run on xy passes through q after x, yet q's minimal weight after x
/// exceeds the overall minimum by more than the bound.
struct GapWitness {
  Word x;
  Word y;
  StateId q;
  Weight bound;
  // re-validated evidence
  Weight mwt_xy;
  Weight mwt_xy_via_q;
  Weight mwt_x_to_q;
  Weight mwt_x_min;
};

/// The suffix alphabet quantified over by dominance: the automaton's own
/// letters, block-compatible jumps, and any registered extra letters
/// (typically cactus letters).
struct DominancePool {
  bool base_letters = true;
  bool jump_letters = true;
  std::vector<ExtLetter> extra;

  bool empty() const { return !base_letters && !jump_letters && extra.empty(); }
};

struct DominanceResult {
  std::vector<StateId> dominant;  // inner ids, ascending
  Weight max_dom;                 // maximal configuration entry over dominant states
};

/// A state q is dominant when some pool word kills every state strictly below
/// it while q itself survives; decided by reachability over set pairs.
DominanceResult dominant_states(CactusEngine& engine, const ExtConfiguration& conf,
                                const DominancePool& pool);

/// Height of the maximal dominant state over the (weight-0, seamless)
/// baseline run after w.
Weight potential(CactusEngine& engine, const ExtWord& w, const DominancePool& pool);
/// Negated minimum of the configuration after w.
Weight charge(CactusEngine& engine, const ExtWord& w);

/// Exhaustive bounded search for a gap witness, deduplicating prefixes by
/// normalized configuration; ties resolved in shortlex order.
std::optional<GapWitness> gap_witness_search(const Wfa& a, const Weight& bound,
                                             std::size_t max_x, std::size_t max_y);

struct WitnessCandidate {
  ExtWord w1, w2, w3;
  int type_rank = 1;
};

WitnessCandidate parse_witness(const Wfa& a, std::string_view text);
std::string serialize_witness(const Wfa& a, const WitnessCandidate& cand);

struct WitnessCheck {
  bool accepted = false;
  int failing_requirement = 0;  // 1..4 when rejected
  std::string detail;
  // diagnostics when accepted
  Weight finite_side;   // mwt(w1 w2 w3)
  Weight infinite_side; // mwt(w1 alpha w3), expected infinity
};

/// Validates the four witness requirements in order; semantic failures are
/// reported as rejections, only unparseable input throws.
WitnessCheck check_witness(CactusEngine& engine, const WitnessCandidate& cand);

/// Deterministic automaton tracking normalized configurations clipped at the
/// bound; exact for automata whose live gaps stay within the bound.
Wfa determinize_with_bound(const Wfa& a, const Weight& bound, std::size_t state_cap = 200000);

struct DominationCheck {
  bool ok = false;
  Word counterexample;  // a word with an `a`-run below eval_d, or missing in d
};

/// Exactly decides whether every run of `a` weighs at least eval_d on its
/// word and d's support covers a's, via the difference-weighted product.
DominationCheck check_runs_dominated(const Wfa& a, const Wfa& d);

struct EquivalenceResult {
  bool equivalent = false;
  Word counterexample;
};

/// Equivalence test specialized to outputs of determinize_with_bound (which
/// are pointwise upper bounds with matching support by construction).
EquivalenceResult equivalence_of_determinizer_output(const Wfa& a, const Wfa& d_b);

struct DualVerdict {
  enum class Kind { Determinizable, Nondeterminizable, Unknown };
  Kind kind = Kind::Unknown;
  int round = 0;  // deciding round, or rounds spent when Unknown
  std::optional<Wfa> automaton;  // Determinizable
  Weight bound;                  // Determinizable
  std::optional<WitnessCandidate> witness;  // Nondeterminizable
};

struct DecideOptions {
  std::size_t state_cap = 20000;
  std::size_t pair_search_cap = 200000;
  bool parallel = false;
};

/// Budgeted interleaving of the two semi-decision procedures: per round r, a
/// bound-(r-1) determinization attempt with an exact equivalence check, then
/// a slice of witness-candidate enumeration. Positive verdicts carry
/// re-validated evidence; exhausting the budget yields Unknown.
DualVerdict decide(const Wfa& a, int budget, const DecideOptions& options = {});

/// Weighted automaton whose determinizability encodes NFA universality: all
/// original transitions at weight 0, a separator letter into either a
/// min(#a,#b) gadget (from rejecting states) or a 0-sink (from accepting
/// states).
Wfa nfa_to_wfa_reduction(const Nfa& n);

}  // namespace minplus

#endif  // MINPLUS_ANALYSIS_HPP
