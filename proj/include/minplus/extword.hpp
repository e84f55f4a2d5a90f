#ifndef MINPLUS_EXTWORD_HPP
#define MINPLUS_EXTWORD_HPP

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "minplus/augmented.hpp"
#include "minplus/bigint.hpp"
#include "minplus/wfa.hpp"

namespace minplus {

struct MalformedLetterError : std::runtime_error {
  explicit MalformedLetterError(const std::string& what) : std::runtime_error(what) {}
};
struct NotSaturatedError : std::runtime_error {
  explicit NotSaturatedError(const std::string& what) : std::runtime_error(what) {}
};
struct JumpInWordError : std::runtime_error {
  explicit JumpInWordError(const std::string& what) : std::runtime_error(what) {}
};

struct ExtWord;

/// Letter abstracting unbounded repetition of a stable cycle on the block
/// `cycle`: transitions exist exactly on the cycle's grounded pairs.
struct CactusLetter {
  Block cycle;
  std::shared_ptr<const ExtWord> body;
};

/// Cactus traversal that simultaneously moves the baseline from `from_inner`
/// to `to_inner` (a grounded pair of the cycle), reweighted accordingly.
struct RebaseLetter {
  Block cycle;
  std::shared_ptr<const ExtWord> body;
  StateId from_inner;
  StateId to_inner;
};

/// Changes only the baseline component inside one reachable set, at weight 0.
struct JumpLetter {
  StateId from_base;
  StateId to_base;
  std::uint64_t reach;
};

/// Compressed repetition body^exponent (exponents are typically far too large
/// to expand).
struct PowerNode {
  std::shared_ptr<const ExtWord> body;
  BigInt exponent;
};

using ExtLetter = std::variant<Transition, CactusLetter, RebaseLetter, JumpLetter, PowerNode>;

struct ExtWord {
  std::vector<ExtLetter> letters;

  static ExtWord of(std::vector<ExtLetter> ls) { return ExtWord{std::move(ls)}; }
  bool empty() const { return letters.empty(); }
};

ExtWord concat(const ExtWord& a, const ExtWord& b);

/// Run step of the augmented automaton over the extended alphabet.
struct ExtRunStep {
  AugState from;
  ExtLetter letter;
  Weight wt;
  AugState to;
};
using ExtRun = std::vector<ExtRunStep>;

Weight ext_run_weight(const ExtRun& run);

bool contains_jump(const ExtWord& w);
bool contains_cactus_or_rebase(const ExtWord& w);
/// Nesting depth of cactus/rebase letters (base and jump letters count 1,
/// the empty word 0). Used for flattening order, distinct from the cost/depth
/// table which rejects rebase letters.
int nesting_depth(const ExtWord& w);
int nesting_depth(const ExtLetter& l);
/// Rebase nesting rank: base/jump rank 0, cactus = rank of body, rebase =
/// rank of body + 1.
int rebase_rank(const ExtWord& w);

/// Id-based canonical encoding, usable as a memoization key.
std::string structural_key(const ExtWord& w);
std::string structural_key(const ExtLetter& l);

// --- s-expression surface form -------------------------------------------
//
//   (word l*)
//   l ::= (base p sigma w q)
//       | (cactus (set s*) (word ...))
//       | (rebase (set s*) (word ...) s r)
//       | (jump p p' (set q*))
//       | (pow e (word ...))
//   augmented states print as inner|base|{t1,t2,...}

ExtWord parse_ext_word(const Wfa& a, std::string_view text);
std::string serialize_ext_word(const Wfa& a, const ExtWord& w);

std::string aug_state_to_string(const Wfa& a, const AugState& s);
AugState aug_state_from_string(const Wfa& a, std::string_view text);

/// Minimal s-expression tree, shared by the word and witness readers.
struct SExpr {
  bool is_atom = false;
  std::string text;         // atom payload
  std::vector<SExpr> kids;  // list payload
};
SExpr parse_sexpr(std::string_view text);
ExtWord ext_word_from_sexpr(const Wfa& a, const SExpr& node);

// --- baseline shift --------------------------------------------------------

/// Rewrites a jump-free word so that the given run becomes the (weight-0)
/// baseline: base letters are re-sourced along the run's inner states and
/// cactus/rebase letters become rebase letters targeting the run's inner
/// pair. Weights of all runs shift down by the run's own weights.
struct BaselineShift {
  ExtWord word;
  ExtRun shifted_base;  // the run itself after the shift (seamless, weight 0)
};

BaselineShift baseline_shift(const Wfa& a, const ExtWord& w, const ExtRun& rho0);

/// Maps any run on the original word to its counterpart on the shifted word.
ExtRun baseline_shift_run(const Wfa& a, const ExtRun& run, const ExtRun& rho0);

}  // namespace minplus

#endif  // MINPLUS_EXTWORD_HPP
