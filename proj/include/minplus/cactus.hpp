#ifndef MINPLUS_CACTUS_HPP
#define MINPLUS_CACTUS_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "minplus/augmented.hpp"
#include "minplus/extword.hpp"
#include "minplus/matrix.hpp"
#include "minplus/wfa.hpp"

namespace minplus {

struct FTooSmallError : std::runtime_error {
  explicit FTooSmallError(const std::string& what) : std::runtime_error(what) {}
};
struct RebasePairNotGroundedError : std::runtime_error {
  explicit RebasePairNotGroundedError(const std::string& what) : std::runtime_error(what) {}
};
struct NotDegenerateError : std::runtime_error {
  explicit NotDegenerateError(const std::string& what) : std::runtime_error(what) {}
};
struct CostUndefinedError : std::runtime_error {
  explicit CostUndefinedError(const std::string& what) : std::runtime_error(what) {}
};
struct NotStableCycleError : std::runtime_error {
  explicit NotStableCycleError(const std::string& what) : std::runtime_error(what) {}
};

/// The stabilization exponents: n = |S|!, m = |S| * n.
struct StabilizationConstants {
  BigInt n_frak;
  BigInt m_frak;
};

StabilizationConstants stabilization_constants(std::uint64_t size_s);

/// How |S| is chosen for the stabilization exponents.
enum class SizeMode {
  Ambient,     // size of the full augmented state space (faithful)
  ActiveBlock  // size of the current block only (fast, for desk experiments)
};

/// How the exponents themselves are realized.
enum class ExponentMode {
  Exact,     // the literal factorial-based constants
  Effective  // smallest exponents with the same idempotent boolean behavior
};

struct CactusOptions {
  SizeMode size_mode = SizeMode::Ambient;
  ExponentMode exponent_mode = ExponentMode::Exact;
};

/// Classification of a stable cycle's states and pairs at one exponent.
struct PairTables {
  std::vector<StateId> ref_states;  // finite diagonal (inner ids)
  std::vector<StateId> min_states;  // minimal reflexive (diagonal weight 0)
  std::vector<std::pair<StateId, StateId>> tth_pairs;
  std::vector<std::pair<StateId, StateId>> plt_pairs;
  std::vector<std::pair<StateId, StateId>> grn_pairs;
  std::map<std::pair<StateId, StateId>, StateId> grounding;  // pair -> grounding state
};

/// Evidence that (S', w) is a stable cycle: the word's one-step matrix on the
/// block, the exponents used, the boolean idempotent, the matrix at exponent
/// m, and the pair tables at exponent m.
struct StableCycleCertificate {
  Block block;
  ExtWord word;
  MinPlusMatrix step;
  BigInt n_frak;
  BigInt m_frak;
  BoolMatrix bool_idem;
  MinPlusMatrix pow_m;
  PairTables tables;

  StableCycleCertificate() : step(0), bool_idem(0), pow_m(0) {}
};

enum class CycleRejection { NotReflexive, NegativeCycle, BaselineNotZero };

std::string to_string(CycleRejection r);

struct CycleCheckResult {
  std::optional<StableCycleCertificate> certificate;
  std::optional<CycleRejection> rejection;
  std::string detail;

  bool accepted() const { return certificate.has_value(); }
};

/// Configuration of the augmented automaton under the extended alphabet:
/// the (deterministic) block plus per-inner-state weights. A missing block
/// means no runs survive.
struct ExtConfiguration {
  std::optional<Block> block;
  Configuration values;

  bool dead() const { return !block.has_value(); }
  Weight min_weight() const { return values.min_weight(); }
};

/// Exact cost values: a nonnegative plain integer plus a sum of terms
/// coeff * 2^exponent whose exponents are themselves cost values. Only
/// construction, addition, scaling, multiplication and comparison are
/// supported; the magnitudes are far beyond materialization.
class CostValue {
 public:
  CostValue() = default;
  static CostValue from_plain(BigInt v);
  static CostValue exp2(CostValue exponent);

  CostValue operator+(const CostValue& o) const;
  CostValue operator*(const CostValue& o) const;
  CostValue scale(const BigInt& k) const;

  bool is_plain() const { return terms_.empty(); }
  const BigInt& plain_part() const { return plain_; }

  /// Exact comparison. Throws std::logic_error if the values are too close
  /// for the calibrated dominance rules (cannot happen for costs produced by
  /// the cost table).
  std::strong_ordering compare(const CostValue& o) const;

  std::string to_string() const;

 private:
  struct Term {
    std::shared_ptr<const CostValue> exponent;
    BigInt coeff;
  };
  BigInt plain_;
  std::vector<Term> terms_;  // sorted by descending exponent

  void normalize();
  static bool exponent_clears(const CostValue& e, std::size_t bits);
};

struct MinGraph {
  std::vector<StateId> vertices;  // inner ids of the minimal-reflexive states
  BoolMatrix edges;               // indexed by position in `vertices`

  MinGraph() : edges(0) {}
};

struct DegeneracyResult {
  bool degenerate;
  std::optional<StateId> witness;  // a state s with a reachable non-grounded
                                   // reflexive target, when non-degenerate
};

/// All stable-cycle and cactus-letter machinery for one automaton. Pure and
/// internally memoized; safe for concurrent use.
class CactusEngine {
 public:
  explicit CactusEngine(const Wfa& a, CactusOptions options = {});

  const Wfa& wfa() const { return *a_; }
  const AugWfa& aug() const { return aug_; }
  const CactusOptions& options() const { return options_; }
  const BigInt& ambient_size() const { return ambient_; }

  /// Constants for a cycle on the given block, respecting the options.
  StabilizationConstants constants_for(const Block& b, const BoolMatrix& step_bool) const;

  // -- extended letters and words as matrices --------------------------------

  struct LetterStep {
    MinPlusMatrix matrix;  // indexed by inner state id (dim = |Q|)
    Block to;
  };
  /// Transition matrix of one letter from a block; nullopt when the letter is
  /// not readable there (all transitions infinite).
  std::optional<LetterStep> ext_matrix(const ExtLetter& letter, const Block& from);
  std::optional<LetterStep> word_matrix(const ExtWord& w, const Block& from);

  ExtConfiguration initial_ext_configuration() const;
  ExtConfiguration ext_eval(const ExtWord& w, const ExtConfiguration& from);
  /// min weight from the initial augmented state over w (infinity when dead).
  Weight ext_mwt(const ExtWord& w);

  /// Largest |finite weight| among the transitions of one letter / the sum of
  /// those over a word (repetition counted).
  Weight letter_wmax(const ExtLetter& letter);
  Weight word_maxeff(const ExtWord& w);

  // -- stable cycles ----------------------------------------------------------

  /// Checks the stable-cycle conditions for a saturated augmented-state set.
  /// Throws NotSaturatedError / MixedBlocksError for malformed sets; semantic
  /// failures come back as rejections.
  CycleCheckResult check_stable_cycle(const std::vector<AugState>& s_prime, const ExtWord& w);
  CycleCheckResult check_stable_cycle(const Block& block, const ExtWord& w);
  /// As above but demands acceptance, returning the certificate.
  const StableCycleCertificate& certify(const Block& block, const ExtWord& w);

  /// Pair tables of the certificate at its own exponent m.
  const PairTables& classify_pairs(const StableCycleCertificate& cert) const;
  /// Tables at an arbitrary exponent (for stabilization experiments).
  PairTables classify_at(const StableCycleCertificate& cert, const BigInt& exponent) const;

  /// Transition matrix of the cactus letter (grounded pairs only), memoized.
  const MinPlusMatrix& cactus_matrix(const CactusLetter& alpha);

  /// Threshold M0 such that for all m >= M0 every non-grounded pair exceeds
  /// weight `bound` on w^{m * 2m_frak}, while grounded pairs sit exactly at
  /// their cactus weight.
  BigInt pumping_threshold(const StableCycleCertificate& cert, const Weight& bound) const;

  // -- unfolding and flattening ----------------------------------------------

  ExtWord unfold(const ExtWord& x, const CactusLetter& alpha, const ExtWord& y, const Weight& f);
  ExtWord rebase_remove(const ExtWord& x, const RebaseLetter& beta, const ExtWord& y) const;
  ExtWord flatten(const ExtWord& u, const Weight& f);

  // -- cost, depth, sub-cacti -------------------------------------------------

  CostValue cost(const ExtWord& w);
  CostValue cost(const ExtLetter& letter);
  int depth(const ExtWord& w) const;
  int depth(const ExtLetter& letter) const;

  // -- degeneracy -------------------------------------------------------------

  MinGraph min_graph(const StableCycleCertificate& cert) const;
  DegeneracyResult degeneracy_check(const StableCycleCertificate& cert) const;
  /// Smallest repetition index m >= 1 with matrix(w^{2 m_frak |S| m}) equal to
  /// the cactus matrix on the block; requires a degenerate cycle.
  BigInt degenerate_replacement(const StableCycleCertificate& cert);

 private:
  const Wfa* a_;
  AugWfa aug_;
  CactusOptions options_;
  BigInt ambient_;

  mutable std::mutex memo_mutex_;
  std::map<std::string, std::shared_ptr<const StableCycleCertificate>> cert_memo_;
  std::map<std::string, std::shared_ptr<const MinPlusMatrix>> cactus_memo_;

  CycleCheckResult build_certificate(const Block& block, const ExtWord& w,
                                     const MinPlusMatrix& step);
  PairTables tables_at(const MinPlusMatrix& step, const Block& block, const BigInt& exponent,
                       const MinPlusMatrix* pow_hint) const;
  ExtWord flatten_rec(ExtWord u, Weight f);
};

/// k-deep sub-cacti of a word: the letters visible after peeling k layers of
/// cactus nesting (duplicates removed structurally).
std::vector<ExtLetter> sub_k(const ExtWord& w, int k);

}  // namespace minplus

#endif  // MINPLUS_CACTUS_HPP
