#ifndef MINPLUS_WFA_HPP
#define MINPLUS_WFA_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minplus/matrix.hpp"
#include "minplus/weight.hpp"

namespace minplus {

using StateId = std::uint32_t;
using LetterId = std::uint32_t;

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownLetterError : std::runtime_error {
  explicit UnknownLetterError(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidRunError : std::runtime_error {
  explicit InvalidRunError(const std::string& what) : std::runtime_error(what) {}
};
struct DeadConfigurationError : std::runtime_error {
  explicit DeadConfigurationError(const std::string& what) : std::runtime_error(what) {}
};
struct AlphabetCollisionError : std::runtime_error {
  explicit AlphabetCollisionError(const std::string& what) : std::runtime_error(what) {}
};

/// A transition (p, sigma, c, q) with finite c, usable as a run step.
struct Transition {
  StateId from;
  LetterId letter;
  Weight wt;
  StateId to;

  bool operator==(const Transition&) const = default;
};

/// A run is a chained sequence of finite-weight transitions.
using Run = std::vector<Transition>;

Weight run_weight(const Run& run);

/// Min-plus weighted automaton: single initial state, every state accepting,
/// exactly one weight per (state, letter, state) with infinity for absent
/// transitions.
class Wfa {
 public:
  StateId add_state(const std::string& name);
  LetterId add_letter(const std::string& name);
  void set_initial(StateId q) { initial_ = q; }

  /// Registers a transition weight. A second weight for the same triple is
  /// rejected, matching the one-weight-per-triple model.
  void add_transition(StateId p, LetterId a, Weight w, StateId q);

  std::size_t num_states() const { return state_names_.size(); }
  std::size_t num_letters() const { return letter_names_.size(); }
  StateId initial() const { return initial_; }

  const std::string& state_name(StateId q) const { return state_names_[q]; }
  const std::string& letter_name(LetterId a) const { return letter_names_[a]; }
  std::optional<StateId> find_state(const std::string& name) const;
  std::optional<LetterId> find_letter(const std::string& name) const;

  const Weight& weight(StateId p, LetterId a, StateId q) const;
  /// Transition matrix of one letter.
  MinPlusMatrix letter_matrix(LetterId a) const;
  /// Largest absolute finite weight on some transition of the letter, 0 when
  /// the letter has none.
  Weight letter_wmax(LetterId a) const;
  bool is_deterministic() const;

  /// Transitions in insertion order (for serialization and enumeration).
  const std::vector<Transition>& transitions() const { return trans_list_; }

 private:
  std::vector<std::string> state_names_;
  std::vector<std::string> letter_names_;
  StateId initial_ = 0;
  std::vector<Weight> table_;  // (p * L + a) * Q + q, infinity by default
  std::vector<Transition> trans_list_;

  std::size_t idx(StateId p, LetterId a, StateId q) const {
    return (static_cast<std::size_t>(p) * num_letters() + a) * num_states() + q;
  }
  void grow();
};

/// Weighted automaton with initial and final weight vectors.
struct WfaIF {
  Wfa core;
  std::vector<Weight> init;
  std::vector<Weight> fin;
};

/// Unweighted nondeterministic finite automaton with one initial state.
struct Nfa {
  std::vector<std::string> state_names;
  std::vector<std::string> letter_names;
  StateId initial = 0;
  std::vector<bool> accepting;
  std::vector<std::vector<std::vector<StateId>>> next;  // [state][letter] -> successors

  std::optional<StateId> find_state(const std::string& name) const;
};

/// Vector of minimal run weights per state; support is the finite part.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t n) : v_(n, Weight::infinity()) {}
  explicit Configuration(std::vector<Weight> v) : v_(std::move(v)) {}
  static Configuration unit(std::size_t n, StateId q);

  std::size_t size() const { return v_.size(); }
  Weight& operator[](std::size_t i) { return v_[i]; }
  const Weight& operator[](std::size_t i) const { return v_[i]; }

  std::vector<StateId> support() const;
  bool support_empty() const;
  /// Minimum entry (infinity when the support is empty).
  Weight min_weight() const;
  bool is_normalized() const { return min_weight() == Weight(0); }

  bool operator==(const Configuration&) const = default;

 private:
  std::vector<Weight> v_;
};

using Word = std::vector<LetterId>;

/// Interprets `text` as a word: a whitespace/comma separated list of letter
/// names, or, when every alphabet name is a single character, a plain string
/// of letters.
Word word_from_string(const Wfa& a, const std::string& text);
std::string word_to_string(const Wfa& a, const Word& w);

/// Minimum run weight from the initial state over w (infinity if no run).
Weight eval(const Wfa& a, const Word& w);
Weight eval_if(const WfaIF& a, const Word& w);

Configuration initial_configuration(const Wfa& a);
Configuration next_conf(const Wfa& a, const Configuration& c, const Word& w);

struct ShiftedStep {
  Configuration conf;  // normalized successor
  Weight emitted;      // the minimum that was shifted out
};

/// One step of the normalized configuration dynamics: the raw successor of a
/// normalized configuration, renormalized, with the shift emitted as weight.
ShiftedStep shifted_step(const Wfa& a, const Configuration& c, LetterId sigma);

struct EffectBounds {
  Weight wmax;    // max |finite weight| over transitions on letters of w
  Weight maxeff;  // sum over positions of the per-letter wmax
};

EffectBounds effect_bounds(const Wfa& a, const Word& w);

/// True iff at every prefix the run's accumulated weight from c equals the
/// minimal weight from c into the run's current state.
bool seamless_check(const Wfa& a, const Configuration& c, const Run& run);

/// States reachable from `from` by finite-weight runs on w (bitmask; needs
/// |Q| <= 64).
std::uint64_t boolean_reach(const Wfa& a, std::uint64_t from, const Word& w);

struct TrimResult {
  Wfa automaton;
  std::vector<std::string> removed;
};

/// Drops states unreachable from the initial state; eval is unchanged.
TrimResult validate_trim(const Wfa& a);

/// Folds initial/final weights into two fresh letters (start/finish markers)
/// so that the weight of w in the input equals the weight of s·w·f in the
/// output.
Wfa strip_initial_final(const WfaIF& a, const std::string& start_letter = "s",
                        const std::string& finish_letter = "f");

}  // namespace minplus

#endif  // MINPLUS_WFA_HPP
