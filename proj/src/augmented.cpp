#include "minplus/augmented.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace minplus {

AugWfa::AugWfa(const Wfa& a) : a_(&a) {
  if (a.num_states() > 64) throw std::length_error("augmented view supports up to 64 states");
}

AugWfa build_augmented(const Wfa& a) { return AugWfa(a); }

AugState AugWfa::initial_state() const {
  StateId q0 = a_->initial();
  return {q0, q0, std::uint64_t{1} << q0};
}

Block AugWfa::step_block(Block b, const Transition& letter) const {
  if (b.base != letter.from)
    throw InvalidRunError("letter source does not match the baseline component");
  std::uint64_t reach = boolean_reach(*a_, b.reach, {letter.letter});
  return {letter.to, reach};
}

std::vector<std::pair<AugState, Weight>> AugWfa::successors(const AugState& s,
                                                            const Transition& letter) const {
  std::vector<std::pair<AugState, Weight>> out;
  if (s.base != letter.from || letter.wt.is_infinite()) return out;
  if (a_->weight(letter.from, letter.letter, letter.to) != letter.wt) return out;
  Block nb = step_block(s.block(), letter);
  for (StateId q2 = 0; q2 < a_->num_states(); ++q2) {
    const Weight& inner = a_->weight(s.inner, letter.letter, q2);
    if (inner.is_infinite()) continue;
    out.push_back({AugState{q2, nb.base, nb.reach}, inner - letter.wt});
  }
  return out;
}

std::vector<Transition> AugWfa::base_letters() const {
  std::vector<Transition> out;
  for (StateId p = 0; p < a_->num_states(); ++p) {
    for (LetterId l = 0; l < a_->num_letters(); ++l) {
      for (StateId q = 0; q < a_->num_states(); ++q) {
        const Weight& w = a_->weight(p, l, q);
        if (w.is_finite()) out.push_back({p, l, w, q});
      }
    }
  }
  return out;
}

AugWfa::Materialized AugWfa::materialize(std::size_t max_states) const {
  Materialized out;
  std::map<std::tuple<StateId, StateId, std::uint64_t>, std::size_t> seen;
  std::deque<AugState> queue;
  auto push = [&](const AugState& s) {
    auto key = std::make_tuple(s.inner, s.base, s.reach);
    if (seen.count(key)) return;
    if (out.states.size() >= max_states)
      throw StateBudgetExceededError("augmented materialization exceeded " +
                                     std::to_string(max_states) + " states");
    seen[key] = out.states.size();
    out.states.push_back(s);
    queue.push_back(s);
  };
  push(initial_state());
  std::vector<Transition> letters = base_letters();
  while (!queue.empty()) {
    AugState s = queue.front();
    queue.pop_front();
    for (const Transition& letter : letters) {
      if (s.base != letter.from) continue;
      for (auto& [t, w] : successors(s, letter)) {
        push(t);
        out.transitions.push_back({s, letter, w, t});
      }
    }
  }
  return out;
}

BigInt AugWfa::ambient_size() const {
  // |{(q,p,T) : q,p in T}| = sum over nonempty T of |T|^2, via Pascal's row.
  const std::uint64_t n = a_->num_states();
  std::vector<BigInt> row{BigInt(1)};
  for (std::uint64_t i = 1; i <= n; ++i) {
    std::vector<BigInt> next(i + 1, BigInt(0));
    next[0] = BigInt(1);
    next[i] = BigInt(1);
    for (std::uint64_t j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  BigInt total(0);
  for (std::uint64_t k = 1; k <= n; ++k)
    total += row[k] * BigInt(static_cast<long long>(k)) * BigInt(static_cast<long long>(k));
  return total;
}

Run shift_run_from_aug(const Wfa& a, const AugRun& aug_run) {
  Run out;
  AugWfa hat(a);
  for (std::size_t i = 0; i < aug_run.size(); ++i) {
    const AugTransition& t = aug_run[i];
    if (i > 0 && !(aug_run[i - 1].to == t.from)) throw InvalidRunError("run steps do not chain");
    if (t.from.base != t.letter.from)
      throw InvalidRunError("letter source does not match the baseline component");
    Weight expected = a.weight(t.from.inner, t.letter.letter, t.to.inner) - t.letter.wt;
    if (expected != t.wt) throw InvalidRunError("run step weight is inconsistent");
    Block nb = hat.step_block(t.from.block(), t.letter);
    if (!(Block{t.to.base, t.to.reach} == nb))
      throw InvalidRunError("run step block is inconsistent");
    out.push_back({t.from.inner, t.letter.letter, t.wt + t.letter.wt, t.to.inner});
  }
  return out;
}

AugRun shift_run_to_aug(const Wfa& a, const Run& run, const Run& rho_base) {
  if (run.size() != rho_base.size()) throw InvalidRunError("runs read words of different length");
  if (!run.empty() && (run.front().from != a.initial() || rho_base.front().from != a.initial()))
    throw InvalidRunError("runs must start at the initial state");
  AugWfa hat(a);
  AugRun out;
  AugState cur = hat.initial_state();
  for (std::size_t i = 0; i < run.size(); ++i) {
    const Transition& r = run[i];
    const Transition& b = rho_base[i];
    if (r.letter != b.letter) throw InvalidRunError("runs read different words");
    if (i > 0 && (run[i - 1].to != r.from || rho_base[i - 1].to != b.from))
      throw InvalidRunError("run steps do not chain");
    if (a.weight(r.from, r.letter, r.to) != r.wt || a.weight(b.from, b.letter, b.to) != b.wt)
      throw InvalidRunError("run step is not a transition of the automaton");
    if (cur.inner != r.from || cur.base != b.from) throw InvalidRunError("run steps do not chain");
    Block nb = hat.step_block(cur.block(), b);
    AugState nxt{r.to, nb.base, nb.reach};
    out.push_back({cur, b, r.wt - b.wt, nxt});
    cur = nxt;
  }
  return out;
}

std::vector<AugState> ghost_closure(const std::vector<AugState>& states) {
  if (states.empty()) return {};
  Block b = states.front().block();
  for (const AugState& s : states) {
    if (!(s.block() == b)) throw MixedBlocksError("states span more than one (base, reach) block");
  }
  std::vector<AugState> out;
  for (StateId q = 0; q < 64; ++q) {
    if (b.contains(q)) out.push_back({q, b.base, b.reach});
  }
  return out;
}

MinPlusMatrix jump_matrix(const Wfa& a, const Block& from, StateId to_base) {
  if (!from.contains(to_base))
    throw TargetNotInReachError("jump target baseline outside the reachable set");
  MinPlusMatrix m(a.num_states());
  for (StateId q = 0; q < a.num_states(); ++q) {
    if (from.contains(q)) m.at(q, q) = Weight(0);
  }
  return m;
}

}  // namespace minplus
