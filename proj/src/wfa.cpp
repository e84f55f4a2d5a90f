#include "minplus/wfa.hpp"

#include <algorithm>
#include <sstream>

namespace minplus {

Weight run_weight(const Run& run) {
  Weight w(0);
  for (const Transition& t : run) w += t.wt;
  return w;
}

StateId Wfa::add_state(const std::string& name) {
  if (find_state(name)) throw ValidationError("duplicate state: " + name);
  state_names_.push_back(name);
  grow();
  return static_cast<StateId>(state_names_.size() - 1);
}

LetterId Wfa::add_letter(const std::string& name) {
  if (find_letter(name)) throw ValidationError("duplicate letter: " + name);
  letter_names_.push_back(name);
  grow();
  return static_cast<LetterId>(letter_names_.size() - 1);
}

void Wfa::grow() {
  table_.assign(num_states() * num_letters() * num_states(), Weight::infinity());
  for (const Transition& t : trans_list_) table_[idx(t.from, t.letter, t.to)] = t.wt;
}

void Wfa::add_transition(StateId p, LetterId a, Weight w, StateId q) {
  if (p >= num_states() || q >= num_states() || a >= num_letters())
    throw ValidationError("transition references unknown state or letter");
  for (const Transition& t : trans_list_) {
    if (t.from == p && t.letter == a && t.to == q)
      throw ValidationError("duplicate transition triple (" + state_name(p) + "," +
                            letter_name(a) + "," + state_name(q) + ")");
  }
  trans_list_.push_back({p, a, w, q});
  table_[idx(p, a, q)] = std::move(w);
}

std::optional<StateId> Wfa::find_state(const std::string& name) const {
  for (std::size_t i = 0; i < state_names_.size(); ++i) {
    if (state_names_[i] == name) return static_cast<StateId>(i);
  }
  return std::nullopt;
}

std::optional<LetterId> Wfa::find_letter(const std::string& name) const {
  for (std::size_t i = 0; i < letter_names_.size(); ++i) {
    if (letter_names_[i] == name) return static_cast<LetterId>(i);
  }
  return std::nullopt;
}

const Weight& Wfa::weight(StateId p, LetterId a, StateId q) const { return table_[idx(p, a, q)]; }

MinPlusMatrix Wfa::letter_matrix(LetterId a) const {
  MinPlusMatrix m(num_states());
  for (StateId p = 0; p < num_states(); ++p)
    for (StateId q = 0; q < num_states(); ++q) m.at(p, q) = weight(p, a, q);
  return m;
}

Weight Wfa::letter_wmax(LetterId a) const {
  Weight best(0);
  for (StateId p = 0; p < num_states(); ++p) {
    for (StateId q = 0; q < num_states(); ++q) {
      const Weight& w = weight(p, a, q);
      if (w.is_finite()) best = std::max(best, w.abs());
    }
  }
  return best;
}

bool Wfa::is_deterministic() const {
  for (StateId p = 0; p < num_states(); ++p) {
    for (LetterId a = 0; a < num_letters(); ++a) {
      int finite = 0;
      for (StateId q = 0; q < num_states(); ++q) {
        if (weight(p, a, q).is_finite()) ++finite;
      }
      if (finite > 1) return false;
    }
  }
  return true;
}

std::optional<StateId> Nfa::find_state(const std::string& name) const {
  for (std::size_t i = 0; i < state_names.size(); ++i) {
    if (state_names[i] == name) return static_cast<StateId>(i);
  }
  return std::nullopt;
}

Configuration Configuration::unit(std::size_t n, StateId q) {
  Configuration c(n);
  c[q] = Weight(0);
  return c;
}

std::vector<StateId> Configuration::support() const {
  std::vector<StateId> s;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (v_[i].is_finite()) s.push_back(static_cast<StateId>(i));
  }
  return s;
}

bool Configuration::support_empty() const {
  for (const Weight& w : v_) {
    if (w.is_finite()) return false;
  }
  return true;
}

Weight Configuration::min_weight() const {
  Weight m = Weight::infinity();
  for (const Weight& w : v_) m = min(m, w);
  return m;
}

Word word_from_string(const Wfa& a, const std::string& text) {
  bool all_single = true;
  for (std::size_t i = 0; i < a.num_letters(); ++i) {
    if (a.letter_name(static_cast<LetterId>(i)).size() != 1) all_single = false;
  }
  Word w;
  if (text.find(' ') == std::string::npos && text.find(',') == std::string::npos && all_single) {
    for (char c : text) {
      auto l = a.find_letter(std::string(1, c));
      if (!l) throw UnknownLetterError("unknown letter: " + std::string(1, c));
      w.push_back(*l);
    }
    return w;
  }
  std::string tok;
  std::istringstream in(text);
  std::string chunk;
  while (in >> chunk) {
    std::stringstream ss(chunk);
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      auto l = a.find_letter(tok);
      if (!l) throw UnknownLetterError("unknown letter: " + tok);
      w.push_back(*l);
    }
  }
  return w;
}

std::string word_to_string(const Wfa& a, const Word& w) {
  bool all_single = true;
  for (LetterId l : w) {
    if (a.letter_name(l).size() != 1) all_single = false;
  }
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0 && !all_single) out += ' ';
    out += a.letter_name(w[i]);
  }
  return out;
}

Configuration initial_configuration(const Wfa& a) {
  return Configuration::unit(a.num_states(), a.initial());
}

Configuration next_conf(const Wfa& a, const Configuration& c, const Word& w) {
  Configuration cur = c;
  for (LetterId sigma : w) {
    if (sigma >= a.num_letters()) throw UnknownLetterError("letter id out of range");
    Configuration nxt(a.num_states());
    for (StateId p = 0; p < a.num_states(); ++p) {
      if (cur[p].is_infinite()) continue;
      for (StateId q = 0; q < a.num_states(); ++q) {
        const Weight& wt = a.weight(p, sigma, q);
        if (wt.is_infinite()) continue;
        nxt[q] = min(nxt[q], cur[p] + wt);
      }
    }
    cur = std::move(nxt);
  }
  return cur;
}

Weight eval(const Wfa& a, const Word& w) {
  return next_conf(a, initial_configuration(a), w).min_weight();
}

Weight eval_if(const WfaIF& a, const Word& w) {
  Configuration c(a.core.num_states());
  for (StateId q = 0; q < a.core.num_states(); ++q) c[q] = a.init[q];
  Configuration end = next_conf(a.core, c, w);
  Weight best = Weight::infinity();
  for (StateId q = 0; q < a.core.num_states(); ++q) best = min(best, end[q] + a.fin[q]);
  return best;
}

ShiftedStep shifted_step(const Wfa& a, const Configuration& c, LetterId sigma) {
  if (!c.is_normalized()) throw std::invalid_argument("shifted_step: configuration not normalized");
  Configuration raw = next_conf(a, c, {sigma});
  Weight m = raw.min_weight();
  if (m.is_infinite()) throw DeadConfigurationError("no successor on " + a.letter_name(sigma));
  Configuration norm(a.num_states());
  for (StateId q = 0; q < a.num_states(); ++q) {
    if (raw[q].is_finite()) norm[q] = raw[q] - m;
  }
  return {std::move(norm), m};
}

EffectBounds effect_bounds(const Wfa& a, const Word& w) {
  Weight wmax(0), maxeff(0);
  for (LetterId sigma : w) {
    if (sigma >= a.num_letters()) throw UnknownLetterError("letter id out of range");
    Weight lw = a.letter_wmax(sigma);
    wmax = std::max(wmax, lw);
    maxeff += lw;
  }
  return {wmax, maxeff};
}

bool seamless_check(const Wfa& a, const Configuration& c, const Run& run) {
  if (!run.empty() && c[run.front().from].is_infinite())
    throw InvalidRunError("run starts outside the configuration support");
  Configuration cur = c;
  Weight acc = run.empty() ? Weight(0) : c[run.front().from];
  for (std::size_t i = 0; i < run.size(); ++i) {
    const Transition& t = run[i];
    if (i > 0 && run[i - 1].to != t.from) throw InvalidRunError("run steps do not chain");
    if (a.weight(t.from, t.letter, t.to) != t.wt)
      throw InvalidRunError("run step is not a transition of the automaton");
    cur = next_conf(a, cur, {t.letter});
    acc += t.wt;
    if (cur[t.to] != acc) return false;
  }
  return true;
}

std::uint64_t boolean_reach(const Wfa& a, std::uint64_t from, const Word& w) {
  if (a.num_states() > 64) throw std::length_error("boolean_reach supports up to 64 states");
  std::uint64_t cur = from;
  for (LetterId sigma : w) {
    if (sigma >= a.num_letters()) throw UnknownLetterError("letter id out of range");
    std::uint64_t nxt = 0;
    for (StateId p = 0; p < a.num_states(); ++p) {
      if (!((cur >> p) & 1u)) continue;
      for (StateId q = 0; q < a.num_states(); ++q) {
        if (a.weight(p, sigma, q).is_finite()) nxt |= std::uint64_t{1} << q;
      }
    }
    cur = nxt;
  }
  return cur;
}

TrimResult validate_trim(const Wfa& a) {
  std::vector<bool> reach(a.num_states(), false);
  std::vector<StateId> stack{a.initial()};
  reach[a.initial()] = true;
  while (!stack.empty()) {
    StateId p = stack.back();
    stack.pop_back();
    for (LetterId s = 0; s < a.num_letters(); ++s) {
      for (StateId q = 0; q < a.num_states(); ++q) {
        if (!reach[q] && a.weight(p, s, q).is_finite()) {
          reach[q] = true;
          stack.push_back(q);
        }
      }
    }
  }
  TrimResult out;
  std::vector<StateId> remap(a.num_states(), 0);
  for (StateId q = 0; q < a.num_states(); ++q) {
    if (reach[q])
      remap[q] = out.automaton.add_state(a.state_name(q));
    else
      out.removed.push_back(a.state_name(q));
  }
  for (LetterId s = 0; s < a.num_letters(); ++s) out.automaton.add_letter(a.letter_name(s));
  out.automaton.set_initial(remap[a.initial()]);
  for (const Transition& t : a.transitions()) {
    if (reach[t.from] && reach[t.to])
      out.automaton.add_transition(remap[t.from], t.letter, t.wt, remap[t.to]);
  }
  return out;
}

Wfa strip_initial_final(const WfaIF& a, const std::string& start_letter,
                        const std::string& finish_letter) {
  if (a.core.find_letter(start_letter) || a.core.find_letter(finish_letter))
    throw AlphabetCollisionError("marker letter already in the alphabet");
  Wfa b;
  for (StateId q = 0; q < a.core.num_states(); ++q) b.add_state(a.core.state_name(q));
  std::string s0 = "_start", sf = "_finish";
  while (a.core.find_state(s0)) s0 += "_";
  while (a.core.find_state(sf)) sf += "_";
  StateId start = b.add_state(s0);
  StateId finish = b.add_state(sf);
  for (LetterId l = 0; l < a.core.num_letters(); ++l) b.add_letter(a.core.letter_name(l));
  LetterId ls = b.add_letter(start_letter);
  LetterId lf = b.add_letter(finish_letter);
  b.set_initial(start);
  for (const Transition& t : a.core.transitions()) b.add_transition(t.from, t.letter, t.wt, t.to);
  for (StateId q = 0; q < a.core.num_states(); ++q) {
    if (a.init[q].is_finite()) b.add_transition(start, ls, a.init[q], q);
    if (a.fin[q].is_finite()) b.add_transition(q, lf, a.fin[q], finish);
  }
  return b;
}

}  // namespace minplus
