#include "minplus/extword.hpp"

#include <algorithm>
#include <sstream>

namespace minplus {

ExtWord concat(const ExtWord& a, const ExtWord& b) {
  ExtWord out = a;
  out.letters.insert(out.letters.end(), b.letters.begin(), b.letters.end());
  return out;
}

Weight ext_run_weight(const ExtRun& run) {
  Weight w(0);
  for (const ExtRunStep& s : run) w += s.wt;
  return w;
}

bool contains_jump(const ExtWord& w) {
  for (const ExtLetter& l : w.letters) {
    if (std::holds_alternative<JumpLetter>(l)) return true;
    if (const auto* c = std::get_if<CactusLetter>(&l)) {
      if (contains_jump(*c->body)) return true;
    } else if (const auto* r = std::get_if<RebaseLetter>(&l)) {
      if (contains_jump(*r->body)) return true;
    } else if (const auto* p = std::get_if<PowerNode>(&l)) {
      if (contains_jump(*p->body)) return true;
    }
  }
  return false;
}

bool contains_cactus_or_rebase(const ExtWord& w) {
  for (const ExtLetter& l : w.letters) {
    if (std::holds_alternative<CactusLetter>(l) || std::holds_alternative<RebaseLetter>(l))
      return true;
    if (const auto* p = std::get_if<PowerNode>(&l)) {
      if (contains_cactus_or_rebase(*p->body)) return true;
    }
  }
  return false;
}

int nesting_depth(const ExtLetter& l) {
  if (const auto* c = std::get_if<CactusLetter>(&l)) return 1 + nesting_depth(*c->body);
  if (const auto* r = std::get_if<RebaseLetter>(&l)) return 1 + nesting_depth(*r->body);
  if (const auto* p = std::get_if<PowerNode>(&l)) return nesting_depth(*p->body);
  return 1;
}

int nesting_depth(const ExtWord& w) {
  int d = 0;
  for (const ExtLetter& l : w.letters) d = std::max(d, nesting_depth(l));
  return d;
}

int rebase_rank(const ExtWord& w) {
  int r = 0;
  for (const ExtLetter& l : w.letters) {
    if (const auto* c = std::get_if<CactusLetter>(&l)) {
      r = std::max(r, rebase_rank(*c->body));
    } else if (const auto* b = std::get_if<RebaseLetter>(&l)) {
      r = std::max(r, rebase_rank(*b->body) + 1);
    } else if (const auto* p = std::get_if<PowerNode>(&l)) {
      r = std::max(r, rebase_rank(*p->body));
    }
  }
  return r;
}

namespace {

void key_of(const ExtWord& w, std::string& out);

void key_of(const ExtLetter& l, std::string& out) {
  if (const auto* t = std::get_if<Transition>(&l)) {
    out += "b(" + std::to_string(t->from) + "," + std::to_string(t->letter) + "," +
           t->wt.to_string() + "," + std::to_string(t->to) + ")";
  } else if (const auto* c = std::get_if<CactusLetter>(&l)) {
    out += "c(" + std::to_string(c->cycle.base) + "," + std::to_string(c->cycle.reach) + ",";
    key_of(*c->body, out);
    out += ")";
  } else if (const auto* r = std::get_if<RebaseLetter>(&l)) {
    out += "r(" + std::to_string(r->cycle.base) + "," + std::to_string(r->cycle.reach) + ",";
    key_of(*r->body, out);
    out += "," + std::to_string(r->from_inner) + "," + std::to_string(r->to_inner) + ")";
  } else if (const auto* j = std::get_if<JumpLetter>(&l)) {
    out += "j(" + std::to_string(j->from_base) + "," + std::to_string(j->to_base) + "," +
           std::to_string(j->reach) + ")";
  } else if (const auto* p = std::get_if<PowerNode>(&l)) {
    out += "p(" + p->exponent.to_decimal() + ",";
    key_of(*p->body, out);
    out += ")";
  }
}

void key_of(const ExtWord& w, std::string& out) {
  out += "[";
  for (const ExtLetter& l : w.letters) key_of(l, out);
  out += "]";
}

}  // namespace

std::string structural_key(const ExtWord& w) {
  std::string out;
  key_of(w, out);
  return out;
}

std::string structural_key(const ExtLetter& l) {
  std::string out;
  key_of(l, out);
  return out;
}

// --- s-expressions ----------------------------------------------------------

namespace {

struct SexprCursor {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\n' || text[pos] == '\t' ||
                                 text[pos] == '\r'))
      ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= text.size();
  }

  SExpr parse() {
    skip_ws();
    if (pos >= text.size()) throw MalformedLetterError("unexpected end of expression");
    if (text[pos] == '(') {
      ++pos;
      SExpr node;
      while (true) {
        skip_ws();
        if (pos >= text.size()) throw MalformedLetterError("missing ')'");
        if (text[pos] == ')') {
          ++pos;
          return node;
        }
        node.kids.push_back(parse());
      }
    }
    if (text[pos] == ')') throw MalformedLetterError("unexpected ')'");
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ' && text[pos] != '\n' && text[pos] != '\t' &&
           text[pos] != '\r' && text[pos] != '(' && text[pos] != ')')
      ++pos;
    SExpr node;
    node.is_atom = true;
    node.text = std::string(text.substr(start, pos - start));
    return node;
  }
};

const SExpr& expect_list(const SExpr& n, const char* what) {
  if (n.is_atom) throw MalformedLetterError(std::string("expected a list for ") + what);
  return n;
}

const std::string& expect_atom(const SExpr& n, const char* what) {
  if (!n.is_atom) throw MalformedLetterError(std::string("expected an atom for ") + what);
  return n.text;
}

bool tagged(const SExpr& n, const char* tag) {
  return !n.is_atom && !n.kids.empty() && n.kids[0].is_atom && n.kids[0].text == tag;
}

}  // namespace

SExpr parse_sexpr(std::string_view text) {
  SexprCursor cur{text};
  SExpr node = cur.parse();
  if (!cur.done()) throw MalformedLetterError("trailing text after expression");
  return node;
}

std::string aug_state_to_string(const Wfa& a, const AugState& s) {
  std::string out = a.state_name(s.inner) + "|" + a.state_name(s.base) + "|{";
  bool first = true;
  for (StateId q = 0; q < a.num_states(); ++q) {
    if ((s.reach >> q) & 1u) {
      if (!first) out += ',';
      out += a.state_name(q);
      first = false;
    }
  }
  out += '}';
  return out;
}

AugState aug_state_from_string(const Wfa& a, std::string_view text) {
  auto bar1 = text.find('|');
  auto bar2 = text.find('|', bar1 == std::string_view::npos ? 0 : bar1 + 1);
  if (bar1 == std::string_view::npos || bar2 == std::string_view::npos)
    throw MalformedLetterError("augmented state must look like q|p|{...}");
  std::string inner(text.substr(0, bar1));
  std::string base(text.substr(bar1 + 1, bar2 - bar1 - 1));
  std::string_view setpart = text.substr(bar2 + 1);
  if (setpart.size() < 2 || setpart.front() != '{' || setpart.back() != '}')
    throw MalformedLetterError("augmented state must look like q|p|{...}");
  setpart = setpart.substr(1, setpart.size() - 2);
  AugState s{};
  auto iq = a.find_state(inner);
  auto bq = a.find_state(base);
  if (!iq || !bq) throw ValidationError("unknown state in augmented state " + std::string(text));
  s.inner = *iq;
  s.base = *bq;
  s.reach = 0;
  std::string tok;
  std::stringstream ss{std::string(setpart)};
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    auto q = a.find_state(tok);
    if (!q) throw ValidationError("unknown state '" + tok + "' in reachable set");
    s.reach |= std::uint64_t{1} << *q;
  }
  if (!((s.reach >> s.inner) & 1u) || !((s.reach >> s.base) & 1u))
    throw MalformedLetterError("augmented state components must belong to the reachable set");
  return s;
}

namespace {

std::uint64_t parse_state_set(const Wfa& a, const SExpr& n) {
  expect_list(n, "(set ...)");
  if (!tagged(n, "set")) throw MalformedLetterError("expected (set ...)");
  std::uint64_t mask = 0;
  for (std::size_t i = 1; i < n.kids.size(); ++i) {
    auto q = a.find_state(expect_atom(n.kids[i], "state"));
    if (!q) throw ValidationError("unknown state in (set ...)");
    mask |= std::uint64_t{1} << *q;
  }
  return mask;
}

/// Parses (set s*) of augmented states; must be the saturated block
/// {(q, base, T) : q in T}.
Block parse_saturated_block(const Wfa& a, const SExpr& n) {
  expect_list(n, "(set ...)");
  if (!tagged(n, "set")) throw MalformedLetterError("expected (set ...)");
  if (n.kids.size() < 2) throw NotSaturatedError("empty augmented-state set");
  std::vector<AugState> states;
  for (std::size_t i = 1; i < n.kids.size(); ++i)
    states.push_back(aug_state_from_string(a, expect_atom(n.kids[i], "augmented state")));
  Block b = states.front().block();
  std::uint64_t inners = 0;
  for (const AugState& s : states) {
    if (!(s.block() == b)) throw MixedBlocksError("set spans more than one (base, reach) block");
    inners |= std::uint64_t{1} << s.inner;
  }
  if (inners != b.reach)
    throw NotSaturatedError("set must contain every inner state of the reachable set");
  return b;
}

ExtLetter letter_from_sexpr(const Wfa& a, const SExpr& n) {
  expect_list(n, "letter");
  if (n.kids.empty() || !n.kids[0].is_atom) throw MalformedLetterError("letter must be tagged");
  const std::string& tag = n.kids[0].text;
  if (tag == "base") {
    if (n.kids.size() != 5) throw MalformedLetterError("(base p sigma w q) expects 4 fields");
    auto p = a.find_state(expect_atom(n.kids[1], "state"));
    auto l = a.find_letter(expect_atom(n.kids[2], "letter"));
    Weight w = Weight::parse(expect_atom(n.kids[3], "weight"));
    auto q = a.find_state(expect_atom(n.kids[4], "state"));
    if (!p || !l || !q) throw ValidationError("unknown state/letter in (base ...)");
    if (w.is_infinite() || a.weight(*p, *l, *q) != w)
      throw MalformedLetterError("(base ...) is not a finite transition of the automaton");
    return Transition{*p, *l, w, *q};
  }
  if (tag == "cactus") {
    if (n.kids.size() != 3) throw MalformedLetterError("(cactus (set ...) (word ...)) expected");
    CactusLetter c;
    c.cycle = parse_saturated_block(a, n.kids[1]);
    c.body = std::make_shared<ExtWord>(ext_word_from_sexpr(a, n.kids[2]));
    return c;
  }
  if (tag == "rebase") {
    if (n.kids.size() != 5)
      throw MalformedLetterError("(rebase (set ...) (word ...) s r) expected");
    RebaseLetter r;
    r.cycle = parse_saturated_block(a, n.kids[1]);
    r.body = std::make_shared<ExtWord>(ext_word_from_sexpr(a, n.kids[2]));
    AugState s = aug_state_from_string(a, expect_atom(n.kids[3], "augmented state"));
    AugState t = aug_state_from_string(a, expect_atom(n.kids[4], "augmented state"));
    if (!(s.block() == r.cycle) || !(t.block() == r.cycle))
      throw MalformedLetterError("rebase endpoints must lie in the cycle block");
    r.from_inner = s.inner;
    r.to_inner = t.inner;
    return r;
  }
  if (tag == "jump") {
    if (n.kids.size() != 4) throw MalformedLetterError("(jump p p' (set ...)) expected");
    auto p = a.find_state(expect_atom(n.kids[1], "state"));
    auto p2 = a.find_state(expect_atom(n.kids[2], "state"));
    if (!p || !p2) throw ValidationError("unknown state in (jump ...)");
    JumpLetter j{*p, *p2, parse_state_set(a, n.kids[3])};
    if (!((j.reach >> j.from_base) & 1u) || !((j.reach >> j.to_base) & 1u))
      throw MalformedLetterError("jump baselines must belong to the reachable set");
    return j;
  }
  if (tag == "pow") {
    if (n.kids.size() != 3) throw MalformedLetterError("(pow e (word ...)) expected");
    PowerNode p;
    p.exponent = BigInt::from_decimal(expect_atom(n.kids[1], "exponent"));
    if (p.exponent.is_negative()) throw MalformedLetterError("negative power exponent");
    p.body = std::make_shared<ExtWord>(ext_word_from_sexpr(a, n.kids[2]));
    return p;
  }
  throw MalformedLetterError("unknown letter tag '" + tag + "'");
}

}  // namespace

ExtWord ext_word_from_sexpr(const Wfa& a, const SExpr& node) {
  expect_list(node, "(word ...)");
  if (!tagged(node, "word")) throw MalformedLetterError("expected (word ...)");
  ExtWord w;
  for (std::size_t i = 1; i < node.kids.size(); ++i)
    w.letters.push_back(letter_from_sexpr(a, node.kids[i]));
  return w;
}

ExtWord parse_ext_word(const Wfa& a, std::string_view text) {
  return ext_word_from_sexpr(a, parse_sexpr(text));
}

namespace {

void write_block_set(const Wfa& a, const Block& b, std::string& out) {
  out += "(set";
  for (StateId q = 0; q < a.num_states(); ++q) {
    if (b.contains(q)) {
      out += ' ';
      out += aug_state_to_string(a, {q, b.base, b.reach});
    }
  }
  out += ')';
}

void write_word(const Wfa& a, const ExtWord& w, std::string& out);

void write_letter(const Wfa& a, const ExtLetter& l, std::string& out) {
  if (const auto* t = std::get_if<Transition>(&l)) {
    out += "(base " + a.state_name(t->from) + ' ' + a.letter_name(t->letter) + ' ' +
           t->wt.to_string() + ' ' + a.state_name(t->to) + ")";
  } else if (const auto* c = std::get_if<CactusLetter>(&l)) {
    out += "(cactus ";
    write_block_set(a, c->cycle, out);
    out += ' ';
    write_word(a, *c->body, out);
    out += ')';
  } else if (const auto* r = std::get_if<RebaseLetter>(&l)) {
    out += "(rebase ";
    write_block_set(a, r->cycle, out);
    out += ' ';
    write_word(a, *r->body, out);
    out += ' ';
    out += aug_state_to_string(a, {r->from_inner, r->cycle.base, r->cycle.reach});
    out += ' ';
    out += aug_state_to_string(a, {r->to_inner, r->cycle.base, r->cycle.reach});
    out += ')';
  } else if (const auto* j = std::get_if<JumpLetter>(&l)) {
    out += "(jump " + a.state_name(j->from_base) + ' ' + a.state_name(j->to_base) + " (set";
    for (StateId q = 0; q < a.num_states(); ++q) {
      if ((j->reach >> q) & 1u) out += ' ' + a.state_name(q);
    }
    out += "))";
  } else if (const auto* p = std::get_if<PowerNode>(&l)) {
    out += "(pow " + p->exponent.to_decimal() + ' ';
    write_word(a, *p->body, out);
    out += ')';
  }
}

void write_word(const Wfa& a, const ExtWord& w, std::string& out) {
  out += "(word";
  for (const ExtLetter& l : w.letters) {
    out += ' ';
    write_letter(a, l, out);
  }
  out += ')';
}

}  // namespace

std::string serialize_ext_word(const Wfa& a, const ExtWord& w) {
  std::string out;
  write_word(a, w, out);
  return out;
}

// --- baseline shift ---------------------------------------------------------

namespace {

/// The shifted form of one letter, given the run's inner move q_prev -> q_next
/// across it.
ExtLetter shift_letter(const Wfa& a, const ExtLetter& l, StateId q_prev, StateId q_next) {
  if (const auto* t = std::get_if<Transition>(&l)) {
    const Weight& c2 = a.weight(q_prev, t->letter, q_next);
    if (c2.is_infinite())
      throw InvalidRunError("shift target is not a transition of the automaton");
    return Transition{q_prev, t->letter, c2, q_next};
  }
  if (const auto* c = std::get_if<CactusLetter>(&l)) {
    if (q_prev == c->cycle.base && q_next == c->cycle.base) return *c;
    return RebaseLetter{c->cycle, c->body, q_prev, q_next};
  }
  if (const auto* r = std::get_if<RebaseLetter>(&l)) {
    if (q_prev == r->cycle.base && q_next == r->cycle.base)
      return CactusLetter{r->cycle, r->body};
    return RebaseLetter{r->cycle, r->body, q_prev, q_next};
  }
  throw JumpInWordError("baseline shift is undefined on jump letters");
}

}  // namespace

BaselineShift baseline_shift(const Wfa& a, const ExtWord& w, const ExtRun& rho0) {
  if (contains_jump(w)) throw JumpInWordError("baseline shift is undefined on jump letters");
  if (rho0.size() != w.letters.size())
    throw InvalidRunError("run length does not match the word");
  BaselineShift out;
  for (std::size_t i = 0; i < w.letters.size(); ++i) {
    if (structural_key(rho0[i].letter) != structural_key(w.letters[i]))
      throw InvalidRunError("run does not read the given word");
    if (i > 0 && !(rho0[i - 1].to == rho0[i].from)) throw InvalidRunError("run steps do not chain");
    out.word.letters.push_back(
        shift_letter(a, w.letters[i], rho0[i].from.inner, rho0[i].to.inner));
  }
  out.shifted_base = baseline_shift_run(a, rho0, rho0);
  return out;
}

ExtRun baseline_shift_run(const Wfa& a, const ExtRun& run, const ExtRun& rho0) {
  if (run.size() != rho0.size()) throw InvalidRunError("runs read words of different length");
  ExtRun out;
  for (std::size_t i = 0; i < run.size(); ++i) {
    if (structural_key(run[i].letter) != structural_key(rho0[i].letter))
      throw InvalidRunError("runs read different words");
    ExtLetter shifted = shift_letter(a, run[i].letter, rho0[i].from.inner, rho0[i].to.inner);
    AugState from{run[i].from.inner, rho0[i].from.inner, run[i].from.reach};
    AugState to{run[i].to.inner, rho0[i].to.inner, run[i].to.reach};
    out.push_back({from, shifted, run[i].wt - rho0[i].wt, to});
  }
  return out;
}

}  // namespace minplus
