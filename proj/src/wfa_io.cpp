#include "minplus/wfa_io.hpp"

#include <fstream>
#include <sstream>
#include <tuple>

namespace minplus {

namespace {

struct Tok {
  std::string text;
  int col;
};

std::vector<Tok> tokenize_line(const std::string& line) {
  // '#' introduces a comment only at the start of a line, so that '#' remains
  // usable as a letter name (the separator letter of the universality gadget).
  std::vector<Tok> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    if (line[i] == '#' && toks.empty()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    toks.push_back({line.substr(start, i - start), static_cast<int>(start + 1)});
  }
  return toks;
}

struct RawTrans {
  int line;
  std::string from, letter, weight, to;  // weight empty for NFA arity
};

struct RawFile {
  std::vector<std::string> alphabet, states;
  std::string initial;
  int initial_line = 0;
  std::vector<std::tuple<int, std::string, std::string>> init_lines, fin_lines;
  std::vector<std::string> accepting;
  std::vector<RawTrans> trans;
  bool has_if = false;
  bool has_nfa = false;
};

RawFile scan(std::string_view text) {
  RawFile raw;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize_line(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0].text;
    auto need = [&](std::size_t n) {
      if (toks.size() < n + 1)
        throw ParseError(lineno, toks.back().col, "'" + head + "' expects more fields");
    };
    if (head == "alphabet") {
      for (std::size_t i = 1; i < toks.size(); ++i) raw.alphabet.push_back(toks[i].text);
    } else if (head == "states") {
      for (std::size_t i = 1; i < toks.size(); ++i) raw.states.push_back(toks[i].text);
    } else if (head == "initial") {
      need(1);
      if (toks.size() > 2) throw ParseError(lineno, toks[2].col, "a single initial state expected");
      raw.initial = toks[1].text;
      raw.initial_line = lineno;
    } else if (head == "init") {
      need(2);
      raw.has_if = true;
      raw.init_lines.emplace_back(lineno, toks[1].text, toks[2].text);
    } else if (head == "fin") {
      need(2);
      raw.has_if = true;
      raw.fin_lines.emplace_back(lineno, toks[1].text, toks[2].text);
    } else if (head == "accepting") {
      raw.has_nfa = true;
      for (std::size_t i = 1; i < toks.size(); ++i) raw.accepting.push_back(toks[i].text);
    } else if (head == "trans") {
      need(3);
      RawTrans t;
      t.line = lineno;
      t.from = toks[1].text;
      if (toks.size() == 4) {
        raw.has_nfa = true;
        t.letter = toks[2].text;
        t.to = toks[3].text;
      } else if (toks.size() == 5) {
        t.letter = toks[2].text;
        t.weight = toks[3].text;
        t.to = toks[4].text;
      } else {
        throw ParseError(lineno, toks[0].col, "'trans' expects 3 or 4 fields");
      }
      raw.trans.push_back(std::move(t));
    } else {
      throw ParseError(lineno, toks[0].col, "unknown directive '" + head + "'");
    }
  }
  if (raw.has_if && raw.has_nfa)
    throw ParseError(lineno, 1, "file mixes weighted and acceptance-based directives");
  return raw;
}

Weight parse_weight_field(const std::string& s, int line) {
  try {
    return Weight::parse(s);
  } catch (const std::invalid_argument&) {
    throw ParseError(line, 1, "bad weight '" + s + "'");
  }
}

}  // namespace

ParsedAutomaton parse_automaton(std::string_view text) {
  RawFile raw = scan(text);
  if (raw.has_nfa) {
    Nfa n;
    n.state_names = raw.states;
    n.letter_names = raw.alphabet;
    n.accepting.assign(n.state_names.size(), false);
    n.next.assign(n.state_names.size(), std::vector<std::vector<StateId>>(n.letter_names.size()));
    auto state_of = [&](const std::string& name, int line) {
      auto q = n.find_state(name);
      if (!q) throw ValidationError("unknown state '" + name + "' (line " + std::to_string(line) + ")");
      return *q;
    };
    if (raw.initial.empty()) throw ValidationError("missing initial state");
    n.initial = state_of(raw.initial, raw.initial_line);
    for (const auto& name : raw.accepting) n.accepting[state_of(name, 0)] = true;
    for (const RawTrans& t : raw.trans) {
      auto letter = [&]() -> StateId {
        for (std::size_t i = 0; i < n.letter_names.size(); ++i) {
          if (n.letter_names[i] == t.letter) return static_cast<StateId>(i);
        }
        throw ValidationError("unknown letter '" + t.letter + "' (line " + std::to_string(t.line) +
                              ")");
      }();
      n.next[state_of(t.from, t.line)][letter].push_back(state_of(t.to, t.line));
    }
    return n;
  }

  Wfa a;
  for (const auto& s : raw.states) a.add_state(s);
  for (const auto& l : raw.alphabet) a.add_letter(l);
  auto state_of = [&](const std::string& name, int line) {
    auto q = a.find_state(name);
    if (!q) throw ValidationError("unknown state '" + name + "' (line " + std::to_string(line) + ")");
    return *q;
  };
  auto letter_of = [&](const std::string& name, int line) {
    auto l = a.find_letter(name);
    if (!l)
      throw ValidationError("unknown letter '" + name + "' (line " + std::to_string(line) + ")");
    return *l;
  };
  if (raw.initial.empty()) throw ValidationError("missing initial state");
  a.set_initial(state_of(raw.initial, raw.initial_line));
  for (const RawTrans& t : raw.trans) {
    a.add_transition(state_of(t.from, t.line), letter_of(t.letter, t.line),
                     parse_weight_field(t.weight, t.line), state_of(t.to, t.line));
  }
  if (!raw.has_if) return a;

  WfaIF w;
  w.init.assign(a.num_states(), Weight::infinity());
  w.fin.assign(a.num_states(), Weight::infinity());
  for (const auto& [line, name, val] : raw.init_lines)
    w.init[state_of(name, line)] = parse_weight_field(val, line);
  for (const auto& [line, name, val] : raw.fin_lines)
    w.fin[state_of(name, line)] = parse_weight_field(val, line);
  w.core = std::move(a);
  bool any_init = false;
  for (const Weight& v : w.init) any_init |= v.is_finite();
  if (!any_init) throw ValidationError("no state has a finite initial weight");
  return w;
}

std::variant<Wfa, WfaIF> parse_wfa(std::string_view text) {
  ParsedAutomaton p = parse_automaton(text);
  if (std::holds_alternative<Nfa>(p))
    throw ValidationError("expected a weighted automaton, found an NFA");
  if (std::holds_alternative<Wfa>(p)) return std::get<Wfa>(std::move(p));
  return std::get<WfaIF>(std::move(p));
}

Nfa parse_nfa(std::string_view text) {
  ParsedAutomaton p = parse_automaton(text);
  if (!std::holds_alternative<Nfa>(p)) throw ValidationError("expected an NFA");
  return std::get<Nfa>(std::move(p));
}

namespace {

void write_core(std::ostringstream& out, const Wfa& a) {
  out << "alphabet";
  for (std::size_t l = 0; l < a.num_letters(); ++l)
    out << ' ' << a.letter_name(static_cast<LetterId>(l));
  out << '\n';
  out << "states";
  for (std::size_t q = 0; q < a.num_states(); ++q)
    out << ' ' << a.state_name(static_cast<StateId>(q));
  out << '\n';
  out << "initial " << a.state_name(a.initial()) << '\n';
}

void write_trans(std::ostringstream& out, const Wfa& a) {
  for (const Transition& t : a.transitions()) {
    out << "trans " << a.state_name(t.from) << ' ' << a.letter_name(t.letter) << ' '
        << t.wt.to_string() << ' ' << a.state_name(t.to) << '\n';
  }
}

}  // namespace

std::string serialize_wfa(const Wfa& a) {
  std::ostringstream out;
  write_core(out, a);
  write_trans(out, a);
  return out.str();
}

std::string serialize_wfa_if(const WfaIF& a) {
  std::ostringstream out;
  write_core(out, a.core);
  for (StateId q = 0; q < a.core.num_states(); ++q) {
    if (a.init[q].is_finite())
      out << "init " << a.core.state_name(q) << ' ' << a.init[q].to_string() << '\n';
  }
  for (StateId q = 0; q < a.core.num_states(); ++q) {
    if (a.fin[q].is_finite())
      out << "fin " << a.core.state_name(q) << ' ' << a.fin[q].to_string() << '\n';
  }
  write_trans(out, a.core);
  return out.str();
}

std::string serialize_nfa(const Nfa& a) {
  std::ostringstream out;
  out << "alphabet";
  for (const auto& l : a.letter_names) out << ' ' << l;
  out << '\n';
  out << "states";
  for (const auto& s : a.state_names) out << ' ' << s;
  out << '\n';
  out << "initial " << a.state_names[a.initial] << '\n';
  out << "accepting";
  for (std::size_t q = 0; q < a.state_names.size(); ++q) {
    if (a.accepting[q]) out << ' ' << a.state_names[q];
  }
  out << '\n';
  for (std::size_t p = 0; p < a.state_names.size(); ++p) {
    for (std::size_t l = 0; l < a.letter_names.size(); ++l) {
      for (StateId q : a.next[p][l]) {
        out << "trans " << a.state_names[p] << ' ' << a.letter_names[l] << ' ' << a.state_names[q]
            << '\n';
      }
    }
  }
  return out.str();
}

ParsedAutomaton load_automaton_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_automaton(buf.str());
}

}  // namespace minplus
