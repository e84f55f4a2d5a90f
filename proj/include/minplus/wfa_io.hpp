#ifndef MINPLUS_WFA_IO_HPP
#define MINPLUS_WFA_IO_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "minplus/wfa.hpp"

namespace minplus {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(int line_, int col_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ", col " + std::to_string(col_) +
                           ": " + what),
        line(line_),
        col(col_) {}
};

using ParsedAutomaton = std::variant<Wfa, WfaIF, Nfa>;

/// Line-oriented automaton format:
///   alphabet a b
///   states q0 q1
///   initial q0
///   init q0 0          (initial-weight line; presence switches to the
///   fin q0 3            initial/final-weight variant)
///   trans q0 a 1 q1    (weight column `inf` allowed)
///   accepting q1 q2    (acceptance line + 3-column trans switch to NFA)
///   # comment
ParsedAutomaton parse_automaton(std::string_view text);

/// As parse_automaton but rejects the NFA variant.
std::variant<Wfa, WfaIF> parse_wfa(std::string_view text);
Nfa parse_nfa(std::string_view text);

std::string serialize_wfa(const Wfa& a);
std::string serialize_wfa_if(const WfaIF& a);
std::string serialize_nfa(const Nfa& a);

ParsedAutomaton load_automaton_file(const std::string& path);

}  // namespace minplus

#endif  // MINPLUS_WFA_IO_HPP
