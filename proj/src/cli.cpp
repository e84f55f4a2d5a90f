#include "minplus/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "minplus/analysis.hpp"
#include "minplus/cactus.hpp"
#include "minplus/wfa_io.hpp"

namespace minplus {

namespace {

std::string slurp(const std::string& path_or_inline) {
  if (!path_or_inline.empty() && path_or_inline[0] == '(') return path_or_inline;
  std::ifstream in(path_or_inline);
  if (!in) throw std::runtime_error("cannot open " + path_or_inline);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Wfa load_wfa(const std::string& path) {
  ParsedAutomaton p = load_automaton_file(path);
  if (std::holds_alternative<Wfa>(p)) return std::get<Wfa>(std::move(p));
  if (std::holds_alternative<WfaIF>(p))
    throw ValidationError(path + " carries initial/final weights; run strip-if first");
  throw ValidationError(path + " is an NFA; run from-nfa first");
}

struct CycleArg {
  std::vector<AugState> states;
  ExtWord word;
};

CycleArg load_cycle(const Wfa& a, const std::string& arg) {
  SExpr root = parse_sexpr(slurp(arg));
  if (root.is_atom || root.kids.size() != 3 || !root.kids[0].is_atom ||
      root.kids[0].text != "cycle")
    throw MalformedLetterError("expected (cycle (set s*) (word ...))");
  CycleArg cycle;
  const SExpr& set = root.kids[1];
  if (set.is_atom || set.kids.empty() || !set.kids[0].is_atom || set.kids[0].text != "set")
    throw MalformedLetterError("expected (set s*)");
  for (std::size_t i = 1; i < set.kids.size(); ++i) {
    if (!set.kids[i].is_atom) throw MalformedLetterError("augmented state expected in (set ...)");
    cycle.states.push_back(aug_state_from_string(a, set.kids[i].text));
  }
  cycle.word = ext_word_from_sexpr(a, root.kids[2]);
  return cycle;
}

void emit_tables(const Wfa& a, const PairTables& t, std::ostream& out) {
  auto name = [&](StateId q) { return a.state_name(q); };
  out << "RefStates:";
  for (StateId s : t.ref_states) out << ' ' << name(s);
  out << '\n';
  out << "MinStates:";
  for (StateId s : t.min_states) out << ' ' << name(s);
  out << '\n';
  out << "TthPairs:";
  for (auto& [s, r] : t.tth_pairs) out << " (" << name(s) << "," << name(r) << ")";
  out << '\n';
  out << "PltPairs:";
  for (auto& [s, r] : t.plt_pairs) out << " (" << name(s) << "," << name(r) << ")";
  out << '\n';
  out << "GrnPairs:";
  for (auto& [s, r] : t.grn_pairs) out << " (" << name(s) << "," << name(r) << ")";
  out << '\n';
  out << "Grounding:";
  for (auto& [pair, g] : t.grounding)
    out << " (" << name(pair.first) << "," << name(pair.second) << ")->" << name(g);
  out << '\n';
}

void write_output(const std::string& text, const std::string& output_path, std::ostream& out) {
  if (output_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(output_path);
  if (!f) throw std::runtime_error("cannot write " + output_path);
  f << text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"min-plus weighted automata analysis"};
  app.require_subcommand(1);

  std::string file, word_arg, witness_arg, cycle_arg, word_file, output_path;
  std::string bound_str = "0";
  std::string margin_str;
  std::size_t max_x = 6, max_y = 6, state_cap = 200000;
  int budget = 1;
  int unfold_at = -1;
  bool trace = false, parallel = false;
  std::vector<std::string> pool_cacti;

  auto* c_eval = app.add_subcommand("eval", "evaluate a word");
  c_eval->add_option("file", file)->required();
  c_eval->add_option("word", word_arg)->required();

  auto* c_conf = app.add_subcommand("conf", "configuration after a word");
  c_conf->add_option("file", file)->required();
  c_conf->add_option("word", word_arg)->required();
  c_conf->add_flag("--trace", trace, "print the normalized step-by-step trace");

  auto* c_det = app.add_subcommand("determinize", "bounded-gap determinization");
  c_det->add_option("file", file)->required();
  c_det->add_option("--bound", bound_str)->required();
  c_det->add_option("--state-cap", state_cap);
  c_det->add_option("-o,--output", output_path);

  auto* c_wit = app.add_subcommand("check-witness", "verify a nondeterminizability witness");
  c_wit->add_option("file", file)->required();
  c_wit->add_option("witness", witness_arg)->required();

  auto* c_gap = app.add_subcommand("gap-search", "bounded search for a gap witness");
  c_gap->add_option("file", file)->required();
  c_gap->add_option("--bound", bound_str)->required();
  c_gap->add_option("--max-x", max_x);
  c_gap->add_option("--max-y", max_y);

  auto* c_stab = app.add_subcommand("stabilize", "check a stable cycle");
  c_stab->add_option("file", file)->required();
  c_stab->add_option("cycle", cycle_arg)->required();

  auto* c_cls = app.add_subcommand("classify", "pair tables of a stable cycle");
  c_cls->add_option("file", file)->required();
  c_cls->add_option("cycle", cycle_arg)->required();

  auto* c_unf = app.add_subcommand("unfold", "unfold one cactus letter");
  c_unf->add_option("file", file)->required();
  c_unf->add_option("word", word_file)->required();
  c_unf->add_option("--margin", margin_str)->required();
  c_unf->add_option("--at", unfold_at, "index of the cactus letter (default: leftmost deepest)");

  auto* c_flat = app.add_subcommand("flatten", "remove all cactus and rebase letters");
  c_flat->add_option("file", file)->required();
  c_flat->add_option("word", word_file)->required();
  c_flat->add_option("--margin", margin_str)->required();

  auto* c_pot = app.add_subcommand("potential", "dominance height over the baseline");
  c_pot->add_option("file", file)->required();
  c_pot->add_option("word", word_file)->required();
  c_pot->add_option("--register-cactus", pool_cacti, "extra pool letters (word files)");

  auto* c_chg = app.add_subcommand("charge", "negated configuration minimum");
  c_chg->add_option("file", file)->required();
  c_chg->add_option("word", word_file)->required();

  auto* c_dec = app.add_subcommand("decide", "budgeted dual semi-decision procedure");
  c_dec->add_option("file", file)->required();
  c_dec->add_option("--budget", budget)->required();
  c_dec->add_option("--state-cap", state_cap);
  c_dec->add_flag("--parallel", parallel);

  auto* c_nfa = app.add_subcommand("from-nfa", "universality-to-determinizability reduction");
  c_nfa->add_option("file", file)->required();
  c_nfa->add_option("-o,--output", output_path);

  auto* c_strip = app.add_subcommand("strip-if", "fold initial/final weights into marker letters");
  c_strip->add_option("file", file)->required();
  c_strip->add_option("-o,--output", output_path);

  std::vector<std::string> argv = args;
  try {
    std::vector<const char*> cargv;
    cargv.push_back("minplus");
    for (const std::string& s : argv) cargv.push_back(s.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream usage;
    int rc = app.exit(e, out, usage);
    err << usage.str();
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_eval->parsed()) {
      ParsedAutomaton p = load_automaton_file(file);
      if (std::holds_alternative<WfaIF>(p)) {
        const WfaIF& a = std::get<WfaIF>(p);
        out << eval_if(a, word_from_string(a.core, word_arg)).to_string() << '\n';
      } else if (std::holds_alternative<Wfa>(p)) {
        const Wfa& a = std::get<Wfa>(p);
        out << eval(a, word_from_string(a, word_arg)).to_string() << '\n';
      } else {
        throw ValidationError("eval expects a weighted automaton");
      }
      return 0;
    }
    if (c_conf->parsed()) {
      Wfa a = load_wfa(file);
      Word w = word_from_string(a, word_arg);
      if (trace) {
        Configuration cur = initial_configuration(a);
        for (LetterId sigma : w) {
          ShiftedStep step = shifted_step(a, cur, sigma);
          out << a.letter_name(sigma) << " emitted " << step.emitted.to_string() << " conf";
          for (StateId q = 0; q < a.num_states(); ++q)
            out << ' ' << a.state_name(q) << '=' << step.conf[q].to_string();
          out << '\n';
          cur = step.conf;
        }
        return 0;
      }
      Configuration c = next_conf(a, initial_configuration(a), w);
      for (StateId q = 0; q < a.num_states(); ++q)
        out << a.state_name(q) << ' ' << c[q].to_string() << '\n';
      return 0;
    }
    if (c_det->parsed()) {
      Wfa a = load_wfa(file);
      Wfa d = determinize_with_bound(a, Weight::parse(bound_str), state_cap);
      write_output(serialize_wfa(d), output_path, out);
      return 0;
    }
    if (c_wit->parsed()) {
      Wfa a = load_wfa(file);
      CactusEngine engine(a);
      WitnessCandidate cand = parse_witness(a, slurp(witness_arg));
      WitnessCheck res = check_witness(engine, cand);
      if (res.accepted) {
        out << "accepted\n";
        out << "mwt(w1 w2 w3) = " << res.finite_side.to_string() << '\n';
        out << "mwt(w1 alpha w3) = " << res.infinite_side.to_string() << '\n';
        return 0;
      }
      out << "rejected: requirement " << res.failing_requirement << " (" << res.detail << ")\n";
      return 1;
    }
    if (c_gap->parsed()) {
      Wfa a = load_wfa(file);
      auto w = gap_witness_search(a, Weight::parse(bound_str), max_x, max_y);
      if (!w) {
        out << "no witness within bounds\n";
        return 1;
      }
      out << "x = " << word_to_string(a, w->x) << '\n';
      out << "y = " << word_to_string(a, w->y) << '\n';
      out << "q = " << a.state_name(w->q) << '\n';
      out << "gap = " << (w->mwt_x_to_q - w->mwt_x_min).to_string() << " > "
          << w->bound.to_string() << '\n';
      return 0;
    }
    if (c_stab->parsed() || c_cls->parsed()) {
      Wfa a = load_wfa(file);
      CactusEngine engine(a);
      CycleArg cycle = load_cycle(a, cycle_arg);
      CycleCheckResult res = engine.check_stable_cycle(cycle.states, cycle.word);
      if (!res.accepted()) {
        out << "rejected: " << to_string(*res.rejection)
            << (res.detail.empty() ? "" : " (" + res.detail + ")") << '\n';
        return 1;
      }
      const StableCycleCertificate& cert = *res.certificate;
      out << "stable cycle on block base=" << a.state_name(cert.block.base) << " |T|="
          << __builtin_popcountll(cert.block.reach) << '\n';
      out << "n = " << cert.n_frak.to_display() << '\n';
      out << "m = " << cert.m_frak.to_display() << '\n';
      if (c_cls->parsed()) emit_tables(a, cert.tables, out);
      return 0;
    }
    if (c_unf->parsed()) {
      Wfa a = load_wfa(file);
      CactusEngine engine(a);
      ExtWord w = parse_ext_word(a, slurp(word_file));
      int target = unfold_at;
      if (target < 0) {
        int best_depth = 0;
        for (std::size_t i = 0; i < w.letters.size(); ++i) {
          if (!std::holds_alternative<CactusLetter>(w.letters[i])) continue;
          int d = nesting_depth(w.letters[i]);
          if (d > best_depth) {
            best_depth = d;
            target = static_cast<int>(i);
          }
        }
      }
      if (target < 0 || static_cast<std::size_t>(target) >= w.letters.size() ||
          !std::holds_alternative<CactusLetter>(w.letters[static_cast<std::size_t>(target)]))
        throw MalformedLetterError("no cactus letter to unfold");
      ExtWord x{{w.letters.begin(), w.letters.begin() + target}};
      ExtWord y{{w.letters.begin() + target + 1, w.letters.end()}};
      ExtWord res = engine.unfold(x, std::get<CactusLetter>(w.letters[target]), y,
                                  Weight::parse(margin_str));
      out << serialize_ext_word(a, res) << '\n';
      return 0;
    }
    if (c_flat->parsed()) {
      Wfa a = load_wfa(file);
      CactusEngine engine(a);
      ExtWord w = parse_ext_word(a, slurp(word_file));
      out << serialize_ext_word(a, engine.flatten(w, Weight::parse(margin_str))) << '\n';
      return 0;
    }
    if (c_pot->parsed() || c_chg->parsed()) {
      Wfa a = load_wfa(file);
      CactusEngine engine(a);
      ExtWord w = parse_ext_word(a, slurp(word_file));
      if (c_chg->parsed()) {
        out << charge(engine, w).to_string() << '\n';
        return 0;
      }
      DominancePool pool;
      for (const std::string& arg : pool_cacti) {
        ExtWord extra = parse_ext_word(a, slurp(arg));
        for (const ExtLetter& l : extra.letters) pool.extra.push_back(l);
      }
      out << potential(engine, w, pool).to_string() << '\n';
      return 0;
    }
    if (c_dec->parsed()) {
      Wfa a = load_wfa(file);
      DecideOptions opts;
      opts.state_cap = state_cap;
      opts.parallel = parallel;
      DualVerdict v = decide(a, budget, opts);
      switch (v.kind) {
        case DualVerdict::Kind::Determinizable:
          out << "verdict: determinizable (B=" << v.bound.to_string() << ")\n";
          out << "round: " << v.round << '\n';
          out << "evidence: deterministic automaton with " << v.automaton->num_states()
              << " states\n";
          return 0;
        case DualVerdict::Kind::Nondeterminizable:
          out << "verdict: nondeterminizable\n";
          out << "round: " << v.round << '\n';
          out << "evidence: " << serialize_witness(a, *v.witness) << '\n';
          return 1;
        case DualVerdict::Kind::Unknown:
          out << "verdict: unknown\n";
          out << "round: " << v.round << '\n';
          out << "evidence: budget exhausted\n";
          return 3;
      }
      return 3;
    }
    if (c_nfa->parsed()) {
      ParsedAutomaton p = load_automaton_file(file);
      if (!std::holds_alternative<Nfa>(p)) throw ValidationError("from-nfa expects an NFA");
      write_output(serialize_wfa(nfa_to_wfa_reduction(std::get<Nfa>(p))), output_path, out);
      return 0;
    }
    if (c_strip->parsed()) {
      ParsedAutomaton p = load_automaton_file(file);
      if (!std::holds_alternative<WfaIF>(p))
        throw ValidationError("strip-if expects an automaton with init/fin lines");
      write_output(serialize_wfa(strip_initial_final(std::get<WfaIF>(p))), output_path, out);
      return 0;
    }
  } catch (const StateBudgetExceededError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace minplus
