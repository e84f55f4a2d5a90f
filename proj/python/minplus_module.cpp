#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "minplus/analysis.hpp"
#include "minplus/cactus.hpp"
#include "minplus/wfa_io.hpp"

namespace py = pybind11;
using namespace minplus;

namespace {

std::string weight_str(const Weight& w) { return w.to_string(); }

Wfa wfa_from_text(const std::string& text) {
  auto parsed = parse_wfa(text);
  if (std::holds_alternative<WfaIF>(parsed))
    throw std::invalid_argument("automaton carries initial/final weights; use strip_if");
  return std::get<Wfa>(std::move(parsed));
}

}  // namespace

PYBIND11_MODULE(minplus_py, m) {
  m.doc() = "min-plus weighted automata: evaluation, determinization and witness checking";

  py::class_<Wfa>(m, "Wfa")
      .def_static("from_text", &wfa_from_text, py::arg("text"))
      .def_property_readonly("num_states", &Wfa::num_states)
      .def_property_readonly("num_letters", &Wfa::num_letters)
      .def("is_deterministic", &Wfa::is_deterministic)
      .def("to_text", [](const Wfa& a) { return serialize_wfa(a); })
      .def("eval",
           [](const Wfa& a, const std::string& word) {
             return weight_str(eval(a, word_from_string(a, word)));
           })
      .def("next_conf",
           [](const Wfa& a, const std::string& word) {
             Configuration c = next_conf(a, initial_configuration(a), word_from_string(a, word));
             py::dict out;
             for (StateId q = 0; q < a.num_states(); ++q)
               out[py::str(a.state_name(q))] = weight_str(c[q]);
             return out;
           })
      .def("determinize",
           [](const Wfa& a, long long bound, std::size_t cap) {
             return determinize_with_bound(a, Weight(bound), cap);
           },
           py::arg("bound"), py::arg("state_cap") = 200000)
      .def("gap_search",
           [](const Wfa& a, long long bound, std::size_t max_x,
              std::size_t max_y) -> py::object {
             auto w = gap_witness_search(a, Weight(bound), max_x, max_y);
             if (!w) return py::none();
             py::dict out;
             out["x"] = word_to_string(a, w->x);
             out["y"] = word_to_string(a, w->y);
             out["q"] = a.state_name(w->q);
             out["gap"] = weight_str(w->mwt_x_to_q - w->mwt_x_min);
             return out;
           },
           py::arg("bound"), py::arg("max_x") = 6, py::arg("max_y") = 6)
      .def("check_witness",
           [](const Wfa& a, const std::string& witness_sexpr) {
             CactusEngine engine(a);
             WitnessCheck res = check_witness(engine, parse_witness(a, witness_sexpr));
             py::dict out;
             out["accepted"] = res.accepted;
             if (!res.accepted) {
               out["failing_requirement"] = res.failing_requirement;
               out["detail"] = res.detail;
             }
             return out;
           })
      .def("decide", [](const Wfa& a, int budget) {
        DualVerdict v = decide(a, budget);
        py::dict out;
        switch (v.kind) {
          case DualVerdict::Kind::Determinizable:
            out["verdict"] = "determinizable";
            out["bound"] = weight_str(v.bound);
            break;
          case DualVerdict::Kind::Nondeterminizable:
            out["verdict"] = "nondeterminizable";
            out["witness"] = serialize_witness(a, *v.witness);
            break;
          case DualVerdict::Kind::Unknown:
            out["verdict"] = "unknown";
            break;
        }
        out["round"] = v.round;
        return out;
      });

  m.def("equivalent_to_determinization",
        [](const Wfa& a, const Wfa& d) {
          EquivalenceResult r = equivalence_of_determinizer_output(a, d);
          py::dict out;
          out["equivalent"] = r.equivalent;
          if (!r.equivalent) out["counterexample"] = word_to_string(a, r.counterexample);
          return out;
        });
  m.def("from_nfa", [](const std::string& text) { return nfa_to_wfa_reduction(parse_nfa(text)); });
  m.def("strip_if", [](const std::string& text) {
    auto parsed = parse_wfa(text);
    if (!std::holds_alternative<WfaIF>(parsed))
      throw std::invalid_argument("automaton has no initial/final weights");
    return strip_initial_final(std::get<WfaIF>(parsed));
  });
  m.def("stabilization_constants", [](std::uint64_t size_s) {
    StabilizationConstants c = stabilization_constants(size_s);
    return py::make_tuple(c.n_frak.to_decimal(), c.m_frak.to_decimal());
  });
}
