#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "minplus/augmented.hpp"
#include "minplus/extword.hpp"
#include "minplus/wfa_io.hpp"
#include "oracles.hpp"

using namespace minplus;
using namespace minplus::testing;

namespace {

/// Direct enumeration of the augmented automaton's runs over a base-letter
/// word, independent of the shift machinery.
void enum_aug_rec(const AugWfa& hat, const Run& base, std::size_t pos, AugState at, AugRun& cur,
                  std::vector<AugRun>& out) {
  if (pos == base.size()) {
    out.push_back(cur);
    return;
  }
  for (auto& [to, w] : hat.successors(at, base[pos])) {
    cur.push_back({at, base[pos], w, to});
    enum_aug_rec(hat, base, pos + 1, to, cur, out);
    cur.pop_back();
  }
}

std::vector<AugRun> enumerate_aug_runs(const AugWfa& hat, const Run& base) {
  std::vector<AugRun> out;
  AugRun cur;
  enum_aug_rec(hat, base, 0, hat.initial_state(), cur, out);
  return out;
}

std::vector<Weight> prefix_weights_a(const Run& r) {
  std::vector<Weight> out{Weight(0)};
  for (const Transition& t : r) out.push_back(out.back() + t.wt);
  return out;
}

std::vector<Weight> prefix_weights_aug(const AugRun& r) {
  std::vector<Weight> out{Weight(0)};
  for (const AugTransition& t : r) out.push_back(out.back() + t.wt);
  return out;
}

}  // namespace

TEST_CASE("initial state and ambient size") {
  Wfa a = load_fixture("fig1.wfa");
  AugWfa hat = build_augmented(a);
  AugState s0 = hat.initial_state();
  CHECK(s0.inner == a.initial());
  CHECK(s0.base == a.initial());
  CHECK(s0.reach == (std::uint64_t{1} << a.initial()));
  // sum over nonempty subsets T of |T|^2 for three states
  CHECK(hat.ambient_size() == BigInt(3 * 1 + 3 * 4 + 1 * 9));

  Wfa one;
  one.add_state("q");
  one.add_letter("x");
  one.set_initial(0);
  CHECK(AugWfa(one).ambient_size() == BigInt(1));
}

TEST_CASE("letter application on the counting fixture") {
  Wfa a = load_fixture("fig1.wfa");
  AugWfa hat = build_augmented(a);
  StateId s = *a.find_state("s"), qa = *a.find_state("qa"), qb = *a.find_state("qb");
  LetterId la = *a.find_letter("a");
  Transition letter{s, la, Weight(1), qa};  // the baseline moves s -> qa at cost 1

  auto succ = hat.successors(hat.initial_state(), letter);
  REQUIRE(succ.size() == 2);
  std::uint64_t t_mask = (std::uint64_t{1} << qa) | (std::uint64_t{1} << qb);
  for (auto& [state, w] : succ) {
    CHECK(state.base == qa);
    CHECK(state.reach == t_mask);
    if (state.inner == qa) CHECK(w == Weight(0));
    if (state.inner == qb) CHECK(w == Weight(-1));
  }

  // a letter whose source is not the baseline is unreadable
  Transition wrong{qa, la, Weight(1), qa};
  CHECK(hat.successors(hat.initial_state(), wrong).empty());
}

TEST_CASE("baseline-to-baseline transitions have weight zero") {
  std::mt19937 rng(73);
  for (int rep = 0; rep < 30; ++rep) {
    Wfa a = random_wfa(rng, {.states = 3, .letters = 2});
    AugWfa hat = build_augmented(a);
    for (const Word& w : all_words(2, 4)) {
      for (const Run& base : enumerate_runs(a, a.initial(), w)) {
        for (const AugRun& run : enumerate_aug_runs(hat, base)) {
          bool baseline = true;
          for (const AugTransition& t : run)
            baseline &= t.from.inner == t.from.base && t.to.inner == t.to.base;
          if (baseline) {
            for (const AugTransition& t : run) CHECK(t.wt == Weight(0));
          }
        }
      }
    }
  }
}

TEST_CASE("blocks evolve deterministically") {
  std::mt19937 rng(79);
  for (int rep = 0; rep < 20; ++rep) {
    Wfa a = random_wfa(rng, {.states = 3, .letters = 2});
    AugWfa hat = build_augmented(a);
    for (const Word& w : all_words(2, 4)) {
      for (const Run& base : enumerate_runs(a, a.initial(), w)) {
        auto runs = enumerate_aug_runs(hat, base);
        for (const AugRun& run : runs) {
          if (run.empty()) continue;
          for (const AugRun& other : runs) {
            if (other.empty()) continue;
            CHECK(run.back().to.base == other.back().to.base);
            CHECK(run.back().to.reach == other.back().to.reach);
          }
          break;
        }
      }
    }
  }
}

TEST_CASE("materialization stays within budget and is breadth-first") {
  Wfa a = load_fixture("fig1.wfa");
  AugWfa hat = build_augmented(a);
  auto m = hat.materialize(1000);
  CHECK(m.states.front() == hat.initial_state());
  CHECK(m.states.size() >= 3);
  for (const AugTransition& t : m.transitions) {
    CHECK(std::find(m.states.begin(), m.states.end(), t.from) != m.states.end());
    CHECK(std::find(m.states.begin(), m.states.end(), t.to) != m.states.end());
  }
  CHECK_THROWS_AS(hat.materialize(2), StateBudgetExceededError);
}

TEST_CASE("run shifts are inverse bijections preserving prefix gaps") {
  std::mt19937 rng(83);
  for (int rep = 0; rep < 25; ++rep) {
    Wfa a = random_wfa(rng, {.states = 3, .letters = 2});
    AugWfa hat = build_augmented(a);
    for (const Word& w : all_words(2, 4)) {
      auto runs = enumerate_runs(a, a.initial(), w);
      if (runs.empty()) continue;
      // pick a couple of baselines deterministically
      for (std::size_t bi : {std::size_t{0}, runs.size() / 2}) {
        const Run& base = runs[bi];
        // lifting the baseline itself gives the weight-0 baseline run
        AugRun lifted_base = shift_run_to_aug(a, base, base);
        for (const AugTransition& t : lifted_base) CHECK(t.wt == Weight(0));

        std::vector<AugRun> direct = enumerate_aug_runs(hat, base);
        CHECK(direct.size() == runs.size());

        for (const Run& rho : runs) {
          AugRun lifted = shift_run_to_aug(a, rho, base);
          for (std::size_t i = 0; i < rho.size(); ++i)
            CHECK(lifted[i].wt == rho[i].wt - base[i].wt);
          Run back = shift_run_from_aug(a, lifted);
          CHECK(back == rho);
        }
        // and the reverse round trip over directly enumerated runs
        for (const AugRun& hat_run : direct) {
          Run shifted = shift_run_from_aug(a, hat_run);
          AugRun again = shift_run_to_aug(a, shifted, base);
          CHECK(prefix_weights_aug(again) == prefix_weights_aug(hat_run));
        }

        // prefix differences agree between any two runs and their shifts
        for (std::size_t i = 0; i < runs.size(); ++i) {
          auto pa = prefix_weights_a(runs[i]);
          auto ph = prefix_weights_aug(shift_run_to_aug(a, runs[i], base));
          // difference to the baseline is constant: hat = a - base prefix
          auto pb = prefix_weights_a(base);
          for (std::size_t k = 0; k < pa.size(); ++k) CHECK(ph[k] == pa[k] - pb[k]);
        }
      }
    }
  }
}

TEST_CASE("gap witnesses transfer between the automaton and its augmented view") {
  // A gap witness of the source lifts along a minimal baseline to a gap
  // witness of the augmented construction with the same gap, and back.
  Wfa a = load_fixture("fig1.wfa");
  Word x = word_from_string(a, "aaa");
  Word y = word_from_string(a, "bbbb");
  StateId q = *a.find_state("qa");
  Weight bound(2);

  // source-side clauses
  Configuration cx = next_conf(a, initial_configuration(a), x);
  REQUIRE(cx[q] - cx.min_weight() > bound);

  // choose the minimal run on x as the lifted word
  Run base;
  StateId at = a.initial();
  for (LetterId sigma : x) {  // the qb track is the minimal one
    StateId to = *a.find_state("qb");
    base.push_back({at, sigma, a.weight(at, sigma, to), to});
    at = to;
  }
  REQUIRE(run_weight(base) == cx.min_weight());
  for (LetterId sigma : y) {
    base.push_back({at, sigma, a.weight(at, sigma, at), at});
  }

  // evaluate the augmented automaton over the lifted word: track per-inner
  // values by folding successors
  AugWfa hat = build_augmented(a);
  auto fold = [&](std::size_t upto) {
    std::map<std::tuple<StateId, StateId, std::uint64_t>, Weight> conf;
    conf[{hat.initial_state().inner, hat.initial_state().base, hat.initial_state().reach}] =
        Weight(0);
    for (std::size_t i = 0; i < upto; ++i) {
      std::map<std::tuple<StateId, StateId, std::uint64_t>, Weight> next;
      for (auto& [key, val] : conf) {
        AugState s{std::get<0>(key), std::get<1>(key), std::get<2>(key)};
        for (auto& [t, w] : hat.successors(s, base[i])) {
          auto k = std::make_tuple(t.inner, t.base, t.reach);
          auto it = next.find(k);
          Weight cand = val + w;
          if (it == next.end() || cand < it->second) next[k] = cand;
        }
      }
      conf = std::move(next);
    }
    return conf;
  };
  auto mid = fold(x.size());
  Weight lifted_to_q = Weight::infinity(), lifted_min = Weight::infinity();
  for (auto& [key, val] : mid) {
    lifted_min = min(lifted_min, val);
    if (std::get<0>(key) == q) lifted_to_q = min(lifted_to_q, val);
  }
  // the gap transfers exactly
  CHECK(lifted_to_q - lifted_min == cx[q] - cx.min_weight());
  // and the minimal continuation routes through the lifted state on both sides
  auto full = fold(x.size() + y.size());
  Weight lifted_total = Weight::infinity();
  for (auto& [key, val] : full) lifted_total = min(lifted_total, val);
  Configuration via(a.num_states());
  via[q] = cx[q];
  Weight via_total = next_conf(a, via, y).min_weight();
  Weight src_total = next_conf(a, cx, y).min_weight();
  CHECK(src_total == via_total);
  CHECK(lifted_total == src_total - run_weight(base));
}

TEST_CASE("ghost closure saturates a block") {
  Wfa a = load_fixture("fig1.wfa");
  StateId s = *a.find_state("s"), qa = *a.find_state("qa"), qb = *a.find_state("qb");
  std::uint64_t t_mask = (std::uint64_t{1} << qa) | (std::uint64_t{1} << qb) |
                         (std::uint64_t{1} << s);
  std::vector<AugState> part{{qa, qb, t_mask}};
  auto closed = ghost_closure(part);
  REQUIRE(closed.size() == 3);
  for (const AugState& st : closed) {
    CHECK(st.base == qb);
    CHECK(st.reach == t_mask);
  }
  // already saturated set maps to itself
  CHECK(ghost_closure(closed) == closed);
  // mixed blocks are rejected
  std::vector<AugState> mixed{{qa, qb, t_mask}, {qa, qa, t_mask}};
  CHECK_THROWS_AS(ghost_closure(mixed), MixedBlocksError);
}

TEST_CASE("jump matrices") {
  Wfa a = load_fixture("fig1.wfa");
  StateId qa = *a.find_state("qa"), qb = *a.find_state("qb");
  Block block{qa, (std::uint64_t{1} << qa) | (std::uint64_t{1} << qb)};

  MinPlusMatrix same = jump_matrix(a, block, qa);
  CHECK(same.at(qa, qa) == Weight(0));
  CHECK(same.at(qb, qb) == Weight(0));
  CHECK(same.at(qa, qb).is_infinite());

  MinPlusMatrix to_qb = jump_matrix(a, block, qb);
  MinPlusMatrix back = jump_matrix(a, Block{qb, block.reach}, qa);
  CHECK(minplus_mul(to_qb, back) == same);

  // states outside the block have all-infinity rows
  CHECK(to_qb.at(*a.find_state("s"), *a.find_state("s")).is_infinite());

  CHECK_THROWS_AS(jump_matrix(a, Block{qa, std::uint64_t{1} << qa}, qb),
                  TargetNotInReachError);
}

namespace {

ExtRun as_ext_run(const AugRun& run) {
  ExtRun out;
  for (const AugTransition& t : run) out.push_back({t.from, t.letter, t.wt, t.to});
  return out;
}

}  // namespace

TEST_CASE("baseline shift turns the run into a seamless zero baseline") {
  Wfa a = load_fixture("fig1.wfa");
  for (const Word& w : all_words(2, 5)) {
    auto runs = enumerate_runs(a, a.initial(), w);
    if (runs.empty()) continue;
    const Run& base = runs.front();
    ExtWord word;
    for (const Transition& t : base) word.letters.push_back(t);
    ExtRun orig_base = as_ext_run(shift_run_to_aug(a, base, base));

    // shifting on the word's own baseline run leaves the word unchanged
    CHECK(structural_key(baseline_shift(a, word, orig_base).word) == structural_key(word));

    for (const Run& rho : runs) {
      ExtRun ext = as_ext_run(shift_run_to_aug(a, rho, base));
      std::vector<Weight> rho_prefix{Weight(0)};
      for (const ExtRunStep& st : ext) rho_prefix.push_back(rho_prefix.back() + st.wt);

      BaselineShift shift = baseline_shift(a, word, ext);
      // the chosen run becomes the all-zero baseline
      for (const ExtRunStep& st : shift.shifted_base) {
        CHECK(st.wt == Weight(0));
        CHECK(st.from.inner == st.from.base);
        CHECK(st.to.inner == st.to.base);
      }
      // every run shifts down by exactly the chosen run's prefix weights,
      // so prefix gaps between any two runs are preserved
      for (const Run& mu : runs) {
        ExtRun ext_mu = as_ext_run(shift_run_to_aug(a, mu, base));
        ExtRun shifted_mu = baseline_shift_run(a, ext_mu, ext);
        Weight acc1(0), acc2(0);
        for (std::size_t i = 0; i < ext_mu.size(); ++i) {
          acc1 += ext_mu[i].wt;
          acc2 += shifted_mu[i].wt;
          CHECK(acc1 - acc2 == rho_prefix[i + 1]);
        }
      }
      // shifting back on the image of the original baseline restores the word
      ExtRun base_image = baseline_shift_run(a, orig_base, ext);
      BaselineShift back = baseline_shift(a, shift.word, base_image);
      CHECK(structural_key(back.word) == structural_key(word));
    }
  }
}
