#include "minplus/cactus.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace minplus {

StabilizationConstants stabilization_constants(std::uint64_t size_s) {
  if (size_s == 0) throw std::invalid_argument("stabilization constants need |S| >= 1");
  BigInt n = BigInt::factorial(size_s);
  return {n, BigInt(static_cast<long long>(size_s)) * n};
}

std::string to_string(CycleRejection r) {
  switch (r) {
    case CycleRejection::NotReflexive:
      return "NotReflexive";
    case CycleRejection::NegativeCycle:
      return "NegativeCycle";
    case CycleRejection::BaselineNotZero:
      return "BaselineNotZero";
  }
  return "?";
}

// --- CostValue ---------------------------------------------------------------

CostValue CostValue::from_plain(BigInt v) {
  if (v.is_negative()) throw std::invalid_argument("cost values are nonnegative");
  CostValue c;
  c.plain_ = std::move(v);
  return c;
}

CostValue CostValue::exp2(CostValue exponent) {
  CostValue c;
  c.terms_.push_back({std::make_shared<const CostValue>(std::move(exponent)), BigInt(1)});
  return c;
}

void CostValue::normalize() {
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
    return a.exponent->compare(*b.exponent) == std::strong_ordering::greater;
  });
  std::vector<Term> merged;
  for (Term& t : terms_) {
    if (t.coeff.is_zero()) continue;
    if (!merged.empty() &&
        merged.back().exponent->compare(*t.exponent) == std::strong_ordering::equal) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  terms_ = std::move(merged);
}

CostValue CostValue::operator+(const CostValue& o) const {
  CostValue r;
  r.plain_ = plain_ + o.plain_;
  r.terms_ = terms_;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  r.normalize();
  return r;
}

CostValue CostValue::scale(const BigInt& k) const {
  if (k.is_negative()) throw std::invalid_argument("cost scale factor must be nonnegative");
  CostValue r;
  if (k.is_zero()) return r;
  r.plain_ = plain_ * k;
  r.terms_ = terms_;
  for (Term& t : r.terms_) t.coeff = t.coeff * k;
  return r;
}

CostValue CostValue::operator*(const CostValue& o) const {
  CostValue r;
  r.plain_ = plain_ * o.plain_;
  for (const Term& t : terms_) r.terms_.push_back({t.exponent, t.coeff * o.plain_});
  for (const Term& t : o.terms_) r.terms_.push_back({t.exponent, t.coeff * plain_});
  for (const Term& s : terms_) {
    for (const Term& t : o.terms_) {
      auto exp_sum = std::make_shared<const CostValue>(*s.exponent + *t.exponent);
      r.terms_.push_back({std::move(exp_sum), s.coeff * t.coeff});
    }
  }
  r.normalize();
  return r;
}

bool CostValue::exponent_clears(const CostValue& e, std::size_t bits) {
  return e.compare(from_plain(BigInt(static_cast<long long>(bits + 8)))) !=
         std::strong_ordering::less;
}

std::strong_ordering CostValue::compare(const CostValue& o) const {
  std::size_t i = 0, j = 0;
  auto require = [](bool ok) {
    if (!ok) throw std::logic_error("cost comparison outside the calibrated dominance range");
  };
  // Dominance of 2^E over a whole sum: E must clear every term and the plain
  // part by a generous bit margin.
  auto dominates = [&](const CostValue& e, const CostValue& v, std::size_t from) {
    for (std::size_t k = from; k < v.terms_.size(); ++k) {
      CostValue bumped =
          *v.terms_[k].exponent +
          from_plain(BigInt(static_cast<long long>(v.terms_[k].coeff.bit_length() + 8)));
      if (e.compare(bumped) == std::strong_ordering::less) return false;
    }
    return exponent_clears(e, v.plain_.bit_length());
  };
  while (true) {
    bool a_has = i < terms_.size(), b_has = j < o.terms_.size();
    if (a_has && b_has) {
      auto c = terms_[i].exponent->compare(*o.terms_[j].exponent);
      if (c == std::strong_ordering::equal) {
        auto cc = terms_[i].coeff <=> o.terms_[j].coeff;
        if (cc == std::strong_ordering::equal) {
          ++i;
          ++j;
          continue;
        }
        // Coefficients differ at the shared top exponent: the tails must not
        // be able to bridge one unit of 2^E.
        require(dominates(*terms_[i].exponent, *this, i + 1) &&
                dominates(*terms_[i].exponent, o, j + 1));
        return cc;
      }
      const CostValue& hi = c == std::strong_ordering::greater ? *terms_[i].exponent
                                                               : *o.terms_[j].exponent;
      require(dominates(hi, *this, c == std::strong_ordering::greater ? i + 1 : i) &&
              dominates(hi, o, c == std::strong_ordering::greater ? j : j + 1));
      return c;
    }
    if (a_has) {
      require(dominates(*terms_[i].exponent, o, j));
      return std::strong_ordering::greater;
    }
    if (b_has) {
      require(dominates(*o.terms_[j].exponent, *this, i));
      return std::strong_ordering::less;
    }
    return plain_ <=> o.plain_;
  }
}

std::string CostValue::to_string() const {
  if (is_plain()) return plain_.to_display(64);
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0) out += " + ";
    if (!(terms_[i].coeff == BigInt(1))) out += terms_[i].coeff.to_display(64) + "*";
    out += "2^(" + terms_[i].exponent->to_string() + ")";
  }
  if (!plain_.is_zero()) out += " + " + plain_.to_display(64);
  return out;
}

// --- engine ------------------------------------------------------------------

CactusEngine::CactusEngine(const Wfa& a, CactusOptions options)
    : a_(&a), aug_(a), options_(options), ambient_(aug_.ambient_size()) {}

StabilizationConstants CactusEngine::constants_for(const Block& b,
                                                   const BoolMatrix& step_bool) const {
  std::uint64_t size = 0;
  if (options_.size_mode == SizeMode::Ambient) {
    if (!ambient_.fits_ll())
      throw std::length_error("ambient state space too large for exact constants");
    size = static_cast<std::uint64_t>(ambient_.value_ll());
  } else {
    size = static_cast<std::uint64_t>(__builtin_popcountll(b.reach));
  }
  if (options_.exponent_mode == ExponentMode::Exact) return stabilization_constants(size);

  // Effective mode: the smallest exponents with the same boolean idempotent,
  // mirroring n = |S|! (a multiple of every short cycle length, at least the
  // index) and m = |S| * n.
  IdempotentProfile prof = idempotent_profile(step_bool);
  std::uint64_t block_size = __builtin_popcountll(b.reach);
  std::uint64_t l = 1;
  for (std::uint64_t k = 2; k <= block_size; ++k) l = std::lcm(l, k);
  l = std::lcm(l, prof.period);
  std::uint64_t reps = (std::max<std::uint64_t>(prof.index, 1) + l - 1) / l;
  BigInt n_eff = BigInt(static_cast<long long>(l)) * BigInt(static_cast<long long>(reps));
  return {n_eff, BigInt(static_cast<long long>(std::max<std::uint64_t>(block_size, 1))) * n_eff};
}

std::optional<CactusEngine::LetterStep> CactusEngine::ext_matrix(const ExtLetter& letter,
                                                                 const Block& from) {
  const std::size_t n = a_->num_states();
  if (const auto* t = std::get_if<Transition>(&letter)) {
    if (t->wt.is_infinite() || a_->weight(t->from, t->letter, t->to) != t->wt)
      throw MalformedLetterError("base letter is not a finite transition of the automaton");
    if (from.base != t->from) return std::nullopt;
    Block to = aug_.step_block(from, *t);
    MinPlusMatrix m(n);
    for (StateId x = 0; x < n; ++x) {
      if (!from.contains(x)) continue;
      for (StateId y = 0; y < n; ++y) {
        const Weight& w = a_->weight(x, t->letter, y);
        if (w.is_finite()) m.at(x, y) = w - t->wt;
      }
    }
    return LetterStep{std::move(m), to};
  }
  if (const auto* c = std::get_if<CactusLetter>(&letter)) {
    if (!(from == c->cycle)) return std::nullopt;
    return LetterStep{cactus_matrix(*c), c->cycle};
  }
  if (const auto* r = std::get_if<RebaseLetter>(&letter)) {
    if (from.base != r->from_inner || from.reach != r->cycle.reach) return std::nullopt;
    const MinPlusMatrix& alpha = cactus_matrix(CactusLetter{r->cycle, r->body});
    const Weight& c = alpha.at(r->from_inner, r->to_inner);
    if (c.is_infinite())
      throw RebasePairNotGroundedError("rebase endpoints are not a grounded pair");
    MinPlusMatrix m(n);
    for (StateId x = 0; x < n; ++x)
      for (StateId y = 0; y < n; ++y) {
        if (alpha.at(x, y).is_finite()) m.at(x, y) = alpha.at(x, y) - c;
      }
    return LetterStep{std::move(m), Block{r->to_inner, r->cycle.reach}};
  }
  if (const auto* j = std::get_if<JumpLetter>(&letter)) {
    if (from.base != j->from_base || from.reach != j->reach) return std::nullopt;
    return LetterStep{jump_matrix(*a_, from, j->to_base), Block{j->to_base, j->reach}};
  }
  const auto& p = std::get<PowerNode>(letter);
  if (p.exponent.is_zero()) return LetterStep{MinPlusMatrix::identity(n), from};
  auto body = word_matrix(*p.body, from);
  if (!body) return std::nullopt;
  if (body->to == from) return LetterStep{minplus_pow(body->matrix, p.exponent), from};
  if (p.exponent.fits_ll() && p.exponent.value_ll() <= 64) {
    MinPlusMatrix acc = body->matrix;
    Block cur = body->to;
    for (long long k = 1; k < p.exponent.value_ll(); ++k) {
      auto step = word_matrix(*p.body, cur);
      if (!step) return std::nullopt;
      acc = minplus_mul(acc, step->matrix);
      cur = step->to;
    }
    return LetterStep{std::move(acc), cur};
  }
  throw MalformedLetterError("large power of a word that does not preserve its block");
}

std::optional<CactusEngine::LetterStep> CactusEngine::word_matrix(const ExtWord& w,
                                                                  const Block& from) {
  LetterStep acc{MinPlusMatrix::identity(a_->num_states()), from};
  for (const ExtLetter& l : w.letters) {
    auto step = ext_matrix(l, acc.to);
    if (!step) return std::nullopt;
    acc.matrix = minplus_mul(acc.matrix, step->matrix);
    acc.to = step->to;
  }
  return acc;
}

ExtConfiguration CactusEngine::initial_ext_configuration() const {
  AugState s0 = aug_.initial_state();
  ExtConfiguration c;
  c.block = s0.block();
  c.values = Configuration::unit(a_->num_states(), s0.inner);
  return c;
}

ExtConfiguration CactusEngine::ext_eval(const ExtWord& w, const ExtConfiguration& from) {
  ExtConfiguration cur = from;
  const std::size_t n = a_->num_states();
  for (const ExtLetter& l : w.letters) {
    if (cur.dead()) break;
    auto step = ext_matrix(l, *cur.block);
    if (!step) {
      cur.block.reset();
      cur.values = Configuration(n);
      break;
    }
    Configuration nxt(n);
    for (StateId x = 0; x < n; ++x) {
      if (cur.values[x].is_infinite()) continue;
      for (StateId y = 0; y < n; ++y) {
        if (step->matrix.at(x, y).is_infinite()) continue;
        nxt[y] = min(nxt[y], cur.values[x] + step->matrix.at(x, y));
      }
    }
    cur.values = std::move(nxt);
    cur.block = step->to;
    if (cur.values.support_empty()) {
      cur.block.reset();
      break;
    }
  }
  return cur;
}

Weight CactusEngine::ext_mwt(const ExtWord& w) {
  return ext_eval(w, initial_ext_configuration()).min_weight();
}

Weight CactusEngine::letter_wmax(const ExtLetter& letter) {
  const std::size_t n = a_->num_states();
  if (const auto* t = std::get_if<Transition>(&letter)) {
    Weight best(0);
    for (StateId x = 0; x < n; ++x)
      for (StateId y = 0; y < n; ++y) {
        const Weight& w = a_->weight(x, t->letter, y);
        if (w.is_finite()) best = std::max(best, (w - t->wt).abs());
      }
    return best;
  }
  if (const auto* c = std::get_if<CactusLetter>(&letter)) {
    const MinPlusMatrix& m = cactus_matrix(*c);
    Weight best(0);
    for (StateId x = 0; x < n; ++x)
      for (StateId y = 0; y < n; ++y) {
        if (m.at(x, y).is_finite()) best = std::max(best, m.at(x, y).abs());
      }
    return best;
  }
  if (const auto* r = std::get_if<RebaseLetter>(&letter)) {
    const MinPlusMatrix& alpha = cactus_matrix(CactusLetter{r->cycle, r->body});
    const Weight& c = alpha.at(r->from_inner, r->to_inner);
    if (c.is_infinite())
      throw RebasePairNotGroundedError("rebase endpoints are not a grounded pair");
    Weight best(0);
    for (StateId x = 0; x < n; ++x)
      for (StateId y = 0; y < n; ++y) {
        if (alpha.at(x, y).is_finite()) best = std::max(best, (alpha.at(x, y) - c).abs());
      }
    return best;
  }
  if (std::holds_alternative<JumpLetter>(letter)) return Weight(0);
  const auto& p = std::get<PowerNode>(letter);
  return word_maxeff(*p.body) * p.exponent;
}

Weight CactusEngine::word_maxeff(const ExtWord& w) {
  Weight total(0);
  for (const ExtLetter& l : w.letters) total += letter_wmax(l);
  return total;
}

// --- stable cycles -------------------------------------------------------------

namespace {

BoolMatrix bool_of(const MinPlusMatrix& m) {
  BoolMatrix b(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) b.set(i, j, m.at(i, j).is_finite());
  return b;
}

std::string block_key(const Block& b) {
  return std::to_string(b.base) + "/" + std::to_string(b.reach) + ":";
}

}  // namespace

CycleCheckResult CactusEngine::check_stable_cycle(const std::vector<AugState>& s_prime,
                                                  const ExtWord& w) {
  if (s_prime.empty()) throw NotSaturatedError("empty state set");
  Block b = s_prime.front().block();
  std::uint64_t inners = 0;
  for (const AugState& s : s_prime) {
    if (!(s.block() == b)) throw MixedBlocksError("set spans more than one (base, reach) block");
    inners |= std::uint64_t{1} << s.inner;
  }
  if (inners != b.reach)
    throw NotSaturatedError("set must contain every inner state of the reachable set");
  return check_stable_cycle(b, w);
}

CycleCheckResult CactusEngine::check_stable_cycle(const Block& block, const ExtWord& w) {
  auto ws = word_matrix(w, block);
  CycleCheckResult out;
  if (!ws || !(ws->to == block)) {
    out.rejection = CycleRejection::NotReflexive;
    out.detail = ws ? "word moves the block to a different (base, reach) pair"
                    : "word is not readable from the block";
    return out;
  }
  return build_certificate(block, w, ws->matrix);
}

CycleCheckResult CactusEngine::build_certificate(const Block& block, const ExtWord& w,
                                                 const MinPlusMatrix& step) {
  CycleCheckResult out;
  std::vector<std::size_t> support;
  for (StateId q = 0; q < a_->num_states(); ++q) {
    if (block.contains(q)) support.push_back(q);
  }
  if (auto cyc = detect_negative_cycle(step, support)) {
    out.rejection = CycleRejection::NegativeCycle;
    std::ostringstream os;
    os << "negative cycle of weight " << cyc->weight << " through";
    for (std::size_t v : cyc->states) os << ' ' << a_->state_name(static_cast<StateId>(v));
    out.detail = os.str();
    return out;
  }
  if (!(step.at(block.base, block.base) == Weight(0))) {
    out.rejection = CycleRejection::BaselineNotZero;
    out.detail = "baseline self weight is " + step.at(block.base, block.base).to_string();
    return out;
  }
  StableCycleCertificate cert;
  cert.block = block;
  cert.word = w;
  cert.step = step;
  BoolMatrix step_bool = bool_of(step);
  StabilizationConstants consts = constants_for(block, step_bool);
  cert.n_frak = consts.n_frak;
  cert.m_frak = consts.m_frak;
  cert.bool_idem = bool_pow(step_bool, cert.m_frak);
  cert.pow_m = minplus_pow(step, cert.m_frak);
  cert.tables = tables_at(step, block, cert.m_frak, &cert.pow_m);
  out.certificate = std::move(cert);
  return out;
}

const StableCycleCertificate& CactusEngine::certify(const Block& block, const ExtWord& w) {
  std::string key = block_key(block) + structural_key(w);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = cert_memo_.find(key);
    if (it != cert_memo_.end()) return *it->second;
  }
  CycleCheckResult res = check_stable_cycle(block, w);
  if (!res.accepted())
    throw NotStableCycleError("not a stable cycle (" + to_string(*res.rejection) +
                              (res.detail.empty() ? "" : ": " + res.detail) + ")");
  auto cert = std::make_shared<const StableCycleCertificate>(std::move(*res.certificate));
  std::lock_guard<std::mutex> lock(memo_mutex_);
  auto [it, inserted] = cert_memo_.emplace(std::move(key), std::move(cert));
  return *it->second;
}

const PairTables& CactusEngine::classify_pairs(const StableCycleCertificate& cert) const {
  return cert.tables;
}

PairTables CactusEngine::tables_at(const MinPlusMatrix& step, const Block& block,
                                   const BigInt& exponent, const MinPlusMatrix* pow_hint) const {
  MinPlusMatrix powe = pow_hint ? *pow_hint : minplus_pow(step, exponent);
  BoolMatrix boole = bool_pow(bool_of(step), exponent);
  PairTables t;
  Weight min_diag = Weight::infinity();
  for (StateId s = 0; s < a_->num_states(); ++s) {
    if (!block.contains(s)) continue;
    if (powe.at(s, s).is_finite()) {
      t.ref_states.push_back(s);
      min_diag = min(min_diag, powe.at(s, s));
    }
  }
  for (StateId s : t.ref_states) {
    if (powe.at(s, s) == min_diag) t.min_states.push_back(s);
  }
  for (StateId s : t.min_states) {
    for (StateId r = 0; r < a_->num_states(); ++r) {
      if (block.contains(r) && boole.get(s, r)) t.tth_pairs.push_back({s, r});
    }
  }
  for (StateId r : t.min_states) {
    for (StateId s = 0; s < a_->num_states(); ++s) {
      if (block.contains(s) && boole.get(s, r)) t.plt_pairs.push_back({s, r});
    }
  }
  for (StateId s = 0; s < a_->num_states(); ++s) {
    if (!block.contains(s)) continue;
    for (StateId r = 0; r < a_->num_states(); ++r) {
      if (!block.contains(r)) continue;
      Weight best = Weight::infinity();
      std::optional<StateId> ground;
      for (StateId g : t.min_states) {
        if (!boole.get(s, g) || !boole.get(g, r)) continue;
        Weight via = powe.at(s, g) + powe.at(g, r);
        if (via < best) {
          best = via;
          ground = g;
        }
      }
      if (ground) {
        t.grn_pairs.push_back({s, r});
        t.grounding[{s, r}] = *ground;
      }
    }
  }
  return t;
}

PairTables CactusEngine::classify_at(const StableCycleCertificate& cert,
                                     const BigInt& exponent) const {
  return tables_at(cert.step, cert.block, exponent, nullptr);
}

const MinPlusMatrix& CactusEngine::cactus_matrix(const CactusLetter& alpha) {
  std::string key = block_key(alpha.cycle) + structural_key(*alpha.body);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = cactus_memo_.find(key);
    if (it != cactus_memo_.end()) return *it->second;
  }
  const StableCycleCertificate& cert = certify(alpha.cycle, *alpha.body);
  auto m = std::make_shared<MinPlusMatrix>(a_->num_states());
  for (const auto& [pair, g] : cert.tables.grounding) {
    m->at(pair.first, pair.second) =
        cert.pow_m.at(pair.first, g) + cert.pow_m.at(g, pair.second);
  }
  std::lock_guard<std::mutex> lock(memo_mutex_);
  auto [it, inserted] = cactus_memo_.emplace(std::move(key), std::move(m));
  return *it->second;
}

BigInt CactusEngine::pumping_threshold(const StableCycleCertificate& cert,
                                       const Weight& bound) const {
  if (bound.is_infinite()) throw std::invalid_argument("pumping threshold needs a finite bound");
  std::vector<std::size_t> verts;
  for (StateId q = 0; q < a_->num_states(); ++q) {
    if (cert.block.contains(q)) verts.push_back(q);
  }
  MinPlusMatrix sub(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t j = 0; j < verts.size(); ++j) sub.at(i, j) = cert.pow_m.at(verts[i], verts[j]);
  std::vector<BigInt> pot = johnson_reweight(sub);  // throws on a negative cycle (defensive)
  BigInt vmax(0);
  for (const BigInt& v : pot) vmax = std::max(vmax, v.abs());
  BigInt size_s = options_.size_mode == SizeMode::Ambient
                      ? ambient_
                      : BigInt(static_cast<long long>(__builtin_popcountll(cert.block.reach)));
  BigInt slack = vmax * BigInt(2) + bound.value() + BigInt(2);
  if (slack.is_negative()) slack = BigInt(2);
  return size_s * slack;
}

// --- unfolding / flattening ----------------------------------------------------

ExtWord CactusEngine::unfold(const ExtWord& x, const CactusLetter& alpha, const ExtWord& y,
                             const Weight& f) {
  ExtWord whole = x;
  whole.letters.push_back(alpha);
  whole.letters.insert(whole.letters.end(), y.letters.begin(), y.letters.end());
  Weight margin = word_maxeff(whole) * BigInt(2);
  if (!(f > margin))
    throw FTooSmallError("unfold margin must exceed twice the word's maximal effect");
  const StableCycleCertificate& cert = certify(alpha.cycle, *alpha.body);
  BigInt m0 = pumping_threshold(cert, f);
  BigInt reps = BigInt(2) * cert.m_frak * m0;
  ExtWord out = x;
  out.letters.push_back(PowerNode{alpha.body, std::move(reps)});
  out.letters.insert(out.letters.end(), y.letters.begin(), y.letters.end());
  return out;
}

ExtWord CactusEngine::rebase_remove(const ExtWord& x, const RebaseLetter& beta,
                                    const ExtWord& y) const {
  ExtWord out = x;
  out.letters.push_back(JumpLetter{beta.from_inner, beta.cycle.base, beta.cycle.reach});
  out.letters.push_back(CactusLetter{beta.cycle, beta.body});
  out.letters.push_back(JumpLetter{beta.cycle.base, beta.to_inner, beta.cycle.reach});
  out.letters.insert(out.letters.end(), y.letters.begin(), y.letters.end());
  return out;
}

ExtWord CactusEngine::flatten(const ExtWord& u, const Weight& f) {
  if (!(f > word_maxeff(u) * BigInt(2)))
    throw FTooSmallError("flatten margin must exceed twice the word's maximal effect");
  return flatten_rec(u, f);
}

ExtWord CactusEngine::flatten_rec(ExtWord u, Weight f) {
  while (true) {
    // Deepest cactus/rebase letter, leftmost among ties. Power nodes carry
    // the depth of their body and are flattened in place.
    int best_depth = 0;
    std::size_t best = u.letters.size();
    for (std::size_t i = 0; i < u.letters.size(); ++i) {
      const ExtLetter& l = u.letters[i];
      bool relevant = std::holds_alternative<CactusLetter>(l) ||
                      std::holds_alternative<RebaseLetter>(l) ||
                      (std::holds_alternative<PowerNode>(l) &&
                       contains_cactus_or_rebase(*std::get<PowerNode>(l).body));
      if (!relevant) continue;
      int d = nesting_depth(l);
      if (d > best_depth) {
        best_depth = d;
        best = i;
      }
    }
    if (best == u.letters.size()) return u;

    ExtLetter target = u.letters[best];
    if (const auto* c = std::get_if<CactusLetter>(&target)) {
      ExtWord x{{u.letters.begin(), u.letters.begin() + static_cast<std::ptrdiff_t>(best)}};
      ExtWord y{{u.letters.begin() + static_cast<std::ptrdiff_t>(best) + 1, u.letters.end()}};
      Weight bump = word_maxeff(u) * BigInt(2);
      const StableCycleCertificate& cert = certify(c->cycle, *c->body);
      BigInt m0 = pumping_threshold(cert, f);
      ExtWord next = x;
      next.letters.push_back(PowerNode{c->body, BigInt(2) * cert.m_frak * m0});
      next.letters.insert(next.letters.end(), y.letters.begin(), y.letters.end());
      u = std::move(next);
      f = f + bump;
    } else if (const auto* r = std::get_if<RebaseLetter>(&target)) {
      ExtWord x{{u.letters.begin(), u.letters.begin() + static_cast<std::ptrdiff_t>(best)}};
      ExtWord y{{u.letters.begin() + static_cast<std::ptrdiff_t>(best) + 1, u.letters.end()}};
      u = rebase_remove(x, *r, y);
    } else {
      const auto& p = std::get<PowerNode>(target);
      auto body = std::make_shared<ExtWord>(flatten_rec(*p.body, f));
      u.letters[best] = PowerNode{std::move(body), p.exponent};
    }
  }
}

// --- cost / depth / sub-cacti ---------------------------------------------------

CostValue CactusEngine::cost(const ExtLetter& letter) {
  if (const auto* t = std::get_if<Transition>(&letter)) {
    return CostValue::from_plain(letter_wmax(*t).value() + BigInt(1));
  }
  if (const auto* c = std::get_if<CactusLetter>(&letter)) {
    const StableCycleCertificate& cert = certify(c->cycle, *c->body);
    BigInt size_s = options_.size_mode == SizeMode::Ambient
                        ? ambient_
                        : BigInt(static_cast<long long>(__builtin_popcountll(c->cycle.reach)));
    CostValue inner = cost(*c->body);
    BigInt ms = cert.m_frak * size_s;
    CostValue exponent = (inner * inner).scale(ms * ms * BigInt(16));
    return CostValue::exp2(std::move(exponent));
  }
  if (const auto* p = std::get_if<PowerNode>(&letter)) return cost(*p->body).scale(p->exponent);
  throw CostUndefinedError("cost is defined on base and cactus letters only");
}

CostValue CactusEngine::cost(const ExtWord& w) {
  CostValue total;
  for (const ExtLetter& l : w.letters) total = total + cost(l);
  return total;
}

int CactusEngine::depth(const ExtLetter& letter) const {
  if (std::holds_alternative<Transition>(letter)) return 1;
  if (const auto* c = std::get_if<CactusLetter>(&letter)) return 1 + depth(*c->body);
  if (const auto* p = std::get_if<PowerNode>(&letter)) return depth(*p->body);
  throw CostUndefinedError("depth is defined on base and cactus letters only");
}

int CactusEngine::depth(const ExtWord& w) const {
  int d = 0;
  for (const ExtLetter& l : w.letters) d = std::max(d, depth(l));
  return d;
}

namespace {

void collect_sub(const ExtWord& w, int k, std::map<std::string, ExtLetter>& out);

void collect_sub(const ExtLetter& l, int k, std::map<std::string, ExtLetter>& out) {
  if (const auto* p = std::get_if<PowerNode>(&l)) {
    collect_sub(*p->body, k, out);
    return;
  }
  if (k == 0) {
    out.emplace(structural_key(l), l);
    return;
  }
  if (const auto* c = std::get_if<CactusLetter>(&l)) collect_sub(*c->body, k - 1, out);
  // non-cactus letters contribute nothing below the surface
}

void collect_sub(const ExtWord& w, int k, std::map<std::string, ExtLetter>& out) {
  for (const ExtLetter& l : w.letters) collect_sub(l, k, out);
}

}  // namespace

std::vector<ExtLetter> sub_k(const ExtWord& w, int k) {
  if (k < 0) throw std::invalid_argument("sub_k needs k >= 0");
  std::map<std::string, ExtLetter> found;
  collect_sub(w, k, found);
  std::vector<ExtLetter> out;
  for (auto& [key, letter] : found) out.push_back(letter);
  return out;
}

// --- degeneracy -----------------------------------------------------------------

MinGraph CactusEngine::min_graph(const StableCycleCertificate& cert) const {
  MinGraph g;
  g.vertices = cert.tables.min_states;
  g.edges = BoolMatrix(g.vertices.size());
  std::set<std::pair<StateId, StateId>> grn(cert.tables.grn_pairs.begin(),
                                            cert.tables.grn_pairs.end());
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    for (std::size_t j = 0; j < g.vertices.size(); ++j)
      g.edges.set(i, j, grn.count({g.vertices[i], g.vertices[j]}) > 0);
  return g;
}

DegeneracyResult CactusEngine::degeneracy_check(const StableCycleCertificate& cert) const {
  std::set<std::pair<StateId, StateId>> grn(cert.tables.grn_pairs.begin(),
                                            cert.tables.grn_pairs.end());
  for (StateId s = 0; s < a_->num_states(); ++s) {
    if (!cert.block.contains(s)) continue;
    for (StateId t = 0; t < a_->num_states(); ++t) {
      if (!cert.block.contains(t)) continue;
      if (!cert.bool_idem.get(s, t) || !cert.bool_idem.get(t, t)) continue;
      if (!grn.count({s, t})) return {false, s};
    }
  }
  return {true, std::nullopt};
}

BigInt CactusEngine::degenerate_replacement(const StableCycleCertificate& cert) {
  DegeneracyResult deg = degeneracy_check(cert);
  if (!deg.degenerate) throw NotDegenerateError("cycle has a reachable non-grounded pair");
  BigInt size_s = options_.size_mode == SizeMode::Ambient
                      ? ambient_
                      : BigInt(static_cast<long long>(__builtin_popcountll(cert.block.reach)));
  BigInt stride = BigInt(2) * cert.m_frak * size_s;
  MinPlusMatrix p1 = minplus_pow(cert.step, stride);
  std::vector<MinPlusMatrix> seen{p1};
  constexpr std::size_t kCap = 100000;
  while (seen.size() < kCap) {
    MinPlusMatrix next = minplus_mul(seen.back(), p1);
    for (std::size_t j = 0; j < seen.size(); ++j) {
      if (seen[j] == next) return BigInt(static_cast<long long>(j + 1));
    }
    seen.push_back(std::move(next));
  }
  throw std::runtime_error("degenerate replacement search did not close");
}

}  // namespace minplus
