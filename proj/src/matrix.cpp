#include "minplus/matrix.hpp"

#include <algorithm>
#include <ostream>

#include "minplus/weight.hpp"

namespace minplus {

const BigInt& Weight::value() const {
  if (inf_) throw std::domain_error("value() on infinite weight");
  return v_;
}

Weight Weight::operator-() const {
  if (inf_) throw std::domain_error("negation of infinite weight");
  return Weight(-v_);
}

Weight Weight::operator-(const Weight& o) const {
  if (o.inf_) throw std::domain_error("subtraction of infinite weight");
  if (inf_) return infinity();
  return Weight(v_ - o.v_);
}

Weight Weight::operator*(const BigInt& k) const {
  if (inf_) return infinity();
  return Weight(v_ * k);
}

Weight Weight::parse(std::string_view text) {
  if (text == "inf" || text == "infinity") return infinity();
  return Weight(BigInt::from_decimal(text));
}

std::ostream& operator<<(std::ostream& os, const Weight& w) { return os << w.to_string(); }

MinPlusMatrix MinPlusMatrix::identity(std::size_t dim) {
  MinPlusMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = Weight(0);
  return m;
}

MinPlusMatrix minplus_mul(const MinPlusMatrix& a, const MinPlusMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("minplus_mul: dimension mismatch");
  const std::size_t n = a.dim();
  MinPlusMatrix r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Weight& aik = a.at(i, k);
      if (aik.is_infinite()) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const Weight& bkj = b.at(k, j);
        if (bkj.is_infinite()) continue;
        Weight cand = aik + bkj;
        if (cand < r.at(i, j)) r.at(i, j) = std::move(cand);
      }
    }
  }
  return r;
}

MinPlusMatrix minplus_pow(const MinPlusMatrix& m, const BigInt& e) {
  if (e.is_negative()) throw std::invalid_argument("minplus_pow: negative exponent");
  MinPlusMatrix r = MinPlusMatrix::identity(m.dim());
  for (std::size_t i = e.bit_length(); i-- > 0;) {
    r = minplus_mul(r, r);
    if (e.test_bit(i)) r = minplus_mul(r, m);
  }
  return r;
}

BoolMatrix BoolMatrix::identity(std::size_t dim) {
  BoolMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.set(i, i, true);
  return m;
}

BoolMatrix bool_mul(const BoolMatrix& a, const BoolMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("bool_mul: dimension mismatch");
  const std::size_t n = a.dim(), w = a.words_;
  BoolMatrix r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!a.get(i, k)) continue;
      for (std::size_t x = 0; x < w; ++x) r.rows_[i * w + x] |= b.rows_[k * w + x];
    }
  }
  return r;
}

BoolMatrix bool_pow(const BoolMatrix& b, const BigInt& e) {
  if (e.is_negative()) throw std::invalid_argument("bool_pow: negative exponent");
  BoolMatrix r = BoolMatrix::identity(b.dim());
  for (std::size_t i = e.bit_length(); i-- > 0;) {
    r = bool_mul(r, r);
    if (e.test_bit(i)) r = bool_mul(r, b);
  }
  return r;
}

IdempotentProfile idempotent_profile(const BoolMatrix& b) {
  // Walk B, B^2, ... until the first repetition; for an eventually periodic
  // sequence the first collision yields the minimal index and period.
  std::vector<BoolMatrix> powers;
  powers.push_back(b);
  constexpr std::size_t kCap = 1u << 20;
  while (powers.size() < kCap) {
    BoolMatrix next = bool_mul(powers.back(), b);
    for (std::size_t s = 0; s < powers.size(); ++s) {
      if (powers[s] == next) {
        std::uint64_t index = s + 1;
        std::uint64_t period = powers.size() - s;
        std::uint64_t k = index;
        if (k % period != 0) k += period - k % period;
        IdempotentProfile prof{index, period, powers[k - 1]};
        return prof;
      }
    }
    powers.push_back(std::move(next));
  }
  throw std::runtime_error("idempotent_profile: power sequence did not close");
}

namespace {

NegativeCycle package_cycle(const MinPlusMatrix& m, const std::vector<std::size_t>& verts,
                            std::vector<std::size_t> cyc) {
  // Deterministic presentation: rotate the smallest vertex first.
  std::size_t best = 0;
  for (std::size_t i = 1; i < cyc.size(); ++i) {
    if (verts[cyc[i]] < verts[cyc[best]]) best = i;
  }
  std::rotate(cyc.begin(), cyc.begin() + static_cast<std::ptrdiff_t>(best), cyc.end());
  NegativeCycle out;
  Weight total(0);
  for (std::size_t i = 0; i < cyc.size(); ++i) {
    std::size_t a = cyc[i], b = cyc[(i + 1) % cyc.size()];
    total += m.at(verts[a], verts[b]);
    out.states.push_back(verts[a]);
  }
  out.states.push_back(verts[cyc[0]]);
  out.weight = total;
  return out;
}

// Exact extractor: the shortest negative closed walk is a simple cycle, and
// it is found on the diagonal of some power M^L with L <= n.
std::optional<NegativeCycle> negative_cycle_by_powers(const MinPlusMatrix& m,
                                                      const std::vector<std::size_t>& verts) {
  const std::size_t n = verts.size();
  MinPlusMatrix sub(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sub.at(i, j) = m.at(verts[i], verts[j]);
  std::vector<MinPlusMatrix> pows{sub};  // pows[k] = sub^{k+1}
  for (std::size_t len = 1; len <= n; ++len) {
    const MinPlusMatrix& p = pows[len - 1];
    for (std::size_t s = 0; s < n; ++s) {
      if (p.at(s, s).is_finite() && p.at(s, s) < Weight(0)) {
        // Reconstruct the minimal closed walk of length `len` from s; being
        // the shortest negative closed walk, it is a simple cycle.
        std::vector<std::size_t> cyc{s};
        std::size_t cur = s;
        Weight need = p.at(s, s);
        for (std::size_t rem = len; rem > 1; --rem) {
          for (std::size_t d = 0; d < n; ++d) {
            if (sub.at(cur, d).is_infinite()) continue;
            const Weight& tail = pows[rem - 2].at(d, s);  // sub^{rem-1}
            if (tail.is_infinite()) continue;
            if (sub.at(cur, d) + tail == need) {
              need = need - sub.at(cur, d);
              cur = d;
              break;
            }
          }
          cyc.push_back(cur);
        }
        return package_cycle(m, verts, std::move(cyc));
      }
    }
    if (len < n) pows.push_back(minplus_mul(pows.back(), sub));
  }
  return std::nullopt;
}

std::optional<NegativeCycle> bellman_ford_cycle(const MinPlusMatrix& m,
                                                const std::vector<std::size_t>& verts) {
  const std::size_t n = verts.size();
  if (n == 0) return std::nullopt;
  std::vector<Weight> dist(n, Weight(0));
  std::vector<std::size_t> pred(n, SIZE_MAX);
  std::size_t relaxed_tail = SIZE_MAX;
  for (std::size_t round = 0; round <= n; ++round) {
    relaxed_tail = SIZE_MAX;
    for (std::size_t ui = 0; ui < n; ++ui) {
      if (dist[ui].is_infinite()) continue;
      for (std::size_t vi = 0; vi < n; ++vi) {
        const Weight& w = m.at(verts[ui], verts[vi]);
        if (w.is_infinite()) continue;
        Weight cand = dist[ui] + w;
        if (cand < dist[vi]) {
          dist[vi] = std::move(cand);
          pred[vi] = ui;
          relaxed_tail = vi;
        }
      }
    }
    if (relaxed_tail == SIZE_MAX) return std::nullopt;
  }
  // An edge relaxed on round n+1: walk predecessors into a cycle. The pred
  // graph may not have closed yet (or can close on a non-negative cycle), in
  // which case the exact power extractor takes over.
  std::vector<int> seen(n, 0);
  std::size_t x = relaxed_tail;
  while (x != SIZE_MAX && !seen[x]) {
    seen[x] = 1;
    x = pred[x];
  }
  if (x != SIZE_MAX) {
    std::vector<std::size_t> cyc;
    std::size_t cur = x;
    do {
      cyc.push_back(cur);
      cur = pred[cur];
    } while (cur != x);
    std::reverse(cyc.begin(), cyc.end());
    NegativeCycle out = package_cycle(m, verts, std::move(cyc));
    if (out.weight < Weight(0)) return out;
  }
  return negative_cycle_by_powers(m, verts);
}

}  // namespace

std::optional<NegativeCycle> detect_negative_cycle(const MinPlusMatrix& m,
                                                   const std::vector<std::size_t>& support) {
  for (std::size_t v : support) {
    if (v >= m.dim()) throw std::out_of_range("detect_negative_cycle: support out of range");
  }
  return bellman_ford_cycle(m, support);
}

std::optional<NegativeCycle> detect_negative_cycle(const MinPlusMatrix& m) {
  std::vector<std::size_t> all(m.dim());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return bellman_ford_cycle(m, all);
}

std::vector<BigInt> johnson_reweight(const MinPlusMatrix& m) {
  const std::size_t n = m.dim();
  std::vector<Weight> dist(n, Weight(0));
  for (std::size_t round = 0; round <= n; ++round) {
    bool relaxed = false;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        const Weight& w = m.at(u, v);
        if (w.is_infinite()) continue;
        Weight cand = dist[u] + w;
        if (cand < dist[v]) {
          dist[v] = std::move(cand);
          relaxed = true;
        }
      }
    }
    if (!relaxed) break;
    if (round == n) throw NegativeCycleError("johnson_reweight: negative cycle");
  }
  std::vector<BigInt> pot(n);
  for (std::size_t i = 0; i < n; ++i) pot[i] = dist[i].value();
  return pot;
}

namespace {

// Iterative Tarjan.
struct TarjanState {
  const BoolMatrix& g;
  std::vector<int> index, low;
  std::vector<bool> on_stack;
  std::vector<std::size_t> stack;
  int next_index = 0;
  std::vector<std::vector<std::size_t>> comps;

  explicit TarjanState(const BoolMatrix& graph)
      : g(graph), index(graph.dim(), -1), low(graph.dim(), 0), on_stack(graph.dim(), false) {}

  void run(std::size_t root) {
    struct Frame {
      std::size_t v;
      std::size_t next_child;
    };
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      bool descended = false;
      while (f.next_child < g.dim()) {
        std::size_t w = f.next_child++;
        if (!g.get(f.v, w)) continue;
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      if (low[f.v] == index[f.v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != f.v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
      std::size_t v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
    }
  }
};

}  // namespace

std::vector<std::vector<std::size_t>> scc_decompose(const BoolMatrix& b) {
  TarjanState t(b);
  for (std::size_t v = 0; v < b.dim(); ++v) {
    if (t.index[v] < 0) t.run(v);
  }
  // Tarjan emits sinks first; reverse for topological order.
  std::reverse(t.comps.begin(), t.comps.end());
  return t.comps;
}

}  // namespace minplus
