#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ffcomb/bitset.hpp"
#include "ffcomb/clique.hpp"
#include "ffcomb/fpset.hpp"
#include "ffcomb/setops.hpp"
#include "ffcomb/subgroup.hpp"

namespace ffcomb {

inline constexpr std::uint64_t kDefaultNodeBudget = 100'000'000;

/// kDefaultNodeBudget, or the value of FFCOMB_BUDGET when it parses as a positive integer.
inline std::uint64_t default_node_budget() {
  if (const char* env = std::getenv("FFCOMB_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return kDefaultNodeBudget;
}

struct SearchBudget {
  std::uint64_t max_nodes = default_node_budget();
};

/// A decomposition target = B + C (additive) or target = B / B (ratio; then C == B).
struct Witness {
  FpSet b;
  FpSet c;
  friend bool operator==(const Witness&, const Witness&) = default;
};

struct DecompositionResult {
  FpSet target;
  std::vector<Witness> witnesses;  ///< canonical, sorted, duplicate-free
  bool exhaustive = true;          ///< the whole search space was explored
  bool budget_exhausted = false;   ///< the node cap stopped the search
  std::uint64_t nodes = 0;
  double wall_ms = 0;

  bool found() const noexcept { return !witnesses.empty(); }
  friend bool operator==(const DecompositionResult&, const DecompositionResult&) = default;
};

namespace detail {

inline bool witness_less(const Witness& l, const Witness& r) {
  const auto lb = l.b.elements(), rb = r.b.elements();
  if (lb != rb) return lb < rb;
  return l.c.elements() < r.c.elements();
}

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Canonical representative of the translation class {(B + t, C - t)}:
/// 0 in C, and among those translates the lexicographically smallest
/// (sorted B, sorted C).
inline Witness canonical_additive(const FpSet& b, const FpSet& c) {
  b.require_same_field(c);
  if (c.empty()) throw precondition_error("canonical_additive: empty co-factor");
  std::optional<Witness> best;
  c.for_each([&](residue t) {
    Witness w{translate(b, t), translate(c, b.field().neg(t))};
    if (!best || detail::witness_less(w, *best)) best = std::move(w);
  });
  return *best;
}

/// Canonical representative of the dilation class {xi B}: 1 in B and the
/// sorted element list lexicographically smallest. Zero, if present, stays.
inline FpSet canonical_dilate(const FpSet& b) {
  std::optional<FpSet> best;
  b.for_each([&](residue u) {
    if (u == 0) return;
    FpSet d = dilate(b, b.field().inv(u));
    if (!best || lex_less(d, *best)) best = std::move(d);
  });
  if (!best) throw precondition_error("canonical_dilate: set has no nonzero element");
  return *best;
}

/// Some split |B|, |C| >= 2 is compatible with Cauchy-Davenport:
/// min(p, |B| + |C| - 1) <= |A| <= |B||C|.
inline bool cauchy_davenport_admits_split(std::size_t target_size, std::size_t p) {
  for (std::size_t nb = 2; nb <= target_size; ++nb)
    for (std::size_t nc = 2; nc <= target_size; ++nc)
      if (std::min(p, nb + nc - 1) <= target_size && target_size <= nb * nc) return true;
  return false;
}

namespace detail {

/// Enumerates closed pairs (B, C) of the relation b + c in A, with 0 in C,
/// by Close-by-One over subsets of A. Every decomposition A = B0 + C0 with
/// 0 in C0 sits inside the closed pair (phi(phi(B0)), phi(B0)) where
/// phi(S) = ∩_{s in S} (A - s), so these pairs decide reducibility; each
/// translation class of closed pairs is reported once in canonical form.
class SumsetSearch {
 public:
  SumsetSearch(const FpSet& target, bool find_all, const SearchBudget& budget)
      : a_(target), field_(target.field()), find_all_(find_all), budget_(budget) {
    xs_ = a_.elements();
    const FpSet diffs = diffset(a_, a_);
    ys_ = diffs.elements();  // ys_[0] == 0
    const std::size_t n = xs_.size(), m = ys_.size();
    row_.assign(n, Bitset(m));
    col_.assign(m, Bitset(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (a_.contains(field_.add(xs_[i], ys_[j]))) {
          row_[i].set(j);
          col_[j].set(i);
        }
  }

  DecompositionResult run() {
    detail::Stopwatch clock;
    DecompositionResult res{a_, {}, true, false, 0, 0};
    Bitset all_y(ys_.size());
    all_y.set_all();
    Bitset b0 = close_y(all_y);
    Bitset c0 = close_x(b0);
    generate(b0, c0, 0);
    for (const auto& w : found_) res.witnesses.push_back(w);
    std::sort(res.witnesses.begin(), res.witnesses.end(), witness_less);
    res.budget_exhausted = over_budget_;
    res.exhaustive = !over_budget_ && !stopped_;
    res.nodes = nodes_;
    res.wall_ms = clock.ms();
    return res;
  }

 private:
  Bitset close_y(const Bitset& c) const {  // B = ∩_{y in C} {x : x + y in A}
    Bitset b(xs_.size());
    b.set_all();
    c.for_each([&](std::size_t j) { b &= col_[j]; });
    return b;
  }
  Bitset close_x(const Bitset& b) const {  // C = ∩_{x in B} {y : x + y in A}
    Bitset c(ys_.size());
    c.set_all();
    b.for_each([&](std::size_t i) { c &= row_[i]; });
    return c;
  }

  static bool same_prefix(const Bitset& l, const Bitset& r, std::size_t j) {
    for (std::size_t i = l.find_next(0); i < j; i = l.find_next(i + 1))
      if (!r.test(i)) return false;
    for (std::size_t i = r.find_next(0); i < j; i = r.find_next(i + 1))
      if (!l.test(i)) return false;
    return true;
  }

  void visit(const Bitset& b, const Bitset& c) {
    if (b.count() < 2 || c.count() < 2 || !c.test(0)) return;
    FpSet bs(field_), cs(field_);
    b.for_each([&](std::size_t i) { bs.insert(xs_[i]); });
    c.for_each([&](std::size_t j) { cs.insert(ys_[j]); });
    if (!(sumset(bs, cs) == a_)) return;
    auto w = canonical_additive(bs, cs);
    if (std::none_of(found_.begin(), found_.end(), [&](const Witness& o) { return o == w; }))
      found_.push_back(std::move(w));
    if (!find_all_) stopped_ = true;
  }

  void generate(const Bitset& b, const Bitset& c, std::size_t start) {
    if (over_budget_ || stopped_) return;
    if (++nodes_ > budget_.max_nodes) {
      over_budget_ = true;
      return;
    }
    visit(b, c);
    for (std::size_t j = start; j < xs_.size() && !over_budget_ && !stopped_; ++j) {
      if (b.test(j)) continue;
      Bitset c2 = c & row_[j];
      // Descendants only shrink C; keep 0 in C so B stays inside A and the
      // closures computed in this context agree with the ones over F_p.
      if (!c2.test(0) || c2.count() < 2) continue;
      Bitset b2 = close_y(c2);
      if (!same_prefix(b, b2, j)) continue;
      generate(b2, c2, j + 1);
    }
  }

  FpSet a_;
  PrimeField field_;
  bool find_all_;
  SearchBudget budget_;
  std::vector<residue> xs_, ys_;
  std::vector<Bitset> row_, col_;
  std::vector<Witness> found_;
  std::uint64_t nodes_ = 0;
  bool over_budget_ = false;
  bool stopped_ = false;
};

inline void verify_additive(const FpSet& target, const std::vector<Witness>& ws) {
  for (const auto& w : ws)
    if (w.b.size() < 2 || w.c.size() < 2 || !(sumset(w.b, w.c) == target))
      throw std::logic_error("sumset witness failed re-verification: " + w.b.to_string() + " + " + w.c.to_string());
}

}  // namespace detail

/// Decompositions target = B + C with |B|, |C| > 1, one per translation
/// class of closed pairs (C maximal for B and B maximal for C). The target is
/// reducible iff the list is nonempty. With find_all = false the search stops
/// at the first witness.
inline DecompositionResult sumset_decompositions(const FpSet& target, bool find_all = true,
                                                 const SearchBudget& budget = {}) {
  if (target.size() <= 2 || !cauchy_davenport_admits_split(target.size(), target.modulus()))
    return DecompositionResult{target, {}, true, false, 0, 0};
  auto res = detail::SumsetSearch(target, find_all, budget).run();
  detail::verify_additive(target, res.witnesses);
  return res;
}

/// Independent oracle for sumset_decompositions: tries every B ⊆ A (after
/// translating so that 0 is in C, B must lie inside A), takes the largest C
/// with B + C ⊆ A by scanning F_p, and keeps the closed pairs that cover A.
inline DecompositionResult sumset_decomposable_bruteforce(const FpSet& target, std::size_t max_size = 12) {
  if (target.size() > max_size)
    throw oracle_limit_error("sumset_decomposable_bruteforce: |A| = " + std::to_string(target.size()) +
                             " exceeds limit " + std::to_string(max_size));
  detail::Stopwatch clock;
  DecompositionResult res{target, {}, true, false, 0, 0};
  const auto& f = target.field();
  const residue p = f.modulus();
  const auto xs = target.elements();
  const std::size_t n = xs.size();
  auto cofactor = [&](const std::vector<residue>& bs) {
    FpSet c(f);
    for (residue t = 0; t < p; ++t) {
      bool ok = true;
      for (residue b : bs)
        if (!target.contains(f.add(b, t))) {
          ok = false;
          break;
        }
      if (ok) c.insert(t);
    }
    return c;
  };
  std::vector<Witness> found;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    ++res.nodes;
    if (std::popcount(mask) < 2) continue;
    std::vector<residue> bs;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) bs.push_back(xs[i]);
    const FpSet c = cofactor(bs);
    if (c.size() < 2) continue;
    const FpSet b = FpSet::from_values(f, bs);
    if (!(cofactor(c.elements()) == b)) continue;  // not closed
    if (!(sumset(b, c) == target)) continue;
    auto w = canonical_additive(b, c);
    if (std::find(found.begin(), found.end(), w) == found.end()) found.push_back(std::move(w));
  }
  std::sort(found.begin(), found.end(), detail::witness_less);
  res.witnesses = std::move(found);
  res.wall_ms = clock.ms();
  return res;
}

// ---------------------------------------------------------------------------
// Ratio sets
// ---------------------------------------------------------------------------

/// All B with B / B = S (distinct pairs, nonzero denominators) and
/// |B \ {0}| > 1, one per dilation class in canonical form. With find_all
/// false the search stops at the first witness (and is then not exhaustive).
inline DecompositionResult ratio_decompositions(const FpSet& s, bool find_all = true,
                                                const SearchBudget& budget = {}) {
  detail::Stopwatch clock;
  const auto& f = s.field();
  DecompositionResult res{s, {}, true, false, 0, 0};
  FpSet sstar = s;
  if (sstar.contains(0)) sstar.erase(0);
  // Quick rejections: 1 never occurs as a distinct-pair ratio, and ratio
  // sets are closed under inversion.
  if (sstar.empty() || s.contains(1) || !(inverse_set(sstar) == sstar)) {
    res.wall_ms = clock.ms();
    return res;
  }
  // B \ {0} is dilated to contain 1, so it lies in {1} ∪ S*.
  std::vector<residue> verts{1};
  for (residue x : sstar.elements()) verts.push_back(x);
  const std::size_t n = verts.size();
  std::vector<Bitset> adj(n, Bitset(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && sstar.contains(f.div(verts[i], verts[j]))) adj[i].set(j);

  auto ratios_of = [&](const std::vector<std::size_t>& idx) {
    FpSet r(f);
    for (auto i : idx)
      for (auto j : idx)
        if (i != j) r.insert(f.div(verts[i], verts[j]));
    return r;
  };

  std::set<std::vector<residue>> seen;
  std::vector<std::size_t> clique{0};
  bool over = false, stopped = false;
  auto dfs = [&](auto&& self, Bitset cand) -> void {
    if (over || stopped) return;
    if (++res.nodes > budget.max_nodes) {
      over = true;
      return;
    }
    if (clique.size() >= 2 && ratios_of(clique) == sstar) {
      FpSet b(f);
      for (auto i : clique) b.insert(verts[i]);
      if (s.contains(0)) b.insert(0);
      FpSet canon = canonical_dilate(b);
      if (seen.insert(canon.elements()).second) res.witnesses.push_back({canon, canon});
      if (!find_all) {
        stopped = true;
        return;
      }
    }
    // Every extension stays inside clique ∪ cand; prune if even that cannot realize S*.
    std::vector<std::size_t> pool = clique;
    cand.for_each([&](std::size_t v) { pool.push_back(v); });
    if (!sstar.is_subset_of(ratios_of(pool))) return;
    for (std::size_t v = cand.find_next(0); v < n && !over && !stopped; v = cand.find_next(v + 1)) {
      Bitset next = cand & adj[v];
      for (std::size_t u = next.find_next(0); u <= v && u < n; u = next.find_next(u + 1)) next.reset(u);
      clique.push_back(v);
      self(self, next);
      clique.pop_back();
    }
  };
  dfs(dfs, adj[0]);

  for (const auto& w : res.witnesses)
    if (!(ratioset(w.b, w.b, true) == s)) throw std::logic_error("ratio witness failed re-verification");
  std::sort(res.witnesses.begin(), res.witnesses.end(), detail::witness_less);
  res.budget_exhausted = over;
  res.exhaustive = !over && !stopped;
  res.wall_ms = clock.ms();
  return res;
}

struct MaxSetResult {
  FpSet set;
  bool exhaustive = true;
  std::uint64_t nodes = 0;
  std::size_t maximum_cliques = 0;  ///< maximum cliques through 1 that were compared
  friend bool operator==(const MaxSetResult&, const MaxSetResult&) = default;
};

/// A largest A ⊆ F_p^* with a / a' in xi*G + 1 for all distinct a, a'.
/// The compatibility graph u ~ v <=> u/v, v/u in xi*G + 1 is invariant under
/// every dilation, so some maximum clique contains 1; among all maximum
/// cliques the lexicographically smallest sorted one is returned.
inline MaxSetResult max_ratio_closed_set(const Subgroup& g, residue xi, const SearchBudget& budget = {},
                                         residue max_modulus = 512) {
  const auto& f = g.field;
  if (f.modulus() > max_modulus)
    throw precondition_error("max_ratio_closed_set: p exceeds the clique-search limit " + std::to_string(max_modulus));
  if (xi % f.modulus() == 0) throw precondition_error("max_ratio_closed_set: xi must be nonzero");
  const FpSet shifted = translate(coset(g, xi % f.modulus()), 1);
  FpSet conn(f);
  shifted.for_each([&](residue s) {
    if (s != 0 && shifted.contains(f.inv(s))) conn.insert(s);
  });
  std::vector<residue> verts{1};
  for (residue x : conn.elements()) verts.push_back(x);
  const std::size_t n = verts.size();
  std::vector<Bitset> adj(n, Bitset(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && conn.contains(f.div(verts[i], verts[j]))) adj[i].set(j);

  auto found = maximum_cliques(adj, adj[0], budget.max_nodes);
  MaxSetResult res{FpSet(f), found.exhaustive, found.nodes, found.cliques.size()};
  std::optional<FpSet> best;
  for (auto& cl : found.cliques) {
    FpSet k(f);
    k.insert(1);
    for (auto i : cl) k.insert(verts[i]);
    FpSet canon = canonical_dilate(k);
    if (!best || lex_less(canon, *best)) best = std::move(canon);
  }
  if (!best) {
    best = FpSet(f);
    best->insert(1);
  }
  res.set = std::move(*best);
  if (res.set.size() >= 2 && !ratioset(res.set, res.set, true).is_subset_of(shifted))
    throw std::logic_error("max_ratio_closed_set: result failed re-verification");
  return res;
}

// ---------------------------------------------------------------------------
// G ⊔ {0} = xi (A - A) for tiny A
// ---------------------------------------------------------------------------

enum class DilateMode {
  subgroups,  ///< A ranges over the subgroups of order 2 and 3
  arbitrary,  ///< A ranges over every 2- and 3-element subset of F_p
};

struct DilateWitness {
  FpSet a;
  residue xi;
  friend bool operator==(const DilateWitness&, const DilateWitness&) = default;
};

/// Every (A, xi) with xi (A - A) = G ⊔ {0}, ordered by (sorted A, xi).
inline std::vector<DilateWitness> small_subgroup_dilate_witnesses(const Subgroup& g,
                                                                  DilateMode mode = DilateMode::subgroups) {
  const auto& f = g.field;
  const residue p = f.modulus();
  FpSet target = g.elements;
  target.insert(0);
  std::vector<DilateWitness> out;
  auto try_set = [&](const FpSet& a) {
    const FpSet d = diffset(a, a);
    if (d.size() != target.size()) return;
    residue d0 = 0;
    d.for_each([&](residue x) {
      if (d0 == 0 && x != 0) d0 = x;
    });
    if (d0 == 0) return;
    std::vector<residue> xis;
    g.elements.for_each([&](residue gamma) { xis.push_back(f.div(gamma, d0)); });
    std::sort(xis.begin(), xis.end());
    for (residue xi : xis)
      if (dilate(d, xi) == target) out.push_back({a, xi});
  };
  if (mode == DilateMode::subgroups) {
    for (std::uint64_t h : {2u, 3u})
      if ((p - 1) % h == 0) try_set(subgroup(f, h).elements);
    std::sort(out.begin(), out.end(), [](const DilateWitness& l, const DilateWitness& r) {
      const auto le = l.a.elements(), re = r.a.elements();
      return le != re ? le < re : l.xi < r.xi;
    });
    return out;
  }
  // A - A is symmetric with at most 6 nonzero elements.
  if (g.order > 6 || (p > 2 && !g.contains(p - 1))) return out;
  for (residue x = 0; x < p; ++x)
    for (residue y = x + 1; y < p; ++y) {
      try_set(FpSet(f, {x, y}));
      for (residue z = y + 1; z < p; ++z) try_set(FpSet(f, {x, y, z}));
    }
  std::stable_sort(out.begin(), out.end(), [](const DilateWitness& l, const DilateWitness& r) {
    const auto le = l.a.elements(), re = r.a.elements();
    return le != re ? le < re : l.xi < r.xi;
  });
  return out;
}

inline std::optional<DilateWitness> small_subgroup_dilate_check(const Subgroup& g,
                                                                DilateMode mode = DilateMode::subgroups) {
  auto ws = small_subgroup_dilate_witnesses(g, mode);
  if (ws.empty()) return std::nullopt;
  return ws.front();
}

}  // namespace ffcomb
