#pragma once

// Brute-force reference implementations used as test oracles. They work on
// plain integer vectors and share no code with the library beyond FpSet
// conversion helpers, so an error in a library kernel cannot hide here.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "ffcomb/fpset.hpp"

namespace oracle {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using Vec = std::vector<i64>;

inline i64 mod(i64 x, i64 p) { return ((x % p) + p) % p; }

inline i64 inv(i64 x, i64 p) {
  x = mod(x, p);
  for (i64 y = 1; y < p; ++y)
    if (x * y % p == 1) return y;
  return -1;
}

inline Vec elems(const ffcomb::FpSet& s) {
  Vec v;
  for (auto x : s.elements()) v.push_back(x);
  return v;
}

inline ffcomb::FpSet to_set(const ffcomb::PrimeField& f, const Vec& v) { return ffcomb::FpSet::from_values(f, v); }

inline std::set<i64> sumset(const Vec& a, const Vec& b, i64 p) {
  std::set<i64> s;
  for (i64 x : a)
    for (i64 y : b) s.insert(mod(x + y, p));
  return s;
}

inline u64 additive_energy(const Vec& a, i64 p) {
  u64 n = 0;
  for (i64 a1 : a)
    for (i64 a2 : a)
      for (i64 a3 : a)
        for (i64 a4 : a)
          if (mod(a1 + a2 - a3 - a4, p) == 0) ++n;
  return n;
}

/// t(x) by direct enumeration; key p stands for infinity.
inline std::map<i64, u64> t_fn(const Vec& a, const Vec& b, const Vec& c, i64 p) {
  std::map<i64, u64> t;
  for (i64 av : a)
    for (i64 bv : b)
      for (i64 cv : c) {
        if (cv == av)
          ++t[p];
        else
          ++t[mod((bv - av) * inv(cv - av, p), p)];
      }
  return t;
}

/// Pairs of triples whose ratios agree (finite only, infinity only).
inline std::pair<u64, u64> triple_pairs(const Vec& a, const Vec& b, const Vec& c, i64 p) {
  std::vector<i64> ratios;
  for (i64 av : a)
    for (i64 bv : b)
      for (i64 cv : c) ratios.push_back(cv == av ? p : mod((bv - av) * inv(cv - av, p), p));
  u64 fin = 0, infty = 0;
  for (i64 r : ratios)
    for (i64 s : ratios)
      if (r == s) (r == p ? infty : fin)++;
  return {fin, infty};
}

/// q(x, y) by the naive four-fold loop; returns (table, infinity mass).
inline std::pair<std::map<std::pair<i64, i64>, u64>, u64> q_fn(const Vec& a, const Vec& b, const Vec& c, const Vec& d,
                                                              i64 p) {
  std::map<std::pair<i64, i64>, u64> q;
  u64 infty = 0;
  for (i64 av : a)
    for (i64 bv : b)
      for (i64 cv : c)
        for (i64 dv : d) {
          if (cv == av) {
            ++infty;
            continue;
          }
          const i64 iv = inv(cv - av, p);
          ++q[{mod((bv - av) * iv, p), mod((dv - av) * iv, p)}];
        }
  return {q, infty};
}

/// Ordered collinear quadruples of points from A^2, B^2, C^2, D^2 by testing
/// every quadruple: collinear iff all difference vectors from the first
/// point are pairwise parallel.
inline u64 collinear_quadruples(const Vec& a, const Vec& b, const Vec& c, const Vec& d, i64 p) {
  auto grid = [](const Vec& s) {
    std::vector<std::pair<i64, i64>> pts;
    for (i64 x : s)
      for (i64 y : s) pts.emplace_back(x, y);
    return pts;
  };
  const auto pa = grid(a), pb = grid(b), pc = grid(c), pd = grid(d);
  auto cross = [p](std::pair<i64, i64> u, std::pair<i64, i64> v) { return mod(u.first * v.second - u.second * v.first, p); };
  u64 n = 0;
  for (auto P : pa)
    for (auto Q : pb)
      for (auto R : pc)
        for (auto S : pd) {
          const std::pair<i64, i64> u{Q.first - P.first, Q.second - P.second};
          const std::pair<i64, i64> v{R.first - P.first, R.second - P.second};
          const std::pair<i64, i64> w{S.first - P.first, S.second - P.second};
          if (cross(u, v) == 0 && cross(u, w) == 0 && cross(v, w) == 0) ++n;
        }
  return n;
}

/// Every (B, C) of subsets of F_p with |B|, |C| >= 2 and B + C = A, reduced to
/// one representative per translation class: the pair with 0 in C whose
/// (sorted B, sorted C) is lexicographically least. Only closed pairs (C the
/// full co-factor of B and vice versa) are kept. Exponential; tiny p only.
inline std::set<std::pair<Vec, Vec>> closed_decompositions(const Vec& a, i64 p) {
  const std::set<i64> target(a.begin(), a.end());
  auto cofactor = [&](const Vec& s) {
    Vec out;
    for (i64 t = 0; t < p; ++t)
      if (std::all_of(s.begin(), s.end(), [&](i64 x) { return target.count(mod(x + t, p)) > 0; })) out.push_back(t);
    return out;
  };
  std::set<std::pair<Vec, Vec>> found;
  const u64 full = u64{1} << p;
  for (u64 mask = 0; mask < full; ++mask) {
    if (__builtin_popcountll(mask) < 2) continue;
    Vec bs;
    for (i64 i = 0; i < p; ++i)
      if (mask >> i & 1) bs.push_back(i);
    const Vec cs = cofactor(bs);
    if (cs.size() < 2 || cofactor(cs) != bs) continue;
    if (sumset(bs, cs, p) != target) continue;
    std::pair<Vec, Vec> best;
    bool have = false;
    for (i64 t : cs) {
      Vec b2, c2;
      for (i64 x : bs) b2.push_back(mod(x + t, p));
      for (i64 x : cs) c2.push_back(mod(x - t, p));
      std::sort(b2.begin(), b2.end());
      std::sort(c2.begin(), c2.end());
      std::pair<Vec, Vec> cand{b2, c2};
      if (!have || cand < best) best = cand, have = true;
    }
    found.insert(best);
  }
  return found;
}

/// Whether A = B + C for some |B|, |C| >= 2 (any pair, closed or not).
inline bool is_sumset_reducible(const Vec& a, i64 p) { return !closed_decompositions(a, p).empty(); }

/// Same pairs as closed_decompositions, found from the subsets of A alone:
/// translating so that 0 is in C puts B inside A. Feasible for |A| <= ~20.
inline std::set<std::pair<Vec, Vec>> closed_decompositions_within(const Vec& a, i64 p) {
  const std::set<i64> target(a.begin(), a.end());
  auto cofactor = [&](const Vec& s) {
    Vec out;
    for (i64 t = 0; t < p; ++t)
      if (std::all_of(s.begin(), s.end(), [&](i64 x) { return target.count(mod(x + t, p)) > 0; })) out.push_back(t);
    return out;
  };
  std::set<std::pair<Vec, Vec>> found;
  for (u64 mask = 0; mask < (u64{1} << a.size()); ++mask) {
    if (__builtin_popcountll(mask) < 2) continue;
    Vec bs;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask >> i & 1) bs.push_back(a[i]);
    const Vec cs = cofactor(bs);
    if (cs.size() < 2 || cofactor(cs) != bs) continue;
    if (sumset(bs, cs, p) != target) continue;
    std::pair<Vec, Vec> best;
    bool have = false;
    for (i64 t : cs) {
      Vec b2, c2;
      for (i64 x : bs) b2.push_back(mod(x + t, p));
      for (i64 x : cs) c2.push_back(mod(x - t, p));
      std::sort(b2.begin(), b2.end());
      std::sort(c2.begin(), c2.end());
      std::pair<Vec, Vec> cand{b2, c2};
      if (!have || cand < best) best = cand, have = true;
    }
    found.insert(best);
  }
  return found;
}

/// All B (up to dilation, 1 in B) with B/B = S under the distinct-pair
/// convention and |B \ {0}| >= 2, by trying every subset of F_p^*.
inline std::set<Vec> ratio_decompositions(const Vec& s, i64 p) {
  const std::set<i64> target(s.begin(), s.end());
  const bool zero = target.count(0) > 0;
  std::set<Vec> found;
  for (u64 mask = 0; mask < (u64{1} << (p - 1)); ++mask) {
    if (__builtin_popcountll(mask) < 2) continue;
    Vec bs;
    for (i64 i = 1; i < p; ++i)
      if (mask >> (i - 1) & 1) bs.push_back(i);
    if (bs.front() != 1) continue;  // dilation normalised: 1 is the least element of some dilate
    std::set<i64> r;
    for (i64 x : bs)
      for (i64 y : bs)
        if (x != y) r.insert(mod(x * inv(y, p), p));
    if (zero) r.insert(0);
    if (r != target) continue;
    // canonical dilate: least sorted list over dilates containing 1
    Vec best;
    for (i64 u : bs) {
      Vec d;
      const i64 ui = inv(u, p);
      for (i64 x : bs) d.push_back(mod(x * ui, p));
      if (zero) d.push_back(0);
      std::sort(d.begin(), d.end());
      if (best.empty() || d < best) best = d;
    }
    found.insert(best);
  }
  return found;
}

/// Largest size of A ⊆ F_p^* with a/a' in S for all distinct a, a'.
inline std::size_t max_ratio_closed_size(const std::set<i64>& s, i64 p) {
  std::size_t best = 1;
  for (u64 mask = 1; mask < (u64{1} << (p - 1)); ++mask) {
    const auto n = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (n <= best || !(mask & 1)) continue;  // contains 1 without loss of generality
    Vec bs;
    for (i64 i = 1; i < p; ++i)
      if (mask >> (i - 1) & 1) bs.push_back(i);
    bool ok = true;
    for (i64 x : bs) {
      for (i64 y : bs)
        if (x != y && !s.count(mod(x * inv(y, p), p))) {
          ok = false;
          break;
        }
      if (!ok) break;
    }
    if (ok) best = n;
  }
  return best;
}

/// A random subset of F_p of the given size.
inline Vec random_subset(std::mt19937_64& rng, i64 p, std::size_t size) {
  Vec all(p);
  for (i64 i = 0; i < p; ++i) all[i] = i;
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng() % (p - i));
    std::swap(all[i], all[j]);
  }
  Vec out(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
