#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ffcomb/fpset.hpp"
#include "ffcomb/setops.hpp"
#include "ffcomb/subgroup.hpp"

namespace ffcomb {

// ---------------------------------------------------------------------------
// Collinear triples
// ---------------------------------------------------------------------------

/// t(x) = #{(a, b, c) : c != a, b - a = x (c - a)}. Triples with c = a are
/// collected in the infinity slot, so the total mass is exactly |A||B||C|.
inline CountTable t_fn(const FpSet& a, const FpSet& b, const FpSet& c) {
  a.require_same_field(b);
  a.require_same_field(c);
  const auto& f = a.field();
  CountTable t{f.modulus(), std::vector<std::uint64_t>(f.modulus(), 0), 0};
  const auto eb = b.elements();
  const auto ec = c.elements();
  a.for_each([&](residue av) {
    for (residue cv : ec) {
      if (cv == av) {
        t.infinity_count += eb.size();
        continue;
      }
      const residue inv = f.inv(f.sub(cv, av));
      for (residue bv : eb) ++t.counts[f.mul(f.sub(bv, av), inv)];
    }
  });
  return t;
}

struct TripleCount {
  std::uint64_t finite = 0;         ///< sum over x in F_p of t(x)^2
  std::uint64_t with_infinity = 0;  ///< finite + t(infinity)^2
  friend bool operator==(const TripleCount&, const TripleCount&) = default;
};

inline TripleCount triple_count(const FpSet& a, const FpSet& b, const FpSet& c) {
  const auto t = t_fn(a, b, c);
  TripleCount out;
  out.finite = t.sum_of_squares();
  out.with_infinity = detail::checked_add(out.finite, detail::checked_mul(t.infinity_count, t.infinity_count));
  return out;
}

/// T[A, B, C]: the finite ratios (b - a) / (c - a) that actually occur.
inline FpSet triple_support(const FpSet& a, const FpSet& b, const FpSet& c) {
  const auto t = t_fn(a, b, c);
  FpSet s(a.field());
  for (residue x = 0; x < t.counts.size(); ++x)
    if (t.counts[x] > 0) s.insert(x);
  return s;
}

// ---------------------------------------------------------------------------
// Collinear quadruples
// ---------------------------------------------------------------------------

struct QEntry {
  residue x;
  residue y;
  std::uint64_t count;
  friend bool operator==(const QEntry&, const QEntry&) = default;
};

/// Sparse q(x, y) with entries sorted by (x, y); infinity_mass holds tuples with c = a.
struct QTable {
  residue modulus = 0;
  std::vector<QEntry> entries;
  std::uint64_t infinity_mass = 0;

  std::uint64_t at(residue x, residue y) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{x, y},
                               [](const QEntry& e, const std::pair<residue, residue>& k) {
                                 return std::pair{e.x, e.y} < k;
                               });
    return (it != entries.end() && it->x == x && it->y == y) ? it->count : 0;
  }
  std::size_t support_size() const noexcept { return entries.size(); }
  std::uint64_t finite_mass() const {
    std::uint64_t s = 0;
    for (const auto& e : entries) s = detail::checked_add(s, e.count);
    return s;
  }
  std::uint64_t total_mass() const { return detail::checked_add(finite_mass(), infinity_mass); }
  std::uint64_t sum_of_squares() const {
    unsigned __int128 s = 0;
    for (const auto& e : entries) s += static_cast<unsigned __int128>(e.count) * e.count;
    return detail::narrow_u128(s);
  }

  friend bool operator==(const QTable&, const QTable&) = default;
};

/// Largest modulus for which the q accumulator uses a dense p x p array.
inline constexpr residue kDenseQLimit = 2048;

namespace detail {

/// Accumulates q over packed keys x * p + y. Dense for small p, hashed above.
class QAccumulator {
 public:
  /// `work` is the number of add() calls expected; tiny workloads over a
  /// large field skip the dense array.
  QAccumulator(residue p, std::uint64_t work) : p_(p) {
    const std::uint64_t cells = std::uint64_t{p} * p;
    if (p <= kDenseQLimit && cells <= 16 * work + (std::uint64_t{1} << 16)) dense_.assign(cells, 0);
  }

  /// Adds one to q(x, y) for every x in xs and y in ys.
  void add_grid(const std::vector<residue>& xs, const std::vector<residue>& ys) {
    if (!dense_.empty()) {
      for (residue x : xs) {
        std::uint32_t* row = dense_.data() + std::size_t{x} * p_;
        for (residue y : ys) ++row[y];
      }
    } else {
      for (residue x : xs)
        for (residue y : ys) ++sparse_[std::uint64_t{x} * p_ + y];
    }
  }

  /// Visits nonzero cells as f(x * p + y, count); dense cells in key order.
  template <class F>
  void for_each(F&& f) const {
    if (!dense_.empty()) {
      for (std::size_t k = 0; k < dense_.size(); ++k)
        if (dense_[k] != 0) f(std::uint64_t{k}, std::uint64_t{dense_[k]});
    } else {
      for (const auto& [k, v] : sparse_) f(k, v);
    }
  }

  residue modulus() const noexcept { return p_; }

 private:
  residue p_;
  std::vector<std::uint32_t> dense_;
  std::unordered_map<std::uint64_t, std::uint64_t> sparse_;
};

inline std::uint64_t q_work(const FpSet& a, const FpSet& b, const FpSet& c, const FpSet& d) {
  return std::uint64_t{a.size()} * c.size() * b.size() * d.size();
}

/// Runs the (a, c) outer loop of q_{A,B,C,D}; returns the c = a mass.
inline std::uint64_t accumulate_q(const FpSet& a, const FpSet& b, const FpSet& c, const FpSet& d,
                                  QAccumulator& acc) {
  a.require_same_field(b);
  a.require_same_field(c);
  a.require_same_field(d);
  const auto& f = a.field();
  const auto eb = b.elements();
  const auto ec = c.elements();
  const auto ed = d.elements();
  std::vector<residue> xs(eb.size()), ys(ed.size());
  std::uint64_t infinity = 0;
  a.for_each([&](residue av) {
    for (residue cv : ec) {
      if (cv == av) {
        infinity = checked_add(infinity, checked_mul(eb.size(), ed.size()));
        continue;
      }
      const residue inv = f.inv(f.sub(cv, av));
      for (std::size_t i = 0; i < eb.size(); ++i) xs[i] = f.mul(f.sub(eb[i], av), inv);
      for (std::size_t j = 0; j < ed.size(); ++j) ys[j] = f.mul(f.sub(ed[j], av), inv);
      acc.add_grid(xs, ys);
    }
  });
  return infinity;
}

}  // namespace detail

namespace detail {

/// Calls f(n_1, ..., n_k) for every line of F_p^2 meeting the first point set,
/// where n_i = |line ∩ (X_i x X_i)|. Vertical lines included.
template <class F>
void for_each_line(const std::vector<const FpSet*>& sets, F&& f) {
  const auto& field = sets.front()->field();
  const residue p = field.modulus();
  const std::size_t k = sets.size();
  std::vector<std::vector<residue>> elems;
  for (auto* s : sets) elems.push_back(s->elements());
  std::vector<std::vector<std::uint64_t>> cnt(k, std::vector<std::uint64_t>(p, 0));
  std::vector<std::uint64_t> n(k);
  std::vector<residue> touched;
  for (residue m = 0; m < p; ++m) {
    touched.clear();
    for (std::size_t i = 0; i < k; ++i)
      for (residue x : elems[i])
        for (residue y : elems[i]) {
          const residue icpt = field.sub(y, field.mul(m, x));
          if (cnt[i][icpt]++ == 0 && i == 0) touched.push_back(icpt);
        }
    for (residue icpt : touched) {
      for (std::size_t i = 0; i < k; ++i) n[i] = cnt[i][icpt];
      f(n);
    }
    for (std::size_t i = 0; i < k; ++i)
      for (residue x : elems[i])
        for (residue y : elems[i]) cnt[i][field.sub(y, field.mul(m, x))] = 0;
  }
  for (residue x : elems[0]) {
    for (std::size_t i = 0; i < k; ++i) n[i] = sets[i]->contains(x) ? sets[i]->size() : 0;
    f(n);
  }
}

}  // namespace detail

/// q(x, y) = #{(a, b, c, d) : c != a, b - a = x (c - a), d - a = y (c - a)}.
inline QTable q_fn(const FpSet& a, const FpSet& b, const FpSet& c, const FpSet& d) {
  detail::QAccumulator acc(a.modulus(), detail::q_work(a, b, c, d));
  QTable t;
  t.modulus = a.modulus();
  t.infinity_mass = detail::accumulate_q(a, b, c, d, acc);
  const std::uint64_t p = a.modulus();
  acc.for_each([&](std::uint64_t key, std::uint64_t count) {
    t.entries.push_back({static_cast<residue>(key / p), static_cast<residue>(key % p), count});
  });
  std::sort(t.entries.begin(), t.entries.end(),
            [](const QEntry& l, const QEntry& r) { return std::pair{l.x, l.y} < std::pair{r.x, r.y}; });
  return t;
}

struct QuadCount {
  std::uint64_t finite = 0;    ///< sum of q(x, y)^2 over finite keys
  std::uint64_t infinity = 0;  ///< collinear quadruples in which c = a in some coordinate
  std::uint64_t total = 0;     ///< Q(A, B, C, D), vertical lines included
  friend bool operator==(const QuadCount&, const QuadCount&) = default;
};

/// Q(A, B, C, D): ordered collinear quadruples of points from A x A, B x B,
/// C x C, D x D. Pairs of tuples with both denominators nonzero are counted
/// by the squared q-function; the remaining ones (a shared abscissa in at
/// least one coordinate) are counted directly.
inline QuadCount quad_count_Q(const FpSet& a, const FpSet& b, const FpSet& c, const FpSet& d) {
  detail::QAccumulator acc(a.modulus(), detail::q_work(a, b, c, d));
  detail::accumulate_q(a, b, c, d, acc);
  unsigned __int128 finite = 0;
  acc.for_each([&](std::uint64_t, std::uint64_t n) { finite += static_cast<unsigned __int128>(n) * n; });

  const FpSet ac = a & c;
  const std::uint64_t all4 = (ac & b & d).size();
  // c = a in one coordinate only: the line is vertical, forcing b = d = a there.
  const unsigned __int128 mixed = static_cast<unsigned __int128>(a.size() * c.size() - ac.size()) * b.size() *
                                  d.size() * all4;
  // c = a in both coordinates: P_c = P_a = P and P_b, P_d must be collinear
  // with P. Grouping by the line through P, per line l this is
  //   sum_{P in E ∩ l} (n_B(l) - [P in B^2]) (n_D(l) - [P in D^2]),
  // plus the pairs with P_b = P or P_d = P; E = (A ∩ C)^2.
  const FpSet eb = ac & b, ed = ac & d, ebd = eb & d;
  unsigned __int128 both = 0;
  if (!ac.empty()) {
    __int128 on_lines = 0;
    detail::for_each_line({&ac, &b, &d, &eb, &ed, &ebd}, [&](const std::vector<std::uint64_t>& n) {
      on_lines += static_cast<__int128>(n[0]) * n[1] * n[2] - static_cast<__int128>(n[2]) * n[3] -
                  static_cast<__int128>(n[1]) * n[4] + n[5];
    });
    const unsigned __int128 nb2 = static_cast<unsigned __int128>(b.size()) * b.size();
    const unsigned __int128 nd2 = static_cast<unsigned __int128>(d.size()) * d.size();
    both = static_cast<unsigned __int128>(on_lines) + static_cast<unsigned __int128>(eb.size()) * eb.size() * nd2 +
           static_cast<unsigned __int128>(ed.size()) * ed.size() * nb2 - ebd.size() * ebd.size();
  }

  QuadCount out;
  out.finite = detail::narrow_u128(finite);
  out.infinity = detail::narrow_u128(2 * mixed + both);
  out.total = detail::checked_add(out.finite, out.infinity);
  return out;
}

inline QuadCount quad_count_Q(const FpSet& a) { return quad_count_Q(a, a, a, a); }

struct OracleLimits {
  std::size_t max_set_size = 16;  ///< |X|^2 <= 256 points per product set
  residue max_modulus = 4096;
};


/// Q(A, B, C, D) by walking every line: sum over lines of the product of the
/// four point counts, minus the p extra lines each all-equal quadruple sits on.
inline std::uint64_t quad_count_geometric(const FpSet& a, const FpSet& b, const FpSet& c, const FpSet& d,
                                          const OracleLimits& limits = {}) {
  a.require_same_field(b);
  a.require_same_field(c);
  a.require_same_field(d);
  for (const FpSet* s : {&a, &b, &c, &d})
    if (s->size() > limits.max_set_size)
      throw oracle_limit_error("quad_count_geometric: set of size " + std::to_string(s->size()) +
                               " exceeds oracle limit " + std::to_string(limits.max_set_size));
  if (a.modulus() > limits.max_modulus)
    throw oracle_limit_error("quad_count_geometric: modulus exceeds oracle limit");
  unsigned __int128 incidences = 0;
  detail::for_each_line({&a, &b, &c, &d}, [&](const std::vector<std::uint64_t>& n) {
    incidences += static_cast<unsigned __int128>(n[0]) * n[1] * n[2] * n[3];
  });
  const unsigned __int128 common = (a & b & c & d).size();
  return detail::narrow_u128(incidences - a.modulus() * common * common);
}

// ---------------------------------------------------------------------------
// Dyadic line histogram
// ---------------------------------------------------------------------------

/// Lines meeting both A x A and B x B, bucketed by (floor log2 |l ∩ A^2|,
/// floor log2 |l ∩ B^2|). Empty buckets are not stored.
struct LineHistogram {
  residue modulus = 0;
  std::map<std::pair<unsigned, unsigned>, std::uint64_t> buckets;
  std::uint64_t weighted_sum = 0;      ///< sum over lines of |l∩A^2|^2 |l∩B^2|^2
  std::uint64_t dyadic_lower_sum = 0;  ///< sum over buckets of |L_ij| 4^i 4^j

  std::uint64_t line_count() const {
    std::uint64_t s = 0;
    for (const auto& [k, v] : buckets) s += v;
    return s;
  }
  friend bool operator==(const LineHistogram&, const LineHistogram&) = default;
};

inline LineHistogram line_histogram(const FpSet& a, const FpSet& b) {
  a.require_same_field(b);
  if (a.empty() || b.empty()) throw precondition_error("line_histogram: sets must be nonempty");
  LineHistogram h;
  h.modulus = a.modulus();
  unsigned __int128 weighted = 0, lower = 0;
  detail::for_each_line({&a, &b}, [&](const std::vector<std::uint64_t>& n) {
    if (n[0] == 0 || n[1] == 0) return;
    const auto i = static_cast<unsigned>(std::bit_width(n[0]) - 1);
    const auto j = static_cast<unsigned>(std::bit_width(n[1]) - 1);
    ++h.buckets[{i, j}];
    weighted += static_cast<unsigned __int128>(n[0] * n[0]) * (n[1] * n[1]);
    lower += static_cast<unsigned __int128>(1) << (2 * (i + j));
  });
  h.weighted_sum = detail::narrow_u128(weighted);
  h.dyadic_lower_sum = detail::narrow_u128(lower);
  return h;
}

// ---------------------------------------------------------------------------
// Support of q_{A,B,A,B} under coset inclusion hypotheses
// ---------------------------------------------------------------------------

struct SigmaReport {
  bool hypotheses_hold = true;
  std::string failed_hypothesis;  ///< empty when both inclusions hold

  std::uint64_t sigma = 0;               ///< |supp q_{A,B,A,B}|
  std::uint64_t sigma_prime = 0;         ///< support points with x, y, x/y outside the exceptional set
  std::uint64_t sigma_double_prime = 0;  ///< sigma - sigma_prime
  std::uint64_t coset_solutions = 0;     ///< #{(g1, g2, g) : 1 - e1 g1 = e2 g (1 - e1 g2)}
  std::uint64_t coset_energy = 0;        ///< E+(G, -e1 G, e2 G, -e1 e2 G)
  std::uint64_t gamma_energy = 0;        ///< E+(G)
  std::uint64_t gamma_size = 0;
  std::uint64_t omega = 0;               ///< max(|Omega1|, |Omega2|)
  std::uint64_t q_mass = 0;              ///< finite mass of q, = |A|^2|B|^2 - infinity mass
  std::uint64_t infinity_mass = 0;
  std::uint64_t q_sum_of_squares = 0;
  std::uint64_t quad_total = 0;          ///< Q(A, B, A, B), vertical lines included

  /// sigma' <= E+(G) / |G|, compared as sigma' |G| <= E+(G).
  bool energy_bound_holds() const {
    return static_cast<unsigned __int128>(sigma_prime) * gamma_size <= gamma_energy;
  }
  /// sigma'' <= 12 omega |G| + 6 |G|.
  bool exceptional_bound_holds() const {
    return static_cast<unsigned __int128>(sigma_double_prime) <=
           static_cast<unsigned __int128>(12 * omega + 6) * gamma_size;
  }
  /// (sum q)^2 <= sigma * sum q^2.
  bool cauchy_schwarz_holds() const {
    return static_cast<unsigned __int128>(q_mass) * q_mass <= static_cast<unsigned __int128>(sigma) * q_sum_of_squares;
  }
};

struct SigmaInput {
  FpSet a;
  FpSet b;
  Subgroup gamma;
  residue eta1 = 1;
  residue eta2 = 1;
  FpSet omega1;
  FpSet omega2;
};

inline SigmaReport sigma_quantities(const SigmaInput& in) {
  const auto& f = in.a.field();
  for (const FpSet* s : {&in.b, &in.gamma.elements, &in.omega1, &in.omega2}) in.a.require_same_field(*s);
  if (in.eta1 % f.modulus() == 0 || in.eta2 % f.modulus() == 0)
    throw precondition_error("sigma_quantities: eta1 and eta2 must be nonzero");
  const residue e1 = in.eta1 % f.modulus(), e2 = in.eta2 % f.modulus();

  SigmaReport r;
  r.gamma_size = in.gamma.order;
  r.omega = std::max(in.omega1.size(), in.omega2.size());

  const FpSet allowed1 = coset(in.gamma, e1) | in.omega1;
  const FpSet allowed2 = coset(in.gamma, e2) | in.omega2;
  if (!triple_support(in.b, in.a, in.a).is_subset_of(allowed1)) {
    r.hypotheses_hold = false;
    r.failed_hypothesis = "T[B,A,A] not contained in eta1*Gamma u Omega1";
  } else if (!triple_support(in.a, in.b, in.b).is_subset_of(allowed2)) {
    r.hypotheses_hold = false;
    r.failed_hypothesis = "T[A,B,B] not contained in eta2*Gamma u Omega2";
  }

  // Exceptional values: (1 - Omega1)^{-1} u Omega2 u {0}.
  FpSet exceptional = in.omega2;
  exceptional.insert(0);
  in.omega1.for_each([&](residue w) {
    const residue one_minus = f.sub(1, w);
    if (one_minus != 0) exceptional.insert(f.inv(one_minus));
  });

  const QTable q = q_fn(in.a, in.b, in.a, in.b);
  r.sigma = q.support_size();
  r.infinity_mass = q.infinity_mass;
  r.q_mass = q.finite_mass();
  r.q_sum_of_squares = q.sum_of_squares();
  for (const auto& e : q.entries) {
    const bool special = exceptional.contains(e.x) || exceptional.contains(e.y) ||
                         exceptional.contains(f.div(e.x, e.y));  // y == 0 is already exceptional
    if (!special) ++r.sigma_prime;
  }
  r.sigma_double_prime = r.sigma - r.sigma_prime;
  r.quad_total = quad_count_Q(in.a, in.b, in.a, in.b).total;

  const auto g = in.gamma.elements.elements();
  for (residue g1 : g) {
    const residue lhs = f.sub(1, f.mul(e1, g1));
    for (residue g2 : g) {
      const residue m = f.mul(e2, f.sub(1, f.mul(e1, g2)));
      if (m == 0) {
        if (lhs == 0) r.coset_solutions += g.size();
      } else if (in.gamma.contains(f.div(lhs, m))) {
        ++r.coset_solutions;
      }
    }
  }
  const FpSet& G = in.gamma.elements;
  r.coset_energy = energy4(G, coset(in.gamma, f.neg(e1)), coset(in.gamma, e2), coset(in.gamma, f.neg(f.mul(e1, e2))));
  r.gamma_energy = additive_energy(G);
  return r;
}

}  // namespace ffcomb
