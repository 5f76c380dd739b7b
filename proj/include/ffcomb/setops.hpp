#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ffcomb/fpset.hpp"

namespace ffcomb {

/// Counts indexed by F_p plus one slot for the point at infinity
/// (ratios with a zero denominator).
struct CountTable {
  residue modulus = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t infinity_count = 0;

  std::uint64_t at(residue x) const { return counts.at(x); }

  std::uint64_t finite_total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s = detail::checked_add(s, c);
    return s;
  }
  std::uint64_t total() const { return detail::checked_add(finite_total(), infinity_count); }

  std::uint64_t sum_of_squares() const {
    unsigned __int128 s = 0;
    for (auto c : counts) s += static_cast<unsigned __int128>(c) * c;
    return detail::narrow_u128(s);
  }

  friend bool operator==(const CountTable&, const CountTable&) = default;
};

enum class RepOp { sum, diff, product, ratio };

inline std::string_view to_string(RepOp op) {
  switch (op) {
    case RepOp::sum: return "sum";
    case RepOp::diff: return "diff";
    case RepOp::product: return "product";
    case RepOp::ratio: return "ratio";
  }
  return "?";
}

inline RepOp parse_rep_op(std::string_view s) {
  if (s == "sum") return RepOp::sum;
  if (s == "diff") return RepOp::diff;
  if (s == "product") return RepOp::product;
  if (s == "ratio") return RepOp::ratio;
  throw precondition_error("unknown set operation '" + std::string(s) + "'");
}

namespace detail {

template <class Op>
FpSet pairwise(const FpSet& a, const FpSet& b, Op op) {
  a.require_same_field(b);
  FpSet out(a.field());
  const auto eb = b.elements();
  a.for_each([&](residue x) {
    for (residue y : eb) out.insert(op(x, y));
  });
  return out;
}

}  // namespace detail

inline FpSet sumset(const FpSet& a, const FpSet& b) {
  const auto& f = a.field();
  return detail::pairwise(a, b, [&](residue x, residue y) { return f.add(x, y); });
}

inline FpSet diffset(const FpSet& a, const FpSet& b) {
  const auto& f = a.field();
  return detail::pairwise(a, b, [&](residue x, residue y) { return f.sub(x, y); });
}

inline FpSet productset(const FpSet& a, const FpSet& b) {
  const auto& f = a.field();
  return detail::pairwise(a, b, [&](residue x, residue y) { return f.mul(x, y); });
}

/// {a / b : a in A, b in B, b != 0}. With exclude_diagonal, pairs with a == b
/// are skipped, so 1 appears only when realized by two distinct elements.
inline FpSet ratioset(const FpSet& a, const FpSet& b, bool exclude_diagonal) {
  a.require_same_field(b);
  if (b.size() == 0 || (b.size() == 1 && b.contains(0)))
    throw precondition_error("ratioset: denominator set has no nonzero element");
  const auto& f = a.field();
  FpSet out(f);
  const auto ea = a.elements();
  b.for_each([&](residue y) {
    if (y == 0) return;
    const residue yi = f.inv(y);
    for (residue x : ea) {
      if (exclude_diagonal && x == y) continue;
      out.insert(f.mul(x, yi));
    }
  });
  return out;
}

inline FpSet dilate(const FpSet& a, residue xi) {
  const auto& f = a.field();
  xi %= f.modulus();
  if (xi == 0) throw precondition_error("dilate: factor must be nonzero");
  FpSet out(f);
  a.for_each([&](residue x) { out.insert(f.mul(x, xi)); });
  return out;
}

inline FpSet translate(const FpSet& a, residue shift) {
  const auto& f = a.field();
  shift %= f.modulus();
  FpSet out(f);
  a.for_each([&](residue x) { out.insert(f.add(x, shift)); });
  return out;
}

inline FpSet negate(const FpSet& a) {
  const auto& f = a.field();
  FpSet out(f);
  a.for_each([&](residue x) { out.insert(f.neg(x)); });
  return out;
}

/// {1/a}. Zero is rejected unless drop_zero is set, in which case it is skipped.
inline FpSet inverse_set(const FpSet& a, bool drop_zero = false) {
  if (a.contains(0) && !drop_zero) throw precondition_error("inverse_set: 0 has no inverse");
  const auto& f = a.field();
  FpSet out(f);
  a.for_each([&](residue x) {
    if (x != 0) out.insert(f.inv(x));
  });
  return out;
}

/// counts[x] = #{(a, b) : a op b = x}. For ratios, pairs with b = 0 land in
/// infinity_count so the total mass is always |A||B|.
inline CountTable rep_fn(const FpSet& a, const FpSet& b, RepOp op) {
  a.require_same_field(b);
  const auto& f = a.field();
  CountTable t{f.modulus(), std::vector<std::uint64_t>(f.modulus(), 0), 0};
  const auto ea = a.elements();
  b.for_each([&](residue y) {
    switch (op) {
      case RepOp::sum:
        for (residue x : ea) ++t.counts[f.add(x, y)];
        break;
      case RepOp::diff:
        for (residue x : ea) ++t.counts[f.sub(x, y)];
        break;
      case RepOp::product:
        for (residue x : ea) ++t.counts[f.mul(x, y)];
        break;
      case RepOp::ratio:
        if (y == 0) {
          t.infinity_count += ea.size();
        } else {
          const residue yi = f.inv(y);
          for (residue x : ea) ++t.counts[f.mul(x, yi)];
        }
        break;
    }
  });
  return t;
}

/// E+(A): quadruples with a1 + a2 = a3 + a4. Both the sum and the difference
/// representation routes are evaluated; a disagreement is a logic error.
inline std::uint64_t additive_energy(const FpSet& a) {
  const auto plus = rep_fn(a, a, RepOp::sum).sum_of_squares();
  const auto minus = rep_fn(a, a, RepOp::diff).sum_of_squares();
  if (plus != minus) throw std::logic_error("additive_energy: sum and difference routes disagree");
  return plus;
}

/// Multiplicative energy, counted the same way with products.
inline std::uint64_t multiplicative_energy(const FpSet& a) {
  return rep_fn(a, a, RepOp::product).sum_of_squares();
}

/// #{(a, b, c, d) in A x B x C x D : a + b = c + d}.
inline std::uint64_t energy4(const FpSet& a, const FpSet& b, const FpSet& c, const FpSet& d) {
  a.require_same_field(b);
  a.require_same_field(c);
  a.require_same_field(d);
  const auto left = rep_fn(a, b, RepOp::sum);
  const auto right = rep_fn(c, d, RepOp::sum);
  unsigned __int128 s = 0;
  for (std::size_t x = 0; x < left.counts.size(); ++x)
    s += static_cast<unsigned __int128>(left.counts[x]) * right.counts[x];
  return detail::narrow_u128(s);
}

}  // namespace ffcomb
