#pragma once

#include <cstdint>
#include <string>

#include "ffcomb/field.hpp"
#include "ffcomb/fpset.hpp"

namespace ffcomb {

/// The unique multiplicative subgroup of F_p^* of a given order.
struct Subgroup {
  PrimeField field;
  std::uint64_t order;
  residue generator;  ///< g^((p-1)/order) for the field's smallest primitive root g
  FpSet elements;

  residue modulus() const noexcept { return field.modulus(); }
  bool contains(residue x) const noexcept { return elements.contains(x); }
};

inline Subgroup subgroup(const PrimeField& field, std::uint64_t d) {
  const std::uint64_t n = field.modulus() - 1;
  if (d == 0 || n % d != 0)
    throw precondition_error("subgroup: order " + std::to_string(d) + " does not divide p-1 = " + std::to_string(n));
  const residue h = field.pow(field.generator(), n / d);
  FpSet elems(field);
  residue x = 1;
  for (std::uint64_t j = 0; j < d; ++j) {
    elems.insert(x);
    x = field.mul(x, h);
  }
  return Subgroup{field, d, h, std::move(elems)};
}

/// The coset xi * Gamma.
inline FpSet coset(const Subgroup& g, residue xi) {
  if (xi % g.modulus() == 0) throw precondition_error("coset: xi must be nonzero");
  xi %= g.modulus();
  FpSet out(g.field);
  g.elements.for_each([&](residue x) { out.insert(g.field.mul(xi, x)); });
  return out;
}

}  // namespace ffcomb
