#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ffcomb/errors.hpp"

namespace ffcomb {

using residue = std::uint32_t;

/// Largest modulus accepted by default. Every table in the library is O(p).
inline constexpr std::uint64_t kDefaultMaxModulus = std::uint64_t{1} << 20;

/// Deterministic trial division. Requires n >= 2.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) throw precondition_error("is_prime: n must be >= 2");
  if (n < 4) return true;
  if (n % 2 == 0 || n % 3 == 0) return false;
  for (std::uint64_t i = 5; i <= n / i; i += 6)
    if (n % i == 0 || n % (i + 2) == 0) return false;
  return true;
}

struct PrimePower {
  std::uint64_t prime;
  unsigned exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Prime factorization with strictly increasing primes; factorize(1) is empty.
inline std::vector<PrimePower> factorize(std::uint64_t n) {
  if (n == 0) throw precondition_error("factorize: n must be >= 1");
  std::vector<PrimePower> out;
  for (std::uint64_t q = 2; q <= n / q; q += (q == 2 ? 1 : 2)) {
    if (n % q != 0) continue;
    unsigned e = 0;
    while (n % q == 0) {
      n /= q;
      ++e;
    }
    out.push_back({q, e});
  }
  if (n > 1) out.push_back({n, 1});
  return out;
}

/// All positive divisors of n, ascending.
inline std::vector<std::uint64_t> divisors(std::uint64_t n) {
  std::vector<std::uint64_t> ds{1};
  for (const auto& [q, e] : factorize(n)) {
    const std::size_t base = ds.size();
    std::uint64_t pw = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pw *= q;
      for (std::size_t i = 0; i < base; ++i) ds.push_back(ds[i] * pw);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  unsigned __int128 result = 1 % mod;
  unsigned __int128 b = base % mod;
  while (exp) {
    if (exp & 1) result = (result * b) % mod;
    b = (b * b) % mod;
    exp >>= 1;
  }
  return static_cast<std::uint64_t>(result);
}

/// Smallest generator of (Z/pZ)^*.
inline std::uint64_t primitive_root(std::uint64_t p) {
  if (p < 2 || !is_prime(p)) throw precondition_error("primitive_root: modulus must be prime");
  if (p == 2) return 1;
  const auto fs = factorize(p - 1);
  for (std::uint64_t g = 2; g < p; ++g) {
    bool ok = true;
    for (const auto& f : fs) {
      if (pow_mod(g, (p - 1) / f.prime, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw std::logic_error("primitive_root: no generator found");  // unreachable for prime p
}

/// The field F_p with its smallest primitive root and a shared inverse table.
/// Cheap to copy; immutable after construction.
class PrimeField {
 public:
  explicit PrimeField(std::uint64_t p, std::uint64_t max_modulus = kDefaultMaxModulus) {
    if (p < 2 || p > max_modulus)
      throw precondition_error("PrimeField: modulus " + std::to_string(p) + " outside [2, " +
                               std::to_string(max_modulus) + "]");
    if (!is_prime(p)) throw precondition_error("PrimeField: " + std::to_string(p) + " is not prime");
    p_ = static_cast<residue>(p);
    g_ = static_cast<residue>(primitive_root(p));
    auto inv = std::make_shared<std::vector<residue>>(p_, 0);
    if (p_ > 1) (*inv)[1] = 1;
    for (std::uint64_t i = 2; i < p_; ++i)
      (*inv)[i] = static_cast<residue>(p_ - (std::uint64_t{p_ / i} * (*inv)[p_ % i]) % p_);
    inverse_ = std::move(inv);
  }

  residue modulus() const noexcept { return p_; }
  residue generator() const noexcept { return g_; }

  residue reduce(std::int64_t x) const noexcept {
    const std::int64_t m = static_cast<std::int64_t>(p_);
    std::int64_t r = x % m;
    return static_cast<residue>(r < 0 ? r + m : r);
  }

  residue add(residue a, residue b) const noexcept {
    const std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<residue>(s >= p_ ? s - p_ : s);
  }
  residue sub(residue a, residue b) const noexcept { return a >= b ? a - b : a + p_ - b; }
  residue neg(residue a) const noexcept { return a == 0 ? 0 : p_ - a; }
  residue mul(residue a, residue b) const noexcept {
    return static_cast<residue>((std::uint64_t{a} * b) % p_);
  }
  /// Requires a != 0.
  residue inv(residue a) const {
    if (a == 0) throw precondition_error("PrimeField::inv: zero has no inverse");
    return (*inverse_)[a];
  }
  residue div(residue a, residue b) const { return mul(a, inv(b)); }
  residue pow(residue a, std::uint64_t e) const noexcept {
    return static_cast<residue>(pow_mod(a, e, p_));
  }

  /// Multiplicative order of a nonzero element.
  std::uint64_t order(residue a) const {
    if (a == 0) throw precondition_error("PrimeField::order: zero");
    std::uint64_t ord = p_ - 1;
    for (const auto& f : factorize(p_ - 1)) {
      for (unsigned k = 0; k < f.exponent && pow(a, ord / f.prime) == 1; ++k) ord /= f.prime;
    }
    return ord;
  }

  friend bool operator==(const PrimeField& a, const PrimeField& b) noexcept { return a.p_ == b.p_; }

 private:
  residue p_ = 0;
  residue g_ = 0;
  std::shared_ptr<const std::vector<residue>> inverse_;
};

}  // namespace ffcomb
