#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ffcomb {

/// Raised when an operation is called outside its documented domain.
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two sets (or a set and a subgroup) live over different moduli.
class field_mismatch : public precondition_error {
 public:
  using precondition_error::precondition_error;
};

/// A brute-force oracle was asked to run past its configured size limit.
class oracle_limit_error : public precondition_error {
 public:
  using precondition_error::precondition_error;
};

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("ffcomb: count accumulator overflow");
  return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("ffcomb: count accumulator overflow");
  return r;
}

inline std::uint64_t narrow_u128(unsigned __int128 v) {
  if (v > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("ffcomb: count exceeds 64 bits");
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail
}  // namespace ffcomb
