#pragma once

#include <charconv>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffcomb/bitset.hpp"
#include "ffcomb/field.hpp"

namespace ffcomb {

/// A subset of F_p stored as a membership bit vector of length p.
/// The cardinality is kept in sync with the bits by every mutator.
class FpSet {
 public:
  explicit FpSet(PrimeField field) : field_(std::move(field)), bits_(field_.modulus()) {}

  /// Elements are reduced modulo p, so negative inputs are accepted.
  FpSet(PrimeField field, std::initializer_list<std::int64_t> values) : FpSet(std::move(field)) {
    for (auto v : values) insert(field_.reduce(v));
  }

  template <class Range>
  static FpSet from_values(PrimeField field, const Range& values) {
    FpSet s(std::move(field));
    for (auto v : values) s.insert(s.field_.reduce(static_cast<std::int64_t>(v)));
    return s;
  }

  static FpSet full(const PrimeField& field) {
    FpSet s(field);
    s.bits_.set_all();
    s.size_ = field.modulus();
    return s;
  }

  const PrimeField& field() const noexcept { return field_; }
  residue modulus() const noexcept { return field_.modulus(); }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool contains(residue x) const noexcept { return x < field_.modulus() && bits_.test(x); }

  void insert(residue x) {
    check_range(x);
    if (!bits_.test(x)) {
      bits_.set(x);
      ++size_;
    }
  }
  void erase(residue x) {
    check_range(x);
    if (bits_.test(x)) {
      bits_.reset(x);
      --size_;
    }
  }

  template <class F>
  void for_each(F&& f) const {
    bits_.for_each([&](std::size_t i) { f(static_cast<residue>(i)); });
  }

  /// Sorted element list.
  std::vector<residue> elements() const {
    std::vector<residue> out;
    out.reserve(size_);
    for_each([&](residue x) { out.push_back(x); });
    return out;
  }

  residue min() const {
    if (empty()) throw precondition_error("FpSet::min: empty set");
    return static_cast<residue>(bits_.find_next(0));
  }

  const Bitset& bits() const noexcept { return bits_; }

  bool is_subset_of(const FpSet& o) const {
    require_same_field(o);
    return bits_.is_subset_of(o.bits_);
  }

  FpSet& operator&=(const FpSet& o) {
    require_same_field(o);
    bits_ &= o.bits_;
    size_ = bits_.count();
    return *this;
  }
  FpSet& operator|=(const FpSet& o) {
    require_same_field(o);
    bits_ |= o.bits_;
    size_ = bits_.count();
    return *this;
  }
  friend FpSet operator&(FpSet a, const FpSet& b) { return a &= b; }
  friend FpSet operator|(FpSet a, const FpSet& b) { return a |= b; }

  friend bool operator==(const FpSet& a, const FpSet& b) noexcept {
    return a.field_ == b.field_ && a.bits_ == b.bits_;
  }

  /// Lexicographic order on sorted element lists (shorter prefix first).
  friend bool lex_less(const FpSet& a, const FpSet& b) {
    const auto ea = a.elements(), eb = b.elements();
    return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end());
  }

  void require_same_field(const FpSet& o) const {
    if (!(field_ == o.field_))
      throw field_mismatch("FpSet: moduli " + std::to_string(modulus()) + " and " +
                           std::to_string(o.modulus()) + " differ");
  }

  /// `p:{e1,e2,...}` with ascending elements, e.g. `13:{1,3,4,9,10,12}`.
  std::string to_string() const {
    std::string s = std::to_string(modulus()) + ":{";
    bool first = true;
    for_each([&](residue x) {
      if (!first) s += ',';
      s += std::to_string(x);
      first = false;
    });
    s += '}';
    return s;
  }

 private:
  void check_range(residue x) const {
    if (x >= field_.modulus())
      throw precondition_error("FpSet: element " + std::to_string(x) + " not in [0, " +
                               std::to_string(field_.modulus()) + ")");
  }

  PrimeField field_;
  Bitset bits_;
  std::size_t size_ = 0;
};

namespace detail {

inline std::uint64_t parse_uint(std::string_view s, std::string_view what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw precondition_error(std::string(what) + ": expected a nonnegative integer, got '" + std::string(s) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s, std::string_view what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw precondition_error(std::string(what) + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

/// Splits "1, 2,3" into integers. An empty string yields an empty list.
inline std::vector<std::int64_t> parse_int_list(std::string_view s, std::string_view what) {
  std::vector<std::int64_t> out;
  if (s.find_first_not_of(' ') == std::string_view::npos) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(parse_int(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start), what));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Inverse of FpSet::to_string. Elements must already be canonical residues.
inline FpSet parse_fpset(std::string_view text, std::uint64_t max_modulus = kDefaultMaxModulus) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || text.size() < colon + 3 || text[colon + 1] != '{' || text.back() != '}')
    throw precondition_error("parse_fpset: expected 'p:{...}', got '" + std::string(text) + "'");
  PrimeField field(detail::parse_uint(text.substr(0, colon), "parse_fpset modulus"), max_modulus);
  FpSet s(field);
  const auto body = text.substr(colon + 2, text.size() - colon - 3);
  for (auto v : detail::parse_int_list(body, "parse_fpset element")) {
    if (v < 0 || static_cast<std::uint64_t>(v) >= field.modulus())
      throw precondition_error("parse_fpset: element " + std::to_string(v) + " is not a residue mod " +
                               std::to_string(field.modulus()));
    s.insert(static_cast<residue>(v));
  }
  return s;
}

}  // namespace ffcomb
