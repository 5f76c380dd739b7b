#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ffcomb/bounds.hpp"
#include "ffcomb/decompose.hpp"
#include "ffcomb/incidence.hpp"
#include "ffcomb/setops.hpp"

// JSON forms of the public result types. Sets are written as their
// "p:{...}" strings so every record stays self-describing.

namespace nlohmann {

template <>
struct adl_serializer<ffcomb::FpSet> {
  template <class J>
  static void to_json(J& j, const ffcomb::FpSet& s) {
    j = s.to_string();
  }
  template <class J>
  static ffcomb::FpSet from_json(const J& j) {
    return ffcomb::parse_fpset(j.template get<std::string>());
  }
};

template <>
struct adl_serializer<ffcomb::Witness> {
  template <class J>
  static void to_json(J& j, const ffcomb::Witness& w) {
    j = J{{"B", w.b.to_string()}, {"C", w.c.to_string()}};
  }
  template <class J>
  static ffcomb::Witness from_json(const J& j) {
    return {ffcomb::parse_fpset(j.at("B").template get<std::string>()),
            ffcomb::parse_fpset(j.at("C").template get<std::string>())};
  }
};

template <>
struct adl_serializer<ffcomb::DecompositionResult> {
  template <class J>
  static void to_json(J& j, const ffcomb::DecompositionResult& r) {
    j = J::object();
    j["target"] = r.target.to_string();
    j["p"] = r.target.modulus();
    j["witnesses"] = J::array();
    for (const auto& w : r.witnesses) j["witnesses"].push_back(w);
    j["exhaustive"] = r.exhaustive;
    j["budget_exhausted"] = r.budget_exhausted;
    j["nodes"] = r.nodes;
    j["ms"] = r.wall_ms;
  }
  template <class J>
  static ffcomb::DecompositionResult from_json(const J& j) {
    ffcomb::DecompositionResult r{ffcomb::parse_fpset(j.at("target").template get<std::string>()), {}, true, false, 0, 0};
    for (const auto& w : j.at("witnesses")) r.witnesses.push_back(w.template get<ffcomb::Witness>());
    r.exhaustive = j.at("exhaustive").template get<bool>();
    r.budget_exhausted = j.value("budget_exhausted", false);
    r.nodes = j.at("nodes").template get<std::uint64_t>();
    r.wall_ms = j.value("ms", 0.0);  // survey records omit the timing
    return r;
  }
};

template <>
struct adl_serializer<ffcomb::MaxSetResult> {
  template <class J>
  static void to_json(J& j, const ffcomb::MaxSetResult& r) {
    j = J{{"set", r.set.to_string()},
          {"size", r.set.size()},
          {"exhaustive", r.exhaustive},
          {"nodes", r.nodes},
          {"maximum_cliques", r.maximum_cliques}};
  }
  template <class J>
  static ffcomb::MaxSetResult from_json(const J& j) {
    return {ffcomb::parse_fpset(j.at("set").template get<std::string>()), j.at("exhaustive").template get<bool>(),
            j.at("nodes").template get<std::uint64_t>(), j.at("maximum_cliques").template get<std::size_t>()};
  }
};

template <>
struct adl_serializer<ffcomb::DilateWitness> {
  template <class J>
  static void to_json(J& j, const ffcomb::DilateWitness& w) {
    j = J{{"A", w.a.to_string()}, {"xi", w.xi}};
  }
  template <class J>
  static ffcomb::DilateWitness from_json(const J& j) {
    return {ffcomb::parse_fpset(j.at("A").template get<std::string>()), j.at("xi").template get<ffcomb::residue>()};
  }
};

}  // namespace nlohmann

namespace ffcomb {

template <class J>
void to_json(J& j, const CountTable& t) {
  j = J{{"p", t.modulus}, {"counts", t.counts}, {"infinity", t.infinity_count}};
}
template <class J>
void from_json(const J& j, CountTable& t) {
  t.modulus = j.at("p").template get<residue>();
  t.counts = j.at("counts").template get<std::vector<std::uint64_t>>();
  t.infinity_count = j.at("infinity").template get<std::uint64_t>();
}

template <class J>
void to_json(J& j, const TripleCount& t) {
  j = J{{"finite", t.finite}, {"with_infinity", t.with_infinity}};
}
template <class J>
void from_json(const J& j, TripleCount& t) {
  t.finite = j.at("finite").template get<std::uint64_t>();
  t.with_infinity = j.at("with_infinity").template get<std::uint64_t>();
}

template <class J>
void to_json(J& j, const QuadCount& q) {
  j = J{{"finite", q.finite}, {"infinity", q.infinity}, {"total", q.total}};
}
template <class J>
void from_json(const J& j, QuadCount& q) {
  q.finite = j.at("finite").template get<std::uint64_t>();
  q.infinity = j.at("infinity").template get<std::uint64_t>();
  q.total = j.at("total").template get<std::uint64_t>();
}

/// entries as [x, y, count] triples.
template <class J>
void to_json(J& j, const QTable& q) {
  J entries = J::array();
  for (const auto& e : q.entries) entries.push_back(J::array({e.x, e.y, e.count}));
  j = J{{"p", q.modulus}, {"entries", std::move(entries)}, {"infinity_mass", q.infinity_mass}};
}
template <class J>
void from_json(const J& j, QTable& q) {
  q.modulus = j.at("p").template get<residue>();
  q.entries.clear();
  for (const auto& e : j.at("entries"))
    q.entries.push_back({e.at(0).template get<residue>(), e.at(1).template get<residue>(),
                         e.at(2).template get<std::uint64_t>()});
  q.infinity_mass = j.at("infinity_mass").template get<std::uint64_t>();
}

/// buckets as [i, j, count] triples.
template <class J>
void to_json(J& j, const LineHistogram& h) {
  J buckets = J::array();
  for (const auto& [k, v] : h.buckets) buckets.push_back(J::array({k.first, k.second, v}));
  j = J{{"p", h.modulus},
        {"buckets", std::move(buckets)},
        {"weighted_sum", h.weighted_sum},
        {"dyadic_lower_sum", h.dyadic_lower_sum}};
}
template <class J>
void from_json(const J& j, LineHistogram& h) {
  h.modulus = j.at("p").template get<residue>();
  h.buckets.clear();
  for (const auto& b : j.at("buckets"))
    h.buckets[{b.at(0).template get<unsigned>(), b.at(1).template get<unsigned>()}] =
        b.at(2).template get<std::uint64_t>();
  h.weighted_sum = j.at("weighted_sum").template get<std::uint64_t>();
  h.dyadic_lower_sum = j.at("dyadic_lower_sum").template get<std::uint64_t>();
}

namespace detail {

template <class J>
J finite_or_null(double x) {
  return std::isfinite(x) ? J(x) : J(nullptr);
}

template <class J>
double number_or_nan(const J& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.template get<double>();
}

}  // namespace detail

/// Non-finite numbers (ratio with rhs = 0) are written as null.
template <class J>
void to_json(J& j, const BoundReport& r) {
  j = J::object();
  j["name"] = r.name;
  j["kind"] = std::string(to_string(r.kind));
  j["lower_bound"] = r.lower_bound;
  j["lhs"] = detail::finite_or_null<J>(r.lhs);
  j["exact"] = r.exact;
  j["rhs"] = detail::finite_or_null<J>(r.rhs);
  j["ratio"] = detail::finite_or_null<J>(r.ratio);
  j["preconditions_met"] = r.preconditions_met;
  j["precondition_note"] = r.precondition_note;
  j["passed"] = r.passed ? J(*r.passed) : J(nullptr);
  j["flags"] = r.flags;
  j["instance"] = r.instance;
  j["details"] = r.details;
}
template <class J>
void from_json(const J& j, BoundReport& r) {
  r.name = j.at("name").template get<std::string>();
  r.kind = parse_bound_kind(j.at("kind").template get<std::string>());
  r.lower_bound = j.at("lower_bound").template get<bool>();
  r.lhs = detail::number_or_nan(j.at("lhs"));
  r.exact = j.at("exact").template get<std::uint64_t>();
  r.rhs = detail::number_or_nan(j.at("rhs"));
  r.ratio = detail::number_or_nan(j.at("ratio"));
  r.preconditions_met = j.at("preconditions_met").template get<bool>();
  r.precondition_note = j.at("precondition_note").template get<std::string>();
  r.passed = j.at("passed").is_null() ? std::nullopt : std::optional<bool>(j.at("passed").template get<bool>());
  r.flags = j.at("flags").template get<std::vector<std::string>>();
  r.instance = j.at("instance");
  r.details = j.at("details");
}

template <class J>
void to_json(J& j, const SigmaReport& s) {
  j = J{{"hypotheses_hold", s.hypotheses_hold},
        {"failed_hypothesis", s.failed_hypothesis},
        {"sigma", s.sigma},
        {"sigma_prime", s.sigma_prime},
        {"sigma_double_prime", s.sigma_double_prime},
        {"coset_solutions", s.coset_solutions},
        {"coset_energy", s.coset_energy},
        {"gamma_energy", s.gamma_energy},
        {"gamma_size", s.gamma_size},
        {"omega", s.omega},
        {"q_mass", s.q_mass},
        {"infinity_mass", s.infinity_mass},
        {"q_sum_of_squares", s.q_sum_of_squares},
        {"quad_total", s.quad_total}};
}

inline constexpr const char* kCsvHeader = "name,p,d,lhs,rhs,ratio,preconditions_met";

inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// One CSV line (no trailing newline) matching kCsvHeader.
inline std::string csv_row(const BoundReport& r) {
  const auto p = r.instance.value("p", std::uint64_t{0});
  const auto d = r.instance.value("d", std::uint64_t{0});
  std::ostringstream os;
  os << r.name << ',' << p << ',' << d << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
     << format_double(r.ratio) << ',' << (r.preconditions_met ? "true" : "false");
  return os.str();
}

}  // namespace ffcomb
