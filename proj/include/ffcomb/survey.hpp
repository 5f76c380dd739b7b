#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ffcomb/bounds.hpp"
#include "ffcomb/decompose.hpp"
#include "ffcomb/serialize.hpp"

namespace ffcomb {

using ojson = nlohmann::ordered_json;

/// An exponent a/b for the size cap |G|^b <= p^a.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "energy",       "theta_bound",     "decompose",    "prop_main",        "theorem_Q",  "lemma_QABAB",
      "T_support",    "maxset",          "ratio_decompose", "dilate_check", "singleton_remark"};
  return names;
}

struct SurveyConfig {
  std::pair<std::uint64_t, std::uint64_t> prime_range{5, 50};
  std::pair<std::uint64_t, std::uint64_t> subgroup_size_range{2, 1u << 20};
  std::optional<Rational> max_subgroup_vs_p_exponent;
  std::vector<std::string> checks;
  std::uint64_t seed = 1;
  std::uint64_t node_budget = default_node_budget();
  std::string output_path;  ///< JSONL; empty keeps records in memory only
  std::string csv_path;     ///< optional CSV of every report
  unsigned shifts_per_instance = 50;
  std::vector<unsigned> shift_k{1, 2};
  unsigned xi_samples = 3;
  std::uint64_t large_subgroup_threshold = 16;
  residue maxset_max_modulus = 512;
  /// decompose, prop_main and ratio_decompose stop at the first witness
  /// unless set; near-full subgroups have exponentially many witnesses.
  bool decompose_all_witnesses = false;
  unsigned workers = 1;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// "lo..hi", "lo,hi" or "[lo, hi]".
inline std::pair<std::uint64_t, std::uint64_t> parse_range(std::string_view key, std::string_view v) {
  std::string s = trim(v);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  auto dots = s.find("..");
  std::string lo, hi;
  if (dots != std::string::npos) {
    lo = s.substr(0, dots);
    hi = s.substr(dots + 2);
  } else {
    auto parts = split_list(s);
    if (parts.size() != 2) throw precondition_error(std::string(key) + ": expected a range lo..hi");
    lo = parts[0];
    hi = parts[1];
  }
  return {parse_uint(trim(lo), key), parse_uint(trim(hi), key)};
}

inline std::optional<Rational> parse_rational(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  if (s.empty() || s == "none") return std::nullopt;
  const auto slash = s.find('/');
  Rational r;
  if (slash == std::string::npos) {
    r.num = parse_uint(s, key);
  } else {
    r.num = parse_uint(trim(s.substr(0, slash)), key);
    r.den = parse_uint(trim(s.substr(slash + 1)), key);
  }
  if (r.den == 0) throw precondition_error(std::string(key) + ": zero denominator");
  return r;
}

/// x^e <= p^f with 128-bit saturation (x, p >= 1).
inline bool pow_le_saturating(std::uint64_t x, std::uint64_t e, std::uint64_t p, std::uint64_t f) {
  // Compare e*log(x) with f*log(p) exactly when the powers fit, else in long double.
  const long double lx = std::log2(static_cast<long double>(x)) * e;
  const long double lp = std::log2(static_cast<long double>(p)) * f;
  if (lx < 120 && lp < 120) return pow_le(x, static_cast<unsigned>(e), p, static_cast<unsigned>(f));
  return lx <= lp;
}

}  // namespace detail

/// Applies one key = value setting; used for config files and CLI overrides.
inline void apply_setting(SurveyConfig& cfg, std::string_view key_in, std::string_view value) {
  const std::string key = detail::trim(key_in);
  const std::string v = detail::trim(value);
  if (key == "prime_range") {
    cfg.prime_range = detail::parse_range(key, v);
  } else if (key == "subgroup_size_range") {
    cfg.subgroup_size_range = detail::parse_range(key, v);
  } else if (key == "max_subgroup_vs_p_exponent") {
    cfg.max_subgroup_vs_p_exponent = detail::parse_rational(key, v);
  } else if (key == "checks") {
    cfg.checks = detail::split_list(v);
  } else if (key == "seed") {
    cfg.seed = detail::parse_uint(v, key);
  } else if (key == "node_budget") {
    cfg.node_budget = detail::parse_uint(v, key);
  } else if (key == "output_path") {
    cfg.output_path = v;
  } else if (key == "csv_path") {
    cfg.csv_path = v;
  } else if (key == "shifts_per_instance") {
    cfg.shifts_per_instance = static_cast<unsigned>(detail::parse_uint(v, key));
  } else if (key == "shift_k") {
    cfg.shift_k.clear();
    for (const auto& s : detail::split_list(v)) cfg.shift_k.push_back(static_cast<unsigned>(detail::parse_uint(s, key)));
  } else if (key == "xi_samples") {
    cfg.xi_samples = static_cast<unsigned>(detail::parse_uint(v, key));
  } else if (key == "large_subgroup_threshold") {
    cfg.large_subgroup_threshold = detail::parse_uint(v, key);
  } else if (key == "maxset_max_modulus") {
    cfg.maxset_max_modulus = static_cast<residue>(detail::parse_uint(v, key));
  } else if (key == "decompose_all_witnesses") {
    if (v == "true" || v == "1")
      cfg.decompose_all_witnesses = true;
    else if (v == "false" || v == "0")
      cfg.decompose_all_witnesses = false;
    else
      throw precondition_error("decompose_all_witnesses: expected true or false, got '" + v + "'");
  } else if (key == "workers") {
    cfg.workers = static_cast<unsigned>(detail::parse_uint(v, key));
  } else {
    throw precondition_error("unknown survey setting '" + key + "'");
  }
}

inline void validate(const SurveyConfig& cfg) {
  if (cfg.prime_range.first > cfg.prime_range.second) throw precondition_error("prime_range is empty");
  if (cfg.subgroup_size_range.first > cfg.subgroup_size_range.second)
    throw precondition_error("subgroup_size_range is empty");
  if (cfg.prime_range.second > kDefaultMaxModulus) throw precondition_error("prime_range exceeds the modulus limit");
  for (const auto& c : cfg.checks)
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      throw precondition_error("unknown check '" + c + "'");
  for (unsigned k : cfg.shift_k)
    if (k == 0) throw precondition_error("shift_k entries must be positive");
  if (cfg.node_budget == 0) throw precondition_error("node_budget must be positive");
}

/// Reads "key = value" lines; '#' starts a comment.
inline SurveyConfig parse_survey_config(std::istream& in, SurveyConfig cfg = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw precondition_error("survey config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

inline SurveyConfig load_survey_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open survey config '" + path + "'");
  return parse_survey_config(in);
}

/// The settings that determine record contents (paths and worker count excluded).
inline ojson config_fingerprint(const SurveyConfig& cfg) {
  ojson j;
  j["prime_range"] = {cfg.prime_range.first, cfg.prime_range.second};
  j["subgroup_size_range"] = {cfg.subgroup_size_range.first, cfg.subgroup_size_range.second};
  if (cfg.max_subgroup_vs_p_exponent)
    j["max_subgroup_vs_p_exponent"] = std::to_string(cfg.max_subgroup_vs_p_exponent->num) + "/" +
                                      std::to_string(cfg.max_subgroup_vs_p_exponent->den);
  else
    j["max_subgroup_vs_p_exponent"] = nullptr;
  j["checks"] = cfg.checks;
  j["seed"] = cfg.seed;
  j["node_budget"] = cfg.node_budget;
  j["shifts_per_instance"] = cfg.shifts_per_instance;
  j["shift_k"] = cfg.shift_k;
  j["xi_samples"] = cfg.xi_samples;
  j["large_subgroup_threshold"] = cfg.large_subgroup_threshold;
  j["maxset_max_modulus"] = cfg.maxset_max_modulus;
  j["decompose_all_witnesses"] = cfg.decompose_all_witnesses;
  return j;
}

/// Every subgroup G of F_p^* with p prime in prime_range, |G| in
/// subgroup_size_range and, when set, |G| <= p^exponent; ascending (p, |G|).
inline std::vector<Subgroup> enumerate_instances(const SurveyConfig& cfg) {
  validate(cfg);
  std::vector<Subgroup> out;
  for (std::uint64_t p = std::max<std::uint64_t>(cfg.prime_range.first, 2); p <= cfg.prime_range.second; ++p) {
    if (!is_prime(p)) continue;
    const PrimeField f(static_cast<residue>(p));
    for (std::uint64_t d : divisors(p - 1)) {
      if (d < cfg.subgroup_size_range.first || d > cfg.subgroup_size_range.second) continue;
      if (const auto& e = cfg.max_subgroup_vs_p_exponent; e && !detail::pow_le_saturating(d, e->den, p, e->num)) continue;
      out.push_back(subgroup(f, d));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seeded sampling
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Uniform in [0, n) by rejection; mt19937_64 output is fixed by the standard,
/// unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// k distinct nonzero residues mod p.
inline std::vector<residue> sample_shifts(std::mt19937_64& rng, residue p, unsigned k) {
  if (k > p - 1) throw precondition_error("sample_shifts: more shifts than nonzero residues");
  std::vector<residue> out;
  while (out.size() < k) {
    const auto x = static_cast<residue>(1 + uniform_below(rng, p - 1));
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

}  // namespace detail

inline std::uint64_t record_seed(std::uint64_t seed, std::uint64_t p, std::uint64_t d, std::string_view check) {
  return detail::splitmix64(detail::splitmix64(detail::splitmix64(seed ^ detail::fnv1a(check)) ^ p) ^ d);
}

/// Builds coset-inclusion data for (A, B) with respect to G: eta_i is chosen
/// as the coset of G covering most of the relevant support, and Omega_i is
/// the remainder, so the inclusion hypotheses hold by construction.
inline SigmaInput coset_inclusion_instance(FpSet a, FpSet b, const Subgroup& g) {
  if (b.size() > a.size()) std::swap(a, b);
  auto best_coset = [&](const FpSet& support) {
    residue best_eta = 1;
    std::size_t best_cover = 0;
    std::set<residue> tried;
    support.for_each([&](residue t) {
      if (t == 0) return;
      const FpSet cs = coset(g, t);
      const residue rep = cs.min();
      if (!tried.insert(rep).second) return;
      const std::size_t cover = (cs & support).size();
      if (cover > best_cover) {
        best_cover = cover;
        best_eta = rep;
      }
    });
    FpSet omega = support;
    coset(g, best_eta).for_each([&](residue x) {
      if (omega.contains(x)) omega.erase(x);
    });
    return std::pair{best_eta, omega};
  };
  auto [eta1, omega1] = best_coset(triple_support(b, a, a));
  auto [eta2, omega2] = best_coset(triple_support(a, b, b));
  return SigmaInput{a, b, g, eta1, eta2, omega1, omega2};
}

// ---------------------------------------------------------------------------
// Per-(instance, check) records
// ---------------------------------------------------------------------------

namespace detail {

struct RecordBuilder {
  ojson reports = ojson::array();
  std::uint64_t hard_failures = 0;
  bool budget_exhausted = false;

  void add(const BoundReport& r) {
    if (r.hard_failure()) ++hard_failures;
    reports.push_back(r);
  }
  void add_all(const std::vector<BoundReport>& rs) {
    for (const auto& r : rs) add(r);
  }
};

/// Keeps, per report name, the reports with the largest and smallest ratio
/// (among those whose preconditions hold) and the first hard failure.
class Condenser {
 public:
  void add(const BoundReport& r) {
    auto& e = slots_[r.name];
    if (!e.first) e.first = r;
    if (r.hard_failure() && !e.failure) e.failure = r;
    if (!r.preconditions_met || !std::isfinite(r.ratio)) return;
    if (!e.max || r.ratio > e.max->ratio) e.max = r;
    if (!e.min || r.ratio < e.min->ratio) e.min = r;
  }
  void flush(RecordBuilder& rb, std::uint64_t hard_failures) {
    for (auto& name : order_from_slots()) {
      auto& e = slots_[name];
      std::vector<const BoundReport*> keep;
      for (const auto* r : {e.max ? &*e.max : nullptr, e.min ? &*e.min : nullptr, e.failure ? &*e.failure : nullptr})
        if (r && std::none_of(keep.begin(), keep.end(), [&](const BoundReport* k) { return k->instance == r->instance; }))
          keep.push_back(r);
      if (keep.empty()) keep.push_back(&*e.first);
      for (const auto* r : keep) rb.reports.push_back(*r);
    }
    rb.hard_failures += hard_failures;
  }

 private:
  struct Slot {
    std::optional<BoundReport> first, max, min, failure;
  };
  std::vector<std::string> order_from_slots() const {
    std::vector<std::string> names;
    for (const auto& [k, v] : slots_) names.push_back(k);
    return names;
  }
  std::map<std::string, Slot> slots_;
};

inline std::vector<residue> sample_nonzero(std::mt19937_64& rng, residue p, unsigned n) {
  std::vector<residue> out;
  n = std::min<unsigned>(n, p - 1);
  while (out.size() < n) {
    const auto x = static_cast<residue>(1 + uniform_below(rng, p - 1));
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

inline ojson decomposition_json(const DecompositionResult& r) {
  ojson j = r;
  j.erase("ms");  // wall time would break reproducibility of the record stream
  return j;
}

/// Pigeonhole: |B||C| >= |B + C| = |G| for every witness.
inline BoundReport witness_size_report(const Witness& w, const Subgroup& g) {
  const std::uint64_t prod = w.b.size() * w.c.size();
  auto r = make_report("witness_size_product", BoundKind::hard, static_cast<double>(prod), prod,
                       static_cast<double>(g.order));
  r.lower_bound = true;
  r.passed = prod >= g.order;
  r.instance = subgroup_instance(g);
  r.instance["B"] = w.b.to_string();
  r.instance["C"] = w.c.to_string();
  return r;
}

}  // namespace detail

/// Runs one check on one subgroup and returns its JSONL record.
inline ojson run_check(const SurveyConfig& cfg, const Subgroup& g, const std::string& check) {
  const residue p = g.modulus();
  const std::uint64_t seed = record_seed(cfg.seed, p, g.order, check);
  std::mt19937_64 rng(seed);
  const SearchBudget budget{cfg.node_budget};
  detail::RecordBuilder rb;
  ojson result = ojson::object();

  if (check == "energy") {
    rb.add_all(check_energy_bounds(g));
    result["energy"] = additive_energy(g.elements);
  } else if (check == "theta_bound") {
    detail::Condenser cond;
    std::uint64_t failures = 0, evaluated = 0;
    for (unsigned k : cfg.shift_k) {
      if (k > p - 1) continue;
      for (unsigned s = 0; s < cfg.shifts_per_instance; ++s) {
        for (auto& r : check_intersection_bounds(g, detail::sample_shifts(rng, p, k))) {
          if (r.hard_failure()) ++failures;
          cond.add(r);
        }
        ++evaluated;
      }
    }
    cond.flush(rb, failures);
    result["tuples"] = evaluated;
  } else if (check == "decompose") {
    const auto d = sumset_decompositions(g.elements, cfg.decompose_all_witnesses, budget);
    rb.budget_exhausted = d.budget_exhausted;
    for (const auto& w : d.witnesses) rb.add(detail::witness_size_report(w, g));
    result = detail::decomposition_json(d);
    result["reducible"] = d.found();
  } else if (check == "prop_main") {
    // (A, B) pairs: the decomposition witnesses of G if any, else G against
    // sampled shifted intersections G ∩ (G + x).
    std::vector<std::pair<FpSet, FpSet>> pairs;
    const auto d = sumset_decompositions(g.elements, cfg.decompose_all_witnesses, budget);
    rb.budget_exhausted = d.budget_exhausted;
    for (const auto& w : d.witnesses) pairs.emplace_back(w.b, w.c);
    if (pairs.empty() && p > 2)
      for (residue x : detail::sample_nonzero(rng, p, cfg.xi_samples)) {
        FpSet b = g.elements & translate(g.elements, x);
        if (!b.empty()) pairs.emplace_back(g.elements, std::move(b));
      }
    detail::Condenser cond;
    std::uint64_t failures = 0;
    for (auto& [a, b] : pairs)
      for (auto& r : check_prop_main(coset_inclusion_instance(a, b, g))) {
        if (r.hard_failure()) ++failures;
        cond.add(r);
      }
    cond.flush(rb, failures);
    result["pairs"] = pairs.size();
  } else if (check == "theorem_Q") {
    if (g.order >= 2) rb.add(check_theorem_Q(g.elements));
  } else if (check == "lemma_QABAB") {
    std::uint64_t sub = 1;
    for (std::uint64_t e : divisors(g.order))
      if (e < g.order) sub = e;
    const Subgroup h = subgroup(g.field, sub);
    rb.add(check_lemma_QABAB(g.elements, h.elements));
    result["B_order"] = sub;
  } else if (check == "T_support") {
    if (g.order >= 2) rb.add_all(check_T_support_bounds(g.elements));
  } else if (check == "maxset") {
    if (p <= cfg.maxset_max_modulus) {
      ojson sets = ojson::array();
      for (residue xi : detail::sample_nonzero(rng, p, cfg.xi_samples)) {
        const auto m = max_ratio_closed_set(g, xi, budget, cfg.maxset_max_modulus);
        rb.budget_exhausted = rb.budget_exhausted || !m.exhaustive;
        rb.add_all(check_AA_in_shift_bounds(m.set, g, xi));
        ojson sj = m;
        sj["xi"] = xi;
        sets.push_back(std::move(sj));
      }
      result["sets"] = std::move(sets);
    } else {
      result["skipped"] = "p above maxset_max_modulus";
    }
  } else if (check == "ratio_decompose") {
    ojson out = ojson::array();
    for (residue xi : detail::sample_nonzero(rng, p, cfg.xi_samples)) {
      const FpSet s = translate(coset(g, xi), 1);
      const auto d = ratio_decompositions(s, cfg.decompose_all_witnesses, budget);
      rb.budget_exhausted = rb.budget_exhausted || d.budget_exhausted;
      ojson dj = detail::decomposition_json(d);
      dj["xi"] = xi;
      out.push_back(std::move(dj));
    }
    result["decompositions"] = std::move(out);
  } else if (check == "dilate_check") {
    for (auto mode : {DilateMode::subgroups, DilateMode::arbitrary}) {
      const auto ws = small_subgroup_dilate_witnesses(g, mode);
      ojson mj = {{"count", ws.size()}};
      mj["first"] = ws.empty() ? ojson(nullptr) : ojson(ws.front());
      result[mode == DilateMode::subgroups ? "subgroups" : "arbitrary"] = std::move(mj);
    }
  } else if (check == "singleton_remark") {
    rb.add(check_singleton_remark(g));
  } else {
    throw precondition_error("unknown check '" + check + "'");
  }

  ojson rec;
  rec["p"] = p;
  rec["d"] = g.order;
  rec["check"] = check;
  rec["seed"] = seed;
  rec["hard_failures"] = rb.hard_failures;
  rec["budget_exhausted"] = rb.budget_exhausted;
  rec["reports"] = std::move(rb.reports);
  rec["result"] = std::move(result);
  return rec;
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct RatioStats {
  std::uint64_t count = 0;
  std::uint64_t preconditions_met = 0;
  std::optional<double> max_ratio;
  std::optional<double> min_ratio;
};

struct SurveySummary {
  std::uint64_t records = 0;
  std::uint64_t resumed = 0;  ///< records found already present in the output
  std::uint64_t hard_failures = 0;
  std::uint64_t budget_exhausted = 0;
  std::map<std::string, RatioStats> ratios;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> reducible;        ///< (p, |G|)
  std::vector<std::pair<std::uint64_t, std::uint64_t>> large_reducible;  ///< |G| >= threshold and |G|^3 <= p^2

  bool ok() const noexcept { return hard_failures == 0 && large_reducible.empty(); }
};

inline void accumulate(SurveySummary& s, const ojson& rec, std::uint64_t large_threshold) {
  ++s.records;
  s.hard_failures += rec.at("hard_failures").get<std::uint64_t>();
  if (rec.at("budget_exhausted").get<bool>()) ++s.budget_exhausted;
  for (const auto& rj : rec.at("reports")) {
    auto& st = s.ratios[rj.at("name").get<std::string>()];
    ++st.count;
    if (!rj.at("preconditions_met").get<bool>()) continue;
    ++st.preconditions_met;
    if (rj.at("ratio").is_null()) continue;
    const double r = rj.at("ratio").get<double>();
    if (!st.max_ratio || r > *st.max_ratio) st.max_ratio = r;
    if (!st.min_ratio || r < *st.min_ratio) st.min_ratio = r;
  }
  if (rec.at("check") == "decompose" && rec.at("result").value("reducible", false)) {
    const auto key = std::pair{rec.at("p").get<std::uint64_t>(), rec.at("d").get<std::uint64_t>()};
    s.reducible.push_back(key);
    // outside |G| <= p^{2/3} large sumsets are expected (F_p^* = {0,1} + {1..p-2})
    const auto [p, d] = key;
    if (d >= large_threshold && static_cast<unsigned __int128>(d) * d * d <= static_cast<unsigned __int128>(p) * p)
      s.large_reducible.push_back(key);
  }
}

inline ojson to_json(const SurveySummary& s) {
  ojson j;
  j["records"] = s.records;
  j["resumed"] = s.resumed;
  j["hard_failures"] = s.hard_failures;
  j["budget_exhausted"] = s.budget_exhausted;
  ojson ratios = ojson::object();
  for (const auto& [name, st] : s.ratios) {
    ratios[name] = {{"count", st.count},
                    {"preconditions_met", st.preconditions_met},
                    {"max_ratio", st.max_ratio ? ojson(*st.max_ratio) : ojson(nullptr)},
                    {"min_ratio", st.min_ratio ? ojson(*st.min_ratio) : ojson(nullptr)}};
  }
  j["ratios"] = std::move(ratios);
  auto pairs = [](const auto& v) {
    ojson a = ojson::array();
    for (const auto& [p, d] : v) a.push_back({{"p", p}, {"d", d}});
    return a;
  };
  j["reducible"] = pairs(s.reducible);
  j["large_reducible"] = pairs(s.large_reducible);
  return j;
}

/// Least-squares slope of log2(y) against log2(x).
inline double empirical_exponent(const std::vector<std::pair<double, double>>& points) {
  std::set<double> xs;
  for (const auto& [x, y] : points) {
    if (!(x > 0) || !(y > 0)) throw precondition_error("empirical_exponent: values must be positive");
    xs.insert(x);
  }
  if (xs.size() < 2) throw precondition_error("empirical_exponent: need at least two distinct sizes");
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const long double n = static_cast<long double>(points.size());
  for (const auto& [x, y] : points) {
    const long double lx = std::log2(static_cast<long double>(x)), ly = std::log2(static_cast<long double>(y));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

/// Slope of log2(result[quantity]) against log2 |G| over survey records.
inline double empirical_exponent(const std::vector<ojson>& records, std::string_view quantity) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : records) {
    const auto& res = r.at("result");
    const std::string key(quantity);
    if (!res.contains(key)) continue;
    pts.emplace_back(r.at("d").get<double>(), res.at(key).get<double>());
  }
  return empirical_exponent(pts);
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace detail {

inline std::string record_key(std::uint64_t p, std::uint64_t d, std::string_view check) {
  return std::to_string(p) + "/" + std::to_string(d) + "/" + std::string(check);
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Loads complete records from an existing JSONL file and truncates a
/// trailing partial line. Returns false when there is no usable file.
inline bool load_existing(const std::string& path, const ojson& fingerprint, std::vector<std::string>& lines) {
  namespace fs = std::filesystem;
  if (!fs::exists(path) || fs::file_size(path) == 0) return false;
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::size_t pos = 0, good_end = 0;
  bool header_seen = false;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // partial last line
    const std::string line = content.substr(pos, nl - pos);
    ojson j = ojson::parse(line, nullptr, false);
    if (j.is_discarded()) break;
    if (!header_seen) {
      if (!j.contains("header")) throw precondition_error("survey output '" + path + "' has no header line");
      if (j.at("config") != fingerprint)
        throw precondition_error("survey output '" + path + "' was produced by a different configuration");
      header_seen = true;
    } else {
      lines.push_back(line);
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (!header_seen) return false;
  if (good_end < content.size()) fs::resize_file(path, good_end);
  return true;
}

}  // namespace detail

/// Runs every configured check on every instance. Records go to
/// cfg.output_path as JSONL (header line first), in (p, |G|, check) order.
/// An existing output produced by the same configuration is resumed: its
/// complete records are kept and only missing ones are computed.
/// `records_out`, when given, receives every record in order.
inline SurveySummary run_survey(const SurveyConfig& cfg, std::vector<ojson>* records_out = nullptr) {
  validate(cfg);
  std::vector<ojson> local_records;
  if (!records_out && !cfg.csv_path.empty()) records_out = &local_records;
  const auto instances = enumerate_instances(cfg);
  const ojson fingerprint = config_fingerprint(cfg);

  std::vector<std::string> existing;
  std::ofstream out;
  if (!cfg.output_path.empty()) {
    const bool resumed = detail::load_existing(cfg.output_path, fingerprint, existing);
    out.open(cfg.output_path, resumed ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write survey output '" + cfg.output_path + "'");
    if (!resumed) {
      ojson header = {{"header", "ffcomb-survey"}, {"timestamp", detail::utc_timestamp()}, {"config", fingerprint}};
      out << header.dump() << '\n';
      out.flush();
    }
  }
  std::map<std::string, ojson> done;
  for (const auto& line : existing) {
    ojson j = ojson::parse(line);
    done.emplace(detail::record_key(j.at("p").get<std::uint64_t>(), j.at("d").get<std::uint64_t>(),
                                    j.at("check").get<std::string>()),
                 std::move(j));
  }

  struct Task {
    const Subgroup* g;
    const std::string* check;
    std::string key;
  };
  std::vector<Task> tasks;
  for (const auto& g : instances)
    for (const auto& c : cfg.checks) tasks.push_back({&g, &c, detail::record_key(g.modulus(), g.order, c)});

  SurveySummary summary;
  std::vector<std::optional<ojson>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      if (done.count(tasks[i].key)) continue;
      std::optional<ojson> rec;
      std::exception_ptr err;
      try {
        rec = run_check(cfg, *tasks[i].g, *tasks[i].check);
      } catch (...) {
        err = std::current_exception();
      }
      std::lock_guard lk(mu);
      results[i] = std::move(rec);
      errors[i] = err;
      cv.notify_all();
    }
  };

  const unsigned nworkers = std::max(1u, cfg.workers);
  std::vector<std::thread> pool;
  if (nworkers > 1)
    for (unsigned w = 0; w < nworkers; ++w) pool.emplace_back(work);

  // Single ordered writer.
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ojson rec;
    if (auto it = done.find(tasks[i].key); it != done.end()) {
      rec = it->second;
      ++summary.resumed;
    } else {
      if (nworkers == 1) {
        rec = run_check(cfg, *tasks[i].g, *tasks[i].check);
      } else {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return results[i].has_value() || errors[i]; });
        if (errors[i]) {
          first_error = errors[i];
          break;
        }
        rec = std::move(*results[i]);
        results[i].reset();
      }
      if (out.is_open()) {
        out << rec.dump() << '\n';
        out.flush();
      }
    }
    accumulate(summary, rec, cfg.large_subgroup_threshold);
    if (records_out) records_out->push_back(std::move(rec));
  }
  if (first_error) next = tasks.size();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  if (out.is_open() && !out) throw std::runtime_error("write failure on '" + cfg.output_path + "'");

  if (!cfg.csv_path.empty()) {
    std::ofstream csv(cfg.csv_path, std::ios::trunc | std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write CSV '" + cfg.csv_path + "'");
    csv << kCsvHeader << '\n';
    for (const auto& rec : *records_out)
      for (const auto& rj : rec.at("reports")) {
        // set-based reports have d = 0; the row takes the record's subgroup
        auto r = rj.get<BoundReport>();
        if (r.instance.value("d", std::uint64_t{0}) == 0) r.instance["d"] = rec.at("d");
        csv << csv_row(r) << '\n';
      }
  }
  return summary;
}

}  // namespace ffcomb
