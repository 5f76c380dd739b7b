#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffcomb/incidence.hpp"
#include "ffcomb/setops.hpp"
#include "ffcomb/subgroup.hpp"

namespace ffcomb {

/// soft: an inequality with an unknown implied constant, reported as a ratio.
/// hard: an inequality with explicit constants, asserted pass/fail.
/// info: reported for inspection only (e.g. a dropped o(1) term).
enum class BoundKind { soft, hard, info };

inline std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::soft: return "soft";
    case BoundKind::hard: return "hard";
    case BoundKind::info: return "info";
  }
  return "?";
}

inline BoundKind parse_bound_kind(std::string_view s) {
  if (s == "soft") return BoundKind::soft;
  if (s == "hard") return BoundKind::hard;
  if (s == "info") return BoundKind::info;
  throw precondition_error("unknown bound kind '" + std::string(s) + "'");
}

/// One side-by-side evaluation of an inequality on a concrete instance.
/// Logarithms in rhs formulas are base 2; implied constants are taken as 1.
struct BoundReport {
  std::string name;
  BoundKind kind = BoundKind::soft;
  bool lower_bound = false;  ///< true when the inequality reads lhs >> rhs
  double lhs = 0;
  std::uint64_t exact = 0;   ///< the exact integer quantity lhs is computed from
  double rhs = 0;
  double ratio = 0;          ///< lhs / rhs, NaN when rhs is zero
  bool preconditions_met = true;
  std::string precondition_note;
  std::optional<bool> passed;  ///< set for hard reports whose preconditions hold
  std::vector<std::string> flags;
  nlohmann::ordered_json instance = nlohmann::ordered_json::object();
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  bool hard_failure() const { return kind == BoundKind::hard && passed.has_value() && !*passed; }
};

namespace detail {

inline double lg(double x) { return std::log2(x); }

inline double safe_ratio(double lhs, double rhs) {
  return rhs == 0 ? std::nan("") : lhs / rhs;
}

inline BoundReport make_report(std::string name, BoundKind kind, double lhs, std::uint64_t exact, double rhs) {
  BoundReport r;
  r.name = std::move(name);
  r.kind = kind;
  r.lhs = lhs;
  r.exact = exact;
  r.rhs = rhs;
  r.ratio = safe_ratio(lhs, rhs);
  return r;
}

inline nlohmann::ordered_json set_instance(const FpSet& a) {
  return {{"p", a.modulus()}, {"d", 0}, {"A", a.to_string()}};
}

inline nlohmann::ordered_json subgroup_instance(const Subgroup& g) {
  return {{"p", g.modulus()}, {"d", g.order}};
}

/// x^e <= p^f for small integer exponents, evaluated exactly.
inline bool pow_le(std::uint64_t x, unsigned e, std::uint64_t p, unsigned f) {
  unsigned __int128 l = 1, r = 1;
  for (unsigned i = 0; i < e; ++i) l *= x;
  for (unsigned i = 0; i < f; ++i) r *= p;
  return l <= r;
}

}  // namespace detail

/// Q(A) against |A|^8/p^2 + |A|^5 log|A|: lhs = |Q(A) - |A|^8/p^2|, rhs = |A|^5 log|A|.
inline BoundReport check_theorem_Q(const FpSet& a) {
  if (a.size() < 2) throw precondition_error("check_theorem_Q: |A| must be >= 2");
  const double n = static_cast<double>(a.size());
  const double p = a.modulus();
  const auto q = quad_count_Q(a).total;
  const double main = std::pow(n, 8) / (p * p);
  auto r = detail::make_report("collinear_quadruples", BoundKind::soft, std::fabs(static_cast<double>(q) - main), q,
                               std::pow(n, 5) * detail::lg(n));
  r.instance = detail::set_instance(a);
  r.details["main_term"] = main;
  r.details["small_set_regime"] = detail::pow_le(a.size(), 3, a.modulus(), 2);  // |A| <= p^{2/3}
  return r;
}

/// Q(A, B, A, B) against |A|^{5/2}|B|^{5/2} log^2|A| + |A|^3 |B|^2.
inline BoundReport check_lemma_QABAB(const FpSet& a, const FpSet& b) {
  a.require_same_field(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const auto q = quad_count_Q(a, b, a, b).total;
  const double la = a.size() > 0 ? detail::lg(na) : 0.0;
  auto r = detail::make_report("mixed_collinear_quadruples", BoundKind::soft, static_cast<double>(q), q,
                               std::pow(na * nb, 2.5) * la * la + std::pow(na, 3) * nb * nb);
  r.preconditions_met = b.size() <= a.size() && detail::pow_le(a.size(), 2, a.modulus(), 1);
  if (!r.preconditions_met) r.precondition_note = "requires |B| <= |A| <= sqrt(p)";
  r.instance = {{"p", a.modulus()}, {"d", 0}, {"A", a.to_string()}, {"B", b.to_string()}};
  return r;
}

/// Q(G, {0}, G, {0}) = |G|^3 exactly for a subgroup G.
inline BoundReport check_singleton_remark(const Subgroup& g) {
  FpSet zero(g.field);
  zero.insert(0);
  const auto q = quad_count_Q(g.elements, zero, g.elements, zero).total;
  const std::uint64_t cube = g.order * g.order * g.order;
  auto r = detail::make_report("mixed_quadruples_point_set", BoundKind::hard, static_cast<double>(q), q,
                               static_cast<double>(cube));
  r.passed = (q == cube);
  r.instance = detail::subgroup_instance(g);
  return r;
}

/// Three lower bounds on |T[A]|.
inline std::vector<BoundReport> check_T_support_bounds(const FpSet& a) {
  if (a.size() < 2) throw precondition_error("check_T_support_bounds: |A| must be >= 2");
  const double n = static_cast<double>(a.size());
  const double p = a.modulus();
  const auto support = triple_support(a, a, a).size();
  const double lhs = static_cast<double>(support);
  std::vector<BoundReport> out;

  auto r1 = detail::make_report("triple_support_large_sets", BoundKind::soft, lhs, support,
                                std::min(p, std::pow(n, 2.5) / std::sqrt(p)));
  auto r2 = detail::make_report("triple_support_medium_sets", BoundKind::info, lhs, support,
                                std::min(p, std::pow(n, 1.5 + 1.0 / 22.0)));
  r2.flags.push_back("asymptotic_term_dropped");
  auto r3 = detail::make_report("triple_support_small_sets", BoundKind::soft, lhs, support,
                                std::min(std::cbrt(p * p), std::pow(n, 1.6) / std::pow(detail::lg(n), 28.0 / 15.0)));
  for (auto* r : {&r1, &r2, &r3}) {
    r->lower_bound = true;
    r->instance = detail::set_instance(a);
    out.push_back(std::move(*r));
  }
  return out;
}

/// Upper bounds on E+(G), the trivial lower bound E+(G) >= |G|^4/p and the
/// empirical exponent log E+(G) / log |G|.
inline std::vector<BoundReport> check_energy_bounds(const Subgroup& g) {
  const std::uint64_t e = additive_energy(g.elements);
  const double n = static_cast<double>(g.order);
  const double p = g.modulus();
  const double ln = detail::lg(n);
  const double le = static_cast<double>(e);
  std::vector<BoundReport> out;

  auto r1 = detail::make_report("subgroup_energy_mixed", BoundKind::soft, le, e,
                                std::pow(n, 3) / std::cbrt(p) * ln +
                                    std::pow(p, 1.0 / 26.0) * std::pow(n, 31.0 / 13.0) * std::pow(ln, 8.0 / 13.0));
  r1.preconditions_met = detail::pow_le(g.order, 3, g.modulus(), 2);
  if (!r1.preconditions_met) r1.precondition_note = "requires |G| <= p^{2/3}";

  auto r2 = detail::make_report("subgroup_energy_32_13", BoundKind::soft, le, e,
                                std::pow(n, 32.0 / 13.0) * std::pow(ln, 41.0 / 65.0));
  r2.preconditions_met = n < std::sqrt(p) * std::pow(detail::lg(p), -0.2);
  if (!r2.preconditions_met) r2.precondition_note = "requires |G| < p^{1/2} log^{-1/5} p";

  auto r3 = detail::make_report("subgroup_energy_lower", BoundKind::hard, le, e, std::pow(n, 4) / p);
  r3.lower_bound = true;
  const unsigned __int128 n4 = static_cast<unsigned __int128>(g.order * g.order) * (g.order * g.order);
  r3.passed = static_cast<unsigned __int128>(e) * g.modulus() >= n4;

  auto r4 = detail::make_report("subgroup_energy_exponent", BoundKind::info, le, e, std::pow(n, 2.5));
  r4.preconditions_met = r1.preconditions_met;
  if (!r4.preconditions_met) r4.precondition_note = "requires |G| <= p^{2/3}";
  if (g.order > 1)
    r4.details["exponent"] = detail::lg(le) / ln;
  else
    r4.details["exponent"] = nullptr;

  for (auto* r : {&r1, &r2, &r3, &r4}) {
    r->instance = detail::subgroup_instance(g);
    out.push_back(std::move(*r));
  }
  return out;
}

/// |base ∩ (base + x_1) ∩ ... ∩ (base + x_k)|; shifts must be distinct and nonzero.
inline std::uint64_t shifted_intersection(const FpSet& base, const std::vector<residue>& shifts) {
  const auto& f = base.field();
  std::vector<residue> seen;
  for (residue x : shifts) {
    if (x % f.modulus() == 0) throw precondition_error("shifted_intersection: shifts must be nonzero");
    if (std::find(seen.begin(), seen.end(), x % f.modulus()) != seen.end())
      throw precondition_error("shifted_intersection: shifts must be distinct");
    seen.push_back(x % f.modulus());
  }
  std::uint64_t count = 0;
  base.for_each([&](residue y) {
    for (residue x : seen)
      if (!base.contains(f.sub(y, x))) return;
    ++count;
  });
  return count;
}

inline std::uint64_t shifted_intersection(const Subgroup& g, const std::vector<residue>& shifts) {
  return shifted_intersection(g.elements, shifts);
}

/// The shifted-intersection upper bound (when its size conditions hold), the
/// explicit error term |theta| <= 1 of the character-sum estimate, and the
/// many-shifts bound for large k.
inline std::vector<BoundReport> check_intersection_bounds(const Subgroup& g, const std::vector<residue>& shifts) {
  const std::uint64_t lhs = shifted_intersection(g, shifts);
  const std::size_t k = shifts.size();
  if (k == 0) throw precondition_error("check_intersection_bounds: need at least one shift");
  const double n = static_cast<double>(g.order);
  const double p = g.modulus();
  const double kd = static_cast<double>(k);
  nlohmann::ordered_json inst = detail::subgroup_instance(g);
  inst["shifts"] = shifts;
  std::vector<BoundReport> out;

  // Size conditions: 32 k 2^{20 k log(k+1)} <= |G| and p >= 4k|G|(|G|^{1/(2k+1)} + 1).
  const double cond_log2 = 5 + detail::lg(kd) + 20 * kd * detail::lg(kd + 1);
  const double root = std::pow(n, 1.0 / (2 * kd + 1)) + 1;
  auto r1 = detail::make_report("shift_intersection_bound", BoundKind::hard, static_cast<double>(lhs), lhs,
                                4 * (kd + 1) * std::pow(root, kd + 1));
  r1.preconditions_met = cond_log2 <= detail::lg(n) && p >= 4 * kd * n * root;
  if (r1.preconditions_met) {
    r1.passed = r1.lhs <= r1.rhs;
  } else {
    r1.precondition_note = "size conditions fail; bound vacuous at this scale";
    r1.flags.push_back("vacuous");
  }

  const long double main = std::pow(static_cast<long double>(n), k + 1) / std::pow(static_cast<long double>(p - 1), k);
  const long double scale = kd * std::pow(2.0L, kd + 3) * std::sqrt(static_cast<long double>(p));
  const double theta = static_cast<double>((static_cast<long double>(lhs) - main) / scale);
  auto r2 = detail::make_report("shift_intersection_theta", BoundKind::hard, std::fabs(theta), lhs, 1.0);
  r2.passed = std::fabs(theta) <= 1.0;
  r2.details["theta"] = theta;
  r2.details["main_term"] = static_cast<double>(main);

  // The many-shifts bound counts intersections of translates; here the
  // translates are G + 0, G + x_1, ..., G + x_k.
  const double kk = kd + 1;
  const double ln = detail::lg(n);
  auto r3 = detail::make_report("shift_intersection_many", BoundKind::soft, static_cast<double>(lhs), lhs,
                                std::pow(kk, -2) * std::pow(n, 19.0 / 13.0) * std::pow(ln, 41.0 / 65.0));
  r3.preconditions_met = g.order > 1 && n < std::sqrt(p) * std::pow(detail::lg(p), -0.2) &&
                         kk <= std::pow(n, 19.0 / 39.0) * std::pow(ln, -219.0 / 195.0);
  if (!r3.preconditions_met) r3.precondition_note = "requires |G| < p^{1/2} log^{-1/5} p and k small";

  for (auto* r : {&r1, &r2, &r3}) {
    r->instance = inst;
    out.push_back(std::move(*r));
  }
  return out;
}

/// The coset-inclusion inequality |A|^4|B|^4|G| << (E+(G) + w|G|^2 + |G|^2)
/// ((|A||B|)^{5/2} log^2|A| + |A|^3|B|^2), followed by hard checks on the
/// support quantities it is assembled from.
inline std::vector<BoundReport> check_prop_main(const SigmaInput& in) {
  const SigmaReport s = sigma_quantities(in);
  const double na = static_cast<double>(in.a.size()), nb = static_cast<double>(in.b.size());
  const double ng = static_cast<double>(in.gamma.order);
  const double la = in.a.size() > 0 ? detail::lg(na) : 0.0;
  const std::uint64_t a4 = detail::checked_mul(detail::checked_mul(in.a.size(), in.a.size()),
                                               detail::checked_mul(in.a.size(), in.a.size()));
  const std::uint64_t b4 = detail::checked_mul(detail::checked_mul(in.b.size(), in.b.size()),
                                               detail::checked_mul(in.b.size(), in.b.size()));
  const std::uint64_t lhs = detail::checked_mul(detail::checked_mul(a4, b4), in.gamma.order);
  const double rhs = (static_cast<double>(s.gamma_energy) + static_cast<double>(s.omega) * ng * ng + ng * ng) *
                     (std::pow(na * nb, 2.5) * la * la + std::pow(na, 3) * nb * nb);

  nlohmann::ordered_json inst = detail::subgroup_instance(in.gamma);
  inst["A"] = in.a.to_string();
  inst["B"] = in.b.to_string();
  inst["eta1"] = in.eta1;
  inst["eta2"] = in.eta2;
  inst["Omega1"] = in.omega1.to_string();
  inst["Omega2"] = in.omega2.to_string();

  nlohmann::ordered_json sig = {{"sigma", s.sigma},
                                {"sigma_prime", s.sigma_prime},
                                {"sigma_double_prime", s.sigma_double_prime},
                                {"coset_solutions", s.coset_solutions},
                                {"coset_energy", s.coset_energy},
                                {"gamma_energy", s.gamma_energy},
                                {"omega", s.omega},
                                {"infinity_mass", s.infinity_mass},
                                {"q_sum_of_squares", s.q_sum_of_squares},
                                {"quad_total", s.quad_total}};

  const bool sizes_ok = in.b.size() <= in.a.size() && detail::pow_le(in.a.size(), 2, in.a.modulus(), 1) &&
                        in.omega1.size() <= in.gamma.order && in.omega2.size() <= in.gamma.order;
  std::vector<BoundReport> out;

  auto main = detail::make_report("coset_inclusion_energy", BoundKind::soft, static_cast<double>(lhs), lhs, rhs);
  main.preconditions_met = s.hypotheses_hold && sizes_ok;
  if (!s.hypotheses_hold)
    main.precondition_note = s.failed_hypothesis;
  else if (!sizes_ok)
    main.precondition_note = "requires |B| <= |A| <= sqrt(p) and |Omega_i| <= |G|";
  main.details = sig;
  out.push_back(std::move(main));

  auto hard = [&](std::string name, double l, std::uint64_t exact, double r, bool ok, bool needs_hypotheses) {
    auto rep = detail::make_report(std::move(name), BoundKind::hard, l, exact, r);
    rep.preconditions_met = !needs_hypotheses || s.hypotheses_hold;
    if (rep.preconditions_met)
      rep.passed = ok;
    else
      rep.precondition_note = s.failed_hypothesis;
    out.push_back(std::move(rep));
  };
  hard("sigma_prime_energy", static_cast<double>(s.sigma_prime), s.sigma_prime,
       static_cast<double>(s.gamma_energy) / ng, s.energy_bound_holds(), true);
  hard("sigma_exceptional", static_cast<double>(s.sigma_double_prime), s.sigma_double_prime,
       (12.0 * static_cast<double>(s.omega) + 6.0) * ng, s.exceptional_bound_holds(), true);
  const double mass = static_cast<double>(s.q_mass);
  hard("support_cauchy_schwarz", mass * mass, s.q_mass,
       static_cast<double>(s.sigma) * static_cast<double>(s.q_sum_of_squares), s.cauchy_schwarz_holds(), false);
  // Counting identity behind the energy step: solutions * |G| = E+(G, -e1 G, e2 G, -e1 e2 G) <= E+(G).
  hard("coset_energy_identity", static_cast<double>(s.coset_solutions) * ng, s.coset_solutions,
       static_cast<double>(s.coset_energy),
       s.coset_solutions * in.gamma.order == s.coset_energy && s.coset_energy <= s.gamma_energy, false);
  for (std::size_t i = 1; i < out.size(); ++i) out[i].details = sig;
  for (auto& r : out) r.instance = inst;
  return out;
}

/// Size bound for A with A/A inside xi*G + 1 (distinct pairs), in the regime
/// selected by |G| against p^{3/4} and p^{5/6}, and the exact inclusion
/// T[A] ⊆ G ∪ {0} that the bound rests on.
inline std::vector<BoundReport> check_AA_in_shift_bounds(const FpSet& a, const Subgroup& g, residue xi) {
  a.require_same_field(g.elements);
  const auto& f = g.field;
  if (xi % f.modulus() == 0) throw precondition_error("check_AA_in_shift_bounds: xi must be nonzero");
  const FpSet shifted = translate(coset(g, xi), 1);
  FpSet nonzero = a;
  if (nonzero.contains(0)) nonzero.erase(0);
  const bool ratios_ok = nonzero.empty() || ratioset(a, a, true).is_subset_of(shifted);

  const double n = static_cast<double>(g.order);
  const double p = f.modulus();
  const double ln = detail::lg(n);
  std::string regime;
  double rhs;
  if (!detail::pow_le(f.modulus(), 3, g.order, 4)) {  // |G|^4 < p^3
    regime = "below_p_3_4";
    rhs = std::pow(n, 5.0 / 12.0) * std::pow(ln, 7.0 / 6.0);
  } else if (detail::pow_le(g.order, 6, f.modulus(), 5)) {  // |G|^6 <= p^5
    regime = "p_3_4_to_p_5_6";
    rhs = std::pow(p, -5.0 / 8.0) * std::pow(n, 1.25) * std::pow(ln, 7.0 / 6.0);
  } else {
    regime = "above_p_5_6";
    rhs = std::pow(p, -1.0) * std::pow(n, 5.0 / 3.0) * std::pow(ln, 1.0 / 3.0);
  }

  nlohmann::ordered_json inst = detail::subgroup_instance(g);
  inst["A"] = a.to_string();
  inst["xi"] = xi % f.modulus();
  std::vector<BoundReport> out;

  auto r1 = detail::make_report("ratio_closed_set_size", BoundKind::soft, static_cast<double>(a.size()), a.size(), rhs);
  r1.preconditions_met = ratios_ok;
  if (!ratios_ok) r1.precondition_note = "A/A not contained in xi*G + 1";
  if (a.size() <= 1) r1.flags.push_back("trivial");
  r1.details["regime"] = regime;
  out.push_back(std::move(r1));

  FpSet gstar = g.elements;
  gstar.insert(0);
  const FpSet support = a.size() >= 2 ? triple_support(a, a, a) : FpSet(f);
  auto r2 = detail::make_report("ratio_closed_support_inclusion", BoundKind::hard, static_cast<double>(support.size()),
                                support.size(), static_cast<double>(gstar.size()));
  r2.preconditions_met = ratios_ok && !a.contains(0);
  if (r2.preconditions_met)
    r2.passed = support.is_subset_of(gstar);
  else
    r2.precondition_note = ratios_ok ? "0 in A" : "A/A not contained in xi*G + 1";
  out.push_back(std::move(r2));

  for (auto& r : out) r.instance = inst;
  return out;
}

}  // namespace ffcomb
