#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ffcomb/bounds.hpp"
#include "ffcomb/decompose.hpp"
#include "oracles.hpp"

using namespace ffcomb;

namespace {

const BoundReport& find(const std::vector<BoundReport>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r;
  FAIL("missing report " << name);
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("collinear quadruple bound report") {
  const PrimeField f(7);
  const auto r = check_theorem_Q(FpSet(f, {0, 1}));
  CHECK(r.name == "collinear_quadruples");
  CHECK(r.kind == BoundKind::soft);
  CHECK(r.exact == 88);
  CHECK(r.lhs == Catch::Approx(88.0 - 256.0 / 49.0));
  CHECK(r.rhs == Catch::Approx(32.0));
  CHECK(r.ratio == Catch::Approx(r.lhs / r.rhs));
  CHECK_FALSE(r.passed.has_value());
  CHECK_THROWS_AS(check_theorem_Q(FpSet(f, {3})), precondition_error);
}

TEST_CASE("mixed quadruple bound precondition") {
  const PrimeField f(101);
  CHECK(check_lemma_QABAB(FpSet(f, {0, 1, 2}), FpSet(f, {5, 7})).preconditions_met);
  CHECK_FALSE(check_lemma_QABAB(FpSet(f, {0, 1}), FpSet(f, {5, 7, 9})).preconditions_met);
  FpSet big(f);
  for (residue x = 0; x < 11; ++x) big.insert(x);  // 11^2 > 101
  CHECK_FALSE(check_lemma_QABAB(big, FpSet(f, {1})).preconditions_met);
}

TEST_CASE("point-set bound holds for every subgroup") {
  for (std::uint64_t p : {5u, 13u, 61u}) {
    const PrimeField f(p);
    for (auto d : divisors(p - 1)) {
      const auto r = check_singleton_remark(subgroup(f, d));
      CHECK(r.kind == BoundKind::hard);
      CHECK(r.passed == true);
    }
  }
}

TEST_CASE("triple support lower bounds") {
  const PrimeField f(97);
  const auto rs = check_T_support_bounds(subgroup(f, 8).elements);
  REQUIRE(rs.size() == 3);
  for (const auto& r : rs) CHECK(r.lower_bound);
  CHECK(find(rs, "triple_support_medium_sets").kind == BoundKind::info);
  CHECK(find(rs, "triple_support_medium_sets").flags == std::vector<std::string>{"asymptotic_term_dropped"});
  CHECK(rs[0].exact == triple_support(subgroup(f, 8).elements, subgroup(f, 8).elements, subgroup(f, 8).elements).size());
}

TEST_CASE("energy reports") {
  for (std::uint64_t p : {13u, 97u, 193u, 499u}) {
    const PrimeField f(p);
    for (auto d : divisors(p - 1)) {
      const auto g = subgroup(f, d);
      const auto rs = check_energy_bounds(g);
      CHECK(find(rs, "subgroup_energy_lower").passed == true);
      if (d <= 60) CHECK(find(rs, "subgroup_energy_lower").exact == oracle::additive_energy(oracle::elems(g.elements), p));
      CHECK(find(rs, "subgroup_energy_mixed").preconditions_met == (d * d * d <= p * p));
    }
  }
}

TEST_CASE("shifted intersections") {
  const PrimeField f(13);
  const auto g = subgroup(f, 6);
  // brute force
  for (residue x = 1; x < 13; ++x) {
    std::uint64_t n = 0;
    g.elements.for_each([&](residue y) { n += g.contains(f.sub(y, x)); });
    CHECK(shifted_intersection(g, {x}) == n);
  }
  CHECK_THROWS_AS(shifted_intersection(g, {0}), precondition_error);
  CHECK_THROWS_AS(shifted_intersection(g, {2, 15}), precondition_error);  // 15 = 2 mod 13
  CHECK_THROWS_AS(check_intersection_bounds(g, {}), precondition_error);
}

TEST_CASE("theta stays within [-1, 1] on sampled shifts") {
  std::mt19937_64 rng(99);
  for (std::uint64_t p : {31u, 97u, 101u, 199u}) {
    const PrimeField f(p);
    for (auto d : divisors(p - 1)) {
      const auto g = subgroup(f, d);
      for (unsigned k : {1u, 2u})
        for (int s = 0; s < 10; ++s) {
          std::vector<residue> xs;
          while (xs.size() < k) {
            const auto x = static_cast<residue>(1 + rng() % (p - 1));
            if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
          }
          const auto rs = check_intersection_bounds(g, xs);
          const auto& th = find(rs, "shift_intersection_theta");
          CHECK(th.passed == true);
          CHECK(std::fabs(th.details["theta"].get<double>()) <= 1.0);
          const auto& vac = find(rs, "shift_intersection_bound");
          if (!vac.preconditions_met) CHECK(vac.flags == std::vector<std::string>{"vacuous"});
        }
    }
  }
}

TEST_CASE("coset inclusion reports for {2,5,6} mod 13") {
  const PrimeField f(13);
  const auto g = subgroup(f, 6);
  const FpSet a(f, {2, 5, 6});
  const auto rs = check_prop_main(SigmaInput{a, a, g, 1, 1, FpSet(f, {0}), FpSet(f, {0})});
  REQUIRE(rs.size() == 5);
  CHECK(rs[0].name == "coset_inclusion_energy");
  for (std::size_t i = 1; i < rs.size(); ++i) {
    CHECK(rs[i].kind == BoundKind::hard);
    CHECK(rs[i].passed == true);
  }
}

TEST_CASE("hard reports are skipped, not failed, when hypotheses fail") {
  const PrimeField f(13);
  const auto g = subgroup(f, 3);
  const auto rs = check_prop_main(SigmaInput{FpSet(f, {0, 1, 2, 3}), FpSet(f, {0, 1}), g, 1, 1, FpSet(f), FpSet(f)});
  CHECK_FALSE(find(rs, "sigma_prime_energy").preconditions_met);
  CHECK_FALSE(find(rs, "sigma_prime_energy").passed.has_value());
  CHECK(find(rs, "support_cauchy_schwarz").passed == true);
  CHECK(find(rs, "coset_energy_identity").passed == true);
}

TEST_CASE("ratio-closed set reports") {
  const PrimeField f(61);
  for (auto d : divisors(60)) {
    const auto g = subgroup(f, d);
    for (residue xi : {1u, 2u, 7u}) {
      const auto m = max_ratio_closed_set(g, xi);
      const auto rs = check_AA_in_shift_bounds(m.set, g, xi);
      CHECK(find(rs, "ratio_closed_set_size").preconditions_met);
      CHECK(find(rs, "ratio_closed_support_inclusion").passed == true);
    }
  }
  const auto g = subgroup(f, 3);
  const auto rs = check_AA_in_shift_bounds(FpSet(f, {1, 2, 3}), g, 1);
  CHECK_FALSE(find(rs, "ratio_closed_set_size").preconditions_met);
  CHECK_FALSE(find(rs, "ratio_closed_support_inclusion").passed.has_value());
  CHECK_THROWS_AS(check_AA_in_shift_bounds(FpSet(f, {1}), g, 0), precondition_error);
}

TEST_CASE("bound kind names round trip") {
  for (auto k : {BoundKind::soft, BoundKind::hard, BoundKind::info}) CHECK(parse_bound_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_bound_kind("medium"), precondition_error);
}
