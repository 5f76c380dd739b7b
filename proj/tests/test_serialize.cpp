#include <catch_amalgamated.hpp>

#include <cmath>

#include "ffcomb/serialize.hpp"

using namespace ffcomb;
using nlohmann::json;
using nlohmann::ordered_json;

TEST_CASE("FpSet serializes as its text form") {
  const PrimeField f(13);
  const FpSet s(f, {1, 3, 4, 9, 10, 12});
  const json j = s;
  CHECK(j == "13:{1,3,4,9,10,12}");
  CHECK(j.get<FpSet>() == s);
}

TEST_CASE("count tables and quadruple tables round trip") {
  const PrimeField f(11);
  const FpSet a(f, {0, 1, 3}), b(f, {0, 2, 5});
  const auto t = rep_fn(a, b, RepOp::ratio);
  CHECK(json(t).get<CountTable>() == t);

  const auto q = q_fn(a, b, a, b);
  const json jq = q;
  CHECK(jq.at("entries").at(0).size() == 3);
  CHECK(jq.get<QTable>() == q);

  const auto qc = quad_count_Q(a, b, a, b);
  CHECK(json(qc).get<QuadCount>() == qc);
  const auto tc = triple_count(a, b, a);
  CHECK(json(tc).get<TripleCount>() == tc);

  const auto h = line_histogram(a, b);
  const json jh = h;
  CHECK(jh.at("buckets").at(0).size() == 3);
  CHECK(jh.get<LineHistogram>() == h);
}

TEST_CASE("decomposition results round trip") {
  const PrimeField f(13);
  const auto r = sumset_decompositions(subgroup(f, 4).elements);
  const ordered_json j = r;
  CHECK(j.at("p") == 13);
  CHECK(j.at("witnesses").size() == r.witnesses.size());
  CHECK(j.contains("ms"));
  CHECK(j.get<DecompositionResult>() == r);
  const auto parsed = ordered_json::parse(j.dump()).get<DecompositionResult>();
  CHECK(parsed.witnesses == r.witnesses);
  ordered_json no_ms = j;
  no_ms.erase("ms");
  CHECK(no_ms.get<DecompositionResult>().witnesses == r.witnesses);

  const auto m = max_ratio_closed_set(subgroup(f, 6), 1);
  CHECK(json(m).get<MaxSetResult>() == m);
  const DilateWitness w{FpSet(f, {2, 5, 6}), 1};
  CHECK(json(w).get<DilateWitness>() == w);
}

TEST_CASE("bound reports round trip, NaN as null") {
  const PrimeField f(13);
  auto reps = check_energy_bounds(subgroup(f, 4));
  reps.push_back(check_singleton_remark(subgroup(f, 1)));
  BoundReport zero = reps.front();
  zero.rhs = 0;
  zero.ratio = std::nan("");
  reps.push_back(zero);
  for (const auto& r : reps) {
    const ordered_json j = r;
    const auto back = ordered_json::parse(j.dump()).get<BoundReport>();
    CHECK(ordered_json(back) == j);
    CHECK(back.name == r.name);
    CHECK(back.passed == r.passed);
  }
  CHECK(ordered_json(zero).at("ratio").is_null());
}

TEST_CASE("CSV rows") {
  const PrimeField f(13);
  const auto r = check_energy_bounds(subgroup(f, 4)).at(2);
  CHECK(std::string(kCsvHeader) == "name,p,d,lhs,rhs,ratio,preconditions_met");
  const auto row = csv_row(r);
  CHECK(row.rfind("subgroup_energy_lower,13,4,36,", 0) == 0);
  CHECK(row.substr(row.size() - 5) == ",true");
}
