#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ffcomb/survey.hpp"

using namespace ffcomb;
namespace fs = std::filesystem;

namespace {

std::vector<std::pair<std::uint64_t, std::uint64_t>> keys(const std::vector<Subgroup>& gs) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (const auto& g : gs) out.emplace_back(g.modulus(), g.order);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string without_header(const std::string& s) { return s.substr(s.find('\n') + 1); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ffcomb_survey_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST_CASE("instance enumeration") {
  SurveyConfig cfg;
  cfg.prime_range = {13, 13};
  cfg.subgroup_size_range = {2, 6};
  CHECK(keys(enumerate_instances(cfg)) ==
        std::vector<std::pair<std::uint64_t, std::uint64_t>>{{13, 2}, {13, 3}, {13, 4}, {13, 6}});

  cfg.prime_range = {5, 7};
  cfg.subgroup_size_range = {2, 4};
  CHECK(keys(enumerate_instances(cfg)) ==
        std::vector<std::pair<std::uint64_t, std::uint64_t>>{{5, 2}, {5, 4}, {7, 2}, {7, 3}});

  cfg.prime_range = {2, 200};
  cfg.subgroup_size_range = {1, 1000};
  std::size_t expected = 0;
  for (std::uint64_t p = 2; p <= 200; ++p)
    if (is_prime(p)) expected += divisors(p - 1).size();
  CHECK(enumerate_instances(cfg).size() == expected);

  cfg.max_subgroup_vs_p_exponent = Rational{2, 3};
  for (const auto& g : enumerate_instances(cfg)) CHECK(g.order * g.order * g.order <= std::uint64_t{g.modulus()} * g.modulus());

  cfg.prime_range = {20, 10};
  CHECK_THROWS_AS(enumerate_instances(cfg), precondition_error);
}

TEST_CASE("config parsing") {
  std::istringstream in(R"(# comment
prime_range = 5..50
subgroup_size_range = [2, 12]
max_subgroup_vs_p_exponent = 2/3
checks = energy, theta_bound
seed = 42
shift_k = 1,2,3
decompose_all_witnesses = true
output_path = out.jsonl  # trailing comment
)");
  const auto cfg = parse_survey_config(in);
  CHECK(cfg.prime_range == std::pair<std::uint64_t, std::uint64_t>{5, 50});
  CHECK(cfg.subgroup_size_range == std::pair<std::uint64_t, std::uint64_t>{2, 12});
  CHECK(cfg.max_subgroup_vs_p_exponent == Rational{2, 3});
  CHECK(cfg.checks == std::vector<std::string>{"energy", "theta_bound"});
  CHECK(cfg.seed == 42);
  CHECK(cfg.shift_k == std::vector<unsigned>{1, 2, 3});
  CHECK(cfg.output_path == "out.jsonl");
  CHECK(cfg.decompose_all_witnesses);

  SurveyConfig c2;
  CHECK_THROWS_AS(apply_setting(c2, "colour", "blue"), precondition_error);
  CHECK_THROWS_AS(apply_setting(c2, "prime_range", "5"), precondition_error);
  CHECK_THROWS_AS(apply_setting(c2, "max_subgroup_vs_p_exponent", "2/0"), precondition_error);
  CHECK_THROWS_AS(apply_setting(c2, "decompose_all_witnesses", "maybe"), precondition_error);
  c2.checks = {"nonsense"};
  CHECK_THROWS_AS(validate(c2), precondition_error);
  std::istringstream bad("prime_range 5..7\n");
  CHECK_THROWS_AS(parse_survey_config(bad), precondition_error);
}

TEST_CASE("empty check list gives an empty summary") {
  SurveyConfig cfg;
  cfg.prime_range = {5, 30};
  std::vector<ojson> recs;
  const auto s = run_survey(cfg, &recs);
  CHECK(s.records == 0);
  CHECK(recs.empty());
  CHECK(s.ok());
}

TEST_CASE("theta survey has no hard failures") {
  SurveyConfig cfg;
  cfg.prime_range = {3, 50};
  cfg.subgroup_size_range = {1, 100};
  cfg.checks = {"theta_bound"};
  cfg.shifts_per_instance = 20;
  const auto s = run_survey(cfg);
  CHECK(s.records > 0);
  CHECK(s.hard_failures == 0);
  CHECK(s.ratios.count("shift_intersection_theta") == 1);
}

TEST_CASE("every check runs and records are deterministic") {
  SurveyConfig cfg;
  cfg.prime_range = {5, 31};
  cfg.subgroup_size_range = {1, 12};
  cfg.checks = known_checks();
  cfg.shifts_per_instance = 5;
  cfg.xi_samples = 2;
  std::vector<ojson> r1, r2;
  const auto s1 = run_survey(cfg, &r1);
  run_survey(cfg, &r2);
  CHECK(r1 == r2);
  CHECK(s1.hard_failures == 0);
  CHECK(s1.records == r1.size());
  CHECK(s1.records == enumerate_instances(cfg).size() * cfg.checks.size());
  // (p, d, check) order
  for (std::size_t i = 1; i < r1.size(); ++i) {
    const auto a = std::pair{r1[i - 1]["p"].get<int>(), r1[i - 1]["d"].get<int>()};
    const auto b = std::pair{r1[i]["p"].get<int>(), r1[i]["d"].get<int>()};
    CHECK(a <= b);
  }
  bool saw_reducible = false;
  for (const auto& [p, d] : s1.reducible) saw_reducible = saw_reducible || (p == 13 && d == 4);
  CHECK(saw_reducible);
}

TEST_CASE("worker pool output matches the sequential run") {
  SurveyConfig cfg;
  cfg.prime_range = {5, 41};
  cfg.checks = {"energy", "decompose", "theta_bound"};
  cfg.shifts_per_instance = 3;
  std::vector<ojson> seq, par;
  run_survey(cfg, &seq);
  cfg.workers = 3;
  run_survey(cfg, &par);
  CHECK(seq == par);
}

TEST_CASE("JSONL output is reproducible and resumable") {
  SurveyConfig cfg;
  cfg.prime_range = {5, 37};
  cfg.checks = {"energy", "decompose", "theta_bound"};
  cfg.shifts_per_instance = 4;
  cfg.output_path = scratch("a.jsonl").string();
  cfg.csv_path = scratch("a.csv").string();
  const auto s1 = run_survey(cfg);
  const std::string full = slurp(cfg.output_path);
  CHECK(full.rfind("{\"header\"", 0) == 0);

  // identical rerun into a fresh file
  SurveyConfig again = cfg;
  again.output_path = scratch("b.jsonl").string();
  run_survey(again);
  CHECK(without_header(slurp(again.output_path)) == without_header(full));

  // interrupted: keep the header, three records and half of the fourth
  std::vector<std::string> lines;
  {
    std::istringstream in(full);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  REQUIRE(lines.size() > 5);
  {
    std::ofstream out(cfg.output_path, std::ios::trunc | std::ios::binary);
    for (int i = 0; i < 4; ++i) out << lines[i] << '\n';
    out << lines[4].substr(0, lines[4].size() / 2);
  }
  const auto s2 = run_survey(cfg);
  CHECK(s2.resumed == 3);
  CHECK(s2.records == s1.records);
  CHECK(slurp(cfg.output_path) == full);

  // resuming a complete file computes nothing new
  const auto s3 = run_survey(cfg);
  CHECK(s3.resumed == s1.records);
  CHECK(slurp(cfg.output_path) == full);

  const std::string csv = slurp(cfg.csv_path);
  CHECK(csv.rfind("name,p,d,lhs,rhs,ratio,preconditions_met\n", 0) == 0);
  {
    std::istringstream rows(csv);
    std::string row;
    std::getline(rows, row);
    while (std::getline(rows, row)) {
      const auto c1 = row.find(','), c2 = row.find(',', c1 + 1), c3 = row.find(',', c2 + 1);
      CHECK(row.substr(c2 + 1, c3 - c2 - 1) != "0");
    }
  }

  // a different configuration refuses to append
  SurveyConfig other = cfg;
  other.seed = 99;
  CHECK_THROWS_AS(run_survey(other), precondition_error);
}

TEST_CASE("record seeds") {
  CHECK(record_seed(1, 13, 6, "energy") == record_seed(1, 13, 6, "energy"));
  CHECK(record_seed(1, 13, 6, "energy") != record_seed(2, 13, 6, "energy"));
  CHECK(record_seed(1, 13, 6, "energy") != record_seed(1, 13, 4, "energy"));
  CHECK(record_seed(1, 13, 6, "energy") != record_seed(1, 13, 6, "decompose"));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto xs = detail::sample_shifts(rng, 11, 3);
    CHECK(xs.size() == 3);
    for (auto x : xs) CHECK((x >= 1 && x < 11));
  }
  CHECK_THROWS_AS(detail::sample_shifts(rng, 3, 3), precondition_error);
}

TEST_CASE("empirical exponent") {
  std::vector<std::pair<double, double>> pts;
  const double p = 1009;
  for (double n : {2.0, 4.0, 8.0, 9.0, 14.0}) pts.emplace_back(n, std::pow(n, 4) / p);
  CHECK(empirical_exponent(pts) == Catch::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_exponent({{3.0, 5.0}}), precondition_error);
  CHECK_THROWS_AS(empirical_exponent({{3.0, 5.0}, {3.0, 7.0}}), precondition_error);

  SurveyConfig cfg;
  cfg.prime_range = {101, 101};
  cfg.checks = {"energy"};
  std::vector<ojson> recs;
  run_survey(cfg, &recs);
  const double slope = empirical_exponent(recs, "energy");
  CHECK(slope > 1.5);
  CHECK(slope < 3.5);
}

TEST_CASE("coset inclusion instances satisfy their hypotheses") {
  const PrimeField f(13);
  const auto g = subgroup(f, 4);
  const auto in = coset_inclusion_instance(FpSet(f, {0, 4}), FpSet(f, {1, 8}), g);
  CHECK(in.b.size() <= in.a.size());
  CHECK(sigma_quantities(in).hypotheses_hold);
}

TEST_CASE("large reducible subgroups are findings only when |G|^3 <= p^2") {
  SurveyConfig cfg;
  cfg.prime_range = {23, 23};
  cfg.subgroup_size_range = {22, 22};
  cfg.checks = {"decompose"};
  const auto s = run_survey(cfg);
  REQUIRE(s.reducible.size() == 1);
  CHECK(s.large_reducible.empty());
  CHECK(s.ok());

  SurveySummary fake;
  ojson rec = {{"p", 4099}, {"d", 16}, {"check", "decompose"}, {"hard_failures", 0}, {"budget_exhausted", false},
               {"reports", ojson::array()}, {"result", {{"reducible", true}}}};
  accumulate(fake, rec, 16);
  CHECK(fake.large_reducible.size() == 1);
  CHECK_FALSE(fake.ok());
}
