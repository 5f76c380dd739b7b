#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "ffcomb/cli.hpp"

using namespace ffcomb;
using nlohmann::ordered_json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ffcomb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("subgroup") {
  auto r = run({"subgroup", "-p", "13", "-d", "6"});
  CHECK(r.code == 0);
  CHECK(r.out == "13:{1,3,4,9,10,12}\n");
  r = run({"subgroup", "-p", "13", "-d", "6", "--format", "json"});
  CHECK(ordered_json::parse(r.out).at("elements") == "13:{1,3,4,9,10,12}");
  r = run({"subgroup", "-p", "13", "-d", "5"});
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"subgroup", "-p", "15", "-d", "2"}).code == 1);
}

TEST_CASE("usage errors") {
  auto r = run({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("subgroup") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"subgroup", "-d", "6"}).code == 1);
  CHECK(run({"subgroup", "-p", "13", "-d", "6", "--format", "xml"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("setop and energy") {
  CHECK(run({"setop", "-p", "13", "--op", "diff", "-a", "2,5,6"}).out == "13:{0,1,3,4,9,10,12}\n");
  CHECK(run({"setop", "-p", "7", "--op", "ratio", "-a", "1,2"}).out == "7:{2,4}\n");
  CHECK(run({"setop", "-p", "7", "--op", "ratio", "-a", "1,2", "--with-diagonal"}).out == "7:{1,2,4}\n");
  const auto rep = run({"setop", "-p", "7", "--op", "sum", "-a", "0,1", "--rep", "--format", "json"});
  CHECK(ordered_json::parse(rep.out).get<CountTable>().total() == 4);
  CHECK(run({"energy", "-p", "13", "-d", "4"}).out == "36\n");
  CHECK(run({"energy", "-p", "13", "--set", "1,5,8,12"}).out == "36\n");
}

TEST_CASE("counting subcommands") {
  CHECK(run({"quadruples", "-p", "7", "--set", "0,1"}).out == "88\n");
  CHECK(run({"quadruples", "-p", "7", "--set", "0,1", "--oracle"}).out == "88\n");
  const auto q = run({"quadruples", "-p", "7", "--set", "0,1", "--format", "json"});
  CHECK(ordered_json::parse(q.out).get<QuadCount>() == quad_count_Q(FpSet(PrimeField(7), {0, 1})));
  const auto t = run({"triples", "-p", "5", "--set", "0,1", "--support", "--format", "json"});
  CHECK(ordered_json::parse(t.out).contains("support"));
  const auto h = run({"histogram", "-p", "5", "-a", "0,1", "--format", "json"});
  CHECK(ordered_json::parse(h.out).get<LineHistogram>().weighted_sum == 108);
  CHECK(run({"quadruples", "-p", "7"}).code == 1);
}

TEST_CASE("check and intersect") {
  auto r = run({"check", "-p", "13", "--bound", "energy", "-d", "4", "--format", "json"});
  CHECK(r.code == 0);
  CHECK(ordered_json::parse(r.out).size() == 4);
  r = run({"check", "-p", "13", "--bound", "prop_main", "-d", "6", "-a", "2,5,6", "-b", "2,5,6", "--omega1", "0",
           "--omega2", "0", "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("name,p,d,lhs,rhs,ratio,preconditions_met\n", 0) == 0);
  r = run({"check", "-p", "13", "--bound", "energy"});
  CHECK(r.code == 1);
  r = run({"intersect", "-p", "13", "-d", "6", "--shifts", "1,3"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("intersection = ", 0) == 0);
  CHECK(run({"intersect", "-p", "13", "-d", "6", "--shifts", "0"}).code == 1);
}

TEST_CASE("decompose") {
  auto r = run({"decompose", "-p", "13", "--set", "1,5,8,12", "--format", "json"});
  CHECK(r.code == 0);
  const auto d = ordered_json::parse(r.out).get<DecompositionResult>();
  CHECK(d.found());
  CHECK(ordered_json(d).dump() == ordered_json::parse(r.out).dump());
  r = run({"decompose", "-p", "13", "--set", "1,5,8,12", "--oracle", "--format", "json"});
  CHECK(ordered_json::parse(r.out).get<DecompositionResult>().witnesses == d.witnesses);
  r = run({"decompose", "-p", "13", "--set", "0,1,2,3,4,5,6,7", "--budget", "2"});
  CHECK(r.code == 3);
  CHECK(ordered_json::parse(r.out).at("exhaustive") == false);
  r = run({"ratio-decompose", "-p", "7", "--set", "2,4", "--format", "json"});
  CHECK(r.code == 0);
  r = run({"maxset", "-p", "13", "-d", "6", "--xi", "1", "--format", "json"});
  CHECK(ordered_json::parse(r.out).get<MaxSetResult>().set.size() == 2);
  CHECK(run({"maxset", "-p", "13", "-d", "6", "--xi", "0"}).code == 1);
}

TEST_CASE("survey subcommand") {
  const auto dir = std::filesystem::temp_directory_path() / "ffcomb_cli_tests";
  std::filesystem::create_directories(dir);
  const auto out = (dir / "s.jsonl").string();
  std::filesystem::remove(out);
  auto r = run({"survey", "-s", "prime_range=5..23", "-s", "checks=energy,decompose", "-o", out, "--format", "json"});
  CHECK(r.code == 0);
  const auto s = ordered_json::parse(r.out);
  CHECK(s.at("hard_failures") == 0);
  CHECK(s.at("records").get<int>() > 0);
  CHECK(run({"survey", "-s", "bogus=1"}).code == 1);
  CHECK(run({"survey", "-c", (dir / "missing.cfg").string()}).code == 1);
}
