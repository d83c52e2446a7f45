#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "misbelief/errors.hpp"
#include "misbelief/json_io.hpp"
#include "misbelief/scenarios.hpp"

using namespace misbelief;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("misbelief_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// runs the CLI with stdout and stderr captured; returns the exit status
int cli(const std::string& args, const fs::path& dir, std::string* err = nullptr) {
  std::string cmd = std::string(MISBELIEF_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                    (dir / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  if (err) *err = slurp(dir / "stderr.txt");
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string l;
  while (std::getline(ss, l))
    if (!l.empty()) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("json numbers keep 17 significant digits") {
  CHECK(io::dump(io::number(0.1), -1) == "0.10000000000000001");
  CHECK(io::dump(io::number(INFINITY), -1) == "\"inf\"");
  CHECK(io::dump(io::number(-INFINITY), -1) == "\"-inf\"");
  CHECK(io::dump(io::number(NAN), -1) == "\"nan\"");
  double x = 1.0 / 3.0;
  CHECK(io::parse_text(io::dump(io::number(x)), "x").get<double>() == x);
}

TEST_CASE("malformed json reports origin, line and column") {
  try {
    io::parse_text("{\n  \"a\": ,\n}", "cfg.json");
    FAIL("no error");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.rfind("cfg.json:2:", 0) == 0);
  }
  CHECK_THROWS_AS(io::get_double(io::json("text"), "/x"), ConfigError);
}

TEST_CASE("domain objects round trip through json") {
  for (auto& n : scenario_names()) {
    CAPTURE(n);
    auto s = build_scenario(n);
    auto pj = io::to_json(s.problem);
    auto p2 = io::problem_from_json(io::parse_text(io::dump(pj), "p"), "/problem");
    CHECK(io::to_json(p2) == pj);
    for (auto& m : s.models) {
      auto m2 = io::model_from_json(io::parse_text(io::dump(io::to_json(m)), "m"), "/m");
      CHECK(structurally_equal(m, m2));
      auto b = s.prior(m.id());
      CHECK(io::belief_from_json(io::to_json(b), "/b") == b);
    }
  }
  for (auto& d : {OutcomeDistribution::gaussian(0.1, 2.5), OutcomeDistribution::categorical({0.25, 0.75}),
                  OutcomeDistribution::mixture({0.3, 0.7}, {OutcomeDistribution::gaussian(0, 1),
                                                            OutcomeDistribution::gaussian(2, 1)})}) {
    auto j = io::to_json(d);
    CHECK(io::to_json(io::distribution_from_json(j, "/d")) == j);
  }
}

TEST_CASE("cli exit codes and outputs") {
  SUBCASE("scenario run succeeds") {
    auto d = scratch("run");
    CHECK(cli("scenario run overconfidence1 --out " + d.string(), d) == 0);
    auto j = io::parse_file((d / "assertions.json").string());
    CHECK(j.dump().find("\"passed\":false") == std::string::npos);
  }
  SUBCASE("robustness verdict") {
    auto d = scratch("verdict");
    CHECK(cli("robustness --scenario overconfidence1 --out " + d.string(), d) == 0);
    auto j = io::parse_file((d / "verdict.json").string());
    CHECK(j.dump().find("GloballyRobust") != std::string::npos);
    CHECK(j.dump().find("NotGloballyRobust") == std::string::npos);
  }
  SUBCASE("equilibria") {
    auto d = scratch("eq");
    CHECK(cli("equilibria --scenario example1 --out " + d.string(), d) == 0);
    CHECK(fs::exists(d / "equilibria.json"));
  }
  SUBCASE("one path, one period") {
    auto d = scratch("sim1");
    CHECK(cli("simulate --scenario example1 --models theta,truth --paths 1 --horizon 1 --out " + d.string(), d) == 0);
    auto rows = lines(slurp(d / "runs.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "path_id,n_switches,final_model,persist_proxy,absorbed_actions,cumulative_utility");
    CHECK(rows[1].rfind("0,0,theta,1,", 0) == 0);
  }
  SUBCASE("same seed gives identical bytes whatever the thread count") {
    auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    std::string base = "simulate --scenario overconfidence1 --models theta,theta_c --paths 200 --horizon 100 --seed 5 ";
    REQUIRE(cli(base + "--threads 1 --out " + a.string(), a) == 0);
    REQUIRE(cli(base + "--threads 1 --out " + b.string(), b) == 0);
    REQUIRE(cli(base + "--threads 8 --out " + c.string(), c) == 0);
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "summary.json") == slurp(c / "summary.json"));
    CHECK(slurp(a / "runs.csv") == slurp(c / "runs.csv"));
  }
  SUBCASE("seed from the environment") {
    auto a = scratch("env_a"), b = scratch("env_b");
    std::string base = "simulate --scenario example1 --paths 20 --horizon 50 ";
    REQUIRE(cli(base + "--seed 9 --out " + a.string(), a) == 0);
    std::string cmd = "MISBELIEF_SEED=9 " + std::string(MISBELIEF_CLI) + " " + base + "--out " + b.string() + " > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  }
  SUBCASE("dump round trip") {
    auto d = scratch("dump");
    REQUIRE(cli("scenario dump overconfidence2 --out " + d.string(), d) == 0);
    auto back = load_scenario((d / "overconfidence2.json").string());
    CHECK(structurally_equal(back, build_scenario("overconfidence2")));
    CHECK(cli("scenario run " + (d / "overconfidence2.json").string(), d) == 0);
  }
  SUBCASE("failing assertion exits 2") {
    auto d = scratch("fail");
    auto j = scenario_to_json(build_scenario("overconfidence1"));
    for (auto& e : j["expected"])
      if (e["kind"] == "pure_bne") e["args"]["actions"] = {"3"};
    std::ofstream(d / "bad.json") << io::dump(j);
    CHECK(cli("scenario run " + (d / "bad.json").string(), d) == 2);
  }
  SUBCASE("configuration errors exit 1") {
    auto d = scratch("cfg");
    std::ofstream(d / "broken.json") << "{\n  \"name\": \"x\",\n  \"alpha\": ]\n}\n";
    std::string err;
    CHECK(cli("scenario run " + (d / "broken.json").string(), d, &err) == 1);
    CHECK(err.find("broken.json:3:") != std::string::npos);
    CHECK(cli("simulate --scenario example1 --paths 0", d) == 1);
    CHECK(cli("simulate --scenario example1 --alpha 1", d) == 1);
    CHECK(cli("simulate --scenario nope", d) == 1);
    CHECK(cli("simulate --scenario example1 --param colour=3", d) == 1);
    CHECK(cli("bogus", d) == 1);
  }
}
