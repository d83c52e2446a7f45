#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "misbelief/errors.hpp"
#include "misbelief/json_io.hpp"
#include "misbelief/scenarios.hpp"

using namespace misbelief;

TEST_CASE("every builtin scenario builds, round trips and passes its assertions") {
  auto names = scenario_names();
  CHECK(names.size() >= 10);
  for (auto& n : names) {
    CAPTURE(n);
    auto s = build_scenario(n);
    CHECK(s.name == n);
    CHECK(!s.expected.empty());
    CHECK(!scenario_summary(n).empty());
    auto j = scenario_to_json(s);
    auto back = scenario_from_json(io::parse_text(io::dump(j), "roundtrip"));
    CHECK(structurally_equal(s, back));
    AssertionOptions opt;
    opt.threads = 8;
    for (auto& r : run_assertions(back, opt)) {
      CAPTURE(r.id);
      CAPTURE(r.detail);
      CHECK(r.passed);
      CHECK((r.provenance == "published" || r.provenance == "derived" || r.provenance == "trivial"));
    }
  }
}

TEST_CASE("regime variants of the applications") {
  auto th = investment_thresholds();
  CHECK(th.beta_low < th.beta_high);
  for (double b : {th.beta_low - 0.25, 0.5 * (th.beta_low + th.beta_high), th.beta_high + 0.25}) {
    CAPTURE(b);
    auto s = build_scenario("investment", {{"b_hat", b}});
    for (auto& r : run_assertions(s)) {
      CAPTURE(r.id);
      CHECK(r.passed);
    }
  }
  for (double b : {0.3, 3.0}) {
    CAPTURE(b);
    auto s = build_scenario("team", {{"b_hat", b}});
    for (auto& r : run_assertions(s)) {
      CAPTURE(r.id);
      CHECK(r.passed);
    }
  }
}

TEST_CASE("untagged or mistagged assertions are refused") {
  auto j = scenario_to_json(build_scenario("overconfidence1"));
  SUBCASE("unknown tag") {
    j["expected"][0]["provenance"] = "paper";
    auto s = scenario_from_json(j);
    CHECK_THROWS_AS(run_assertions(s), ConfigError);
  }
  SUBCASE("missing tag") {
    j["expected"][0].erase("provenance");
    CHECK_THROWS_AS(run_assertions(scenario_from_json(j)), ConfigError);
  }
  SUBCASE("unknown kind") {
    j["expected"][0]["kind"] = "vibes";
    CHECK_THROWS_AS(run_assertions(scenario_from_json(j)), ConfigError);
  }
}

TEST_CASE("a failing expectation is reported, not thrown") {
  auto j = scenario_to_json(build_scenario("overconfidence1"));
  for (auto& e : j["expected"])
    if (e["kind"] == "pure_bne") e["args"]["actions"] = {"3"};
  auto res = run_assertions(scenario_from_json(j));
  bool failed = false;
  for (auto& r : res)
    if (r.kind == "pure_bne") failed = !r.passed;
  CHECK(failed);
}

TEST_CASE("bad builder input") {
  CHECK_THROWS_AS(build_scenario("nope"), ConfigError);
  CHECK_THROWS_AS(build_scenario("example1", {{"colour", 1}}), ConfigError);
  CHECK_THROWS_AS(build_scenario("example1", {{"alpha", 0.5}}), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("loading from a file") {
  auto s = build_scenario("overfitting", {{"eta", 0.002}});
  std::string path = "test_scenarios_tmp.json";
  {
    std::ofstream f(path);
    f << io::dump(scenario_to_json(s));
  }
  auto back = load_scenario(path);
  CHECK(structurally_equal(s, back));
  CHECK(back.models.size() == 5);
  std::remove(path.c_str());
}

TEST_CASE("switcher construction from a scenario") {
  auto s = build_scenario("overconfidence1");
  auto cfg = make_switcher(s, {"theta", "theta_c"}, 3.0, {{"theta", {0.5, 0.25, 0.25}}});
  CHECK(cfg.alpha == 3.0);
  CHECK(cfg.models.size() == 2);
  CHECK(cfg.priors[0].probs == std::vector<double>{0.5, 0.25, 0.25});
  CHECK_THROWS(make_switcher(s, {"theta"}, std::nullopt, {{"theta", {1.0, 0.0, 0.0}}}));
}
