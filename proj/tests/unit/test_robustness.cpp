#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "misbelief/robustness.hpp"
#include "misbelief/scenarios.hpp"

using namespace misbelief;

namespace {

std::vector<EquilibriumRecord> classified_sce(const DecisionProblem& p, const SubjectiveModel& m) {
  std::vector<EquilibriumRecord> out;
  for (auto& r : enumerate_sce(p, m)) {
    auto c = classify(p, m, r);
    MonteCarloBudget b;
    b.paths = 200;
    b.horizon = 200;
    out.push_back(estimate_p_absorbing(p, m, c, b));
  }
  return out;
}

}  // namespace

TEST_CASE("multi-model gate arithmetic") {
  for (double alpha : {1.01, 2.0, 10.0})
    for (double d : {0.5, 1.0, 2.0}) {
      auto g = multi_model_gate(alpha, 1, d);
      CHECK(g.global_ok);
      CHECK(g.constrained_ok);
    }
  CHECK_FALSE(multi_model_gate(2.5, 4).global_ok);
  CHECK_FALSE(multi_model_gate(2.5, 4).constrained_ok);
  auto g = multi_model_gate(2, 3, 0.5);
  CHECK_FALSE(g.constrained_ok);
  CHECK_FALSE(g.global_ok);
  CHECK(multi_model_gate(2.5, 4, 2.0).constrained_ok);
  CHECK(multi_model_gate(4, 3).global_ok);
  CHECK_FALSE(multi_model_gate(3, 3).global_ok);

  auto s = build_scenario("overfitting");
  std::vector<std::string> ids;
  for (auto& m : s.models) ids.push_back(m.id());
  CHECK(multi_model_warning(make_switcher(s, ids)).has_value());
  auto o = build_scenario("overconfidence1");
  CHECK_FALSE(multi_model_warning(make_switcher(o, {"theta", "theta_c"})).has_value());
}

TEST_CASE("global verdicts") {
  SUBCASE("overconfidence I is certified robust") {
    auto s = build_scenario("overconfidence1");
    auto v = global_verdict(s.problem, s.model("theta"));
    CHECK(v.kind == VerdictKind::GloballyRobust);
    CHECK(v.certainty == Certainty::Certified);
    CHECK(!v.basis.empty());
    auto u = unconstrained_local_verdict(s.problem, s.model("theta"));
    CHECK(u.kind == v.kind);
  }
  SUBCASE("overconfidence II is certified not robust") {
    auto s = build_scenario("overconfidence2");
    auto v = global_verdict(s.problem, s.model("theta"));
    CHECK(v.kind == VerdictKind::NotGloballyRobust);
    CHECK(v.certainty == Certainty::Certified);
    CHECK(unconstrained_local_verdict(s.problem, s.model("theta")).kind == VerdictKind::NotGloballyRobust);
  }
  SUBCASE("extreme pessimism is robust") {
    auto th = investment_thresholds();
    REQUIRE(th.beta_low > 0.25);
    auto s = build_scenario("investment", {{"b_hat", th.beta_low - 0.25}});
    auto v = global_verdict(s.problem, s.models[0]);
    CHECK(v.kind == VerdictKind::GloballyRobust);
  }
  SUBCASE("a correctly specified model is certified robust") {
    auto s = build_scenario("overconfidence2");
    auto& m = s.model("theta");
    auto truth = correct_parameter(s.problem, m);
    CHECK_FALSE(truth.has_value());
    std::vector<OutcomeDistribution> k(s.problem.true_dgp.begin(), s.problem.true_dgp.end());
    auto aug = augment_model(m, {ExtraParameter{{1.0, 3.0}, k}}, "theta_true");
    REQUIRE(correct_parameter(s.problem, aug).has_value());
    CHECK(*correct_parameter(s.problem, aug) == m.num_params());
    auto v = global_verdict(s.problem, aug);
    CHECK(v.kind == VerdictKind::GloballyRobust);
    CHECK(v.certainty == Certainty::Certified);
  }
}

TEST_CASE("no-SCE verdicts are confirmed by the mixture adversary") {
  auto s = build_scenario("overconfidence2");
  auto& m = s.model("theta");
  REQUIRE(global_verdict(s.problem, m).kind == VerdictKind::NotGloballyRobust);
  auto adv = convex_mix_model(m, s.problem, 0.5, "mix");
  auto cfg = SwitcherConfig::make(s.problem, {m, adv}, {Belief::uniform(m), Belief::uniform(adv)}, 2.0);
  RunOptions opt;
  opt.horizon = 300;
  auto mc = monte_carlo(cfg, 500, opt, 8, 8);
  std::size_t exceeded = 0;
  for (auto& p : mc.paths)
    if (p.max_log_lambda > std::log(2.0)) ++exceeded;
  double f = double(exceeded) / mc.paths.size();
  CHECK(f >= 0.99 - 3 * std::sqrt(0.99 * 0.01 / mc.paths.size()));
}

TEST_CASE("prior mass gate") {
  auto s = build_scenario("overconfidence1");
  auto& m = s.model("theta");
  auto sce = classified_sce(s.problem, m);
  REQUIRE(!sce.empty());

  auto tight = Belief::prior(m, {1 - 2e-6, 1e-6, 1e-6});
  for (double alpha : {1.001, 2.0, 50.0}) CHECK(prior_mass_gate(s.problem, m, tight, alpha, sce).passes);

  auto loose = Belief::prior(m, {0.4, 0.3, 0.3});
  auto g = prior_mass_gate(s.problem, m, loose, 2.0, sce);
  CHECK_FALSE(g.passes);
  CHECK(g.mass == doctest::Approx(0.4));
  CHECK(g.bound == doctest::Approx(0.5));
  REQUIRE(g.adversary.has_value());

  auto cfg = SwitcherConfig::make(s.problem, {m, g.adversary->model}, {loose, g.adversary->prior}, 2.0);
  RunOptions opt;
  opt.horizon = 500;
  auto mc = monte_carlo(cfg, 2000, opt, 13, 8);
  CHECK(mc.summary.switched_paths >= std::size_t(0.99 * 2000));

  // near one the bound demands almost all the mass
  auto high = Belief::prior(m, {0.98, 0.01, 0.01});
  CHECK(prior_mass_gate(s.problem, m, high, 2.0, sce).passes);
  CHECK_FALSE(prior_mass_gate(s.problem, m, high, 1.01, sce).passes);

  auto none = prior_mass_gate(s.problem, m, high, 2.0, {});
  CHECK_FALSE(none.passes);
  CHECK(none.mass == 0.0);
}

TEST_CASE("gate failure switching grows with the horizon") {
  auto s = build_scenario("overconfidence1");
  auto& m = s.model("theta");
  auto sce = classified_sce(s.problem, m);
  auto loose = Belief::prior(m, {0.4, 0.3, 0.3});
  auto g = prior_mass_gate(s.problem, m, loose, 2.0, sce);
  REQUIRE(g.adversary.has_value());
  auto cfg = SwitcherConfig::make(s.problem, {m, g.adversary->model}, {loose, g.adversary->prior}, 2.0);
  RunOptions a, b;
  a.horizon = 50;
  b.horizon = 500;
  auto short_run = monte_carlo(cfg, 1000, a, 3, 8);
  auto long_run = monte_carlo(cfg, 1000, b, 3, 8);
  CHECK(long_run.summary.switched_paths >= short_run.summary.switched_paths);
  CHECK(long_run.summary.switched_paths >= 990);
}

TEST_CASE("constrained verdicts") {
  auto s = build_scenario("overconfidence2");
  auto& m = s.model("theta");
  auto half = constrained_verdict(s.problem, s.family("half_plane"), m, false);
  CHECK(half.kind == VerdictKind::ConstrainedLocallyRobust);
  auto plane = constrained_verdict(s.problem, s.family("plane"), m, true);
  CHECK(plane.kind == VerdictKind::NotConstrainedLocallyRobust);
  CHECK(plane.adversary.has_value());
  auto plane_open = constrained_verdict(s.problem, s.family("plane"), m, false);
  CHECK(plane_open.kind == VerdictKind::Inconclusive);

  auto t = build_scenario("team", {{"b_hat", 0.3}});
  auto tv = constrained_verdict(t.problem, t.family(t.families.begin()->first), t.models[0], true);
  CHECK(tv.kind == VerdictKind::NotConstrainedLocallyRobust);
  REQUIRE(!tv.witness_points.empty());
  bool in_range = false;
  for (auto& w : tv.witness_points)
    if (w[0] > 0.3 && w[0] <= 1.0 + 1e-9) in_range = true;
  CHECK(in_range);
}

TEST_CASE("verdict kind strings round trip") {
  for (auto k : {VerdictKind::GloballyRobust, VerdictKind::NotGloballyRobust, VerdictKind::ConstrainedLocallyRobust,
                 VerdictKind::NotConstrainedLocallyRobust, VerdictKind::Inconclusive})
    CHECK(verdict_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(verdict_kind_from_string("Robust"));
}
