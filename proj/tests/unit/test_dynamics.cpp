#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "misbelief/dynamics.hpp"
#include "misbelief/scenarios.hpp"

using namespace misbelief;

namespace {

SwitcherConfig oc1_dogmatic() {
  auto s = build_scenario("overconfidence1");
  return make_switcher(s, {"theta"}, std::nullopt, {{"theta", {0.98, 0.01, 0.01}}});
}

bool same_record(const PathRecord& a, const PathRecord& b) {
  if (a.switches.size() != b.switches.size()) return false;
  for (std::size_t i = 0; i < a.switches.size(); ++i)
    if (a.switches[i].t != b.switches[i].t || a.switches[i].to != b.switches[i].to ||
        a.switches[i].log_lambda != b.switches[i].log_lambda)
      return false;
  return a.final_model == b.final_model && a.action_counts == b.action_counts &&
         a.cumulative_utility == b.cumulative_utility && a.persist_proxy == b.persist_proxy &&
         a.absorbed_into == b.absorbed_into;
}

}  // namespace

TEST_CASE("dogmatic modeler never switches") {
  auto cfg = oc1_dogmatic();
  CHECK(cfg.dogmatic());
  RunOptions opt;
  opt.horizon = 200;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto rng = RandomStream::for_path(3, i);
    auto rec = run_path(cfg, opt, rng, i);
    CHECK(rec.switches.empty());
    CHECK(rec.final_model == 0);
    CHECK(rec.persist_proxy);
  }
}

TEST_CASE("identical competing model gives unit likelihood ratios") {
  auto s = build_scenario("overconfidence1");
  auto kernel = [](std::size_t a, std::span<const double> w) {
    return OutcomeDistribution::gaussian((double(a) + 3) * w[0], 1);
  };
  auto m0 = SubjectiveModel::from_kernel_fn("theta", {{1}, {2}, {3}}, 4, kernel);
  auto m1 = SubjectiveModel::from_kernel_fn("twin", {{1}, {2}, {3}}, 4, kernel);
  SwitcherConfig cfg = SwitcherConfig::make(s.problem, {m0, m1}, {Belief::uniform(m0), Belief::uniform(m1)}, 2.0);
  auto state = PathState::initial(cfg);
  auto rng = RandomStream::for_path(9, 0);
  for (int t = 0; t < 300; ++t) {
    auto info = step(cfg, state, rng);
    CHECK_FALSE(info.switched);
    if (t >= 1) CHECK(info.max_log_lambda == 0.0);
  }
  CHECK(state.current == 0);
}

TEST_CASE("overfitting switches at the first opportunity") {
  auto s = build_scenario("overfitting");
  std::vector<std::string> ids;
  for (auto& m : s.models) ids.push_back(m.id());
  auto cfg = make_switcher(s, ids);
  double M = 4, eta = 0.001;
  double trigger = (1 - 1 / M - (M - 1) * eta) / (1 / M);
  CHECK(trigger == doctest::Approx(2.988).epsilon(1e-12));
  CHECK(trigger > cfg.alpha);
  RunOptions opt;
  opt.horizon = 2;
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = RandomStream::for_path(21, i);
    auto rec = run_path(cfg, opt, rng, i);
    REQUIRE(rec.switches.size() == 1);
    CHECK(rec.switches[0].t == 1);
    CHECK(rec.switches[0].from == 0);
    CHECK(rec.switches[0].log_lambda >= std::log(trigger) - 1e-9);
  }
  opt.horizon = 200;
  auto mc = monte_carlo(cfg, 200, opt, 4, 4);
  CHECK(mc.summary.persist_count == 0);
}

TEST_CASE("a single period plays one action") {
  auto s = build_scenario("overconfidence1");
  auto cfg = make_switcher(s, {"theta", "theta_c"});
  RunOptions opt;
  opt.horizon = 1;
  auto rng = RandomStream::for_path(1, 0);
  auto rec = run_path(cfg, opt, rng);
  std::size_t total = 0;
  for (auto c : rec.action_counts) total += c;
  CHECK(total == 1);
  CHECK(rec.switches.empty());
  CHECK(rec.final_model == 0);
  CHECK(rec.absorbed_into.size() == 1);
}

TEST_CASE("dogmatic overconfidence is absorbed into the middle action") {
  auto cfg = oc1_dogmatic();
  RunOptions opt;
  opt.horizon = 400;
  auto mc = monte_carlo(cfg, 1000, opt, 17, 8);
  std::size_t hits = 0;
  for (auto& p : mc.paths)
    if (p.absorbed_into == std::vector<std::size_t>{1}) ++hits;
  CHECK(hits >= 950);
}

TEST_CASE("incremental likelihoods match recomputation from the history") {
  auto s = build_scenario("overconfidence1");
  auto cfg = make_switcher(s, {"theta", "theta_c"});
  auto state = PathState::initial(cfg);
  auto rng = RandomStream::for_path(33, 5);
  History h;
  for (int t = 1; t <= 400; ++t) {
    step(cfg, state, rng);
    h.push_back({*state.last_action, state.last_y});
    if (t % 4 == 0) {
      for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        double direct = log_likelihood(cfg.models[m], cfg.priors[m], h);
        CHECK(std::abs(state.trackers[m].log_likelihood() - direct) < 1e-8);
      }
    }
  }
}

TEST_CASE("switches only happen above the threshold") {
  auto s = build_scenario("overconfidence1");
  auto cfg = make_switcher(s, {"theta", "theta_c"});
  RunOptions opt;
  opt.horizon = 200;
  auto mc = monte_carlo(cfg, 300, opt, 2, 4);
  for (auto& p : mc.paths) {
    if (p.max_log_lambda <= std::log(cfg.alpha)) CHECK(p.switches.empty());
    for (auto& e : p.switches) CHECK(e.log_lambda > std::log(cfg.alpha));
    for (std::size_t i = 1; i < p.switches.size(); ++i) CHECK(p.switches[i].t > p.switches[i - 1].t);
  }
}

TEST_CASE("monte carlo is deterministic across thread counts") {
  auto s = build_scenario("example1");
  auto cfg = make_switcher(s, {"theta", "truth"});
  RunOptions opt;
  opt.horizon = 150;
  auto a = monte_carlo(cfg, 64, opt, 99, 1);
  auto b = monte_carlo(cfg, 64, opt, 99, 8);
  REQUIRE(a.paths.size() == b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i) CHECK(same_record(a.paths[i], b.paths[i]));
  CHECK(a.summary.persist_count == b.summary.persist_count);
  CHECK(a.summary.mean_cumulative_utility == b.summary.mean_cumulative_utility);
  CHECK(a.summary.absorption == b.summary.absorption);
  CHECK(a.summary.switch_histogram == b.summary.switch_histogram);
}

TEST_CASE("one monte carlo path equals run_path") {
  auto s = build_scenario("example1");
  auto cfg = make_switcher(s, {"theta", "truth"});
  RunOptions opt;
  opt.horizon = 120;
  auto mc = monte_carlo(cfg, 1, opt, 55, 1);
  auto rng = RandomStream::for_path(55, 0);
  auto rec = run_path(cfg, opt, rng, 0);
  CHECK(same_record(mc.paths[0], rec));
  CHECK(mc.summary.persist_count == (rec.persist_proxy ? 1u : 0u));
}

TEST_CASE("wilson interval") {
  double z = 1.959963984540054;
  auto e = wilson_interval(0, 10);
  CHECK(e.lo == 0.0);
  CHECK(e.hi == doctest::Approx(z * z / (10 + z * z)).epsilon(1e-12));
  auto f = wilson_interval(10, 10);
  CHECK(f.hi == 1.0);
  CHECK(f.lo == doctest::Approx(10 / (10 + z * z)).epsilon(1e-12));
  // 50 of 100: centre 0.5, half width z sqrt(0.25/100 + z^2/40000) / (1 + z^2/100)
  auto h = wilson_interval(50, 100);
  double half = z * std::sqrt(0.25 / 100 + z * z / 40000) / (1 + z * z / 100);
  CHECK(h.lo == doctest::Approx(0.5 - half).epsilon(1e-12));
  CHECK(h.hi == doctest::Approx(0.5 + half).epsilon(1e-12));
}

TEST_CASE("parallel_for rethrows worker errors") {
  CHECK_THROWS_AS(parallel_for(100, 4, [](std::size_t i) {
                    if (i == 37) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  std::vector<int> hit(50, 0);
  parallel_for(50, 3, [&](std::size_t i) { hit[i] += 1; });
  for (int x : hit) CHECK(x == 1);
}

TEST_CASE("config validation") {
  auto s = build_scenario("overconfidence1");
  CHECK_THROWS(make_switcher(s, {"theta", "theta_c"}, 1.0));
  CHECK_THROWS(make_switcher(s, {"theta", "nope"}));
}
