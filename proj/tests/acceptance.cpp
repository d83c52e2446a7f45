// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "misbelief/json_io.hpp"
#include "misbelief/robustness.hpp"
#include "misbelief/scenarios.hpp"

using namespace misbelief;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream log;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      log << "  failed: " << what << "\n";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

const EquilibriumRecord* pure_at(const std::vector<EquilibriumRecord>& recs, std::size_t a) {
  for (auto& r : recs)
    if (r.sigma.is_pure() && r.sigma.support()[0] == a) return &r;
  return nullptr;
}

bool has_basis(const Verdict& v, const std::string& prefix) {
  for (auto& b : v.basis)
    if (b.rfind(prefix, 0) == 0) return true;
  return false;
}

void ac1(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  auto s = build_scenario("overconfidence1");
  auto& m = s.model("theta");
  auto results = run_assertions(s);
  for (auto& r : results) c.expect(r.passed, "scenario assertion " + r.id + ": " + r.detail);
  auto pure = enumerate_pure_bne(s.problem, m);
  c.expect(pure.size() == 1, "exactly one pure equilibrium");
  if (pure.size() == 1) {
    auto& r = pure[0];
    c.expect(r.sigma.support() == std::vector<std::size_t>{1}, "equilibrium action is 1");
    c.expect(!r.supporting_beliefs.empty() && r.supporting_beliefs[0].probs[0] > 1 - 1e-9, "witness is the point mass on w = 1");
    auto k = classify(s.problem, m, r);
    c.expect(k.uniformly_quasi_strict_sce, "uniformly quasi-strict SCE");
  }
  auto v = global_verdict(s.problem, m);
  c.expect(v.kind == VerdictKind::GloballyRobust && v.certainty == Certainty::Certified, "GloballyRobust certified");
  c.expect(has_basis(v, "uniformly-quasi-strict-sce-sufficiency"), "verdict rests on the uniformly quasi-strict SCE rule");
  double secs = seconds_since(t0);
  c.log << "  runtime " << secs << " s\n";
  c.expect(secs < 1.0, "runtime below 1 s");
}

void ac2(Check& c) {
  auto s = build_scenario("overconfidence2");
  auto& m = s.model("theta");
  auto kernel = s.family("plane").kernel_fn();
  const std::size_t a = 2;  // the equilibrium action, witness (b, w) = (2, 2)
  const double base[2] = {2.0, 2.0};
  double worst = 0.0;
  std::size_t count = 0;
  bool all_le_one = true;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      double b = 0.2 * i, w = 0.2 * j;
      if (b < w) continue;
      ++count;
      double pt[2] = {b, w};
      auto r = dominance_moment(s.problem, kernel, a, pt, base, 1.0);
      double expect = std::exp((2 + b) * w - 1.5 * b * b - 2);
      worst = std::max(worst, std::abs(r.value - expect));
      if (r.value > 1.0) all_le_one = false;
    }
  auto at = dominance_moment(s.problem, kernel, a, base, base, 1.0);
  c.log << "  " << count << " grid points, max abs error " << worst << "\n";
  c.expect(worst <= 1e-9, "moment matches the closed form within 1e-9");
  c.expect(all_le_one, "all moments at most 1");
  c.expect(at.value == 1.0, "moment exactly 1 at (2, 2)");
  auto half = constrained_verdict(s.problem, s.family("half_plane"), m, false);
  c.expect(half.kind == VerdictKind::ConstrainedLocallyRobust, "half-plane family: ConstrainedLocallyRobust");
  auto plane = constrained_verdict(s.problem, s.family("plane"), m, true);
  c.expect(plane.kind == VerdictKind::NotConstrainedLocallyRobust, "plane family: NotConstrainedLocallyRobust");
}

void ac3(Check& c) {
  auto s = build_scenario("overfitting");
  const double alpha = 2.5, eta = 0.001, M = 4;
  c.expect(s.alpha == alpha, "alpha 2.5");
  c.expect(s.models.size() == 5, "initial model plus M = 4 competitors");
  double trigger = (1 - 1 / M - (M - 1) * eta) / (1 / M);
  c.expect(std::abs(trigger - 2.988) < 1e-12 && trigger > alpha, "trigger 2.988 exceeds alpha");
  std::vector<std::string> ids;
  for (auto& m : s.models) ids.push_back(m.id());
  auto cfg = make_switcher(s, ids);
  RunOptions opt;
  opt.horizon = 200;
  auto mc = monte_carlo(cfg, 1000, opt, 2024, threads());
  std::size_t at_one = 0, back = 0, final_theta = 0;
  for (auto& p : mc.paths) {
    if (!p.switches.empty() && p.switches[0].t == 1 && p.switches[0].from == 0) ++at_one;
    for (auto& e : p.switches)
      if (e.to == 0) {
        ++back;
        break;
      }
    if (p.final_model == 0) ++final_theta;
  }
  c.log << "  switched at t=1: " << at_one << "/1000, returned: " << back << ", ended on theta: " << final_theta << "\n";
  c.expect(at_one == 1000, "every path switches at t = 1");
  c.expect(back == 0, "no path switches back");
  c.expect(final_theta == 0, "no path ends on the initial model");
}

void ac4(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  auto s = build_scenario("martingale");
  auto cfg = make_switcher(s, {"theta", "truth"});
  RunOptions opt;
  opt.horizon = 200;
  opt.checkpoints = {50, 100, 200};
  opt.ratios = {RatioSpec{0, 1}};
  auto mc = monte_carlo(cfg, 5000, opt, 31, threads());
  for (auto& st : mc.summary.ratio_stats) {
    c.log << "  t=" << st.t << " mean " << st.mean << " se " << st.se << "\n";
    c.expect(std::abs(st.mean - 1.0) <= 3 * st.se, "mean within 3 SE of 1 at t=" + std::to_string(st.t));
  }
  c.expect(mc.summary.ratio_stats.size() == 3, "three checkpoints");
  double secs = seconds_since(t0);
  c.log << "  runtime " << secs << " s\n";
  c.expect(secs < 30.0, "runtime below 30 s");
}

void ac5(Check& c) {
  auto s = build_scenario("martingale");
  auto cfg = make_switcher(s, {"truth", "shifted"});
  RunOptions opt;
  opt.horizon = 1000;
  opt.exceedances = {ExceedanceSpec{RatioSpec{1, -1}, 3.0}};
  const std::size_t n = 5000;
  auto mc = monte_carlo(cfg, n, opt, 37, threads());
  auto& ex = mc.summary.exceedance_stats.at(0);
  double bound = 1.0 / 3.0 + 3 * ex.se;
  c.log << "  exceedance frequency " << ex.frequency << " (bound " << bound << ")\n";
  c.expect(ex.frequency <= bound, "Ville bound holds");
}

void ac6(Check& c) {
  auto s = build_scenario("overconfidence1");
  auto& m = s.model("theta");
  std::vector<EquilibriumRecord> sce;
  for (auto& r : enumerate_sce(s.problem, m)) sce.push_back(estimate_p_absorbing(s.problem, m, classify(s.problem, m, r), {}));
  RunOptions opt;
  opt.horizon = 500;

  auto low = Belief::prior(m, {0.4, 0.3, 0.3});
  auto g = prior_mass_gate(s.problem, m, low, 2.0, sce);
  c.expect(!g.passes, "gate fails at mass 0.4");
  if (g.adversary) {
    auto cfg = SwitcherConfig::make(s.problem, {m, g.adversary->model}, {low, g.adversary->prior}, 2.0);
    auto mc = monte_carlo(cfg, 2000, opt, 41, threads());
    c.log << "  mass 0.4: " << mc.summary.switched_paths << "/2000 paths switched by T=500\n";
    c.expect(mc.summary.switched_paths >= 1980, "at least 99% of paths switch");
  } else {
    c.expect(false, "adversary constructed");
  }

  auto high = Belief::prior(m, {0.98, 0.01, 0.01});
  auto gh = prior_mass_gate(s.problem, m, high, 2.0, sce);
  c.expect(gh.passes, "gate passes at mass 0.98");
  if (gh.adversary) {
    auto cfg = SwitcherConfig::make(s.problem, {m, gh.adversary->model}, {high, gh.adversary->prior}, 2.0);
    auto mc = monte_carlo(cfg, 2000, opt, 43, threads());
    c.log << "  mass 0.98: persist frequency " << mc.summary.persist_frequency << ", Wilson lower "
          << mc.summary.persist_wilson.lo << "\n";
    c.expect(mc.summary.persist_count > 0 && mc.summary.persist_wilson.lo > 0, "persistence with positive Wilson lower bound");
  } else {
    c.expect(false, "adversary constructed");
  }
}

void ac7(Check& c) {
  auto s = build_scenario("example1");
  auto& m = s.model("theta");
  auto cfg = make_switcher(s, {"theta"});
  const std::size_t n = 1000, high = 1;
  auto late_high = [&](std::size_t T) {
    RunOptions opt;
    opt.horizon = T;
    auto mc = monte_carlo(cfg, n, opt, 47, threads());
    std::size_t k = 0;
    for (auto& p : mc.paths)
      if (std::find(p.absorbed_into.begin(), p.absorbed_into.end(), high) != p.absorbed_into.end()) ++k;
    return double(k) / n;
  };
  double f2 = late_high(2000), f4 = late_high(4000);
  double se = std::sqrt(f2 * (1 - f2) / n + f4 * (1 - f4) / n);
  c.log << "  high action in (T/2, T]: " << f2 << " at T=2000, " << f4 << " at T=4000 (3 SE = " << 3 * se << ")\n";
  c.expect(f4 >= f2 - 3 * se, "fraction does not drop by more than 3 SE");

  auto pure = enumerate_pure_bne(s.problem, m);
  auto r = pure_at(pure, 0);
  c.expect(r != nullptr, "pure equilibrium at the low action");
  if (!r) return;
  auto rec = classify(s.problem, m, *r);
  MonteCarloBudget b;
  b.paths = n;
  b.eps = 0.05;
  b.seed = 53;
  b.threads = threads();
  b.horizon = 1000;
  auto p1 = estimate_p_absorbing(s.problem, m, rec, b).p_absorbing;
  b.horizon = 4000;
  auto p4 = estimate_p_absorbing(s.problem, m, rec, b).p_absorbing;
  c.log << "  p-absorption upper bound " << p1.interval.hi << " at T=1000, " << p4.interval.hi << " at T=4000\n";
  c.expect(!p1.certified && !p4.certified, "not certified");
  c.expect(p4.interval.hi < p1.interval.hi, "upper bound decays");
}

void ac8(Check& c) {
  auto s = build_scenario("overconfidence1");
  auto& m = s.model("theta");
  auto prior = Belief::prior(m, {0.5, 0.3, 0.2});
  std::mt19937_64 gen(8);
  double worst_ll = 0.0, worst_post = 0.0;
  for (int h = 0; h < 100; ++h) {
    RandomStream rng(8, h);
    History hist;
    Belief seq = prior;
    for (int t = 0; t < 500; ++t) {
      std::size_t a = gen() % s.problem.num_actions();
      Outcome y = sample(s.problem.true_dgp[a], rng);
      seq = bayes_update(m, seq, a, y);
      hist.push_back({a, y});
    }
    double direct = log_likelihood(m, prior, hist);
    double rec = log_likelihood_recursive(m, prior, hist);
    worst_ll = std::max(worst_ll, std::abs(direct - rec));
    // batch posterior from summed log densities
    std::vector<double> lp(m.num_params());
    for (std::size_t w = 0; w < lp.size(); ++w) {
      lp[w] = std::log(prior.probs[w]);
      for (auto& o : hist) lp[w] += log_density(m.kernel(o.action, w), o.y);
    }
    double mx = *std::max_element(lp.begin(), lp.end()), z = 0.0;
    for (double x : lp) z += std::exp(x - mx);
    for (std::size_t w = 0; w < lp.size(); ++w)
      worst_post = std::max(worst_post, std::abs(std::exp(lp[w] - mx) / z - seq.probs[w]));
  }
  c.log << "  max likelihood gap " << worst_ll << ", max posterior gap " << worst_post << "\n";
  c.expect(worst_ll <= 1e-8, "recursive and direct log-likelihoods agree");
  c.expect(worst_post <= 1e-8, "sequential and batch posteriors agree");

  for (std::string name : {"overconfidence1", "example1", "overfitting"}) {
    auto sc = build_scenario(name);
    std::vector<std::string> ids;
    for (auto& mm : sc.models) ids.push_back(mm.id());
    auto cfg = make_switcher(sc, ids);
    RunOptions opt;
    opt.horizon = 300;
    opt.checkpoints = {100, 300};
    opt.ratios = {RatioSpec{0, -1}};
    auto one = monte_carlo(cfg, 200, opt, 61, 1);
    auto eight = monte_carlo(cfg, 200, opt, 61, 8);
    bool same = io::dump(io::to_json(one.summary)) == io::dump(io::to_json(eight.summary));
    for (std::size_t i = 0; same && i < one.paths.size(); ++i) {
      auto& x = one.paths[i];
      auto& y = eight.paths[i];
      same = x.action_counts == y.action_counts && x.cumulative_utility == y.cumulative_utility &&
             x.switches.size() == y.switches.size() && x.final_model == y.final_model &&
             x.checkpoint_log_l == y.checkpoint_log_l;
    }
    c.expect(same, name + ": identical output on 1 and 8 threads");
  }
}

void ac9(Check& c) {
  auto th = investment_thresholds();
  c.log << "  investment thresholds " << th.beta_low << ", " << th.beta_high << "\n";
  {
    auto s = build_scenario("investment", {{"b_hat", th.beta_low - 0.25}});
    auto& m = s.models[0];
    auto v = global_verdict(s.problem, m);
    c.expect(v.kind == VerdictKind::GloballyRobust, "pessimism: GloballyRobust");
    std::size_t safe = s.problem.num_actions() - 1;
    bool safe_sce = false;
    for (auto& r : enumerate_sce(s.problem, m))
      if (r.sigma.support() == std::vector<std::size_t>{safe}) safe_sce = classify(s.problem, m, r).sce;
    c.expect(safe_sce, "pessimism: SCE on the safe asset");
  }
  {
    double b_hat = th.beta_high + 0.25;
    double b_star = build_scenario("investment").params.at("b_star").get<double>();
    auto s = build_scenario("investment", {{"b_hat", b_hat}});
    auto& m = s.models[0];
    c.expect(enumerate_sce(s.problem, m).empty(), "optimism: no SCE");
    auto v = constrained_verdict(s.problem, s.family("q"), m, true);
    c.expect(v.kind == VerdictKind::NotConstrainedLocallyRobust, "optimism: NotConstrainedLocallyRobust");
    bool in_range = false;
    for (auto& w : v.witness_points)
      if (w[0] >= b_star - 1e-9 && w[0] < b_hat) in_range = true;
    c.expect(in_range, "optimism: witness b in [b*, b_hat)");
  }
  {
    auto s = build_scenario("team");
    auto& m = s.models[0];
    double b_star = s.params.at("b_star").get<double>(), b_hat = s.params.at("b_hat").get<double>();
    c.expect(b_hat > b_star, "default team instance is overconfident");
    bool strict = false;
    for (auto& r : enumerate_pure_bne(s.problem, m)) {
      auto k = classify(s.problem, m, r);
      if (k.sce && k.uniformly_quasi_strict) strict = true;
    }
    c.expect(strict, "overconfident team: pure uniformly strict SCE");
    c.expect(global_verdict(s.problem, m).kind == VerdictKind::GloballyRobust, "overconfident team: GloballyRobust");
  }
  {
    auto s = build_scenario("team", {{"b_hat", 0.3}});
    auto& m = s.models[0];
    c.expect(enumerate_pure_bne(s.problem, m).empty(), "underconfident team: no pure equilibrium");
    c.expect(!enumerate_mixed_bne(s.problem, m, 20).empty(), "underconfident team: mixed equilibrium");
    auto v = constrained_verdict(s.problem, s.family("q"), m, true);
    c.expect(v.kind == VerdictKind::NotConstrainedLocallyRobust, "underconfident team: NotConstrainedLocallyRobust");
  }
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"AC1 overconfidence I certified pipeline", ac1},
      {"AC2 overconfidence II moment identity and constrained verdicts", ac2},
      {"AC3 overfitting switches at t=1 and never returns", ac3},
      {"AC4 likelihood-ratio martingale mean", ac4},
      {"AC5 Ville maximal bound", ac5},
      {"AC6 prior-mass gate falsification", ac6},
      {"AC7 example 1 non-absorption direction", ac7},
      {"AC8 numerical self-consistency and determinism", ac8},
      {"AC9 application regimes", ac9},
  };
  int failed = 0;
  for (auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.log << "  exception: " << e.what() << "\n";
    }
    std::printf("%s %s\n", c.ok ? "PASS" : "FAIL", name.c_str());
    std::fputs(c.log.str().c_str(), stdout);
    std::fflush(stdout);
    if (!c.ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
