#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "misbelief/equilibrium.hpp"
#include "misbelief/scenarios.hpp"

using namespace misbelief;

namespace {

double folded_mean(double m) {
  double phi = 0.5 * std::erfc(m / std::sqrt(2.0));
  return std::sqrt(2 / std::numbers::pi) * std::exp(-m * m / 2) + m * (1 - 2 * phi);
}

// E_{N(mu, v)} [ N(y; m1, v) / N(y; m0, v) ]
double gauss_moment(double mu, double m0, double m1, double v) { return std::exp((m1 - m0) * (mu - m0) / v); }

// overconfidence II at action 2: truth N(9, 1) x N(1, 2), model at (b, w): N((2 + b) w, 1) x N(b^2, 2)
double oc2_moment(double b, double w) { return gauss_moment(9, 8, (2 + b) * w, 1) * gauss_moment(1, 4, b * b, 2); }
double oc2_kl(double b, double w) {
  return std::pow((2 + b) * w - 9, 2) / 2 + std::pow(b * b - 1, 2) / 4;
}

bool in_interval(const ProbInterval& iv, double p) {
  return (p > iv.lo || (iv.lo_closed && p >= iv.lo)) && (p < iv.hi || (iv.hi_closed && p <= iv.hi));
}

const EquilibriumRecord* find_pure(const std::vector<EquilibriumRecord>& recs, std::size_t a) {
  for (auto& r : recs)
    if (r.sigma.is_pure() && r.sigma.support()[0] == a) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("pure equilibria of the worked examples") {
  SUBCASE("overconfidence I") {
    auto s = build_scenario("overconfidence1");
    auto& m = s.model("theta");
    auto recs = enumerate_pure_bne(s.problem, m);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].sigma.support() == std::vector<std::size_t>{1});
    REQUIRE(!recs[0].supporting_beliefs.empty());
    CHECK(recs[0].supporting_beliefs[0].probs[0] == doctest::Approx(1.0));
    auto c = classify(s.problem, m, recs[0]);
    CHECK(c.sce);
    CHECK(c.uniformly_quasi_strict);
    CHECK(c.uniformly_quasi_strict_sce);
    auto pa = estimate_p_absorbing(s.problem, m, c, MonteCarloBudget{});
    CHECK(pa.p_absorbing.certified);
    CHECK(pa.p_absorbing.paths == 0);
  }
  SUBCASE("example 1") {
    auto s = build_scenario("example1");
    auto& m = s.model("theta");
    auto recs = enumerate_pure_bne(s.problem, m);
    auto r = find_pure(recs, 0);
    REQUIRE(r != nullptr);
    REQUIRE(!r->supporting_beliefs.empty());
    CHECK(r->supporting_beliefs[0].probs[1] == doctest::Approx(1.0));
    auto c = classify(s.problem, m, *r);
    CHECK(c.sce);
    // the only witness is the point mass on w = 2, where both actions are optimal
    CHECK_FALSE(c.quasi_strict);
    CHECK_FALSE(c.uniformly_quasi_strict);
    CHECK(c.bne);
  }
  SUBCASE("one action") {
    DecisionProblem p;
    p.actions = {{"only", 0}};
    p.outcome_space = OutcomeSpace::real(1);
    p.true_dgp = {OutcomeDistribution::gaussian(0, 1)};
    p.utility = UtilityFn::linear(0, {0});
    SubjectiveModel m("m", {{0}, {3}}, {{OutcomeDistribution::gaussian(0, 1), OutcomeDistribution::gaussian(3, 1)}});
    auto recs = enumerate_pure_bne(p, m);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].bne);
    CHECK(classify(p, m, recs[0]).sce);
  }
  SUBCASE("overconfidence II has no self-confirming equilibrium") {
    auto s = build_scenario("overconfidence2");
    auto& m = s.model("theta");
    CHECK(enumerate_sce(s.problem, m).empty());
    for (auto& r : enumerate_pure_bne(s.problem, m)) CHECK_FALSE(classify(s.problem, m, r).sce);
  }
}

TEST_CASE("correctly specified single parameter gives the true optima") {
  DecisionProblem p;
  p.actions = {{"x", 0}, {"y", 1}, {"z", 2}};
  p.outcome_space = OutcomeSpace::categorical(3);
  p.true_dgp = {OutcomeDistribution::categorical({0.2, 0.3, 0.5}), OutcomeDistribution::categorical({0.6, 0.2, 0.2}),
                OutcomeDistribution::categorical({0.1, 0.1, 0.8})};
  std::vector<std::vector<double>> u = {{1, 2, 3}, {5, 0, 1}, {0, 0, 2.5}};
  p.utility = UtilityFn::table(u);
  SubjectiveModel m("m", {{0}}, {{p.true_dgp[0]}, {p.true_dgp[1]}, {p.true_dgp[2]}});
  // x: 0.2 + 0.6 + 1.5 = 2.3; y: 3 + 0 + 0.2 = 3.2; z: 2.0
  std::vector<double> eu(3);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t y = 0; y < 3; ++y) eu[a] += p.true_dgp[a].probs()[y] * u[a][y];
  std::size_t best = std::max_element(eu.begin(), eu.end()) - eu.begin();
  auto recs = enumerate_pure_bne(p, m);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].sigma.support() == std::vector<std::size_t>{best});
  auto c = classify(p, m, recs[0]);
  CHECK(c.sce);
  CHECK(c.uniformly_quasi_strict_sce);
  CHECK(enumerate_mixed_bne(p, m, 20).empty());
  auto fam = QFamily::from_points("f", {{0}, {1}}, [&](std::size_t a, std::span<const double> w) {
    return w[0] == 0 ? p.true_dgp[a] : OutcomeDistribution::categorical({1.0 / 3, 1.0 / 3, 1.0 / 3});
  }, 2.0);
  CHECK(check_locally_kl_minimizing(p, fam, m, c).family->locally_kl_minimizing);
}

TEST_CASE("example 1 mixed equilibria match a brute-force grid") {
  auto s = build_scenario("example1");
  auto& m = s.model("theta");
  auto mixed = enumerate_mixed_bne(s.problem, m, 2000);
  // truth N(1,1) at both actions; model mean w - 1 at the low action, w - 3 at the high one
  const double ws[3] = {1, 2, 3};
  const std::size_t n = 2000;
  std::size_t found = 0;
  for (std::size_t i = 1; i < n; ++i) {
    double p0 = double(i) / n, p1 = 1 - p0;
    double kl[3], best = INFINITY;
    for (int k = 0; k < 3; ++k) {
      kl[k] = p0 * std::pow(ws[k] - 2, 2) / 2 + p1 * std::pow(ws[k] - 4, 2) / 2;
      best = std::min(best, kl[k]);
    }
    double lo = INFINITY, hi = -INFINITY;
    for (int k = 0; k < 3; ++k)
      if (kl[k] <= best + 1e-12) {
        double d = folded_mean(ws[k] - 1) - folded_mean(ws[k] - 3);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    bool oracle = lo <= 1e-12 && hi >= -1e-12;
    bool lib = false;
    for (auto& r : mixed)
      if (r.exact_interval && in_interval(*r.exact_interval, p0)) lib = true;
    CHECK_MESSAGE(oracle == lib, "p0 = " << p0);
    if (oracle) ++found;
  }
  CHECK(found > 0);
}

TEST_CASE("underconfident team instance has only mixed equilibria") {
  auto s = build_scenario("team", {{"b_hat", 0.3}});
  auto& m = s.models[0];
  CHECK(enumerate_pure_bne(s.problem, m).empty());
  CHECK_FALSE(enumerate_mixed_bne(s.problem, m, 20).empty());
}

TEST_CASE("local dominance and KL minimization on overconfidence II") {
  auto s = build_scenario("overconfidence2");
  auto& m = s.model("theta");
  auto recs = enumerate_pure_bne(s.problem, m);
  auto r = find_pure(recs, 2);
  REQUIRE(r != nullptr);
  auto c = classify(s.problem, m, *r);
  const double radius = 0.4;

  auto half = s.family("half_plane");
  std::size_t neighbors = 0;
  for (auto& pt : half.grid())
    if (std::hypot(pt[0] - 2, pt[1] - 2) <= radius + 1e-9) {
      ++neighbors;
      CHECK(pt[0] >= pt[1]);
      CHECK(oc2_moment(pt[0], pt[1]) <= 1 + 1e-9);
    }
  CHECK(neighbors > 1);
  auto hd = check_local_dominance(s.problem, half, m, c);
  CHECK(hd.family->locally_dominant);
  REQUIRE(hd.family->passing_d);
  CHECK(*hd.family->passing_d == 1.0);
  auto hk = check_locally_kl_minimizing(s.problem, half, m, hd);
  CHECK(hk.family->locally_kl_minimizing);

  auto plane = s.family("plane");
  bool oracle_violation = false;
  for (auto& pt : plane.grid())
    if (std::hypot(pt[0] - 2, pt[1] - 2) <= radius + 1e-9 && oc2_moment(pt[0], pt[1]) > 1 + 1e-9) oracle_violation = true;
  CHECK(oracle_violation);
  auto pd = check_local_dominance(s.problem, plane, m, c, std::nullopt, {1.0});
  CHECK_FALSE(pd.family->locally_dominant);
  REQUIRE(pd.family->dominance_violation);
  auto v = *pd.family->dominance_violation;
  CHECK(oc2_moment(v[0], v[1]) > 1);

  auto pk = check_locally_kl_minimizing(s.problem, plane, m, c);
  CHECK_FALSE(pk.family->locally_kl_minimizing);
  REQUIRE(!pk.family->kl_witnesses.empty());
  for (auto& w : pk.family->kl_witnesses) CHECK(oc2_kl(w[0], w[1]) < oc2_kl(2, 2));
}

TEST_CASE("extreme optimism is not locally KL-minimizing") {
  auto s = build_scenario("investment", {{"b_hat", 2.75}});
  auto& m = s.models[0];
  auto fam = s.family("q");
  auto recs = enumerate_pure_bne(s.problem, m);
  REQUIRE(!recs.empty());
  for (auto& r : recs) {
    auto k = check_locally_kl_minimizing(s.problem, fam, m, classify(s.problem, m, r));
    CHECK_FALSE(k.family->locally_kl_minimizing);
    for (auto& w : k.family->kl_witnesses) CHECK(w[0] < 2.75);
  }
}

TEST_CASE("random categorical instances agree with a dense belief grid") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> U(0.05, 1.0);
  auto rand_cat = [&] {
    std::vector<double> v = {U(gen), U(gen), U(gen)};
    double t = v[0] + v[1] + v[2];
    for (double& x : v) x /= t;
    return v;
  };
  const int res = 300;
  int instances = 0;
  for (int inst = 0; inst < 60; ++inst) {
    DecisionProblem p;
    p.actions = {{"0", 0}, {"1", 1}, {"2", 2}};
    p.outcome_space = OutcomeSpace::categorical(3);
    std::vector<std::vector<double>> u(3, std::vector<double>(3));
    for (auto& row : u)
      for (double& x : row) x = U(gen) * 4;
    p.utility = UtilityFn::table(u);
    for (int a = 0; a < 3; ++a) p.true_dgp.push_back(OutcomeDistribution::categorical(rand_cat()));
    // parameters share kernels at some actions so KL minimizer sets are not singletons
    std::vector<std::vector<double>> shared;
    for (int a = 0; a < 3; ++a) shared.push_back(rand_cat());
    std::vector<std::vector<OutcomeDistribution>> kernels(3);
    std::vector<std::vector<std::vector<double>>> q(3, std::vector<std::vector<double>>(3));
    for (int a = 0; a < 3; ++a)
      for (int w = 0; w < 3; ++w) {
        q[w][a] = (gen() % 3 != 0) ? shared[a] : rand_cat();
        kernels[a].push_back(OutcomeDistribution::categorical(q[w][a]));
      }
    SubjectiveModel m("m", {{0}, {1}, {2}}, kernels);
    // subjective expected utility of action a under parameter w
    double eu[3][3];
    for (int a = 0; a < 3; ++a)
      for (int w = 0; w < 3; ++w) {
        eu[a][w] = 0;
        for (int y = 0; y < 3; ++y) eu[a][w] += q[w][a][y] * u[a][y];
      }
    auto recs = enumerate_pure_bne(p, m);
    for (std::size_t a = 0; a < 3; ++a) {
      double kl[3], best = INFINITY;
      for (int w = 0; w < 3; ++w) {
        kl[w] = 0;
        for (int y = 0; y < 3; ++y) {
          double pt = p.true_dgp[a].probs()[y];
          kl[w] += pt * std::log(pt / q[w][a][y]);
        }
        best = std::min(best, kl[w]);
      }
      std::vector<int> face;
      for (int w = 0; w < 3; ++w)
        if (kl[w] <= best + 1e-12) face.push_back(w);
      bool some_opt = false, all_opt = true, other_opt = false;
      for (int i = 0; i <= res; ++i)
        for (int j = 0; i + j <= res; ++j) {
          double pi[3] = {0, 0, 0};
          double c[3] = {double(i) / res, double(j) / res, double(res - i - j) / res};
          if (face.size() < 3 && c[2] > 0) continue;
          if (face.size() < 2 && c[1] > 0) continue;
          for (std::size_t k = 0; k < face.size(); ++k) pi[face[k]] = c[k];
          double v[3];
          for (int b = 0; b < 3; ++b) v[b] = pi[0] * eu[b][0] + pi[1] * eu[b][1] + pi[2] * eu[b][2];
          double top = std::max({v[0], v[1], v[2]});
          bool opt = v[a] >= top - 1e-12;
          some_opt |= opt;
          all_opt &= opt;
          for (int b = 0; b < 3; ++b)
            if (b != int(a) && v[b] >= top - 1e-12) other_opt = true;
        }
      ++instances;
      auto r = find_pure(recs, a);
      CHECK_MESSAGE((r != nullptr) == some_opt, "instance " << inst << " action " << a);
      if (r) {
        auto c = classify(p, m, *r);
        if (!c.knife_edge) CHECK_MESSAGE(c.uniformly_quasi_strict == (all_opt && !other_opt), "instance " << inst);
      }
    }
  }
  CHECK(instances == 180);
}
