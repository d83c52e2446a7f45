#include "misbelief/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "misbelief/lp.hpp"

namespace misbelief {

Strategy Strategy::pure(std::size_t num_actions, std::size_t a) {
  Strategy s{std::vector<double>(num_actions, 0.0)};
  s.probs.at(a) = 1.0;
  return s;
}

std::vector<std::size_t> Strategy::support(double tol) const {
  std::vector<std::size_t> s;
  for (std::size_t a = 0; a < probs.size(); ++a)
    if (probs[a] > tol) s.push_back(a);
  return s;
}

std::vector<EquilibriumRecord> EquilibriumAnalysis::all() const {
  std::vector<EquilibriumRecord> v = pure;
  v.insert(v.end(), mixed.begin(), mixed.end());
  v.insert(v.end(), sce.begin(), sce.end());
  return v;
}

namespace {

constexpr double kTol = 1e-9;

struct Tables {
  std::vector<std::vector<double>> kl;
  std::vector<std::vector<double>> eu;
};

Tables tables(const DecisionProblem& problem, const SubjectiveModel& model) {
  return {kl_matrix(problem, model), subjective_eu(problem, model)};
}

Belief expand(const SubjectiveModel& model, const std::vector<std::size_t>& subset, const std::vector<double>& local) {
  Belief b{model.id(), std::vector<double>(model.num_params(), 0.0)};
  for (std::size_t j = 0; j < subset.size(); ++j) b.probs[subset[j]] = local[j];
  return b;
}

EquilibriumRecord evaluate(const SubjectiveModel& model, const Tables& t, const Strategy& sigma) {
  EquilibriumRecord r;
  r.sigma = sigma;
  r.origin = sigma.is_pure() ? "pure" : "mixed";
  r.kl_minimizers = kl_minimizers(t.kl, sigma.probs, kTol);
  auto supp = sigma.support();
  auto cert = support_margin(t.eu, supp, r.kl_minimizers);
  r.bne_margin = cert.margin;
  r.bne = cert.margin >= -kTol;
  if (r.bne) r.supporting_beliefs.push_back(expand(model, r.kl_minimizers, cert.belief));
  return r;
}

}  // namespace

EquilibriumRecord evaluate_strategy(const DecisionProblem& problem, const SubjectiveModel& model,
                                    const Strategy& sigma) {
  if (sigma.probs.size() != problem.num_actions()) throw std::invalid_argument("strategy size mismatch");
  return evaluate(model, tables(problem, model), sigma);
}

std::vector<EquilibriumRecord> enumerate_pure_bne(const DecisionProblem& problem, const SubjectiveModel& model) {
  auto t = tables(problem, model);
  std::vector<EquilibriumRecord> out;
  for (std::size_t a = 0; a < problem.num_actions(); ++a) {
    auto r = evaluate(model, t, Strategy::pure(problem.num_actions(), a));
    if (r.bne) out.push_back(std::move(r));
  }
  return out;
}

namespace {

bool feasible(const Tables& t, const std::vector<double>& sigma) {
  std::vector<std::size_t> supp;
  for (std::size_t a = 0; a < sigma.size(); ++a)
    if (sigma[a] > kTol) supp.push_back(a);
  auto omega = kl_minimizers(t.kl, sigma, kTol);
  return support_margin(t.eu, supp, omega).margin >= -kTol;
}

// exact feasible set in p = sigma(first action) over (0, 1) for two actions
std::vector<ProbInterval> exact_two_action_intervals(const Tables& t) {
  const std::size_t k = t.kl[0].size();
  std::vector<double> cuts = {0.0, 1.0};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      // p*kl0_i + (1-p)*kl1_i = p*kl0_j + (1-p)*kl1_j
      double d0 = t.kl[0][i] - t.kl[0][j], d1 = t.kl[1][i] - t.kl[1][j];
      double den = d0 - d1;
      if (std::abs(den) < 1e-300) continue;
      double p = -d1 / den;
      if (p > 0.0 && p < 1.0) cuts.push_back(p);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
             cuts.end());
  auto ok = [&](double p) { return feasible(t, {p, 1.0 - p}); };
  std::vector<ProbInterval> out;
  auto add = [&](double lo, double hi, bool lc, bool hc) {
    if (!out.empty() && std::abs(out.back().hi - lo) < 1e-12 && (out.back().hi_closed || lc)) {
      out.back().hi = hi;
      out.back().hi_closed = hc;
    } else {
      out.push_back({lo, hi, lc, hc});
    }
  };
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    if (c > 0 && ok(lo)) add(lo, lo, true, true);
    if (ok(0.5 * (lo + hi))) add(lo, hi, false, false);
  }
  return out;
}

EquilibriumRecord component_record(const SubjectiveModel& model, const Tables& t, std::vector<Strategy> members) {
  const std::size_t na = t.eu.size();
  std::vector<double> centroid(na, 0.0), lo(na, 1.0), hi(na, 0.0);
  for (const auto& m : members)
    for (std::size_t a = 0; a < na; ++a) {
      centroid[a] += m.probs[a] / static_cast<double>(members.size());
      lo[a] = std::min(lo[a], m.probs[a]);
      hi[a] = std::max(hi[a], m.probs[a]);
    }
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < members.size(); ++i) {
    double d = 0.0;
    for (std::size_t a = 0; a < na; ++a) d += std::pow(members[i].probs[a] - centroid[a], 2);
    if (d < best_d - 1e-15) {
      best_d = d;
      best = i;
    }
  }
  EquilibriumRecord r = evaluate(model, t, members[best]);
  r.origin = "mixed";
  r.members = std::move(members);
  r.box_lo = lo;
  r.box_hi = hi;
  return r;
}

}  // namespace

std::vector<EquilibriumRecord> enumerate_mixed_bne(const DecisionProblem& problem, const SubjectiveModel& model,
                                                   std::size_t grid_resolution) {
  if (grid_resolution < 10) throw std::invalid_argument("mixed BN-E grid resolution must be at least 10");
  const std::size_t na = problem.num_actions();
  std::vector<EquilibriumRecord> out;
  if (na < 2) return out;
  auto t = tables(problem, model);
  SimplexGrid grid(na, grid_resolution);

  if (na == 2) {
    for (const auto& iv : exact_two_action_intervals(t)) {
      std::vector<Strategy> members;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double p = grid.belief(i)[0];
        bool inside = (p > iv.lo || (iv.lo_closed && p >= iv.lo)) && (p < iv.hi || (iv.hi_closed && p <= iv.hi));
        if (inside && p > 0.0 && p < 1.0) members.push_back(Strategy{grid.belief(i)});
      }
      double mid = 0.5 * (iv.lo + iv.hi);
      if (members.empty()) members.push_back(Strategy{{mid, 1.0 - mid}});
      auto r = component_record(model, t, members);
      if (!r.bne) r = evaluate(model, t, Strategy{{mid, 1.0 - mid}});
      r.origin = "mixed";
      r.members = std::move(members);
      r.box_lo = {iv.lo, 1.0 - iv.hi};
      r.box_hi = {iv.hi, 1.0 - iv.lo};
      r.exact_interval = iv;
      out.push_back(std::move(r));
    }
    return out;
  }

  std::vector<char> ok(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& c = grid.composition(i);
    std::size_t nz = 0;
    for (int x : c)
      if (x > 0) ++nz;
    if (nz >= 2 && feasible(t, grid.belief(i))) ok[i] = 1;
  }
  std::vector<char> seen(grid.size(), 0);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (!ok[s] || seen[s]) continue;
    std::vector<std::size_t> stack = {s}, comp;
    seen[s] = 1;
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      comp.push_back(i);
      auto c = grid.composition(i);
      for (std::size_t x = 0; x < na; ++x) {
        if (c[x] == 0) continue;
        for (std::size_t y = 0; y < na; ++y) {
          if (y == x) continue;
          auto n = c;
          n[x] -= 1;
          n[y] += 1;
          std::size_t j = grid.rank(n);
          if (ok[j] && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    std::vector<Strategy> members;
    for (auto i : comp) members.push_back(Strategy{grid.belief(i)});
    out.push_back(component_record(model, t, std::move(members)));
  }
  return out;
}

std::vector<EquilibriumRecord> enumerate_sce(const DecisionProblem& problem, const SubjectiveModel& model) {
  const std::size_t na = problem.num_actions();
  if (na > 16) throw std::invalid_argument("support enumeration limited to 16 actions");
  auto t = tables(problem, model);
  // match[a][w]: kernel equals the truth at a
  std::vector<std::vector<bool>> match(na, std::vector<bool>(model.num_params()));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t w = 0; w < model.num_params(); ++w)
      match[a][w] = same_distribution(problem.true_dgp[a], model.kernel(a, w));
  std::vector<EquilibriumRecord> out;
  for (std::uint32_t mask = 1; mask < (1u << na); ++mask) {
    std::vector<std::size_t> supp, params;
    for (std::size_t a = 0; a < na; ++a)
      if (mask & (1u << a)) supp.push_back(a);
    for (std::size_t w = 0; w < model.num_params(); ++w) {
      bool all = true;
      for (auto a : supp) all = all && match[a][w];
      if (all) params.push_back(w);
    }
    if (params.empty()) continue;
    auto cert = support_margin(t.eu, supp, params);
    if (cert.margin < -kTol) continue;
    Strategy sigma{std::vector<double>(na, 0.0)};
    for (auto a : supp) sigma.probs[a] = 1.0 / static_cast<double>(supp.size());
    EquilibriumRecord r = evaluate(model, t, sigma);
    r.origin = "sce-support";
    r.supporting_beliefs.insert(r.supporting_beliefs.begin(), expand(model, params, cert.belief));
    out.push_back(std::move(r));
  }
  return out;
}

EquilibriumRecord classify(const DecisionProblem& problem, const SubjectiveModel& model, EquilibriumRecord r) {
  auto t = tables(problem, model);
  const std::size_t na = problem.num_actions();
  auto supp = r.sigma.support();
  r.kl_minimizers = kl_minimizers(t.kl, r.sigma.probs, kTol);
  const auto& omega = r.kl_minimizers;
  auto cert = support_margin(t.eu, supp, omega);
  r.bne_margin = cert.margin;
  r.bne = cert.margin >= -kTol;
  r.classified = true;
  r.quasi_strict = r.uniformly_quasi_strict = r.sce = r.uniformly_quasi_strict_sce = false;
  if (!r.bne) return r;
  if (r.supporting_beliefs.empty()) r.supporting_beliefs.push_back(expand(model, omega, cert.belief));

  std::vector<bool> in_supp(na, false);
  for (auto a : supp) in_supp[a] = true;
  const std::size_t k = omega.size();

  // quasi-strict: support indifferent (within tol) and strictly above everything else by s
  {
    std::vector<double> c(k + 2, 0.0);
    c[k] = 1.0;
    c[k + 1] = -1.0;
    std::vector<std::vector<double>> a_ub;
    std::vector<double> b_ub;
    for (auto a : supp)
      for (std::size_t b = 0; b < na; ++b) {
        if (b == a) continue;
        std::vector<double> row(k + 2, 0.0);
        for (std::size_t j = 0; j < k; ++j) row[j] = t.eu[b][omega[j]] - t.eu[a][omega[j]];
        if (in_supp[b]) {
          a_ub.push_back(row);
          b_ub.push_back(kTol);
        } else {
          row[k] = 1.0;
          row[k + 1] = -1.0;
          a_ub.push_back(row);
          b_ub.push_back(0.0);
        }
      }
    std::vector<double> cap(k + 2, 0.0);
    cap[k] = 1.0;
    cap[k + 1] = -1.0;
    a_ub.push_back(cap);
    b_ub.push_back(1.0);
    std::vector<double> eq(k + 2, 0.0);
    for (std::size_t j = 0; j < k; ++j) eq[j] = 1.0;
    auto res = lp_maximize(c, a_ub, b_ub, {eq}, {1.0});
    r.quasi_strict_margin = res.optimal() ? res.objective : -INFINITY;
    r.quasi_strict = res.optimal() && res.objective > kTol;
    if (r.quasi_strict) {
      std::vector<double> local(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(k));
      double s = std::accumulate(local.begin(), local.end(), 0.0);
      for (double& x : local) x = std::max(0.0, x) / s;
      Belief qs = expand(model, omega, local);
      if (std::find(r.supporting_beliefs.begin(), r.supporting_beliefs.end(), qs) == r.supporting_beliefs.end())
        r.supporting_beliefs.push_back(qs);
    }
  }

  // uniformly quasi-strict: support optimal at every vertex, nothing else optimal anywhere
  bool uqs = true;
  for (auto a : supp)
    for (auto w : omega)
      for (std::size_t b = 0; b < na; ++b)
        if (t.eu[a][w] - t.eu[b][w] < -kTol) uqs = false;
  for (std::size_t b = 0; b < na && uqs; ++b) {
    if (in_supp[b]) continue;
    std::size_t one[1] = {b};
    if (support_margin(t.eu, one, omega).margin >= -kTol) uqs = false;
  }
  r.uniformly_quasi_strict = uqs && r.quasi_strict;

  // SCE: some belief on parameters that reproduce the truth on the support supports sigma
  std::vector<std::size_t> matched;
  for (auto w : omega) {
    bool all = true;
    for (auto a : supp) all = all && same_distribution(problem.true_dgp[a], model.kernel(a, w));
    if (all) matched.push_back(w);
  }
  if (!matched.empty()) {
    auto sc = support_margin(t.eu, supp, matched);
    if (sc.margin >= -kTol) {
      r.sce = true;
      Belief b = expand(model, matched, sc.belief);
      auto it = std::find(r.supporting_beliefs.begin(), r.supporting_beliefs.end(), b);
      if (it != r.supporting_beliefs.end()) r.supporting_beliefs.erase(it);
      r.supporting_beliefs.insert(r.supporting_beliefs.begin(), b);
    }
  }
  r.uniformly_quasi_strict_sce = r.uniformly_quasi_strict && r.sce;
  r.knife_edge = std::abs(r.bne_margin) < 1e-8 || (r.quasi_strict_margin > 0.0 && r.quasi_strict_margin < 1e-8);
  return r;
}

EquilibriumRecord estimate_p_absorbing(const DecisionProblem& problem, const SubjectiveModel& model,
                                       EquilibriumRecord r, const MonteCarloBudget& budget) {
  if (!r.classified) r = classify(problem, model, std::move(r));
  if (!r.bne) throw std::invalid_argument("p-absorption needs a Berk-Nash equilibrium");
  PAbsorption& pa = r.p_absorbing;
  pa.eps = budget.eps;
  if (r.uniformly_quasi_strict) {
    pa.certified = true;
    pa.method = "uniformly quasi-strict";
    return r;
  }
  if (!(budget.eps > 0.0 && budget.eps < 1.0)) throw std::invalid_argument("belief radius must lie in (0,1)");
  const auto& omega = r.kl_minimizers;
  const std::size_t k = model.num_params();
  std::vector<bool> inside(k, false);
  for (auto w : omega) inside[w] = true;
  const bool has_outside = omega.size() < k;
  const double m_in = has_outside ? 1.0 - 0.5 * budget.eps : 1.0;
  const auto& witness = r.supporting_beliefs.at(0).probs;
  double wsum = 0.0;
  for (auto w : omega) wsum += witness[w];
  std::vector<double> prior(k, 0.0);
  for (auto w : omega)
    prior[w] = m_in * (0.999 * (wsum > 0.0 ? witness[w] / wsum : 1.0 / omega.size()) + 0.001 / omega.size());
  for (std::size_t w = 0; w < k; ++w)
    if (!inside[w]) prior[w] = (1.0 - m_in) / static_cast<double>(k - omega.size());
  double s = std::accumulate(prior.begin(), prior.end(), 0.0);
  for (double& x : prior) x /= s;

  auto cfg = SwitcherConfig::make(problem, {model}, {Belief::prior(model, prior)}, 2.0, {budget.policy});
  auto supp = r.sigma.support();
  std::vector<bool> in_supp(problem.num_actions(), false);
  for (auto a : supp) in_supp[a] = true;
  std::vector<char> stayed(budget.paths, 0);
  parallel_for(budget.paths, budget.threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::for_path(budget.seed, i);
    PathState st = PathState::initial(cfg);
    for (std::size_t t = 0; t < budget.horizon; ++t) {
      auto info = step(cfg, st, rng);
      if (!in_supp[info.action]) return;
      double mass = 0.0;
      for (auto w : omega) mass += st.beliefs[0][w];
      if (!(mass > 1.0 - budget.eps)) return;
    }
    stayed[i] = 1;
  });
  std::size_t count = 0;
  for (char c : stayed) count += c;
  pa.evaluated = true;
  pa.method = "monte carlo";
  pa.paths = budget.paths;
  pa.horizon = budget.horizon;
  pa.estimate = static_cast<double>(count) / static_cast<double>(budget.paths);
  pa.interval = wilson_interval(count, budget.paths);
  return r;
}

namespace {

std::vector<Point> minimizer_points(const SubjectiveModel& model, const std::vector<std::size_t>& omega) {
  std::vector<Point> pts;
  for (auto w : omega) pts.push_back(model.parameters()[w]);
  return pts;
}

std::vector<std::size_t> neighbor_indices(const QFamily& family, const std::vector<Point>& centers, double radius) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < family.grid().size(); ++i)
    if (distance_to_set(family.grid()[i], centers) <= radius + 1e-12) idx.push_back(i);
  return idx;
}

}  // namespace

EquilibriumRecord check_local_dominance(const DecisionProblem& problem, const QFamily& family,
                                        const SubjectiveModel& model, EquilibriumRecord r,
                                        std::optional<double> radius, const std::vector<double>& d_candidates) {
  if (!r.classified) r = classify(problem, model, std::move(r));
  FamilyCheck fc = r.family.value_or(FamilyCheck{});
  fc.radius = radius.value_or(family.default_radius());
  fc.dominance_evaluated = true;
  fc.locally_dominant = false;
  fc.passing_d.reset();
  fc.tried_d.clear();
  auto supp = r.sigma.support();
  if (supp.size() > 1) {
    // the minimizer set must not move across the support face
    auto t = tables(problem, model);
    SimplexGrid g(supp.size(), 20);
    for (std::size_t i = 0; i < g.size() && fc.footnote_holds; ++i) {
      auto local = g.belief(i);
      std::vector<double> sigma(problem.num_actions(), 0.0);
      for (std::size_t j = 0; j < supp.size(); ++j) sigma[supp[j]] = local[j];
      if (kl_minimizers(t.kl, sigma, kTol) != r.kl_minimizers) fc.footnote_holds = false;
    }
    if (!fc.footnote_holds) {
      fc.note = "KL minimizers vary across the support face; dominance check not applicable";
      r.family = fc;
      return r;
    }
  }
  auto centers = minimizer_points(model, r.kl_minimizers);
  auto nb = neighbor_indices(family, centers, fc.radius);
  fc.neighbors = nb.size();
  for (double d : d_candidates) {
    fc.tried_d.push_back(d);
    bool pass = true;
    for (const auto& c : centers) {
      for (auto i : nb) {
        const auto& wp = family.grid()[i];
        for (auto a : supp) {
          auto m = dominance_moment(problem, family.kernel_fn(), a, wp, c, d);
          if (m.diverged || m.value > 1.0 + 1e-9) {
            pass = false;
            if (!fc.dominance_violation) fc.dominance_violation = wp;
            break;
          }
        }
        if (!pass) break;
      }
      if (!pass) break;
    }
    if (pass) {
      fc.locally_dominant = true;
      fc.passing_d = d;
      fc.dominance_violation.reset();
      break;
    }
  }
  r.family = fc;
  return r;
}

EquilibriumRecord check_locally_kl_minimizing(const DecisionProblem& problem, const QFamily& family,
                                              const SubjectiveModel& model, EquilibriumRecord r,
                                              std::optional<double> radius) {
  if (r.kl_minimizers.empty()) r.kl_minimizers = kl_minimizers(problem, model, r.sigma.probs, kTol);
  FamilyCheck fc = r.family.value_or(FamilyCheck{});
  fc.radius = radius.value_or(family.default_radius());
  fc.kl_evaluated = true;
  fc.kl_witnesses.clear();
  auto centers = minimizer_points(model, r.kl_minimizers);
  auto nb = neighbor_indices(family, centers, fc.radius);
  fc.neighbors = nb.size();
  auto supp = r.sigma.support();
  std::vector<const Strategy*> points;
  if (r.members.empty())
    points.push_back(&r.sigma);
  else
    for (const auto& m : r.members) points.push_back(&m);

  auto wkl = [&](const std::vector<double>& sigma, std::span<const double> p) {
    double v = 0.0;
    for (std::size_t a = 0; a < sigma.size(); ++a)
      if (sigma[a] > 0.0) v += sigma[a] * kl_divergence(problem.true_dgp[a], family.kernel(a, p));
    return v;
  };

  // a component passes if some member strategy passes
  bool any_pass = false;
  for (const Strategy* s : points) {
    auto omega = kl_minimizers(problem, model, s->probs, kTol);
    auto cs = minimizer_points(model, omega);
    auto local_nb = r.members.empty() ? nb : neighbor_indices(family, cs, fc.radius);
    double base = wkl(s->probs, cs[0]);
    double best = base;
    std::optional<std::size_t> best_i;
    for (auto i : local_nb) {
      double v = wkl(s->probs, family.grid()[i]);
      if (v < base - kTol && v < best) {
        best = v;
        best_i = i;
      }
    }
    if (!best_i) {
      any_pass = true;
      break;
    }
    const auto& wp = family.grid()[*best_i];
    if (std::find(fc.kl_witnesses.begin(), fc.kl_witnesses.end(), wp) == fc.kl_witnesses.end())
      fc.kl_witnesses.push_back(wp);
  }
  fc.locally_kl_minimizing = any_pass;
  if (any_pass) fc.kl_witnesses.clear();
  r.family = fc;
  return r;
}

EquilibriumAnalysis analyze_equilibria(const DecisionProblem& problem, const SubjectiveModel& model,
                                       std::size_t mixed_resolution) {
  EquilibriumAnalysis out;
  for (auto& r : enumerate_pure_bne(problem, model)) out.pure.push_back(classify(problem, model, std::move(r)));
  if (mixed_resolution > 0)
    for (auto& r : enumerate_mixed_bne(problem, model, mixed_resolution))
      out.mixed.push_back(classify(problem, model, std::move(r)));
  for (auto& r : enumerate_sce(problem, model)) out.sce.push_back(classify(problem, model, std::move(r)));
  return out;
}

}  // namespace misbelief
