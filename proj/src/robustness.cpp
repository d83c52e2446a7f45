#include "misbelief/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace misbelief {

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::GloballyRobust: return "GloballyRobust";
    case VerdictKind::NotGloballyRobust: return "NotGloballyRobust";
    case VerdictKind::ConstrainedLocallyRobust: return "ConstrainedLocallyRobust";
    case VerdictKind::NotConstrainedLocallyRobust: return "NotConstrainedLocallyRobust";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string to_string(Certainty c) { return c == Certainty::Certified ? "certified" : "empirical"; }

VerdictKind verdict_kind_from_string(const std::string& s) {
  for (auto k : {VerdictKind::GloballyRobust, VerdictKind::NotGloballyRobust, VerdictKind::ConstrainedLocallyRobust,
                 VerdictKind::NotConstrainedLocallyRobust, VerdictKind::Inconclusive})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown verdict kind: " + s);
}

std::optional<std::size_t> correct_parameter(const DecisionProblem& problem, const SubjectiveModel& model) {
  for (std::size_t w = 0; w < model.num_params(); ++w) {
    bool all = true;
    for (std::size_t a = 0; a < problem.num_actions() && all; ++a)
      all = same_distribution(problem.true_dgp[a], model.kernel(a, w));
    if (all) return w;
  }
  return std::nullopt;
}

namespace {

Belief prior_or_uniform(const SubjectiveModel& model, const VerdictOptions& options) {
  if (options.prior) {
    options.prior->validate(model, true);
    return *options.prior;
  }
  return Belief::uniform(model);
}

Evidence evidence_from(const std::string& what, const PAbsorption& pa, std::uint64_t seed) {
  Evidence e;
  e.description = what;
  e.paths = pa.paths;
  e.horizon = pa.horizon;
  e.seed = seed;
  e.estimate = pa.estimate;
  e.successes = static_cast<std::size_t>(std::llround(pa.estimate * static_cast<double>(pa.paths)));
  e.wilson = pa.interval;
  return e;
}

// a point that no model parameter occupies, used to label the true DGP
Point fresh_point(const SubjectiveModel& model) {
  std::size_t dim = model.parameters().empty() ? 1 : model.parameters()[0].size();
  double top = 0.0;
  for (const auto& p : model.parameters())
    for (double x : p) top = std::max(top, std::abs(x));
  Point pt(std::max<std::size_t>(dim, 1), 0.0);
  pt[0] = top + 1.0;
  return pt;
}

}  // namespace

Verdict global_verdict(const DecisionProblem& problem, const SubjectiveModel& model, const VerdictOptions& options) {
  model.check_compatible(problem);
  Verdict v;
  if (auto w = correct_parameter(problem, model)) {
    v.kind = VerdictKind::GloballyRobust;
    v.basis.push_back("correct-specification: a parameter reproduces the true DGP at every action");
    v.witness_points.push_back(model.parameters()[*w]);
    return v;
  }
  auto sce = enumerate_sce(problem, model);
  if (sce.empty()) {
    v.kind = VerdictKind::NotGloballyRobust;
    v.basis.push_back("no-sce-necessity: no self-confirming equilibrium exists");
    const double eps = 0.5;
    Adversary adv;
    adv.model = convex_mix_model(model, problem, eps, model.id() + "-mix");
    adv.prior = prior_or_uniform(model, options);
    adv.prior.model_id = adv.model.id();
    adv.construction = "convex mixture with the true DGP, eps = 0.5";
    v.adversary = adv;
    return v;
  }
  for (auto& r : sce) r = classify(problem, model, std::move(r));
  for (const auto& r : sce)
    if (r.uniformly_quasi_strict_sce) {
      v.kind = VerdictKind::GloballyRobust;
      v.basis.push_back("uniformly-quasi-strict-sce-sufficiency");
      v.witnesses.push_back(r);
      v.witnesses.back().p_absorbing.certified = true;
      v.witnesses.back().p_absorbing.method = "uniformly quasi-strict";
      return v;
    }

  // Monte Carlo: positive survival at 2T and attrition between T and 2T bounded by 10% at 95% confidence
  const auto& b = options.budget;
  for (const auto& r : sce) {
    MonteCarloBudget longer = b;
    longer.horizon = 2 * b.horizon;
    auto at_t = estimate_p_absorbing(problem, model, r, b);
    auto at_2t = estimate_p_absorbing(problem, model, r, longer);
    // same seed, so the paths surviving to 2T are a subset of those surviving to T
    auto n_t = static_cast<std::size_t>(std::llround(at_t.p_absorbing.estimate * static_cast<double>(b.paths)));
    auto n_2t = static_cast<std::size_t>(std::llround(at_2t.p_absorbing.estimate * static_cast<double>(b.paths)));
    double survival = n_t > 0 ? wilson_interval(std::min(n_2t, n_t), n_t).lo : 0.0;
    v.evidence.push_back(evidence_from("p-absorption at T, SCE " + action_set_label(problem, r.sigma.support()),
                                       at_t.p_absorbing, b.seed));
    v.evidence.push_back(evidence_from("p-absorption at 2T, SCE " + action_set_label(problem, r.sigma.support()),
                                       at_2t.p_absorbing, b.seed));
    if (at_2t.p_absorbing.interval.lo > 0.0 && survival >= 0.9) {
      v.kind = VerdictKind::GloballyRobust;
      v.certainty = Certainty::Empirical;
      v.basis.push_back("p-absorption-monte-carlo: SCE with positive absorption lower bound");
      v.witnesses.push_back(at_2t);
      return v;
    }
    v.witnesses.push_back(at_2t);
  }
  v.kind = VerdictKind::Inconclusive;
  v.certainty = Certainty::Empirical;
  v.basis.push_back("sce-exists-absorption-undetermined: SCE found but no absorption certificate or stable estimate");
  v.warnings.push_back("Monte Carlo cannot establish that an SCE is not p-absorbing");
  return v;
}

Verdict unconstrained_local_verdict(const DecisionProblem& problem, const SubjectiveModel& model,
                                    const VerdictOptions& options) {
  Verdict v = global_verdict(problem, model, options);
  v.basis.insert(v.basis.begin(), "unconstrained-local-equals-global");
  return v;
}

PriorMassGate prior_mass_gate(const DecisionProblem& problem, const SubjectiveModel& model, const Belief& prior,
                              double alpha, const std::vector<EquilibriumRecord>& sce, double eps) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("adversary eps must lie in (0,1)");
  prior.validate(model, false);
  PriorMassGate g;
  g.bound = 1.0 / alpha;
  std::set<std::size_t> u;
  for (const auto& r : sce)
    if (r.sce && r.p_absorbing.positive()) u.insert(r.kl_minimizers.begin(), r.kl_minimizers.end());
  g.union_indices.assign(u.begin(), u.end());
  if (g.union_indices.empty()) return g;
  g.mass = prior.mass(g.union_indices);
  g.passes = g.mass >= g.bound;

  Adversary adv;
  auto restricted = restrict_model(model, g.union_indices, model.id() + "-sce");
  ExtraParameter truth{fresh_point(model), problem.true_dgp};
  adv.model = augment_model(restricted, {truth}, model.id() + "-sce-truth");
  std::vector<double> p;
  for (auto w : g.union_indices) p.push_back((1.0 - eps) * prior.probs[w] / g.mass);
  p.push_back(eps);
  adv.prior = Belief::prior(adv.model, p);
  adv.construction = "SCE minimizers of the initial model plus the true DGP at prior mass eps";
  g.adversary = adv;
  return g;
}

Verdict constrained_verdict(const DecisionProblem& problem, const QFamily& family, const SubjectiveModel& model,
                            bool assume_convergence, const VerdictOptions& options) {
  model.check_compatible(problem);
  Verdict v;
  auto analysis = analyze_equilibria(problem, model, options.mixed_resolution);
  std::vector<EquilibriumRecord> bne = analysis.pure;
  bne.insert(bne.end(), analysis.mixed.begin(), analysis.mixed.end());

  for (const auto& r0 : analysis.pure) {
    auto r = check_local_dominance(problem, family, model, r0, options.radius, options.d_candidates);
    if (!r.family->locally_dominant) continue;
    r = estimate_p_absorbing(problem, model, std::move(r), options.budget);
    if (!r.p_absorbing.positive()) continue;
    v.kind = VerdictKind::ConstrainedLocallyRobust;
    v.certainty = r.p_absorbing.certified ? Certainty::Certified : Certainty::Empirical;
    v.basis.push_back("local-dominance-sufficiency: pure p-absorbing BN-E at which the model is locally dominant");
    if (!r.p_absorbing.certified)
      v.evidence.push_back(evidence_from("p-absorption of the dominant BN-E", r.p_absorbing, options.budget.seed));
    v.witnesses.push_back(std::move(r));
    return v;
  }

  const bool auto_convergence = problem.num_actions() == 2 && problem.discount == 0.0;
  if (assume_convergence || auto_convergence) {
    std::vector<Point> witnesses;
    bool any_pass = false;
    for (const auto& r0 : bne) {
      auto r = check_locally_kl_minimizing(problem, family, model, r0, options.radius);
      if (r.family->locally_kl_minimizing) {
        any_pass = true;
        v.witnesses.push_back(std::move(r));
        break;
      }
      for (const auto& p : r.family->kl_witnesses)
        if (std::find(witnesses.begin(), witnesses.end(), p) == witnesses.end()) witnesses.push_back(p);
      v.witnesses.push_back(std::move(r));
    }
    if (!any_pass && !bne.empty()) {
      v.kind = VerdictKind::NotConstrainedLocallyRobust;
      v.basis.push_back(std::string("local-kl-minimization-necessity: no BN-E is locally KL-minimizing (") +
                        (assume_convergence ? "convergence of action frequencies assumed" :
                                              "two actions, no discounting") + ")");
      v.witness_points = witnesses;
      std::vector<ExtraParameter> extra;
      for (const auto& p : witnesses) {
        if (model.find_parameter(p)) continue;
        ExtraParameter e{p, {}};
        for (std::size_t a = 0; a < problem.num_actions(); ++a) e.kernel.push_back(family.kernel(a, p));
        extra.push_back(std::move(e));
      }
      Adversary adv;
      adv.model = augment_model(model, extra, model.id() + "-local");
      Belief base = prior_or_uniform(model, options);
      const double eps = options.adversary_eps;
      std::vector<double> p;
      for (double x : base.probs) p.push_back(extra.empty() ? x : (1.0 - eps) * x);
      for (std::size_t j = 0; j < extra.size(); ++j) p.push_back(eps / static_cast<double>(extra.size()));
      adv.prior = Belief::prior(adv.model, p);
      adv.construction = "initial parameters plus lower-KL neighbors sharing prior mass eps evenly";
      v.adversary = adv;
      if (!analysis.mixed.empty())
        v.warnings.push_back("mixed BN-E covered on a finite grid; cover sufficiency at this resolution is not proven");
      return v;
    }
  }
  v.kind = VerdictKind::Inconclusive;
  v.certainty = Certainty::Empirical;
  v.basis.push_back("no-dominance-certificate: no pure p-absorbing locally dominant BN-E found");
  if (!(assume_convergence || auto_convergence))
    v.warnings.push_back("necessity check skipped: convergence of action frequencies not assumed");
  return v;
}

MultiModelGate multi_model_gate(double alpha, double K, std::optional<double> d) {
  if (K < 1.0) throw std::invalid_argument("K must be at least 1");
  MultiModelGate g;
  g.global_ok = alpha > K;
  if (d) {
    if (!(*d > 0.0)) throw std::invalid_argument("d must be positive");
    g.constrained_ok = alpha > std::pow(K, 1.0 / *d);
  }
  return g;
}

std::optional<std::string> multi_model_warning(const SwitcherConfig& config) {
  if (config.models.size() < 3) return std::nullopt;
  double K = static_cast<double>(config.models.size() - 1);
  if (multi_model_gate(config.alpha, K).global_ok) return std::nullopt;
  return "alpha = " + std::to_string(config.alpha) + " does not exceed the number of competing models (" +
         std::to_string(config.models.size() - 1) + "); robustness results for a single competitor do not apply";
}

}  // namespace misbelief
