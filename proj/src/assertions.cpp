#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "misbelief/errors.hpp"
#include "misbelief/json_io.hpp"
#include "misbelief/scenarios.hpp"

namespace misbelief {

using nlohmann::json;

namespace {

const std::set<std::string> kProvenance = {"published", "derived", "trivial"};
const std::set<std::string> kKinds = {
    "pure_bne",          "pure_bne_witness",  "classification",      "sce_exists",     "global_verdict",
    "constrained_verdict", "local_dominance", "mixed_bne_component", "switch_fraction_at", "trigger_ratio",
    "prior_mass_gate",   "persistence_against", "multi_model_gate",  "dogmatic_recurrence", "martingale_mean",
    "ville_bound"};

struct Ctx {
  const Scenario& s;
  const AssertionOptions& opt;
  const json& args;
  std::string path;

  const json& at(const std::string& k) const { return io::require(args, k, path); }
  bool has(const std::string& k) const { return args.contains(k); }
  double num(const std::string& k) const { return io::get_double(at(k), path + "/" + k); }
  double num_or(const std::string& k, double d) const { return has(k) ? num(k) : d; }
  std::size_t size(const std::string& k) const { return io::get_size(at(k), path + "/" + k); }
  std::size_t size_or(const std::string& k, std::size_t d) const { return has(k) ? size(k) : d; }
  bool flag(const std::string& k) const { return io::get_bool(at(k), path + "/" + k); }
  bool flag_or(const std::string& k, bool d) const { return has(k) ? flag(k) : d; }
  std::string str(const std::string& k) const { return io::get_string(at(k), path + "/" + k); }
  std::uint64_t seed() const {
    if (opt.seed) return *opt.seed;
    return has("seed") ? static_cast<std::uint64_t>(size("seed")) : 1;
  }
  std::vector<std::string> strings(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_array()) throw ConfigError(path + "/" + k + ": expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(io::get_string(v[i], path + "/" + k + "/" + std::to_string(i)));
    return out;
  }
  const SubjectiveModel& model() const { return has("model") ? s.model(str("model")) : s.models.at(0); }
  std::size_t action(const std::string& label) const {
    try {
      return s.problem.action_index(label);
    } catch (const std::exception&) {
      throw ConfigError(path + ": unknown action \"" + label + "\"");
    }
  }
  std::map<std::string, std::vector<double>> priors() const {
    std::map<std::string, std::vector<double>> out;
    if (!has("priors")) return out;
    const json& p = at("priors");
    if (!p.is_object()) throw ConfigError(path + "/priors: expected an object");
    for (auto it = p.begin(); it != p.end(); ++it) out[it.key()] = io::get_doubles(it.value(), path + "/priors/" + it.key());
    return out;
  }
  MonteCarloResult run(const std::vector<std::string>& ids, RunOptions ro, std::optional<double> alpha = std::nullopt) const {
    auto cfg = make_switcher(s, ids, alpha, priors());
    return monte_carlo(cfg, size_or("paths", 1000), ro, seed(), opt.threads);
  }
};

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(10);
  o << x;
  return o.str();
}

std::string labels(const DecisionProblem& p, const std::vector<std::size_t>& v) { return action_set_label(p, v); }

struct Outcome_ {
  bool ok = true;
  std::ostringstream detail;
  void check(bool cond, const std::string& what) {
    if (!cond) ok = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (cond ? "" : " [failed]");
  }
};

Strategy strategy_of(const Ctx& c) {
  const auto na = c.s.problem.num_actions();
  if (c.has("action")) return Strategy::pure(na, c.action(c.str("action")));
  const json& m = c.at("strategy");
  if (!m.is_object()) throw ConfigError(c.path + "/strategy: expected an object of action probabilities");
  Strategy sg{std::vector<double>(na, 0.0)};
  double total = 0.0;
  for (auto it = m.begin(); it != m.end(); ++it) {
    double p = io::get_double(it.value(), c.path + "/strategy/" + it.key());
    sg.probs[c.action(it.key())] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(c.path + "/strategy: probabilities must sum to 1");
  return sg;
}

VerdictOptions verdict_options(const Ctx& c) {
  VerdictOptions vo;
  vo.budget.paths = c.size_or("paths", 200);
  vo.budget.horizon = c.size_or("horizon", 200);
  vo.budget.seed = c.seed();
  vo.budget.threads = c.opt.threads;
  vo.mixed_resolution = c.size_or("resolution", 20);
  if (c.has("radius")) vo.radius = c.num("radius");
  if (c.s.priors.count(c.s.models.at(0).id())) vo.prior = c.s.priors.at(c.s.models.at(0).id());
  return vo;
}

void check_verdict(Outcome_& out, const Ctx& c, const Verdict& v) {
  auto want = verdict_kind_from_string(c.str("kind"));
  out.check(v.kind == want, "kind " + to_string(v.kind) + " expected " + to_string(want));
  if (c.has("certainty"))
    out.check(to_string(v.certainty) == c.str("certainty"), "certainty " + to_string(v.certainty));
  if (!v.basis.empty()) out.detail << "; basis " << v.basis.front();
}

Outcome_ run_one(const Scenario& s, const Assertion& a, const AssertionOptions& opt, std::size_t index) {
  Ctx c{s, opt, a.args, "/expected/" + std::to_string(index) + "/args"};
  const auto& P = s.problem;
  Outcome_ out;

  if (a.kind == "pure_bne") {
    std::vector<std::size_t> found;
    for (const auto& r : enumerate_pure_bne(P, c.model()))
      if (r.bne) found.push_back(r.sigma.support().front());
    std::vector<std::size_t> want;
    for (const auto& l : c.strings("actions")) want.push_back(c.action(l));
    std::sort(want.begin(), want.end());
    std::sort(found.begin(), found.end());
    out.check(found == want, "pure BN-E " + labels(P, found));
  } else if (a.kind == "pure_bne_witness") {
    const auto& m = c.model();
    auto r = evaluate_strategy(P, m, Strategy::pure(P.num_actions(), c.action(c.str("action"))));
    auto pt = io::get_doubles(c.at("point"), c.path + "/point");
    auto w = m.find_parameter(pt, 1e-9);
    if (!w) throw ConfigError(c.path + "/point: not a parameter of model " + m.id());
    out.check(r.bne, "bne");
    double mass = 0.0;
    if (!r.supporting_beliefs.empty()) mass = r.supporting_beliefs.front().probs[*w];
    out.check(mass >= 1.0 - 1e-9, "witness mass on point " + fmt(mass));
  } else if (a.kind == "classification") {
    const auto& m = c.model();
    auto r = classify(P, m, evaluate_strategy(P, m, strategy_of(c)));
    const json& flags = c.at("flags");
    if (!flags.is_object()) throw ConfigError(c.path + "/flags: expected an object");
    std::map<std::string, bool> got = {{"bne", r.bne},
                                       {"sce", r.sce},
                                       {"quasi_strict", r.quasi_strict},
                                       {"uniformly_quasi_strict", r.uniformly_quasi_strict},
                                       {"uniformly_quasi_strict_sce", r.uniformly_quasi_strict_sce},
                                       {"knife_edge", r.knife_edge}};
    for (auto it = flags.begin(); it != flags.end(); ++it) {
      auto g = got.find(it.key());
      if (g == got.end()) throw ConfigError(c.path + "/flags/" + it.key() + ": unknown flag");
      bool want = io::get_bool(it.value(), c.path + "/flags/" + it.key());
      out.check(g->second == want, it.key() + "=" + (g->second ? "true" : "false"));
    }
  } else if (a.kind == "sce_exists") {
    auto recs = enumerate_sce(P, c.model());
    bool exists = !recs.empty();
    out.check(exists == c.flag("expect"), std::string("sce exists=") + (exists ? "true" : "false"));
  } else if (a.kind == "global_verdict") {
    check_verdict(out, c, global_verdict(P, c.model(), verdict_options(c)));
  } else if (a.kind == "constrained_verdict") {
    const auto& fam = s.family(c.str("family"));
    auto v = constrained_verdict(P, fam, c.model(), c.flag_or("assume_convergence", false), verdict_options(c));
    check_verdict(out, c, v);
    if (c.has("witness_coordinate")) {
      std::size_t k = c.size("witness_coordinate");
      double lo = c.num_or("witness_lo", -INFINITY), hi = c.num_or("witness_hi", INFINITY);
      bool lo_open = c.flag_or("witness_lo_open", false), hi_open = c.flag_or("witness_hi_open", false);
      bool any = false;
      for (const auto& w : v.witness_points) {
        if (k >= w.size()) throw ConfigError(c.path + "/witness_coordinate: out of range");
        double x = w[k];
        bool in = (lo_open ? x > lo + 1e-12 : x >= lo - 1e-12) && (hi_open ? x < hi - 1e-12 : x <= hi + 1e-12);
        if (in) {
          any = true;
          out.detail << "; witness coordinate " << fmt(x);
          break;
        }
      }
      out.check(any, std::to_string(v.witness_points.size()) + " witness points, one inside the range");
    }
  } else if (a.kind == "local_dominance") {
    const auto& m = c.model();
    const auto& fam = s.family(c.str("family"));
    auto r = classify(P, m, evaluate_strategy(P, m, Strategy::pure(P.num_actions(), c.action(c.str("action")))));
    std::optional<double> radius;
    if (c.has("radius")) radius = c.num("radius");
    r = check_local_dominance(P, fam, m, std::move(r), radius);
    const auto& f = *r.family;
    out.check(f.locally_dominant == c.flag("passes"),
              std::string("locally dominant=") + (f.locally_dominant ? "true" : "false") + " over " +
                  std::to_string(f.neighbors) + " neighbors");
    if (c.has("d")) out.check(f.passing_d && *f.passing_d == c.num("d"), "passing d " + (f.passing_d ? fmt(*f.passing_d) : "none"));
  } else if (a.kind == "mixed_bne_component") {
    const auto& m = c.model();
    if (c.flag_or("no_pure", false)) {
      std::size_t n = 0;
      for (const auto& r : enumerate_pure_bne(P, m)) n += r.bne ? 1 : 0;
      out.check(n == 0, std::to_string(n) + " pure BN-E");
    }
    auto comps = enumerate_mixed_bne(P, m, c.size_or("resolution", 20));
    out.check(!comps.empty(), std::to_string(comps.size()) + " mixed components");
    if (c.has("support")) {
      std::vector<std::size_t> want;
      for (const auto& l : c.strings("support")) want.push_back(c.action(l));
      std::sort(want.begin(), want.end());
      const EquilibriumRecord* hit = nullptr;
      for (const auto& r : comps)
        if (r.sigma.support() == want) hit = &r;
      out.check(hit != nullptr, "component on " + labels(P, want));
      if (hit && c.has("interval")) {
        const json& iv = c.at("interval");
        auto ip = c.path + "/interval";
        out.check(hit->exact_interval.has_value(), "exact interval available");
        if (hit->exact_interval) {
          const auto& e = *hit->exact_interval;
          bool same = std::abs(e.lo - io::get_double(io::require(iv, "lo", ip), ip + "/lo")) < 1e-9 &&
                      std::abs(e.hi - io::get_double(io::require(iv, "hi", ip), ip + "/hi")) < 1e-9 &&
                      e.lo_closed == io::get_bool(io::require(iv, "lo_closed", ip), ip + "/lo_closed") &&
                      e.hi_closed == io::get_bool(io::require(iv, "hi_closed", ip), ip + "/hi_closed");
          out.check(same, std::string("interval ") + (e.lo_closed ? "[" : "(") + fmt(e.lo) + ", " + fmt(e.hi) +
                              (e.hi_closed ? "]" : ")"));
        }
      }
    }
  } else if (a.kind == "switch_fraction_at") {
    RunOptions ro;
    ro.horizon = c.size("horizon");
    auto res = c.run(c.strings("models"), ro);
    std::size_t t = c.size("t"), hit = 0, returned = 0, stayed = 0;
    for (const auto& p : res.paths) {
      if (!p.switches.empty() && p.switches.front().t == t) ++hit;
      for (const auto& e : p.switches)
        if (e.to == 0) {
          ++returned;
          break;
        }
      if (p.final_model == 0) ++stayed;
    }
    double f = static_cast<double>(hit) / static_cast<double>(res.paths.size());
    out.check(f >= c.num("min_fraction"), "first switch at t=" + std::to_string(t) + " on " + fmt(f) + " of paths");
    if (c.flag_or("no_return", false)) out.check(returned == 0, std::to_string(returned) + " paths return to the initial model");
    if (c.flag_or("final_not_initial", false)) out.check(stayed == 0, std::to_string(stayed) + " paths end on the initial model");
  } else if (a.kind == "trigger_ratio") {
    auto ids = c.strings("models");
    auto cfg = make_switcher(s, ids);
    std::size_t act = c.action(c.str("action"));
    std::size_t first = cfg.policies[0].action(cfg.priors[0].probs);
    out.check(first == act, "first action " + P.actions[first].label);
    if (P.outcome_space.kind != OutcomeSpace::Kind::Categorical)
      throw ConfigError(c.path + ": trigger ratio needs a categorical outcome space");
    // smallest, over outcomes, of the best one-period Bayes factor against the initial model
    double trigger = INFINITY;
    for (std::size_t y = 0; y < P.outcome_space.size; ++y) {
      auto predictive = [&](std::size_t k) {
        double v = 0.0;
        for (std::size_t w = 0; w < cfg.models[k].num_params(); ++w)
          v += cfg.priors[k].probs[w] * std::exp(log_density(cfg.models[k].kernel(act, w), Outcome::of_atom(y)));
        return v;
      };
      double base = predictive(0), best = 0.0;
      for (std::size_t k = 1; k < cfg.models.size(); ++k) best = std::max(best, predictive(k) / base);
      trigger = std::min(trigger, best);
    }
    out.check(std::abs(trigger - c.num("value")) <= 1e-12 * std::max(1.0, std::abs(trigger)), "trigger ratio " + fmt(trigger));
    double alpha = c.num_or("alpha", s.alpha);
    out.check(trigger > alpha, "exceeds alpha " + fmt(alpha));
  } else if (a.kind == "prior_mass_gate") {
    const auto& m = c.model();
    Belief prior;
    try {
      prior = Belief::prior(m, io::get_doubles(c.at("prior"), c.path + "/prior"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(c.path + "/prior: " + e.what());
    }
    double alpha = c.num_or("alpha", s.alpha);
    MonteCarloBudget budget;
    budget.seed = c.seed();
    budget.threads = opt.threads;
    std::vector<EquilibriumRecord> sce;
    for (auto& r : enumerate_sce(P, m)) sce.push_back(estimate_p_absorbing(P, m, classify(P, m, std::move(r)), budget));
    auto gate = prior_mass_gate(P, m, prior, alpha, sce);
    out.check(gate.passes == c.flag("passes"), std::string("passes=") + (gate.passes ? "true" : "false"));
    if (c.has("mass")) out.check(std::abs(gate.mass - c.num("mass")) < 1e-9, "mass " + fmt(gate.mass));
    if (c.has("simulate")) {
      const json& sim = c.at("simulate");
      auto sp = c.path + "/simulate";
      out.check(gate.adversary.has_value(), "adversary constructed");
      if (gate.adversary) {
        auto cfg = SwitcherConfig::make(P, {m, gate.adversary->model}, {prior, gate.adversary->prior}, alpha);
        RunOptions ro;
        ro.horizon = io::get_size(io::require(sim, "horizon", sp), sp + "/horizon");
        std::uint64_t seed = opt.seed ? *opt.seed : io::get_size(io::require(sim, "seed", sp), sp + "/seed");
        auto res = monte_carlo(cfg, io::get_size(io::require(sim, "paths", sp), sp + "/paths"), ro, seed, opt.threads);
        double f = static_cast<double>(res.summary.switched_paths) / static_cast<double>(res.summary.paths);
        double need = io::get_double(io::require(sim, "min_switch_fraction", sp), sp + "/min_switch_fraction");
        out.check(f >= need, "adversary takes over on " + fmt(f) + " of paths");
      }
    }
  } else if (a.kind == "persistence_against") {
    RunOptions ro;
    ro.horizon = c.size("horizon");
    std::optional<double> alpha;
    if (c.has("alpha")) alpha = c.num("alpha");
    auto res = c.run(c.strings("models"), ro, alpha);
    const auto& sm = res.summary;
    std::string expect = c.str("expect");
    if (expect == "persists") {
      out.check(sm.persist_wilson.lo > 0.0, "persistence frequency " + fmt(sm.persist_frequency) + ", Wilson lower " +
                                                fmt(sm.persist_wilson.lo));
    } else if (expect == "switches" && c.has("only_actions")) {
      std::vector<bool> allowed(P.num_actions(), false);
      for (const auto& l : c.strings("only_actions")) allowed[c.action(l)] = true;
      std::size_t kept = 0, switched = 0;
      for (const auto& p : res.paths) {
        bool ok = true;
        for (std::size_t a = 0; a < P.num_actions(); ++a)
          if (!allowed[a] && p.action_counts[a] > 0) ok = false;
        if (!ok) continue;
        ++kept;
        if (!p.switches.empty()) ++switched;
      }
      out.check(kept > 0, std::to_string(kept) + " paths stay on the listed actions");
      double f = kept ? static_cast<double>(switched) / static_cast<double>(kept) : 0.0;
      out.check(f >= c.num_or("min_fraction", 0.99), "switched on " + fmt(f) + " of them");
    } else if (expect == "switches") {
      double f = static_cast<double>(sm.switched_paths) / static_cast<double>(sm.paths);
      out.check(f >= c.num_or("min_fraction", 0.99), "switched on " + fmt(f) + " of paths");
    } else {
      throw ConfigError(c.path + "/expect: must be \"persists\" or \"switches\"");
    }
  } else if (a.kind == "multi_model_gate") {
    std::optional<double> d;
    if (c.has("d")) d = c.num("d");
    auto g = multi_model_gate(c.num("alpha"), c.num("K"), d);
    out.check(g.global_ok == c.flag("global_ok"), std::string("global_ok=") + (g.global_ok ? "true" : "false"));
    if (c.has("constrained_ok"))
      out.check(g.constrained_ok == c.flag("constrained_ok"), std::string("constrained_ok=") + (g.constrained_ok ? "true" : "false"));
  } else if (a.kind == "dogmatic_recurrence") {
    RunOptions ro;
    ro.horizon = c.size("horizon");
    auto res = c.run({s.models.at(0).id()}, ro);
    std::size_t act = c.action(c.str("action")), hit = 0;
    for (const auto& p : res.paths)
      if (std::find(p.absorbed_into.begin(), p.absorbed_into.end(), act) != p.absorbed_into.end()) ++hit;
    double n = static_cast<double>(res.paths.size());
    double f = static_cast<double>(hit) / n;
    if (c.has("min_fraction")) {
      double m0 = c.num("min_fraction");
      double se = std::sqrt(m0 * (1.0 - m0) / n);
      out.check(f >= m0 - c.num_or("se_slack", 3.0) * se, P.actions[act].label + " played late on " + fmt(f) + " of paths");
    } else {
      auto wi = wilson_interval(hit, res.paths.size());
      out.check(wi.lo > 0.0, P.actions[act].label + " played late on " + fmt(f) + " of paths, Wilson lower " + fmt(wi.lo));
    }
  } else if (a.kind == "martingale_mean") {
    auto ids = c.strings("models");
    if (ids.size() != 2) throw ConfigError(c.path + "/models: expected [numerator, denominator]");
    RunOptions ro;
    const json& cps = c.at("checkpoints");
    for (std::size_t i = 0; i < cps.size(); ++i) ro.checkpoints.push_back(io::get_size(cps[i], c.path + "/checkpoints"));
    if (ro.checkpoints.empty()) throw ConfigError(c.path + "/checkpoints: empty");
    ro.horizon = *std::max_element(ro.checkpoints.begin(), ro.checkpoints.end());
    ro.ratios = {RatioSpec{0, 1}};
    auto res = c.run(ids, ro);
    double slack = c.num_or("se_slack", 3.0);
    for (const auto& st : res.summary.ratio_stats)
      out.check(std::abs(st.mean - 1.0) <= slack * st.se,
                "t=" + std::to_string(st.t) + " mean " + fmt(st.mean) + " se " + fmt(st.se));
  } else if (a.kind == "ville_bound") {
    auto ids = c.strings("models");
    if (ids.size() != 2) throw ConfigError(c.path + "/models: expected [reference, challenger]");
    double thr = c.num("threshold");
    if (!(thr > 1.0)) throw ConfigError(c.path + "/threshold: must exceed 1");
    RunOptions ro;
    ro.horizon = c.size("horizon");
    ro.exceedances = {ExceedanceSpec{RatioSpec{1, 0}, thr}};
    auto res = c.run(ids, ro);
    const auto& ex = res.summary.exceedance_stats.at(0);
    double bound = 1.0 / thr;
    double se = std::sqrt(bound * (1.0 - bound) / static_cast<double>(res.summary.paths));
    out.check(ex.frequency <= bound + c.num_or("se_slack", 3.0) * se,
              "exceedance frequency " + fmt(ex.frequency) + " bound " + fmt(bound));
  }
  return out;
}

}  // namespace

std::vector<AssertionResult> run_assertions(const Scenario& s, const AssertionOptions& options) {
  for (std::size_t i = 0; i < s.expected.size(); ++i) {
    const auto& a = s.expected[i];
    auto path = "/expected/" + std::to_string(i);
    if (!kProvenance.count(a.provenance))
      throw ConfigError(path + "/provenance: must be one of published, derived, trivial (got \"" + a.provenance + "\")");
    if (!kKinds.count(a.kind)) throw ConfigError(path + "/kind: unknown assertion kind \"" + a.kind + "\"");
    if (!a.args.is_object()) throw ConfigError(path + "/args: expected an object");
  }
  std::vector<AssertionResult> results;
  for (std::size_t i = 0; i < s.expected.size(); ++i) {
    const auto& a = s.expected[i];
    AssertionResult r{a.id, a.kind, a.provenance, false, ""};
    try {
      auto o = run_one(s, a, options, i);
      r.passed = o.ok;
      r.detail = o.detail.str();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/expected/" + std::to_string(i) + ": " + e.what());
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace misbelief
