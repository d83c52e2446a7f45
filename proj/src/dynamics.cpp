#include "misbelief/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <mutex>
#include <thread>

namespace misbelief {

SwitcherConfig SwitcherConfig::make(DecisionProblem problem, std::vector<SubjectiveModel> models,
                                    std::vector<Belief> priors, double alpha,
                                    const std::vector<PolicySpec>& specs) {
  SwitcherConfig c;
  c.problem = std::move(problem);
  c.models = std::move(models);
  c.priors = std::move(priors);
  c.alpha = alpha;
  if (!specs.empty() && specs.size() != c.models.size())
    throw std::invalid_argument("need one policy spec per model");
  for (std::size_t i = 0; i < c.models.size(); ++i)
    c.policies.push_back(solve_policy(c.problem, c.models[i], specs.empty() ? PolicySpec{} : specs[i]));
  c.validate();
  return c;
}

std::size_t SwitcherConfig::model_index(const std::string& id) const {
  for (std::size_t i = 0; i < models.size(); ++i)
    if (models[i].id() == id) return i;
  throw std::invalid_argument("unknown model: " + id);
}

void SwitcherConfig::validate() const {
  problem.validate();
  if (models.empty()) throw std::invalid_argument("switcher needs an initial model");
  if (!(alpha > 1.0)) throw std::invalid_argument("switching threshold alpha must exceed 1");
  if (priors.size() != models.size() || policies.size() != models.size())
    throw std::invalid_argument("need one prior and one policy per model");
  for (std::size_t i = 0; i < models.size(); ++i) {
    models[i].check_compatible(problem);
    priors[i].validate(models[i], true);
    if (priors[i].model_id != models[i].id() || policies[i].model_id() != models[i].id())
      throw std::invalid_argument("prior/policy order must follow the model list");
    for (std::size_t j = 0; j < i; ++j)
      if (models[j].id() == models[i].id()) throw std::invalid_argument("duplicate model id " + models[i].id());
  }
}

PathState PathState::initial(const SwitcherConfig& config) {
  PathState s;
  for (std::size_t i = 0; i < config.models.size(); ++i) {
    s.trackers.emplace_back(config.models[i], config.priors[i]);
    s.beliefs.push_back(config.priors[i].probs);
  }
  s.action_counts.assign(config.problem.num_actions(), 0);
  return s;
}

StepInfo step(const SwitcherConfig& config, PathState& state, RandomStream& rng) {
  StepInfo info;
  const std::size_t nm = config.models.size();
  if (state.t >= 1 && nm > 1) {
    std::vector<double> ll(nm);
    double best = -INFINITY;
    for (std::size_t m = 0; m < nm; ++m) {
      ll[m] = state.trackers[m].log_likelihood();
      best = std::max(best, ll[m]);
      if (m != state.current) info.max_log_lambda = std::max(info.max_log_lambda, ll[m] - ll[state.current]);
    }
    std::size_t star = state.current;
    if (ll[state.current] != best)
      for (std::size_t m = 0; m < nm; ++m)
        if (ll[m] == best) {
          star = m;
          break;
        }
    double log_lambda = ll[star] - ll[state.current];
    if (star != state.current && log_lambda > std::log(config.alpha)) {
      info.switched = true;
      info.event = SwitchEvent{state.t, state.current, star, log_lambda};
      state.current = star;
    }
  }
  thread_local std::vector<double> log_w;
  state.trackers[state.current].log_posterior_into(log_w);
  std::size_t a = config.policies[state.current].action_log(log_w);
  Outcome y = sample(config.problem.true_dgp[a], rng);
  for (std::size_t m = 0; m < nm; ++m) {
    state.trackers[m].observe(a, y);
    state.trackers[m].posterior_into(state.beliefs[m]);
  }
  state.log_l_truth += log_density(config.problem.true_dgp[a], y);
  state.action_counts[a] += 1;
  state.cumulative_utility += config.problem.utility(a, y);
  state.last_action = a;
  state.last_y = std::move(y);
  state.t += 1;
  info.action = a;
  return info;
}

namespace {

double model_log_l(const PathState& s, int idx) {
  return idx < 0 ? s.log_l_truth : s.trackers[static_cast<std::size_t>(idx)].log_likelihood();
}

}  // namespace

PathRecord run_path(const SwitcherConfig& config, const RunOptions& options, RandomStream& rng,
                    std::size_t path_id) {
  if (options.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const std::size_t T = options.horizon;
  const std::size_t window = std::min(T, options.window ? options.window : (T + 1) / 2);
  const std::size_t window_start = T - window;
  const int nm = static_cast<int>(config.models.size());
  for (const auto& e : options.exceedances)
    if (e.ratio.numerator >= nm || e.ratio.denominator >= nm || e.ratio.numerator < -1 || e.ratio.denominator < -1)
      throw std::invalid_argument("ratio statistic refers to an unknown model");

  PathRecord rec;
  rec.path_id = path_id;
  rec.horizon = T;
  rec.sup_log_ratio.assign(options.exceedances.size(), -INFINITY);
  PathState state = PathState::initial(config);
  std::vector<bool> in_window(config.problem.num_actions(), false);
  bool late_switch = false;
  std::size_t next_cp = 0;
  std::vector<std::size_t> cps = options.checkpoints;
  std::sort(cps.begin(), cps.end());

  for (std::size_t t = 0; t < T; ++t) {
    StepInfo info = step(config, state, rng);
    rec.max_log_lambda = std::max(rec.max_log_lambda, info.max_log_lambda);
    if (info.switched) {
      rec.switches.push_back(info.event);
      if (t >= window_start) late_switch = true;
    }
    if (t >= window_start) in_window[info.action] = true;
    for (std::size_t e = 0; e < options.exceedances.size(); ++e) {
      const auto& r = options.exceedances[e].ratio;
      rec.sup_log_ratio[e] = std::max(rec.sup_log_ratio[e], model_log_l(state, r.numerator) - model_log_l(state, r.denominator));
    }
    if (options.trajectory_thin > 0 && (t % options.trajectory_thin == 0 || t + 1 == T)) {
      double yv = state.last_y.is_atom() ? static_cast<double>(state.last_y.atom) : state.last_y.values[0];
      rec.trajectory.push_back({t, state.current, info.action, yv, state.cumulative_utility});
    }
    while (next_cp < cps.size() && cps[next_cp] == state.t) {
      std::vector<double> ll;
      for (int m = 0; m < nm; ++m) ll.push_back(model_log_l(state, m));
      ll.push_back(state.log_l_truth);
      rec.checkpoint_log_l.push_back(std::move(ll));
      if (options.checkpoint_beliefs) rec.checkpoint_beliefs.push_back(state.beliefs);
      ++next_cp;
    }
  }
  while (next_cp < cps.size()) {  // checkpoints past the horizon repeat the final state
    std::vector<double> ll;
    for (int m = 0; m < nm; ++m) ll.push_back(model_log_l(state, m));
    ll.push_back(state.log_l_truth);
    rec.checkpoint_log_l.push_back(std::move(ll));
    if (options.checkpoint_beliefs) rec.checkpoint_beliefs.push_back(state.beliefs);
    ++next_cp;
  }

  rec.final_model = state.current;
  for (std::size_t m = 0; m < config.models.size(); ++m)
    rec.final_beliefs.push_back(Belief{config.models[m].id(), state.beliefs[m]});
  rec.action_counts = state.action_counts;
  for (auto c : state.action_counts) rec.action_frequency.push_back(static_cast<double>(c) / static_cast<double>(T));
  rec.persist_proxy = state.current == 0 && !late_switch;
  for (std::size_t a = 0; a < in_window.size(); ++a)
    if (in_window[a]) rec.absorbed_into.push_back(a);
  rec.cumulative_utility = state.cumulative_utility;
  return rec;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&]() {
    try {
      while (!failed) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
      failed = true;
    }
  };
  std::size_t nt = std::max<std::size_t>(1, std::min(threads, n));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  double nn = static_cast<double>(n), p = static_cast<double>(successes) / nn;
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p + z2 / (2.0 * nn)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  double hi = successes == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

std::string action_set_label(const DecisionProblem& problem, const std::vector<std::size_t>& actions) {
  std::string s = "{";
  for (std::size_t i = 0; i < actions.size(); ++i) s += (i ? "," : "") + problem.actions[actions[i]].label;
  return s + "}";
}

MonteCarloResult monte_carlo(const SwitcherConfig& config, std::size_t n_paths, const RunOptions& options,
                             std::uint64_t master_seed, std::size_t threads) {
  if (n_paths < 1) throw std::invalid_argument("need at least one path");
  config.validate();
  RunOptions opts = options;
  for (const auto& r : opts.ratios)
    if (r.numerator >= static_cast<int>(config.models.size()) || r.denominator >= static_cast<int>(config.models.size()))
      throw std::invalid_argument("ratio statistic refers to an unknown model");
  if (!opts.ratios.empty() && opts.checkpoints.empty()) opts.checkpoints = {opts.horizon};

  MonteCarloResult out;
  out.paths.resize(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::for_path(master_seed, i);
    out.paths[i] = run_path(config, opts, rng, i);
  });

  // reduction in path order
  MCSummary& s = out.summary;
  s.paths = n_paths;
  s.horizon = opts.horizon;
  s.seed = master_seed;
  for (const auto& m : config.models) s.model_ids.push_back(m.id());
  s.final_model_counts.assign(config.models.size(), 0);
  double util = 0.0;
  for (const auto& p : out.paths) {
    if (p.persist_proxy) ++s.persist_count;
    if (!p.switches.empty()) ++s.switched_paths;
    s.switch_histogram[p.switches.size()] += 1;
    s.absorption[action_set_label(config.problem, p.absorbed_into)] += 1;
    s.final_model_counts[p.final_model] += 1;
    util += p.cumulative_utility;
  }
  const double N = static_cast<double>(n_paths);
  s.mean_cumulative_utility = util / N;
  s.persist_frequency = static_cast<double>(s.persist_count) / N;
  s.persist_wilson = wilson_interval(s.persist_count, n_paths);

  std::vector<std::size_t> cps = opts.checkpoints;
  std::sort(cps.begin(), cps.end());
  const int nm = static_cast<int>(config.models.size());
  auto col = [nm](int idx) { return static_cast<std::size_t>(idx < 0 ? nm : idx); };
  for (const auto& r : opts.ratios)
    for (std::size_t c = 0; c < cps.size(); ++c) {
      RatioCheckpointStat st;
      st.ratio = r;
      st.t = cps[c];
      double sum = 0.0;
      for (const auto& p : out.paths)
        sum += std::exp(p.checkpoint_log_l[c][col(r.numerator)] - p.checkpoint_log_l[c][col(r.denominator)]);
      st.mean = sum / N;
      double ss = 0.0;
      for (const auto& p : out.paths) {
        double d = std::exp(p.checkpoint_log_l[c][col(r.numerator)] - p.checkpoint_log_l[c][col(r.denominator)]) - st.mean;
        ss += d * d;
      }
      st.se = n_paths > 1 ? std::sqrt(ss / (N - 1.0) / N) : 0.0;
      s.ratio_stats.push_back(st);
    }
  for (std::size_t e = 0; e < opts.exceedances.size(); ++e) {
    ExceedanceStat st;
    st.spec = opts.exceedances[e];
    double lt = std::log(st.spec.threshold);
    for (const auto& p : out.paths)
      if (p.sup_log_ratio[e] > lt) ++st.count;
    st.frequency = static_cast<double>(st.count) / N;
    st.se = std::sqrt(st.frequency * (1.0 - st.frequency) / N);
    st.wilson = wilson_interval(st.count, n_paths);
    s.exceedance_stats.push_back(st);
  }
  return out;
}

}  // namespace misbelief
