#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "misbelief/model.hpp"
#include "misbelief/policy.hpp"
#include "misbelief/problem.hpp"
#include "misbelief/rng.hpp"

namespace misbelief {

struct SwitcherConfig {
  DecisionProblem problem;
  std::vector<SubjectiveModel> models;  // models[0] is the initial model, the rest compete
  std::vector<Belief> priors;
  std::vector<Policy> policies;
  double alpha = 2.0;

  // myopic policies unless specs are given (one per model)
  static SwitcherConfig make(DecisionProblem problem, std::vector<SubjectiveModel> models,
                             std::vector<Belief> priors, double alpha,
                             const std::vector<PolicySpec>& specs = {});
  bool dogmatic() const { return models.size() == 1; }
  std::size_t model_index(const std::string& id) const;
  void validate() const;
};

struct SwitchEvent {
  std::size_t t = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  double log_lambda = 0.0;
};

struct PathState {
  std::size_t t = 0;
  std::size_t current = 0;
  std::vector<LikelihoodTracker> trackers;
  std::vector<std::vector<double>> beliefs;  // posterior of every model
  double log_l_truth = 0.0;
  std::vector<std::size_t> action_counts;
  std::optional<std::size_t> last_action;
  Outcome last_y;
  double cumulative_utility = 0.0;

  static PathState initial(const SwitcherConfig& config);
};

struct StepInfo {
  std::size_t action = 0;
  bool switched = false;
  SwitchEvent event;
  double max_log_lambda = -INFINITY;  // best challenger against the model in force, this period
};

// One period: Bayes-factor switching decision (t >= 1), action from the policy of
// the model in force, draw from the true DGP, likelihood and belief updates.
StepInfo step(const SwitcherConfig& config, PathState& state, RandomStream& rng);

// Ratio l^num / l^den of two models; index -1 denotes the true DGP.
struct RatioSpec {
  int numerator = 0;
  int denominator = -1;
};

struct ExceedanceSpec {
  RatioSpec ratio;
  double threshold = 1.0;
};

struct RunOptions {
  std::size_t horizon = 100;
  std::size_t window = 0;  // persistence window, 0 means (T+1)/2
  std::vector<std::size_t> checkpoints;
  std::vector<RatioSpec> ratios;
  std::vector<ExceedanceSpec> exceedances;
  bool checkpoint_beliefs = false;
  std::size_t trajectory_thin = 0;  // record every k-th period when > 0
};

struct TrajectoryRow {
  std::size_t t;
  std::size_t model;
  std::size_t action;
  double outcome;  // atom index or first coordinate
  double cumulative_utility;
};

struct PathRecord {
  std::size_t path_id = 0;
  std::size_t horizon = 0;
  std::vector<SwitchEvent> switches;
  std::size_t final_model = 0;
  std::vector<Belief> final_beliefs;
  std::vector<std::size_t> action_counts;
  std::vector<double> action_frequency;
  bool persist_proxy = false;
  std::vector<std::size_t> absorbed_into;
  double cumulative_utility = 0.0;
  double max_log_lambda = -INFINITY;
  // per checkpoint: log l of every model, then log l of the true DGP
  std::vector<std::vector<double>> checkpoint_log_l;
  std::vector<std::vector<std::vector<double>>> checkpoint_beliefs;
  std::vector<double> sup_log_ratio;  // per exceedance spec
  std::vector<TrajectoryRow> trajectory;
};

PathRecord run_path(const SwitcherConfig& config, const RunOptions& options, RandomStream& rng,
                    std::size_t path_id = 0);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
// Runs fn(0..n-1) on up to `threads` workers; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct RatioCheckpointStat {
  RatioSpec ratio;
  std::size_t t = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct ExceedanceStat {
  ExceedanceSpec spec;
  std::size_t count = 0;
  double frequency = 0.0;
  double se = 0.0;
  Interval wilson;
};

struct MCSummary {
  std::size_t paths = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> model_ids;
  std::size_t persist_count = 0;
  double persist_frequency = 0.0;
  Interval persist_wilson;
  std::size_t switched_paths = 0;
  std::map<std::size_t, std::size_t> switch_histogram;
  std::map<std::string, std::size_t> absorption;  // action-label set -> paths
  std::vector<std::size_t> final_model_counts;
  double mean_cumulative_utility = 0.0;
  std::vector<RatioCheckpointStat> ratio_stats;
  std::vector<ExceedanceStat> exceedance_stats;
};

struct MonteCarloResult {
  MCSummary summary;
  std::vector<PathRecord> paths;
};

MonteCarloResult monte_carlo(const SwitcherConfig& config, std::size_t n_paths, const RunOptions& options,
                             std::uint64_t master_seed, std::size_t threads = 1);

std::string action_set_label(const DecisionProblem& problem, const std::vector<std::size_t>& actions);

}  // namespace misbelief
