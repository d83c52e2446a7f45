#pragma once

#include <string>
#include <vector>

#include "misbelief/distribution.hpp"

namespace misbelief {

struct Action {
  std::string label;
  double value = 0.0;  // numeric level used by kernel expressions
  bool operator==(const Action&) const = default;
};

class UtilityFn {
 public:
  enum class Kind { Table, LinearInOutcome, AbsOutcome, Custom };

  // table[a][atom]
  static UtilityFn table(std::vector<std::vector<double>> table);
  // u(a, y) = y[coordinate] - action_cost[a]
  static UtilityFn linear(std::size_t coordinate, std::vector<double> action_cost);
  // u(a, y) = |y[coordinate]|
  static UtilityFn abs_outcome(std::size_t coordinate = 0);
  // tags: "scaled_linear" with params = per-action scale s, u(a, y) = s[a] * y[0]
  static UtilityFn custom(std::string tag, std::vector<double> params);

  Kind kind() const { return kind_; }
  const std::vector<std::vector<double>>& table_values() const { return table_; }
  std::size_t coordinate() const { return coord_; }
  const std::vector<double>& params() const { return params_; }  // action costs or custom params
  const std::string& tag() const { return tag_; }

  double operator()(std::size_t a, const Outcome& y) const;
  // E[u(a, Y)] for Y ~ dist; closed form where available
  double expected(std::size_t a, const OutcomeDistribution& dist) const;

  // checks dimensions against the problem
  void validate(std::size_t num_actions, const OutcomeSpace& space) const;
  bool operator==(const UtilityFn&) const = default;

 private:
  Kind kind_ = Kind::AbsOutcome;
  std::vector<std::vector<double>> table_;
  std::size_t coord_ = 0;
  std::vector<double> params_;
  std::string tag_;
};

struct DecisionProblem {
  std::vector<Action> actions;
  OutcomeSpace outcome_space;
  std::vector<OutcomeDistribution> true_dgp;  // indexed by action
  UtilityFn utility;
  double discount = 0.0;

  std::size_t num_actions() const { return actions.size(); }
  std::size_t action_index(const std::string& label) const;
  void validate() const;
};

double expected_true_utility(const DecisionProblem& problem, std::size_t a);

// E|Y| for Y ~ N(mean, variance)
double folded_normal_mean(double mean, double variance);

}  // namespace misbelief
