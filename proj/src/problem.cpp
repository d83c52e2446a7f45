#include "misbelief/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "misbelief/quadrature.hpp"

namespace misbelief {

UtilityFn UtilityFn::table(std::vector<std::vector<double>> table) {
  UtilityFn u;
  u.kind_ = Kind::Table;
  u.table_ = std::move(table);
  return u;
}

UtilityFn UtilityFn::linear(std::size_t coordinate, std::vector<double> action_cost) {
  UtilityFn u;
  u.kind_ = Kind::LinearInOutcome;
  u.coord_ = coordinate;
  u.params_ = std::move(action_cost);
  return u;
}

UtilityFn UtilityFn::abs_outcome(std::size_t coordinate) {
  UtilityFn u;
  u.kind_ = Kind::AbsOutcome;
  u.coord_ = coordinate;
  return u;
}

UtilityFn UtilityFn::custom(std::string tag, std::vector<double> params) {
  if (tag != "scaled_linear") throw std::invalid_argument("unknown custom utility tag: " + tag);
  UtilityFn u;
  u.kind_ = Kind::Custom;
  u.tag_ = std::move(tag);
  u.params_ = std::move(params);
  return u;
}

double UtilityFn::operator()(std::size_t a, const Outcome& y) const {
  switch (kind_) {
    case Kind::Table:
      return table_[a][y.atom];
    case Kind::LinearInOutcome:
      return y.values[coord_] - params_[a];
    case Kind::AbsOutcome:
      return std::abs(y.values[coord_]);
    case Kind::Custom:
      return params_[a] * y.values[0];
  }
  return 0.0;
}

namespace {

// marginal of coordinate i of a real distribution, when it is available in closed form
const OutcomeDistribution* coordinate_marginal(const OutcomeDistribution& d, std::size_t i) {
  if (d.kind() == OutcomeDistribution::Kind::Product) return &d.components()[i];
  if (d.space().size == 1) return &d;
  return nullptr;
}

double abs_expectation(const OutcomeDistribution& d) {
  if (d.kind() == OutcomeDistribution::Kind::Gaussian) return folded_normal_mean(d.mean(), d.variance());
  if (d.kind() == OutcomeDistribution::Kind::Mixture) {
    double s = 0.0;
    for (std::size_t k = 0; k < d.components().size(); ++k)
      s += d.weights()[k] * abs_expectation(d.components()[k]);
    return s;
  }
  return expectation(d, [](const Outcome& y) { return std::abs(y.values[0]); });
}

}  // namespace

double folded_normal_mean(double mean, double variance) {
  mean = std::abs(mean);
  double s = std::sqrt(variance);
  double phi_tail = 0.5 * std::erfc(mean / (s * std::numbers::sqrt2));  // P(Y < 0)
  return mean * (1.0 - 2.0 * phi_tail) +
         s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-mean * mean / (2.0 * variance));
}

double UtilityFn::expected(std::size_t a, const OutcomeDistribution& dist) const {
  switch (kind_) {
    case Kind::Table: {
      double s = 0.0;
      for (const auto& node : quadrature_rule(dist)) s += node.weight * table_[a][node.y.atom];
      return s;
    }
    case Kind::LinearInOutcome:
      return dist.mean_vector()[coord_] - params_[a];
    case Kind::Custom:
      return params_[a] * dist.mean_vector()[0];
    case Kind::AbsOutcome: {
      if (dist.kind() == OutcomeDistribution::Kind::Mixture) {
        double s = 0.0;
        for (std::size_t k = 0; k < dist.components().size(); ++k)
          s += dist.weights()[k] * expected(a, dist.components()[k]);
        return s;
      }
      if (const auto* m = coordinate_marginal(dist, coord_)) return abs_expectation(*m);
      std::size_t c = coord_;
      return expectation(dist, [c](const Outcome& y) { return std::abs(y.values[c]); });
    }
  }
  return 0.0;
}

void UtilityFn::validate(std::size_t num_actions, const OutcomeSpace& space) const {
  switch (kind_) {
    case Kind::Table:
      if (space.kind != OutcomeSpace::Kind::Categorical)
        throw std::invalid_argument("table utility needs a categorical outcome space");
      if (table_.size() != num_actions)
        throw std::invalid_argument("utility table needs one row per action");
      for (const auto& row : table_)
        if (row.size() != space.size)
          throw std::invalid_argument("utility table rows need one entry per atom");
      return;
    case Kind::LinearInOutcome:
    case Kind::Custom:
      if (params_.size() != num_actions)
        throw std::invalid_argument("utility needs one parameter per action");
      [[fallthrough]];
    case Kind::AbsOutcome:
      if (space.kind != OutcomeSpace::Kind::Real || coord_ >= space.size)
        throw std::invalid_argument("utility coordinate outside the real outcome space");
      return;
  }
}

std::size_t DecisionProblem::action_index(const std::string& label) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i].label == label) return i;
  throw std::invalid_argument("unknown action: " + label);
}

void DecisionProblem::validate() const {
  if (actions.empty()) throw std::invalid_argument("problem needs at least one action");
  for (std::size_t i = 0; i < actions.size(); ++i)
    for (std::size_t j = i + 1; j < actions.size(); ++j)
      if (actions[i].label == actions[j].label)
        throw std::invalid_argument("duplicate action label: " + actions[i].label);
  if (true_dgp.size() != actions.size())
    throw std::invalid_argument("true DGP must be given for every action");
  for (const auto& d : true_dgp)
    if (d.space() != outcome_space)
      throw std::invalid_argument("true DGP outside the outcome space " + outcome_space.describe());
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0,1)");
  utility.validate(actions.size(), outcome_space);
}

double expected_true_utility(const DecisionProblem& problem, std::size_t a) {
  if (a >= problem.num_actions()) throw std::out_of_range("action index out of range");
  return problem.utility.expected(a, problem.true_dgp[a]);
}

}  // namespace misbelief
