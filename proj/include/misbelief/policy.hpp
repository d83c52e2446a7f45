#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "misbelief/model.hpp"
#include "misbelief/problem.hpp"

namespace misbelief {

// eu[a][w] = E_{q(.|a,w)} u(a, y)
std::vector<std::vector<double>> subjective_eu(const DecisionProblem& problem, const SubjectiveModel& model);

std::vector<std::size_t> best_set(const std::vector<std::vector<double>>& eu, std::span<const double> belief,
                                  double tol = 1e-9);
std::vector<std::size_t> myopic_best_set(const DecisionProblem& problem, const SubjectiveModel& model,
                                         const Belief& belief, double tol = 1e-9);

// Regular grid {c / R : c composition of R into k parts} on the (k-1)-simplex.
class SimplexGrid {
 public:
  SimplexGrid(std::size_t k, std::size_t resolution);
  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return k_; }
  std::size_t resolution() const { return r_; }
  const std::vector<int>& composition(std::size_t i) const { return points_[i]; }
  std::vector<double> belief(std::size_t i) const;
  std::size_t rank(std::span<const int> c) const;
  // piecewise-linear interpolation weights on the Freudenthal triangulation
  void interpolate(std::span<const double> pi, std::vector<std::pair<std::size_t, double>>& out) const;

 private:
  std::size_t k_, r_;
  std::vector<std::vector<int>> points_;
  std::vector<std::vector<std::size_t>> count_;  // count_[r][j]: compositions of r into j parts
};

struct PolicySpec {
  enum class Mode { Myopic, GridDP };
  Mode mode = Mode::Myopic;
  std::size_t resolution = 20;
  std::optional<double> discount;  // defaults to the problem's discount
  std::size_t quadrature_nodes = 12;
  bool operator==(const PolicySpec&) const = default;
};

class Policy {
 public:
  const std::string& model_id() const { return model_id_; }
  PolicySpec::Mode mode() const { return mode_; }
  std::size_t resolution() const { return resolution_; }
  double discount() const { return discount_; }
  const std::vector<std::vector<double>>& eu() const { return eu_; }

  // pure optimal action, ties broken toward the lowest action index
  std::size_t action(std::span<const double> belief) const;
  // same decision from unnormalized log posterior weights; myopic comparisons are made pairwise
  // with the weights rescaled, so beliefs far below double precision still break ties
  std::size_t action_log(std::span<const double> log_weights) const;
  // action values at a belief (myopic: expected utility; DP: Bellman Q-values)
  std::vector<double> q_values(std::span<const double> belief) const;
  double value(std::span<const double> belief) const;

  // GridDP only
  const SimplexGrid* grid() const;
  const std::vector<double>& value_table() const;
  const std::vector<std::size_t>& action_table() const;
  const std::vector<double>& residuals() const;

  friend Policy solve_policy(const DecisionProblem&, const SubjectiveModel&, const PolicySpec&);

  struct DpData;

 private:
  std::string model_id_;
  PolicySpec::Mode mode_ = PolicySpec::Mode::Myopic;
  std::size_t resolution_ = 0;
  double discount_ = 0.0;
  std::vector<std::vector<double>> eu_;
  std::shared_ptr<const DpData> dp_;
};

Policy solve_policy(const DecisionProblem& problem, const SubjectiveModel& model, const PolicySpec& spec = {});

struct OptimalityCertificate {
  double margin = 0.0;           // max over beliefs of min (EU(a) - EU(a')), a in support
  std::vector<double> belief;    // maximizing belief over the subset
};

// Largest t such that some pi on the face spanned by `subset` makes every action of
// `support` beat every other action by at least t (t = +inf when no other action exists).
OptimalityCertificate support_margin(const std::vector<std::vector<double>>& eu,
                                     std::span<const std::size_t> support, std::span<const std::size_t> subset);

bool action_optimal_on_face(const DecisionProblem& problem, const SubjectiveModel& model, std::size_t a,
                            std::span<const std::size_t> subset);
bool action_somewhere_optimal(const DecisionProblem& problem, const SubjectiveModel& model, std::size_t a,
                              std::span<const std::size_t> subset);
bool action_somewhere_optimal_grid(const DecisionProblem& problem, const SubjectiveModel& model, std::size_t a,
                                   std::span<const std::size_t> subset, std::size_t resolution = 200);

}  // namespace misbelief
