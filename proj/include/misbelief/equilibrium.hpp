#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "misbelief/dynamics.hpp"
#include "misbelief/model.hpp"
#include "misbelief/policy.hpp"
#include "misbelief/problem.hpp"

namespace misbelief {

struct Strategy {
  std::vector<double> probs;

  static Strategy pure(std::size_t num_actions, std::size_t a);
  std::vector<std::size_t> support(double tol = 1e-9) const;
  bool is_pure() const { return support().size() == 1; }
  bool operator==(const Strategy&) const = default;
};

struct PAbsorption {
  bool evaluated = false;
  bool certified = false;
  std::string method;
  double estimate = 0.0;
  Interval interval{0.0, 1.0};
  std::size_t paths = 0;
  std::size_t horizon = 0;
  double eps = 0.0;
  // certified, or a Monte Carlo interval bounded away from zero
  bool positive() const { return certified || (evaluated && interval.lo > 0.0); }
};

struct FamilyCheck {
  double radius = 0.0;
  std::size_t neighbors = 0;
  bool dominance_evaluated = false;
  bool locally_dominant = false;
  std::optional<double> passing_d;
  std::vector<double> tried_d;
  bool footnote_holds = true;  // mixed records: KL minimizers constant across the support face
  std::optional<Point> dominance_violation;
  bool kl_evaluated = false;
  bool locally_kl_minimizing = false;
  std::vector<Point> kl_witnesses;  // neighbors with strictly lower weighted KL
  std::string note;
};

// Exact feasible interval for the probability of the first action (two-action problems).
struct ProbInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;
};

struct EquilibriumRecord {
  Strategy sigma;
  std::string origin;  // "pure", "mixed", "sce-support"
  std::vector<std::size_t> kl_minimizers;
  std::vector<Belief> supporting_beliefs;
  double bne_margin = 0.0;
  bool bne = false;
  bool classified = false;
  bool quasi_strict = false;
  double quasi_strict_margin = 0.0;
  bool uniformly_quasi_strict = false;
  bool sce = false;
  bool uniformly_quasi_strict_sce = false;
  bool knife_edge = false;
  // mixed components
  std::vector<Strategy> members;
  std::vector<double> box_lo, box_hi;
  std::optional<ProbInterval> exact_interval;
  PAbsorption p_absorbing;
  std::optional<FamilyCheck> family;
};

std::vector<EquilibriumRecord> enumerate_pure_bne(const DecisionProblem& problem, const SubjectiveModel& model);
std::vector<EquilibriumRecord> enumerate_mixed_bne(const DecisionProblem& problem, const SubjectiveModel& model,
                                                   std::size_t grid_resolution = 20);
// Exact search over supports: SCE exist at every strategy with support S iff some belief
// on the parameters matching the truth on S makes all of S optimal.
std::vector<EquilibriumRecord> enumerate_sce(const DecisionProblem& problem, const SubjectiveModel& model);

// BN-E test at one strategy; fills kl_minimizers, witness, margin
EquilibriumRecord evaluate_strategy(const DecisionProblem& problem, const SubjectiveModel& model,
                                    const Strategy& sigma);

EquilibriumRecord classify(const DecisionProblem& problem, const SubjectiveModel& model, EquilibriumRecord record);

struct MonteCarloBudget {
  std::size_t paths = 1000;
  std::size_t horizon = 1000;
  std::uint64_t seed = 1;
  double eps = 0.05;
  std::size_t threads = 1;
  PolicySpec policy;
};

EquilibriumRecord estimate_p_absorbing(const DecisionProblem& problem, const SubjectiveModel& model,
                                       EquilibriumRecord record, const MonteCarloBudget& budget);

EquilibriumRecord check_local_dominance(const DecisionProblem& problem, const QFamily& family,
                                        const SubjectiveModel& model, EquilibriumRecord record,
                                        std::optional<double> radius = std::nullopt,
                                        const std::vector<double>& d_candidates = {1.0, 0.5, 2.0});
EquilibriumRecord check_locally_kl_minimizing(const DecisionProblem& problem, const QFamily& family,
                                              const SubjectiveModel& model, EquilibriumRecord record,
                                              std::optional<double> radius = std::nullopt);

struct EquilibriumAnalysis {
  std::vector<EquilibriumRecord> pure;
  std::vector<EquilibriumRecord> mixed;
  std::vector<EquilibriumRecord> sce;
  std::vector<EquilibriumRecord> all() const;
};

EquilibriumAnalysis analyze_equilibria(const DecisionProblem& problem, const SubjectiveModel& model,
                                       std::size_t mixed_resolution = 20);

}  // namespace misbelief
