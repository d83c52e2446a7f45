#pragma once

#include <optional>
#include <string>
#include <vector>

#include "misbelief/equilibrium.hpp"

namespace misbelief {

enum class VerdictKind {
  GloballyRobust,
  NotGloballyRobust,
  ConstrainedLocallyRobust,
  NotConstrainedLocallyRobust,
  Inconclusive
};
enum class Certainty { Certified, Empirical };

std::string to_string(VerdictKind k);
std::string to_string(Certainty c);
VerdictKind verdict_kind_from_string(const std::string& s);

struct Adversary {
  SubjectiveModel model;
  Belief prior;
  std::string construction;
};

// Monte Carlo evidence attached to empirical verdicts
struct Evidence {
  std::string description;
  std::size_t paths = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::size_t successes = 0;
  double estimate = 0.0;
  Interval wilson;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::vector<std::string> basis;
  Certainty certainty = Certainty::Certified;
  std::vector<EquilibriumRecord> witnesses;
  std::vector<Point> witness_points;
  std::optional<Adversary> adversary;
  std::vector<Evidence> evidence;
  std::vector<std::string> warnings;
};

struct VerdictOptions {
  MonteCarloBudget budget;
  std::size_t mixed_resolution = 20;
  std::optional<double> radius;
  std::vector<double> d_candidates = {1.0, 0.5, 2.0};
  double adversary_eps = 1e-4;
  std::optional<Belief> prior;  // prior of the initial model used for adversary priors, uniform if unset
};

// true if some parameter reproduces the true DGP at every action
std::optional<std::size_t> correct_parameter(const DecisionProblem& problem, const SubjectiveModel& model);

Verdict global_verdict(const DecisionProblem& problem, const SubjectiveModel& model, const VerdictOptions& options = {});

// Unconstrained local robustness coincides with global robustness.
Verdict unconstrained_local_verdict(const DecisionProblem& problem, const SubjectiveModel& model,
                                    const VerdictOptions& options = {});

struct PriorMassGate {
  bool passes = false;
  double mass = 0.0;
  double bound = 1.0;
  std::vector<std::size_t> union_indices;
  std::optional<Adversary> adversary;
};

// sce: classified records; only SCE with positive p-absorption count
PriorMassGate prior_mass_gate(const DecisionProblem& problem, const SubjectiveModel& model, const Belief& prior,
                              double alpha, const std::vector<EquilibriumRecord>& sce, double eps = 1e-4);

Verdict constrained_verdict(const DecisionProblem& problem, const QFamily& family, const SubjectiveModel& model,
                            bool assume_convergence, const VerdictOptions& options = {});

struct MultiModelGate {
  bool global_ok = false;
  bool constrained_ok = false;
};
MultiModelGate multi_model_gate(double alpha, double K, std::optional<double> d = std::nullopt);

// warning text when a switcher with several competing models sits outside the gate
std::optional<std::string> multi_model_warning(const SwitcherConfig& config);

}  // namespace misbelief
