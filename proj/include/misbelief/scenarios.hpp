#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "misbelief/dynamics.hpp"
#include "misbelief/equilibrium.hpp"
#include "misbelief/robustness.hpp"

namespace misbelief {

// provenance is one of "published", "derived", "trivial"
struct Assertion {
  std::string id;
  std::string kind;
  nlohmann::json args;
  std::string provenance;
  std::string description;
};

struct Scenario {
  std::string name;
  std::string description;
  nlohmann::json params = nlohmann::json::object();
  DecisionProblem problem;
  std::vector<SubjectiveModel> models;  // models[0] is the initial model
  std::map<std::string, Belief> priors;  // by model id, uniform when absent
  double alpha = 2.0;
  std::map<std::string, QFamily> families;
  std::vector<Assertion> expected;
  std::vector<std::string> notes;

  const SubjectiveModel& model(const std::string& id) const;
  Belief prior(const std::string& id) const;
  const QFamily& family(const std::string& name) const;
};

std::vector<std::string> scenario_names();
std::string scenario_summary(const std::string& name);
// params override the builder defaults; unknown names or bad params raise ConfigError
Scenario build_scenario(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
// a builtin name or a path to a JSON file
Scenario load_scenario(const std::string& name_or_path, const nlohmann::json& params = nlohmann::json::object());
bool structurally_equal(const Scenario& a, const Scenario& b);

// Switcher over the given model ids (first is the initial model) with the scenario priors,
// optionally overridden.
SwitcherConfig make_switcher(const Scenario& s, const std::vector<std::string>& model_ids,
                             std::optional<double> alpha = std::nullopt,
                             const std::map<std::string, std::vector<double>>& prior_overrides = {});

struct AssertionResult {
  std::string id;
  std::string kind;
  std::string provenance;
  bool passed = false;
  std::string detail;
};

struct AssertionOptions {
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;  // overrides per-assertion seeds
};

// Throws ConfigError if any assertion lacks a recognised provenance tag or has an unknown kind.
std::vector<AssertionResult> run_assertions(const Scenario& s, const AssertionOptions& options = {});

// analytic thresholds of the investment builder
struct InvestmentThresholds {
  double beta_low = 0.0;
  double beta_high = 0.0;
};
InvestmentThresholds investment_thresholds(const nlohmann::json& params = nlohmann::json::object());

}  // namespace misbelief
