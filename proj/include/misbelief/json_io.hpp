#pragma once

#include <string>

#include <json.hpp>

#include "misbelief/dynamics.hpp"
#include "misbelief/equilibrium.hpp"
#include "misbelief/robustness.hpp"

namespace misbelief::io {

using nlohmann::json;

// Serializer printing every double with 17 significant digits; non-finite values become
// the strings "inf", "-inf", "nan".
std::string dump(const json& j, int indent = 2);

// Syntax errors are reported as ConfigError "<origin>:<line>:<column>: <message>".
json parse_text(const std::string& text, const std::string& origin);
json parse_file(const std::string& path);

// Field access with JSON-pointer style paths in ConfigError messages.
const json& require(const json& j, const std::string& key, const std::string& path);
double get_double(const json& j, const std::string& path);
std::size_t get_size(const json& j, const std::string& path);
std::string get_string(const json& j, const std::string& path);
bool get_bool(const json& j, const std::string& path);
std::vector<double> get_doubles(const json& j, const std::string& path);
json number(double x);

json to_json(const OutcomeDistribution& d);
OutcomeDistribution distribution_from_json(const json& j, const std::string& path);

json to_json(const UtilityFn& u);
UtilityFn utility_from_json(const json& j, const std::string& path);

json to_json(const DecisionProblem& p);
DecisionProblem problem_from_json(const json& j, const std::string& path);

json to_json(const SubjectiveModel& m);
SubjectiveModel model_from_json(const json& j, const std::string& path);

json to_json(const Belief& b);
Belief belief_from_json(const json& j, const std::string& path);

json to_json(const KernelSpec& k);
KernelSpec kernel_spec_from_json(const json& j, const std::string& path);

// only box families carry a serializable kernel
json to_json(const QFamily& f);
QFamily family_from_json(const json& j, const std::vector<Action>& actions, const std::string& path);

json to_json(const PolicySpec& p);
PolicySpec policy_spec_from_json(const json& j, const std::string& path);

json to_json(const Interval& i);
json to_json(const DecisionProblem& problem, const EquilibriumRecord& r);
json to_json(const DecisionProblem& problem, const Verdict& v);
json to_json(const MCSummary& s);
json to_json(const Evidence& e);

}  // namespace misbelief::io
