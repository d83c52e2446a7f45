#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "misbelief/distribution.hpp"
#include "misbelief/expr.hpp"
#include "misbelief/problem.hpp"

namespace misbelief {

using Point = std::vector<double>;
using KernelFn = std::function<OutcomeDistribution(std::size_t action, std::span<const double> point)>;

class SubjectiveModel {
 public:
  SubjectiveModel() = default;
  // kernel[a][w] is the outcome distribution under action a and parameter w
  SubjectiveModel(std::string id, std::vector<Point> parameters,
                  std::vector<std::vector<OutcomeDistribution>> kernel);
  static SubjectiveModel from_kernel_fn(std::string id, std::vector<Point> parameters,
                                        std::size_t num_actions, const KernelFn& fn);

  const std::string& id() const { return id_; }
  const std::vector<Point>& parameters() const { return params_; }
  const OutcomeDistribution& kernel(std::size_t a, std::size_t w) const { return kernel_[a][w]; }
  const std::vector<std::vector<OutcomeDistribution>>& kernel_table() const { return kernel_; }
  std::size_t num_params() const { return params_.size(); }
  std::size_t num_actions() const { return kernel_.size(); }
  const OutcomeSpace& space() const { return kernel_.at(0).at(0).space(); }
  std::optional<std::size_t> find_parameter(std::span<const double> point, double tol = 1e-12) const;

  void check_compatible(const DecisionProblem& problem) const;
  SubjectiveModel with_id(std::string id) const;

 private:
  std::string id_;
  std::vector<Point> params_;
  std::vector<std::vector<OutcomeDistribution>> kernel_;
};

bool structurally_equal(const SubjectiveModel& a, const SubjectiveModel& b);

struct Belief {
  std::string model_id;
  std::vector<double> probs;

  static Belief uniform(const SubjectiveModel& model);
  static Belief degenerate(const SubjectiveModel& model, std::size_t w);
  // validated; priors must have full support
  static Belief prior(const SubjectiveModel& model, std::vector<double> probs);
  void validate(const SubjectiveModel& model, bool require_full_support) const;
  double mass(std::span<const std::size_t> indices) const;
  bool operator==(const Belief&) const = default;
};

struct Observation {
  std::size_t action;
  Outcome y;
};
using History = std::vector<Observation>;

Belief bayes_update(const SubjectiveModel& model, const Belief& belief, std::size_t a, const Outcome& y);

// log sum_w prior(w) prod_t q(y_t | a_t, w), from per-parameter log products
double log_likelihood(const SubjectiveModel& model, const Belief& prior, const History& history);
// same quantity accumulated through one-step predictive densities and sequential posteriors
double log_likelihood_recursive(const SubjectiveModel& model, const Belief& prior, const History& history);

// Incremental likelihood bookkeeping for one model: O(|params|) per observation.
class LikelihoodTracker {
 public:
  LikelihoodTracker(const SubjectiveModel& model, const Belief& prior);
  void observe(std::size_t a, const Outcome& y);
  double log_likelihood() const;
  Belief posterior() const;
  void posterior_into(std::vector<double>& out) const;
  // unnormalized: log prior + log likelihood product
  void log_posterior_into(std::vector<double>& out) const;
  const std::vector<double>& log_products() const { return log_products_; }

 private:
  const SubjectiveModel* model_;
  std::string id_;
  std::vector<double> log_prior_;
  std::vector<double> log_products_;
};

double log_sum_exp(std::span<const double> v);

double kl_divergence(const OutcomeDistribution& p, const OutcomeDistribution& q);

// kl[a][w] = D(q*(.|a) || q(.|a,w))
std::vector<std::vector<double>> kl_matrix(const DecisionProblem& problem, const SubjectiveModel& model);
double weighted_kl(const DecisionProblem& problem, const SubjectiveModel& model,
                   std::span<const double> sigma, std::size_t w);
std::vector<std::size_t> kl_minimizers(const DecisionProblem& problem, const SubjectiveModel& model,
                                       std::span<const double> sigma, double tol = 1e-9);
std::vector<std::size_t> kl_minimizers(const std::vector<std::vector<double>>& kl,
                                       std::span<const double> sigma, double tol = 1e-9);

struct MomentResult {
  double value = 1.0;
  double log_value = 0.0;
  bool diverged = false;
};

// E_{q*(.|a)}[(q(.|a,w')/q(.|a,w))^d]
MomentResult dominance_moment(const DecisionProblem& problem, const KernelFn& kernel, std::size_t a,
                              std::span<const double> w_prime, std::span<const double> w, double d);
MomentResult dominance_moment(const OutcomeDistribution& truth, const OutcomeDistribution& q_prime,
                              const OutcomeDistribution& q, double d);

// E_{q*(.|a)}[ln q(.|a,w')/q(.|a,w)]
double log_ratio_mean(const DecisionProblem& problem, const KernelFn& kernel, std::size_t a,
                      std::span<const double> w_prime, std::span<const double> w);

double prokhorov_categorical(std::span<const double> p, std::span<const double> q);
double prokhorov_categorical(const OutcomeDistribution& p, const OutcomeDistribution& q);

double hausdorff_params(const std::vector<Point>& a, const std::vector<Point>& b);
double distance_to_set(std::span<const double> x, const std::vector<Point>& set);

// kernels replaced by (1-eps) q(.|a,w) + eps q*(.|a); eps = 1 gives the true DGP
SubjectiveModel convex_mix_model(const SubjectiveModel& model, const DecisionProblem& problem, double eps,
                                 std::string id = "");

struct ExtraParameter {
  Point point;
  std::vector<OutcomeDistribution> kernel;  // per action
};
SubjectiveModel augment_model(const SubjectiveModel& model, const std::vector<ExtraParameter>& extra,
                              std::string id = "");
SubjectiveModel restrict_model(const SubjectiveModel& model, std::span<const std::size_t> keep,
                               std::string id = "");

// ----- parametric families on a finite grid -----

struct GaussianTerm {
  Expr mean;
  Expr variance;
};

// Either a vector of independent Gaussian coordinates or categorical weights
// (normalized after evaluation).
struct KernelBody {
  std::vector<GaussianTerm> gaussians;
  std::vector<Expr> weights;
};

struct KernelSpec {
  KernelBody body;
  std::map<std::size_t, KernelBody> overrides;  // by action index
  std::map<std::string, Expr> bindings;

  OutcomeDistribution evaluate(const std::vector<Action>& actions, std::size_t a,
                               std::span<const double> point) const;
};

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
  std::size_t count() const;
  double value(std::size_t i) const;
};

class QFamily {
 public:
  QFamily() = default;
  static QFamily from_points(std::string name, std::vector<Point> grid, KernelFn kernel, double radius);
  static QFamily from_box(std::string name, std::vector<GridAxis> axes, std::string predicate,
                          KernelSpec spec, std::vector<Action> actions,
                          std::optional<double> radius = std::nullopt);

  const std::string& name() const { return name_; }
  const std::vector<Point>& grid() const { return grid_; }
  const KernelFn& kernel_fn() const { return kernel_; }
  OutcomeDistribution kernel(std::size_t a, std::span<const double> point) const { return kernel_(a, point); }
  double default_radius() const { return radius_; }

  const std::vector<GridAxis>& axes() const { return axes_; }
  const std::string& predicate() const { return predicate_; }
  const std::optional<KernelSpec>& spec() const { return spec_; }
  bool radius_given() const { return radius_given_; }

  SubjectiveModel model_at(std::string id, std::vector<Point> points, std::size_t num_actions) const;

 private:
  std::string name_;
  std::vector<Point> grid_;
  KernelFn kernel_;
  double radius_ = 0.0;
  bool radius_given_ = false;
  std::vector<GridAxis> axes_;
  std::string predicate_;
  std::optional<KernelSpec> spec_;
};

}  // namespace misbelief
