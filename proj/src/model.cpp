#include "misbelief/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "misbelief/quadrature.hpp"

namespace misbelief {

double log_sum_exp(std::span<const double> v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

namespace {

bool same_point(std::span<const double> a, std::span<const double> b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

std::string point_str(std::span<const double> p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s + ")";
}

}  // namespace

// ----- SubjectiveModel -----

SubjectiveModel::SubjectiveModel(std::string id, std::vector<Point> parameters,
                                 std::vector<std::vector<OutcomeDistribution>> kernel)
    : id_(std::move(id)), params_(std::move(parameters)), kernel_(std::move(kernel)) {
  if (params_.empty()) throw std::invalid_argument("model " + id_ + " needs at least one parameter");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].size() != params_[0].size())
      throw std::invalid_argument("model " + id_ + ": parameters must share one dimension");
    for (std::size_t j = 0; j < i; ++j)
      if (same_point(params_[i], params_[j], 1e-12))
        throw std::invalid_argument("model " + id_ + ": duplicate parameter " + point_str(params_[i]));
  }
  if (kernel_.empty()) throw std::invalid_argument("model " + id_ + " needs a kernel for every action");
  for (const auto& row : kernel_) {
    if (row.size() != params_.size())
      throw std::invalid_argument("model " + id_ + ": kernel needs one distribution per parameter");
    for (const auto& d : row)
      if (d.space() != kernel_[0][0].space())
        throw std::invalid_argument("model " + id_ + ": kernels must share one outcome space");
  }
}

SubjectiveModel SubjectiveModel::from_kernel_fn(std::string id, std::vector<Point> parameters,
                                                std::size_t num_actions, const KernelFn& fn) {
  std::vector<std::vector<OutcomeDistribution>> k(num_actions);
  for (std::size_t a = 0; a < num_actions; ++a)
    for (const auto& p : parameters) k[a].push_back(fn(a, p));
  return SubjectiveModel(std::move(id), std::move(parameters), std::move(k));
}

std::optional<std::size_t> SubjectiveModel::find_parameter(std::span<const double> point, double tol) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (same_point(params_[i], point, tol)) return i;
  return std::nullopt;
}

void SubjectiveModel::check_compatible(const DecisionProblem& problem) const {
  if (num_actions() != problem.num_actions())
    throw std::invalid_argument("model " + id_ + " does not cover every action");
  if (space() != problem.outcome_space)
    throw std::invalid_argument("model " + id_ + " lives on " + space().describe() + " but the problem uses " +
                                problem.outcome_space.describe());
}

SubjectiveModel SubjectiveModel::with_id(std::string id) const {
  SubjectiveModel m = *this;
  m.id_ = std::move(id);
  return m;
}

bool structurally_equal(const SubjectiveModel& a, const SubjectiveModel& b) {
  if (a.id() != b.id() || a.num_params() != b.num_params() || a.num_actions() != b.num_actions())
    return false;
  for (std::size_t w = 0; w < a.num_params(); ++w)
    if (!same_point(a.parameters()[w], b.parameters()[w], 0.0)) return false;
  for (std::size_t x = 0; x < a.num_actions(); ++x)
    for (std::size_t w = 0; w < a.num_params(); ++w)
      if (!structurally_equal(a.kernel(x, w), b.kernel(x, w), 0.0)) return false;
  return true;
}

// ----- Belief -----

Belief Belief::uniform(const SubjectiveModel& model) {
  return {model.id(), std::vector<double>(model.num_params(), 1.0 / model.num_params())};
}

Belief Belief::degenerate(const SubjectiveModel& model, std::size_t w) {
  Belief b{model.id(), std::vector<double>(model.num_params(), 0.0)};
  b.probs.at(w) = 1.0;
  return b;
}

Belief Belief::prior(const SubjectiveModel& model, std::vector<double> probs) {
  Belief b{model.id(), std::move(probs)};
  b.validate(model, true);
  return b;
}

void Belief::validate(const SubjectiveModel& model, bool require_full_support) const {
  if (probs.size() != model.num_params())
    throw std::invalid_argument("belief over " + model.id() + " needs " + std::to_string(model.num_params()) +
                                " entries");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("belief entries must be nonnegative");
    if (require_full_support && !(p > 0.0))
      throw std::invalid_argument("prior over " + model.id() + " must have full support");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("belief over " + model.id() + " must sum to 1");
}

double Belief::mass(std::span<const std::size_t> indices) const {
  double s = 0.0;
  for (auto i : indices) s += probs.at(i);
  return s;
}

// ----- updating and likelihoods -----

Belief bayes_update(const SubjectiveModel& model, const Belief& belief, std::size_t a, const Outcome& y) {
  std::vector<double> lp(model.num_params());
  for (std::size_t w = 0; w < lp.size(); ++w)
    lp[w] = belief.probs[w] > 0.0 ? std::log(belief.probs[w]) + log_density(model.kernel(a, w), y) : -INFINITY;
  double z = log_sum_exp(lp);
  Belief out{belief.model_id, std::vector<double>(lp.size())};
  for (std::size_t w = 0; w < lp.size(); ++w) out.probs[w] = std::exp(lp[w] - z);
  return out;
}

LikelihoodTracker::LikelihoodTracker(const SubjectiveModel& model, const Belief& prior)
    : model_(&model), id_(model.id()), log_prior_(model.num_params()), log_products_(model.num_params(), 0.0) {
  prior.validate(model, false);
  for (std::size_t w = 0; w < log_prior_.size(); ++w)
    log_prior_[w] = prior.probs[w] > 0.0 ? std::log(prior.probs[w]) : -INFINITY;
}

void LikelihoodTracker::observe(std::size_t a, const Outcome& y) {
  for (std::size_t w = 0; w < log_products_.size(); ++w) log_products_[w] += log_density(model_->kernel(a, w), y);
}

double LikelihoodTracker::log_likelihood() const {
  double m = -INFINITY;
  for (std::size_t w = 0; w < log_prior_.size(); ++w) m = std::max(m, log_prior_[w] + log_products_[w]);
  double s = 0.0;
  for (std::size_t w = 0; w < log_prior_.size(); ++w) s += std::exp(log_prior_[w] + log_products_[w] - m);
  return m + std::log(s);
}

void LikelihoodTracker::posterior_into(std::vector<double>& out) const {
  out.resize(log_prior_.size());
  double m = -INFINITY;
  for (std::size_t w = 0; w < out.size(); ++w) {
    out[w] = log_prior_[w] + log_products_[w];
    m = std::max(m, out[w]);
  }
  double s = 0.0;
  for (double& x : out) {
    x = std::exp(x - m);
    s += x;
  }
  for (double& x : out) x /= s;
}

void LikelihoodTracker::log_posterior_into(std::vector<double>& out) const {
  out.resize(log_prior_.size());
  for (std::size_t w = 0; w < out.size(); ++w) out[w] = log_prior_[w] + log_products_[w];
}

Belief LikelihoodTracker::posterior() const {
  Belief b{id_, {}};
  posterior_into(b.probs);
  return b;
}

double log_likelihood(const SubjectiveModel& model, const Belief& prior, const History& history) {
  LikelihoodTracker t(model, prior);
  for (const auto& obs : history) t.observe(obs.action, obs.y);
  return t.log_likelihood();
}

double log_likelihood_recursive(const SubjectiveModel& model, const Belief& prior, const History& history) {
  Belief pi = prior;
  double ll = 0.0;
  std::vector<double> terms(model.num_params());
  for (const auto& obs : history) {
    for (std::size_t w = 0; w < terms.size(); ++w)
      terms[w] = pi.probs[w] > 0.0 ? std::log(pi.probs[w]) + log_density(model.kernel(obs.action, w), obs.y)
                                   : -INFINITY;
    ll += log_sum_exp(terms);
    pi = bayes_update(model, pi, obs.action, obs.y);
  }
  return ll;
}

// ----- divergences -----

namespace {

double numeric_kl(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  double v = expectation(p, [&](const Outcome& y) { return log_density(p, y) - log_density(q, y); });
  return std::max(0.0, v);
}

}  // namespace

double kl_divergence(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (p.space() != q.space())
    throw std::invalid_argument("KL divergence between different outcome spaces");
  using K = OutcomeDistribution::Kind;
  if (p.space().kind == OutcomeSpace::Kind::Categorical) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.space().size; ++i) {
      Outcome y = Outcome::of_atom(i);
      double lp = log_density(p, y);
      s += std::exp(lp) * (lp - log_density(q, y));
    }
    return std::max(0.0, s);
  }
  if (p.kind() == K::Gaussian && q.kind() == K::Gaussian) {
    double dm = p.mean() - q.mean();
    return 0.5 * (std::log(q.variance() / p.variance()) + (p.variance() + dm * dm) / q.variance() - 1.0);
  }
  if (p.kind() == K::Product && q.kind() == K::Product) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.components().size(); ++i)
      s += kl_divergence(p.components()[i], q.components()[i]);
    return s;
  }
  return numeric_kl(p, q);
}

bool same_distribution(const OutcomeDistribution& a, const OutcomeDistribution& b) {
  if (structurally_equal(a, b)) return true;
  if (a.kind() == b.kind() && a.kind() != OutcomeDistribution::Kind::Product &&
      a.kind() != OutcomeDistribution::Kind::Mixture)
    return false;
  if (a.space() != b.space()) return false;
  return kl_divergence(a, b) < 1e-10;
}

std::vector<std::vector<double>> kl_matrix(const DecisionProblem& problem, const SubjectiveModel& model) {
  model.check_compatible(problem);
  std::vector<std::vector<double>> k(problem.num_actions(), std::vector<double>(model.num_params()));
  for (std::size_t a = 0; a < problem.num_actions(); ++a)
    for (std::size_t w = 0; w < model.num_params(); ++w)
      k[a][w] = kl_divergence(problem.true_dgp[a], model.kernel(a, w));
  return k;
}

double weighted_kl(const DecisionProblem& problem, const SubjectiveModel& model, std::span<const double> sigma,
                   std::size_t w) {
  if (sigma.size() != problem.num_actions()) throw std::invalid_argument("strategy size mismatch");
  double s = 0.0;
  for (std::size_t a = 0; a < sigma.size(); ++a)
    if (sigma[a] != 0.0) s += sigma[a] * kl_divergence(problem.true_dgp[a], model.kernel(a, w));
  return s;
}

std::vector<std::size_t> kl_minimizers(const std::vector<std::vector<double>>& kl, std::span<const double> sigma,
                                       double tol) {
  std::size_t n = kl.at(0).size();
  std::vector<double> v(n, 0.0);
  for (std::size_t a = 0; a < sigma.size(); ++a)
    if (sigma[a] != 0.0)
      for (std::size_t w = 0; w < n; ++w) v[w] += sigma[a] * kl[a][w];
  double m = *std::min_element(v.begin(), v.end());
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < n; ++w)
    if (v[w] <= m + tol) out.push_back(w);
  return out;
}

std::vector<std::size_t> kl_minimizers(const DecisionProblem& problem, const SubjectiveModel& model,
                                       std::span<const double> sigma, double tol) {
  if (sigma.size() != problem.num_actions()) throw std::invalid_argument("strategy size mismatch");
  return kl_minimizers(kl_matrix(problem, model), sigma, tol);
}

// ----- dominance moments -----

namespace {

MomentResult from_log(double lv) {
  MomentResult r;
  r.log_value = lv;
  r.value = std::exp(lv);
  r.diverged = !std::isfinite(lv);
  return r;
}

MomentResult diverged_moment() {
  MomentResult r;
  r.value = INFINITY;
  r.log_value = INFINITY;
  r.diverged = true;
  return r;
}

MomentResult numeric_moment(const OutcomeDistribution& truth, const OutcomeDistribution& qp,
                            const OutcomeDistribution& q, double d) {
  auto integrand = [&](const Outcome& y) { return std::exp(d * (log_density(qp, y) - log_density(q, y))); };
  if (truth.space().size != 1) return from_log(std::log(expectation(truth, integrand)));
  auto [lo, hi] = bracket(truth);
  Outcome y = Outcome::of_values({0.0});
  auto f = [&](double x) {
    y.values[0] = x;
    return std::exp(log_density(truth, y) + d * (log_density(qp, y) - log_density(q, y)));
  };
  double inner = adaptive_simpson(f, lo, hi, 1e-10);
  double w = hi - lo;
  double outer = inner + adaptive_simpson(f, lo - w, lo, 1e-10) + adaptive_simpson(f, hi, hi + w, 1e-10);
  if (!std::isfinite(outer) || std::abs(outer - inner) > 1e-6 * std::max(1.0, std::abs(inner)))
    return diverged_moment();
  return from_log(std::log(inner));
}

}  // namespace

MomentResult dominance_moment(const OutcomeDistribution& truth, const OutcomeDistribution& qp,
                              const OutcomeDistribution& q, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("moment order d must be positive");
  if (truth.space() != qp.space() || truth.space() != q.space())
    throw std::invalid_argument("dominance moment across different outcome spaces");
  using K = OutcomeDistribution::Kind;
  if (truth.space().kind == OutcomeSpace::Kind::Categorical) {
    double s = 0.0;
    for (std::size_t i = 0; i < truth.space().size; ++i) {
      Outcome y = Outcome::of_atom(i);
      s += std::exp(log_density(truth, y) + d * (log_density(qp, y) - log_density(q, y)));
    }
    return from_log(std::log(s));
  }
  if (truth.kind() == K::Gaussian && qp.kind() == K::Gaussian && q.kind() == K::Gaussian) {
    double m = q.mean(), v = q.variance(), mp = qp.mean(), vp = qp.variance();
    double mu = truth.mean(), s = truth.variance();
    // d * ln(q'/q)(y) = A y^2 + B y + C
    double A = d * (0.5 / v - 0.5 / vp);
    double B = d * (mp / vp - m / v);
    double C = d * (-0.5 * std::log(vp / v) - mp * mp / (2.0 * vp) + m * m / (2.0 * v));
    double k = 1.0 - 2.0 * A * s;
    if (k <= 0.0) return diverged_moment();
    return from_log(C - 0.5 * std::log(k) + (A * mu * mu + B * mu + 0.5 * B * B * s) / k);
  }
  if (truth.kind() == K::Product && qp.kind() == K::Product && q.kind() == K::Product) {
    double lv = 0.0;
    for (std::size_t i = 0; i < truth.components().size(); ++i) {
      auto r = dominance_moment(truth.components()[i], qp.components()[i], q.components()[i], d);
      if (r.diverged) return diverged_moment();
      lv += r.log_value;
    }
    return from_log(lv);
  }
  return numeric_moment(truth, qp, q, d);
}

MomentResult dominance_moment(const DecisionProblem& problem, const KernelFn& kernel, std::size_t a,
                              std::span<const double> w_prime, std::span<const double> w, double d) {
  return dominance_moment(problem.true_dgp.at(a), kernel(a, w_prime), kernel(a, w), d);
}

double log_ratio_mean(const DecisionProblem& problem, const KernelFn& kernel, std::size_t a,
                      std::span<const double> w_prime, std::span<const double> w) {
  const auto& truth = problem.true_dgp.at(a);
  return kl_divergence(truth, kernel(a, w)) - kl_divergence(truth, kernel(a, w_prime));
}

// ----- distances -----

double prokhorov_categorical(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("Prokhorov distance needs a shared atom set");
  std::size_t n = p.size();
  if (n > 16) throw std::invalid_argument("Prokhorov brute force limited to 16 atoms");
  // with the discrete metric, A^eps = A for eps < 1 and the whole space otherwise
  double worst = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) diff += p[i] - q[i];
    worst = std::max(worst, diff);
  }
  return std::min(1.0, worst);
}

double prokhorov_categorical(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (p.kind() != OutcomeDistribution::Kind::Categorical || q.kind() != OutcomeDistribution::Kind::Categorical)
    throw std::invalid_argument("Prokhorov distance implemented for categorical distributions only");
  return prokhorov_categorical(p.probs(), q.probs());
}

double distance_to_set(std::span<const double> x, const std::vector<Point>& set) {
  if (set.empty()) throw std::invalid_argument("distance to an empty set");
  double best = INFINITY;
  for (const auto& y : set) {
    if (y.size() != x.size()) throw std::invalid_argument("point dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

double hausdorff_params(const std::vector<Point>& a, const std::vector<Point>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Hausdorff distance of an empty set");
  double h = 0.0;
  for (const auto& x : a) h = std::max(h, distance_to_set(x, b));
  for (const auto& y : b) h = std::max(h, distance_to_set(y, a));
  return h;
}

// ----- competing-model constructors -----

SubjectiveModel convex_mix_model(const SubjectiveModel& model, const DecisionProblem& problem, double eps,
                                 std::string id) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("mixing weight must lie in (0,1]");
  model.check_compatible(problem);
  std::vector<std::vector<OutcomeDistribution>> k(model.num_actions());
  for (std::size_t a = 0; a < model.num_actions(); ++a)
    for (std::size_t w = 0; w < model.num_params(); ++w) {
      if (eps == 1.0)
        k[a].push_back(problem.true_dgp[a]);
      else
        k[a].push_back(OutcomeDistribution::mixture({1.0 - eps, eps}, {model.kernel(a, w), problem.true_dgp[a]}));
    }
  if (id.empty()) id = model.id() + "_mix";
  return SubjectiveModel(std::move(id), model.parameters(), std::move(k));
}

SubjectiveModel augment_model(const SubjectiveModel& model, const std::vector<ExtraParameter>& extra,
                              std::string id) {
  auto params = model.parameters();
  auto k = model.kernel_table();
  for (const auto& e : extra) {
    if (model.find_parameter(e.point))
      throw std::invalid_argument("augment_model: point " + point_str(e.point) + " already present");
    if (e.kernel.size() != model.num_actions())
      throw std::invalid_argument("augment_model: extra parameter needs one distribution per action");
    params.push_back(e.point);
    for (std::size_t a = 0; a < k.size(); ++a) k[a].push_back(e.kernel[a]);
  }
  if (id.empty()) id = model.id();
  return SubjectiveModel(std::move(id), std::move(params), std::move(k));
}

SubjectiveModel restrict_model(const SubjectiveModel& model, std::span<const std::size_t> keep, std::string id) {
  std::vector<Point> params;
  std::vector<std::vector<OutcomeDistribution>> k(model.num_actions());
  for (auto w : keep) {
    params.push_back(model.parameters().at(w));
    for (std::size_t a = 0; a < k.size(); ++a) k[a].push_back(model.kernel(a, w));
  }
  if (id.empty()) id = model.id();
  return SubjectiveModel(std::move(id), std::move(params), std::move(k));
}

// ----- families -----

OutcomeDistribution KernelSpec::evaluate(const std::vector<Action>& actions, std::size_t a,
                                         std::span<const double> point) const {
  auto it = overrides.find(a);
  const KernelBody& b = it != overrides.end() ? it->second : body;
  ExprContext ctx{actions.at(a).value, static_cast<double>(a), point, &bindings};
  if (!b.weights.empty()) {
    std::vector<double> w;
    double s = 0.0;
    for (const auto& e : b.weights) {
      w.push_back(e.eval(ctx));
      s += w.back();
    }
    for (double& x : w) x /= s;
    return OutcomeDistribution::categorical(std::move(w));
  }
  if (b.gaussians.empty()) throw std::invalid_argument("kernel body has neither gaussians nor weights");
  std::vector<OutcomeDistribution> comps;
  for (const auto& g : b.gaussians) comps.push_back(OutcomeDistribution::gaussian(g.mean.eval(ctx), g.variance.eval(ctx)));
  if (comps.size() == 1) return comps[0];
  return OutcomeDistribution::product(std::move(comps));
}

std::size_t GridAxis::count() const {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid axis needs lo <= hi and a positive step");
  double n = std::round((hi - lo) / step);
  if (std::abs(n * step - (hi - lo)) > 1e-9 * std::max(1.0, hi - lo))
    throw std::invalid_argument("grid axis step does not divide its range");
  return static_cast<std::size_t>(n) + 1;
}

double GridAxis::value(std::size_t i) const {
  std::size_t n = count() - 1;
  if (n == 0) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
}

QFamily QFamily::from_points(std::string name, std::vector<Point> grid, KernelFn kernel, double radius) {
  if (grid.empty()) throw std::invalid_argument("family grid is empty");
  QFamily f;
  f.name_ = std::move(name);
  f.grid_ = std::move(grid);
  f.kernel_ = std::move(kernel);
  f.radius_ = radius;
  f.radius_given_ = true;
  return f;
}

QFamily QFamily::from_box(std::string name, std::vector<GridAxis> axes, std::string predicate, KernelSpec spec,
                          std::vector<Action> actions, std::optional<double> radius) {
  if (axes.empty()) throw std::invalid_argument("family box needs at least one axis");
  QFamily f;
  f.name_ = std::move(name);
  f.axes_ = std::move(axes);
  f.predicate_ = std::move(predicate);
  Expr pred;
  if (!f.predicate_.empty()) pred = Expr::parse(f.predicate_);
  std::vector<std::size_t> idx(f.axes_.size(), 0);
  std::vector<std::size_t> counts;
  double max_step = 0.0;
  for (const auto& ax : f.axes_) {
    counts.push_back(ax.count());
    max_step = std::max(max_step, ax.step);
  }
  for (bool done = false; !done;) {
    Point p(f.axes_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = f.axes_[i].value(idx[i]);
    ExprContext ctx{0.0, 0.0, p, &spec.bindings};
    if (pred.empty() || pred.eval(ctx) != 0.0) f.grid_.push_back(p);
    std::size_t k = idx.size();
    for (;;) {
      if (k == 0) {
        done = true;
        break;
      }
      --k;
      if (++idx[k] < counts[k]) break;
      idx[k] = 0;
    }
  }
  if (f.grid_.empty()) throw std::invalid_argument("family predicate excludes every grid point");
  f.radius_ = radius.value_or(2.0 * max_step);
  f.radius_given_ = radius.has_value();
  f.spec_ = spec;
  f.kernel_ = [spec = std::move(spec), actions = std::move(actions)](std::size_t a, std::span<const double> p) {
    return spec.evaluate(actions, a, p);
  };
  return f;
}

SubjectiveModel QFamily::model_at(std::string id, std::vector<Point> points, std::size_t num_actions) const {
  return SubjectiveModel::from_kernel_fn(std::move(id), std::move(points), num_actions, kernel_);
}

}  // namespace misbelief
