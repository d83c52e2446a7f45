#include "misbelief/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "misbelief/lp.hpp"
#include "misbelief/quadrature.hpp"

namespace misbelief {

std::vector<std::vector<double>> subjective_eu(const DecisionProblem& problem, const SubjectiveModel& model) {
  model.check_compatible(problem);
  std::vector<std::vector<double>> eu(problem.num_actions(), std::vector<double>(model.num_params()));
  for (std::size_t a = 0; a < problem.num_actions(); ++a)
    for (std::size_t w = 0; w < model.num_params(); ++w) eu[a][w] = problem.utility.expected(a, model.kernel(a, w));
  return eu;
}

std::vector<std::size_t> best_set(const std::vector<std::vector<double>>& eu, std::span<const double> belief,
                                  double tol) {
  std::vector<double> v(eu.size(), 0.0);
  for (std::size_t a = 0; a < eu.size(); ++a)
    for (std::size_t w = 0; w < belief.size(); ++w)
      if (belief[w] != 0.0) v[a] += belief[w] * eu[a][w];
  double m = *std::max_element(v.begin(), v.end());
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < v.size(); ++a)
    if (v[a] >= m - tol) out.push_back(a);
  return out;
}

std::vector<std::size_t> myopic_best_set(const DecisionProblem& problem, const SubjectiveModel& model,
                                         const Belief& belief, double tol) {
  belief.validate(model, false);
  return best_set(subjective_eu(problem, model), belief.probs, tol);
}

// ----- simplex grid -----

SimplexGrid::SimplexGrid(std::size_t k, std::size_t resolution) : k_(k), r_(resolution) {
  if (k == 0) throw std::invalid_argument("simplex grid needs at least one vertex");
  count_.assign(r_ + 1, std::vector<std::size_t>(k_ + 1, 0));
  for (std::size_t r = 0; r <= r_; ++r) {
    count_[r][1] = 1;
    for (std::size_t j = 2; j <= k_; ++j)
      for (std::size_t v = 0; v <= r; ++v) count_[r][j] += count_[r - v][j - 1];
  }
  std::vector<int> c(k_, 0);
  // lexicographic order: first coordinate slowest
  auto rec = [&](auto&& self, std::size_t i, int rem) -> void {
    if (i + 1 == k_) {
      c[i] = rem;
      points_.push_back(c);
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      c[i] = v;
      self(self, i + 1, rem - v);
    }
  };
  rec(rec, 0, static_cast<int>(r_));
}

std::vector<double> SimplexGrid::belief(std::size_t i) const {
  std::vector<double> b(k_);
  for (std::size_t j = 0; j < k_; ++j) b[j] = static_cast<double>(points_[i][j]) / static_cast<double>(r_);
  return b;
}

std::size_t SimplexGrid::rank(std::span<const int> c) const {
  std::size_t idx = 0;
  int rem = static_cast<int>(r_);
  for (std::size_t i = 0; i + 1 < k_; ++i) {
    for (int v = 0; v < c[i]; ++v) idx += count_[rem - v][k_ - i - 1];
    rem -= c[i];
  }
  return idx;
}

void SimplexGrid::interpolate(std::span<const double> pi, std::vector<std::pair<std::size_t, double>>& out) const {
  out.clear();
  if (k_ == 1) {
    out.emplace_back(0, 1.0);
    return;
  }
  const double R = static_cast<double>(r_);
  // cumulative coordinates z_j = R * sum_{i >= j} pi_i, z_0 = R
  std::vector<double> z(k_);
  double tail = 0.0;
  for (std::size_t j = k_; j-- > 1;) {
    tail += std::max(0.0, pi[j]);
    z[j] = R * tail;
  }
  z[0] = R;
  for (std::size_t j = 1; j < k_; ++j) z[j] = std::clamp(z[j], 0.0, z[j - 1]);
  std::vector<int> base(k_);
  std::vector<double> frac(k_, 0.0);
  base[0] = static_cast<int>(r_);
  for (std::size_t j = 1; j < k_; ++j) {
    double f = std::floor(z[j]);
    base[j] = static_cast<int>(f);
    frac[j] = z[j] - f;
  }
  std::vector<std::size_t> order;
  for (std::size_t j = 1; j < k_; ++j) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return frac[x] > frac[y]; });

  std::vector<int> v = base;
  std::vector<int> comp(k_);
  auto emit = [&](double w) {
    if (w <= 0.0) return;
    for (std::size_t j = 0; j < k_; ++j) comp[j] = v[j] - (j + 1 < k_ ? v[j + 1] : 0);
    out.emplace_back(rank(comp), w);
  };
  emit(1.0 - frac[order[0]]);
  for (std::size_t m = 0; m < order.size(); ++m) {
    v[order[m]] += 1;
    double next = m + 1 < order.size() ? frac[order[m + 1]] : 0.0;
    emit(frac[order[m]] - next);
  }
}

// ----- policies -----

struct Policy::DpData {
  SimplexGrid grid;
  std::vector<double> values;
  std::vector<std::size_t> actions;
  std::vector<double> residuals;
  // nodes[a][w]: quadrature nodes of q(.|a,w), each with the log-density of every parameter
  struct Node {
    double weight;
    std::vector<double> loglik;
  };
  std::vector<std::vector<std::vector<Node>>> nodes;
};

namespace {

std::size_t argmax_lowest(const std::vector<double>& q, double tol = 1e-9) {
  double m = *std::max_element(q.begin(), q.end());
  for (std::size_t a = 0; a < q.size(); ++a)
    if (q[a] >= m - tol) return a;
  return 0;
}

// expected continuation value E[V(B(a, y, pi))] under the subjective predictive
double continuation(const Policy::DpData& dp, const SimplexGrid& grid, const std::vector<double>& values,
                    std::size_t a, std::span<const double> pi,
                    std::vector<std::pair<std::size_t, double>>& scratch, std::vector<double>& post) {
  double total = 0.0;
  const std::size_t k = pi.size();
  post.resize(k);
  for (std::size_t w = 0; w < k; ++w) {
    if (pi[w] <= 0.0) continue;
    for (const auto& node : dp.nodes[a][w]) {
      double m = -INFINITY;
      for (std::size_t j = 0; j < k; ++j) {
        post[j] = pi[j] > 0.0 ? std::log(pi[j]) + node.loglik[j] : -INFINITY;
        m = std::max(m, post[j]);
      }
      double s = 0.0;
      for (double& x : post) {
        x = std::exp(x - m);
        s += x;
      }
      for (double& x : post) x /= s;
      grid.interpolate(post, scratch);
      double v = 0.0;
      for (auto [idx, wt] : scratch) v += wt * values[idx];
      total += pi[w] * node.weight * v;
    }
  }
  return total;
}

}  // namespace

const SimplexGrid* Policy::grid() const { return dp_ ? &dp_->grid : nullptr; }

const std::vector<double>& Policy::value_table() const {
  if (!dp_) throw std::logic_error("myopic policy has no value table");
  return dp_->values;
}

const std::vector<std::size_t>& Policy::action_table() const {
  if (!dp_) throw std::logic_error("myopic policy has no action table");
  return dp_->actions;
}

const std::vector<double>& Policy::residuals() const {
  if (!dp_) throw std::logic_error("myopic policy has no residual history");
  return dp_->residuals;
}

std::vector<double> Policy::q_values(std::span<const double> belief) const {
  std::vector<double> q(eu_.size(), 0.0);
  for (std::size_t a = 0; a < eu_.size(); ++a)
    for (std::size_t w = 0; w < belief.size(); ++w)
      if (belief[w] != 0.0) q[a] += belief[w] * eu_[a][w];
  if (dp_ && discount_ > 0.0) {
    std::vector<std::pair<std::size_t, double>> scratch;
    std::vector<double> post;
    for (std::size_t a = 0; a < q.size(); ++a)
      q[a] += discount_ * continuation(*dp_, dp_->grid, dp_->values, a, belief, scratch, post);
  }
  return q;
}

std::size_t Policy::action(std::span<const double> belief) const {
  if (dp_) return argmax_lowest(q_values(belief));
  std::vector<double> lw(belief.size());
  for (std::size_t w = 0; w < lw.size(); ++w) lw[w] = belief[w] > 0.0 ? std::log(belief[w]) : -INFINITY;
  return action_log(lw);
}

std::size_t Policy::action_log(std::span<const double> log_weights) const {
  if (dp_) {
    std::vector<double> b(log_weights.begin(), log_weights.end());
    double m = *std::max_element(b.begin(), b.end());
    double s = 0.0;
    for (double& x : b) s += (x = std::exp(x - m));
    for (double& x : b) x /= s;
    return argmax_lowest(q_values(b));
  }
  std::size_t best = 0;
  for (std::size_t a = 1; a < eu_.size(); ++a) {
    // sign of sum_w pi_w (eu[a][w] - eu[best][w]), scaled by the largest weight that matters
    double top = -INFINITY;
    for (std::size_t w = 0; w < log_weights.size(); ++w) {
      double d = eu_[a][w] - eu_[best][w];
      if (std::abs(d) > 1e-12 * (std::abs(eu_[a][w]) + std::abs(eu_[best][w])) && log_weights[w] > top)
        top = log_weights[w];
    }
    if (top == -INFINITY) continue;
    double diff = 0.0, mag = 0.0;
    for (std::size_t w = 0; w < log_weights.size(); ++w) {
      double d = eu_[a][w] - eu_[best][w];
      if (std::abs(d) > 1e-12 * (std::abs(eu_[a][w]) + std::abs(eu_[best][w])) && log_weights[w] > -INFINITY) {
        double wt = std::exp(log_weights[w] - top);
        diff += wt * d;
        mag += wt * (std::abs(eu_[a][w]) + std::abs(eu_[best][w]));
      }
    }
    if (diff > 1e-12 * mag) best = a;
  }
  return best;
}

double Policy::value(std::span<const double> belief) const {
  auto q = q_values(belief);
  return *std::max_element(q.begin(), q.end());
}

Policy solve_policy(const DecisionProblem& problem, const SubjectiveModel& model, const PolicySpec& spec) {
  Policy p;
  p.model_id_ = model.id();
  p.mode_ = spec.mode;
  p.eu_ = subjective_eu(problem, model);
  p.discount_ = spec.discount.value_or(problem.discount);
  if (!(p.discount_ >= 0.0 && p.discount_ < 1.0)) throw std::invalid_argument("discount must lie in [0,1)");
  if (spec.mode == PolicySpec::Mode::Myopic) {
    p.discount_ = 0.0;
    return p;
  }
  if (spec.resolution < 2) throw std::invalid_argument("GridDP resolution must be at least 2");
  p.resolution_ = spec.resolution;

  const std::size_t k = model.num_params(), na = problem.num_actions();
  auto dp = std::make_shared<Policy::DpData>(Policy::DpData{SimplexGrid(k, spec.resolution), {}, {}, {}, {}});
  dp->nodes.resize(na);
  for (std::size_t a = 0; a < na; ++a) {
    dp->nodes[a].resize(k);
    for (std::size_t w = 0; w < k; ++w)
      for (const auto& qn : quadrature_rule(model.kernel(a, w), spec.quadrature_nodes)) {
        Policy::DpData::Node node{qn.weight, std::vector<double>(k)};
        for (std::size_t j = 0; j < k; ++j) node.loglik[j] = log_density(model.kernel(a, j), qn.y);
        dp->nodes[a][w].push_back(std::move(node));
      }
  }

  const auto& grid = dp->grid;
  const std::size_t g = grid.size();
  std::vector<std::vector<double>> reward(g, std::vector<double>(na, 0.0));
  // sparse transition rows: trans[i][a] = list of (grid index, probability)
  std::vector<std::vector<std::vector<std::pair<std::size_t, double>>>> trans(
      g, std::vector<std::vector<std::pair<std::size_t, double>>>(na));
  std::vector<std::pair<std::size_t, double>> scratch;
  std::vector<double> post(k), dense(g, 0.0);
  std::vector<std::size_t> touched;
  for (std::size_t i = 0; i < g; ++i) {
    auto pi = grid.belief(i);
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t w = 0; w < k; ++w) reward[i][a] += pi[w] * p.eu_[a][w];
      if (p.discount_ == 0.0) continue;
      touched.clear();
      for (std::size_t w = 0; w < k; ++w) {
        if (pi[w] <= 0.0) continue;
        for (const auto& node : dp->nodes[a][w]) {
          double m = -INFINITY;
          for (std::size_t j = 0; j < k; ++j) {
            post[j] = pi[j] > 0.0 ? std::log(pi[j]) + node.loglik[j] : -INFINITY;
            m = std::max(m, post[j]);
          }
          double s = 0.0;
          for (double& x : post) {
            x = std::exp(x - m);
            s += x;
          }
          for (double& x : post) x /= s;
          grid.interpolate(post, scratch);
          for (auto [idx, wt] : scratch) {
            if (dense[idx] == 0.0) touched.push_back(idx);
            dense[idx] += pi[w] * node.weight * wt;
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      for (auto idx : touched) {
        trans[i][a].emplace_back(idx, dense[idx]);
        dense[idx] = 0.0;
      }
    }
  }

  std::vector<double> v(g, 0.0), next(g, 0.0), q(na);
  dp->actions.assign(g, 0);
  for (int sweep = 0; sweep < 1000000; ++sweep) {
    double res = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t a = 0; a < na; ++a) {
        double c = 0.0;
        for (auto [idx, pr] : trans[i][a]) c += pr * v[idx];
        q[a] = reward[i][a] + p.discount_ * c;
      }
      dp->actions[i] = argmax_lowest(q);
      next[i] = *std::max_element(q.begin(), q.end());
      res = std::max(res, std::abs(next[i] - v[i]));
    }
    v.swap(next);
    dp->residuals.push_back(res);
    if (p.discount_ == 0.0 || res < 1e-8) break;
  }
  dp->values = std::move(v);
  p.dp_ = std::move(dp);
  return p;
}

// ----- optimality certificates -----

OptimalityCertificate support_margin(const std::vector<std::vector<double>>& eu,
                                     std::span<const std::size_t> support, std::span<const std::size_t> subset) {
  if (subset.empty()) throw std::invalid_argument("parameter subset must be nonempty");
  if (support.empty()) throw std::invalid_argument("support must be nonempty");
  const std::size_t na = eu.size(), k = subset.size();
  OptimalityCertificate cert;
  std::vector<bool> in_support(na, false);
  for (auto a : support) in_support.at(a) = true;
  bool others = false;
  for (auto a : support)
    for (std::size_t b = 0; b < na; ++b)
      if (b != a) others = true;
  if (!others) {
    cert.margin = std::numeric_limits<double>::infinity();
    cert.belief.assign(k, 1.0 / k);
    return cert;
  }
  // variables: pi (k), t+, t-; maximize t+ - t-
  std::vector<double> c(k + 2, 0.0);
  c[k] = 1.0;
  c[k + 1] = -1.0;
  std::vector<std::vector<double>> a_ub;
  std::vector<double> b_ub;
  for (auto a : support)
    for (std::size_t b = 0; b < na; ++b) {
      if (b == a) continue;
      std::vector<double> row(k + 2, 0.0);
      for (std::size_t j = 0; j < k; ++j) row[j] = eu[b][subset[j]] - eu[a][subset[j]];
      row[k] = 1.0;
      row[k + 1] = -1.0;
      a_ub.push_back(std::move(row));
      b_ub.push_back(0.0);
    }
  std::vector<double> eq(k + 2, 0.0);
  for (std::size_t j = 0; j < k; ++j) eq[j] = 1.0;
  auto res = lp_maximize(c, a_ub, b_ub, {eq}, {1.0});
  if (!res.optimal()) throw std::runtime_error("support margin LP failed");
  cert.margin = res.objective;
  cert.belief.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(k));
  double s = 0.0;
  for (double& x : cert.belief) {
    x = std::max(0.0, x);
    s += x;
  }
  for (double& x : cert.belief) x /= s;
  return cert;
}

bool action_optimal_on_face(const DecisionProblem& problem, const SubjectiveModel& model, std::size_t a,
                            std::span<const std::size_t> subset) {
  if (subset.empty()) throw std::invalid_argument("parameter subset must be nonempty");
  auto eu = subjective_eu(problem, model);
  for (auto w : subset)
    for (std::size_t b = 0; b < eu.size(); ++b)
      if (eu[a][w] - eu[b][w] < -1e-9) return false;
  return true;
}

bool action_somewhere_optimal(const DecisionProblem& problem, const SubjectiveModel& model, std::size_t a,
                              std::span<const std::size_t> subset) {
  std::size_t sup[1] = {a};
  return support_margin(subjective_eu(problem, model), sup, subset).margin >= -1e-9;
}

bool action_somewhere_optimal_grid(const DecisionProblem& problem, const SubjectiveModel& model, std::size_t a,
                                   std::span<const std::size_t> subset, std::size_t resolution) {
  auto eu = subjective_eu(problem, model);
  SimplexGrid grid(subset.size(), resolution);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto pi = grid.belief(i);
    double worst = INFINITY;
    for (std::size_t b = 0; b < eu.size(); ++b) {
      double d = 0.0;
      for (std::size_t j = 0; j < pi.size(); ++j) d += pi[j] * (eu[a][subset[j]] - eu[b][subset[j]]);
      worst = std::min(worst, d);
    }
    if (worst >= -1e-9) return true;
  }
  return false;
}

}  // namespace misbelief
