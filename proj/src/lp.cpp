#include "misbelief/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace misbelief {

namespace {

constexpr double kPivotEps = 1e-12;
constexpr double kCostEps = 1e-11;

struct Tableau {
  std::vector<std::vector<double>> t;  // m rows, last column = rhs
  std::vector<std::size_t> basis;
  std::size_t cols = 0;                // variable columns (excluding rhs)

  void pivot(std::size_t r, std::size_t c) {
    double p = t[r][c];
    for (double& v : t[r]) v /= p;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == r) continue;
      double f = t[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  double objective(const std::vector<double>& cost) const {
    double z = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) z += cost[basis[i]] * t[i][cols];
    return z;
  }

  // returns false when unbounded
  bool optimize(const std::vector<double>& cost, const std::vector<bool>& allowed) {
    for (int iter = 0; iter < 100000; ++iter) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols && enter == cols; ++j) {
        if (!allowed[j]) continue;
        double r = cost[j];
        for (std::size_t i = 0; i < t.size(); ++i) r -= cost[basis[i]] * t[i][j];
        if (r > kCostEps) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = t.size();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i][enter] <= kPivotEps) continue;
        double ratio = t[i][cols] / t[i][enter];
        if (leave == t.size() || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == t.size()) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex iteration limit reached");
  }
};

}  // namespace

LpResult lp_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& a_ub,
                     const std::vector<double>& b_ub, const std::vector<std::vector<double>>& a_eq,
                     const std::vector<double>& b_eq) {
  const std::size_t n = c.size(), m1 = a_ub.size(), m2 = a_eq.size(), m = m1 + m2;
  if (b_ub.size() != m1 || b_eq.size() != m2) throw std::invalid_argument("LP right-hand side size mismatch");

  std::size_t n_art = m2;
  for (double b : b_ub)
    if (b < 0.0) ++n_art;
  const std::size_t slack0 = n, art0 = n + m1, cols = n + m1 + n_art;

  Tableau tab;
  tab.cols = cols;
  tab.t.assign(m, std::vector<double>(cols + 1, 0.0));
  tab.basis.assign(m, 0);
  std::size_t next_art = art0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = i < m1 ? a_ub[i] : a_eq[i - m1];
    double b = i < m1 ? b_ub[i] : b_eq[i - m1];
    if (row.size() != n) throw std::invalid_argument("LP row size mismatch");
    double sign = b < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = sign * row[j];
    if (i < m1) tab.t[i][slack0 + i] = sign;
    tab.t[i][cols] = sign * b;
    if (i < m1 && b >= 0.0) {
      tab.basis[i] = slack0 + i;
    } else {
      tab.t[i][next_art] = 1.0;
      tab.basis[i] = next_art++;
    }
  }

  std::vector<bool> allowed(cols, true);
  if (n_art > 0) {
    std::vector<double> cost1(cols, 0.0);
    for (std::size_t j = art0; j < cols; ++j) cost1[j] = -1.0;
    tab.optimize(cost1, allowed);
    if (tab.objective(cost1) < -1e-9) return LpResult{LpResult::Status::Infeasible, 0.0, {}};
    // drive zero-level artificials out of the basis where possible
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] < art0) continue;
      for (std::size_t j = 0; j < art0; ++j)
        if (std::abs(tab.t[i][j]) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
    }
    for (std::size_t j = art0; j < cols; ++j) allowed[j] = false;
  }

  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = c[j];
  if (!tab.optimize(cost, allowed)) return LpResult{LpResult::Status::Unbounded, 0.0, {}};

  LpResult res;
  res.status = LpResult::Status::Optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.t[i][cols];
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace misbelief
