#pragma once

#include <vector>

namespace misbelief {

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  bool optimal() const { return status == Status::Optimal; }
};

// maximize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
// Two-phase dense tableau simplex with Bland's rule.
LpResult lp_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& a_ub,
                     const std::vector<double>& b_ub, const std::vector<std::vector<double>>& a_eq,
                     const std::vector<double>& b_eq);

}  // namespace misbelief
