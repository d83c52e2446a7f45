#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "misbelief/distribution.hpp"

namespace misbelief {

struct QuadNode {
  Outcome y;
  double weight;
};

// Gauss-Hermite nodes and weights for the weight function exp(-x^2).
struct GaussHermite {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussHermite& gauss_hermite(std::size_t n);

// Discrete rule approximating the distribution: atoms for categorical,
// scaled Gauss-Hermite for Gaussians, tensor products and weighted unions otherwise.
std::vector<QuadNode> quadrature_rule(const OutcomeDistribution& dist, std::size_t nodes_per_dim = 20);

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

// Interval covering a scalar real distribution: mean +- 10 sd, unioned over mixture components.
std::pair<double, double> bracket(const OutcomeDistribution& dist);

// E[f(Y)]: exact for categorical, adaptive Simpson on the bracket for scalar real
// outcomes, tensor Gauss-Hermite for vector outcomes.
double expectation(const OutcomeDistribution& dist, const std::function<double(const Outcome&)>& f);

}  // namespace misbelief
