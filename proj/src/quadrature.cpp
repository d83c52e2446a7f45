#include "misbelief/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace misbelief {

const GaussHermite& gauss_hermite(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Newton iteration on the orthonormal Hermite recurrence
  GaussHermite gh;
  gh.x.assign(n, 0.0);
  gh.w.assign(n, 0.0);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * gh.x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * gh.x[1];
    else
      z = 2.0 * z - gh.x[i - 2];
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    gh.x[i] = z;
    gh.x[n - 1 - i] = -z;
    gh.w[i] = 2.0 / (pp * pp);
    gh.w[n - 1 - i] = gh.w[i];
  }
  return cache.emplace(n, std::move(gh)).first->second;
}

namespace {

// scalar rule as (point, weight) pairs
std::vector<std::pair<double, double>> scalar_rule(const OutcomeDistribution& d, std::size_t n) {
  std::vector<std::pair<double, double>> out;
  if (d.kind() == OutcomeDistribution::Kind::Gaussian) {
    const auto& gh = gauss_hermite(n);
    double s = std::sqrt(2.0 * d.variance());
    for (std::size_t i = 0; i < n; ++i)
      out.emplace_back(d.mean() + s * gh.x[i], gh.w[i] / std::sqrt(std::numbers::pi));
  } else if (d.kind() == OutcomeDistribution::Kind::Mixture) {
    for (std::size_t k = 0; k < d.components().size(); ++k)
      for (auto [y, w] : scalar_rule(d.components()[k], n)) out.emplace_back(y, w * d.weights()[k]);
  } else if (d.kind() == OutcomeDistribution::Kind::Product) {
    return scalar_rule(d.components()[0], n);
  } else {
    throw std::invalid_argument("scalar rule requested for a categorical distribution");
  }
  return out;
}

}  // namespace

std::vector<QuadNode> quadrature_rule(const OutcomeDistribution& dist, std::size_t nodes_per_dim) {
  std::vector<QuadNode> out;
  switch (dist.kind()) {
    case OutcomeDistribution::Kind::Categorical:
      for (std::size_t i = 0; i < dist.probs().size(); ++i)
        out.push_back({Outcome::of_atom(i), dist.probs()[i]});
      return out;
    case OutcomeDistribution::Kind::Gaussian:
      for (auto [y, w] : scalar_rule(dist, nodes_per_dim)) out.push_back({Outcome::of_values({y}), w});
      return out;
    case OutcomeDistribution::Kind::Product: {
      out.push_back({Outcome::of_values({}), 1.0});
      for (const auto& c : dist.components()) {
        auto rule = scalar_rule(c, nodes_per_dim);
        std::vector<QuadNode> next;
        next.reserve(out.size() * rule.size());
        for (const auto& node : out)
          for (auto [y, w] : rule) {
            QuadNode q = node;
            q.y.values.push_back(y);
            q.weight *= w;
            next.push_back(std::move(q));
          }
        out = std::move(next);
      }
      return out;
    }
    case OutcomeDistribution::Kind::Mixture:
      for (std::size_t k = 0; k < dist.components().size(); ++k)
        for (auto node : quadrature_rule(dist.components()[k], nodes_per_dim)) {
          node.weight *= dist.weights()[k];
          out.push_back(std::move(node));
        }
      return out;
  }
  return out;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double diff = left + right - whole;
  double floor_tol = 1e-15 * (std::abs(left) + std::abs(right));
  if (depth <= 0 || !std::isfinite(diff) || std::abs(diff) <= 15.0 * std::max(tol, floor_tol)) return left + right + diff / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  // coarse panels first so narrow bumps are not skipped by the first estimate
  const int panels = 64;
  double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    double lo = a + i * h, hi = (i + 1 == panels) ? b : a + (i + 1) * h;
    double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / panels, max_depth);
  }
  return total;
}

std::pair<double, double> bracket(const OutcomeDistribution& dist) {
  switch (dist.kind()) {
    case OutcomeDistribution::Kind::Gaussian: {
      double s = std::sqrt(dist.variance());
      return {dist.mean() - 10.0 * s, dist.mean() + 10.0 * s};
    }
    case OutcomeDistribution::Kind::Mixture: {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& c : dist.components()) {
        auto [l, h] = bracket(c);
        lo = std::min(lo, l);
        hi = std::max(hi, h);
      }
      return {lo, hi};
    }
    case OutcomeDistribution::Kind::Product:
      if (dist.components().size() == 1) return bracket(dist.components()[0]);
      [[fallthrough]];
    default:
      throw std::invalid_argument("bracket needs a scalar real distribution");
  }
}

double expectation(const OutcomeDistribution& dist, const std::function<double(const Outcome&)>& f) {
  const auto& space = dist.space();
  if (space.kind == OutcomeSpace::Kind::Categorical) {
    double s = 0.0;
    for (const auto& node : quadrature_rule(dist)) s += node.weight * f(node.y);
    return s;
  }
  if (space.size == 1) {
    auto [lo, hi] = bracket(dist);
    Outcome y = Outcome::of_values({0.0});
    auto integrand = [&](double x) {
      y.values[0] = x;
      double p = std::exp(log_density(dist, y));
      return p == 0.0 ? 0.0 : p * f(y);
    };
    return adaptive_simpson(integrand, lo, hi, 1e-10);
  }
  std::size_t n = space.size <= 2 ? 40 : (space.size == 3 ? 16 : 8);
  double s = 0.0;
  for (const auto& node : quadrature_rule(dist, n)) s += node.weight * f(node.y);
  return s;
}

}  // namespace misbelief
