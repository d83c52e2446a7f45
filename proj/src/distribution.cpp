#include "misbelief/distribution.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace misbelief {

namespace {

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double gaussian_log_density(double mean, double var, double y) {
  double z = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + z * z / var);
}

// log density of a scalar real distribution at y
double scalar_log_density(const OutcomeDistribution& d, double y) {
  switch (d.kind()) {
    case OutcomeDistribution::Kind::Gaussian:
      return gaussian_log_density(d.mean(), d.variance(), y);
    case OutcomeDistribution::Kind::Mixture: {
      std::vector<double> terms(d.components().size());
      for (std::size_t k = 0; k < terms.size(); ++k)
        terms[k] = std::log(d.weights()[k]) + scalar_log_density(d.components()[k], y);
      return log_sum_exp(terms);
    }
    case OutcomeDistribution::Kind::Product:
      return scalar_log_density(d.components()[0], y);
    default:
      throw std::invalid_argument("categorical component inside a real outcome");
  }
}

}  // namespace

bool OutcomeSpace::contains(const Outcome& y) const {
  if (kind == Kind::Categorical) return y.is_atom() && y.atom < size;
  return y.values.size() == size;
}

std::string OutcomeSpace::describe() const {
  return (kind == Kind::Categorical ? "categorical(" : "real(") + std::to_string(size) + ")";
}

OutcomeDistribution OutcomeDistribution::categorical(std::vector<double> probs) {
  if (probs.empty()) throw std::invalid_argument("categorical distribution needs at least one atom");
  for (double p : probs)
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("categorical probabilities must be strictly positive");
  if (std::abs(sum_of(probs) - 1.0) > 1e-12)
    throw std::invalid_argument("categorical probabilities must sum to 1");
  OutcomeDistribution d;
  d.kind_ = Kind::Categorical;
  d.space_ = OutcomeSpace::categorical(probs.size());
  d.p_ = std::move(probs);
  return d;
}

OutcomeDistribution OutcomeDistribution::gaussian(double mean, double variance) {
  if (!std::isfinite(mean)) throw std::invalid_argument("gaussian mean must be finite");
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("gaussian variance must be positive");
  OutcomeDistribution d;
  d.kind_ = Kind::Gaussian;
  d.mean_ = mean;
  d.var_ = variance;
  d.space_ = OutcomeSpace::real(1);
  return d;
}

OutcomeDistribution OutcomeDistribution::product(std::vector<OutcomeDistribution> components) {
  if (components.empty()) throw std::invalid_argument("product needs at least one component");
  for (const auto& c : components)
    if (c.space_ != OutcomeSpace::real(1))
      throw std::invalid_argument("product components must be scalar real distributions");
  OutcomeDistribution d;
  d.kind_ = Kind::Product;
  d.space_ = OutcomeSpace::real(components.size());
  d.comps_ = std::move(components);
  return d;
}

OutcomeDistribution OutcomeDistribution::mixture(std::vector<double> weights,
                                                 std::vector<OutcomeDistribution> components) {
  if (components.empty() || weights.size() != components.size())
    throw std::invalid_argument("mixture needs one weight per component");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be strictly positive");
  if (std::abs(sum_of(weights) - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to 1");
  for (const auto& c : components)
    if (c.space_ != components[0].space_)
      throw std::invalid_argument("mixture components must share one outcome space");
  OutcomeDistribution d;
  d.kind_ = Kind::Mixture;
  d.space_ = components[0].space_;
  d.p_ = std::move(weights);
  d.comps_ = std::move(components);
  return d;
}

std::vector<double> OutcomeDistribution::mean_vector() const {
  switch (kind_) {
    case Kind::Gaussian:
      return {mean_};
    case Kind::Product: {
      std::vector<double> m;
      for (const auto& c : comps_) m.push_back(c.mean_vector()[0]);
      return m;
    }
    case Kind::Mixture: {
      std::vector<double> m(space_.size, 0.0);
      for (std::size_t k = 0; k < comps_.size(); ++k) {
        auto mk = comps_[k].mean_vector();
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += p_[k] * mk[i];
      }
      return m;
    }
    default:
      throw std::invalid_argument("mean vector of a categorical distribution");
  }
}

std::string OutcomeDistribution::describe() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind_) {
    case Kind::Categorical:
      os << "Categorical(";
      for (std::size_t i = 0; i < p_.size(); ++i) os << (i ? "," : "") << p_[i];
      os << ")";
      break;
    case Kind::Gaussian:
      os << "N(" << mean_ << "," << var_ << ")";
      break;
    case Kind::Product:
    case Kind::Mixture:
      os << (kind_ == Kind::Product ? "Product(" : "Mixture(");
      for (std::size_t i = 0; i < comps_.size(); ++i) {
        if (i) os << ",";
        if (kind_ == Kind::Mixture) os << p_[i] << "*";
        os << comps_[i].describe();
      }
      os << ")";
      break;
  }
  return os.str();
}

namespace {

void sample_into(const OutcomeDistribution& d, RandomStream& rng, Outcome& out, std::size_t offset) {
  switch (d.kind()) {
    case OutcomeDistribution::Kind::Categorical:
      out.atom = rng.categorical(d.probs());
      return;
    case OutcomeDistribution::Kind::Gaussian:
      out.values[offset] = d.mean() + std::sqrt(d.variance()) * rng.normal();
      return;
    case OutcomeDistribution::Kind::Product:
      for (std::size_t i = 0; i < d.components().size(); ++i)
        sample_into(d.components()[i], rng, out, offset + i);
      return;
    case OutcomeDistribution::Kind::Mixture:
      sample_into(d.components()[rng.categorical(d.weights())], rng, out, offset);
      return;
  }
}

}  // namespace

Outcome sample(const OutcomeDistribution& dist, RandomStream& rng) {
  Outcome y;
  if (dist.space().kind == OutcomeSpace::Kind::Real) y.values.assign(dist.space().size, 0.0);
  sample_into(dist, rng, y, 0);
  return y;
}

double log_density(const OutcomeDistribution& dist, const Outcome& y) {
  if (!dist.space().contains(y))
    throw std::invalid_argument("outcome does not belong to " + dist.space().describe());
  switch (dist.kind()) {
    case OutcomeDistribution::Kind::Categorical:
      return std::log(dist.probs()[y.atom]);
    case OutcomeDistribution::Kind::Gaussian:
      return gaussian_log_density(dist.mean(), dist.variance(), y.values[0]);
    case OutcomeDistribution::Kind::Product: {
      double s = 0.0;
      for (std::size_t i = 0; i < dist.components().size(); ++i)
        s += scalar_log_density(dist.components()[i], y.values[i]);
      return s;
    }
    case OutcomeDistribution::Kind::Mixture: {
      std::vector<double> terms(dist.components().size());
      for (std::size_t k = 0; k < terms.size(); ++k)
        terms[k] = std::log(dist.weights()[k]) + log_density(dist.components()[k], y);
      return log_sum_exp(terms);
    }
  }
  return 0.0;
}

bool structurally_equal(const OutcomeDistribution& a, const OutcomeDistribution& b, double tol) {
  if (a.kind() != b.kind() || a.space() != b.space()) return false;
  switch (a.kind()) {
    case OutcomeDistribution::Kind::Gaussian:
      return std::abs(a.mean() - b.mean()) <= tol && std::abs(a.variance() - b.variance()) <= tol;
    case OutcomeDistribution::Kind::Categorical:
    case OutcomeDistribution::Kind::Mixture:
      if (a.probs().size() != b.probs().size()) return false;
      for (std::size_t i = 0; i < a.probs().size(); ++i)
        if (std::abs(a.probs()[i] - b.probs()[i]) > tol) return false;
      if (a.kind() == OutcomeDistribution::Kind::Categorical) return true;
      [[fallthrough]];
    case OutcomeDistribution::Kind::Product:
      if (a.components().size() != b.components().size()) return false;
      for (std::size_t i = 0; i < a.components().size(); ++i)
        if (!structurally_equal(a.components()[i], b.components()[i], tol)) return false;
      return true;
  }
  return false;
}

}  // namespace misbelief
