#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "misbelief/rng.hpp"

namespace misbelief {

// Either an atom index (categorical spaces) or a fixed-length real vector.
struct Outcome {
  std::size_t atom = 0;
  std::vector<double> values;

  static Outcome of_atom(std::size_t i) { return Outcome{i, {}}; }
  static Outcome of_values(std::vector<double> v) { return Outcome{0, std::move(v)}; }
  bool is_atom() const { return values.empty(); }
  bool operator==(const Outcome&) const = default;
};

struct OutcomeSpace {
  enum class Kind { Categorical, Real };
  Kind kind = Kind::Real;
  std::size_t size = 1;  // number of atoms, or real dimension

  static OutcomeSpace categorical(std::size_t n) { return {Kind::Categorical, n}; }
  static OutcomeSpace real(std::size_t dim) { return {Kind::Real, dim}; }
  bool operator==(const OutcomeSpace&) const = default;
  bool contains(const Outcome& y) const;
  std::string describe() const;
};

class OutcomeDistribution {
 public:
  enum class Kind { Categorical, Gaussian, Product, Mixture };

  static OutcomeDistribution categorical(std::vector<double> probs);
  static OutcomeDistribution gaussian(double mean, double variance);
  static OutcomeDistribution product(std::vector<OutcomeDistribution> components);
  static OutcomeDistribution mixture(std::vector<double> weights,
                                     std::vector<OutcomeDistribution> components);

  Kind kind() const { return kind_; }
  const std::vector<double>& probs() const { return p_; }
  const std::vector<double>& weights() const { return p_; }
  double mean() const { return mean_; }
  double variance() const { return var_; }
  const std::vector<OutcomeDistribution>& components() const { return comps_; }
  const OutcomeSpace& space() const { return space_; }

  // mean vector for real spaces
  std::vector<double> mean_vector() const;
  std::string describe() const;

 private:
  OutcomeDistribution() = default;
  Kind kind_ = Kind::Gaussian;
  std::vector<double> p_;
  double mean_ = 0.0;
  double var_ = 1.0;
  std::vector<OutcomeDistribution> comps_;
  OutcomeSpace space_;
};

Outcome sample(const OutcomeDistribution& dist, RandomStream& rng);

double log_density(const OutcomeDistribution& dist, const Outcome& y);

// Same variant and parameters within tol, recursively.
bool structurally_equal(const OutcomeDistribution& a, const OutcomeDistribution& b,
                        double tol = 1e-12);

// Structural equality, falling back to KL < 1e-10 when the variants differ.
bool same_distribution(const OutcomeDistribution& a, const OutcomeDistribution& b);

}  // namespace misbelief
