#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

#include "selinf/rng.hpp"

namespace selinf {

enum class RandomizationFamily { Gaussian, Laplace, Logistic };

std::string family_name(RandomizationFamily f);
RandomizationFamily family_from_name(std::string_view name);

// A randomization law with i.i.d. symmetric coordinates, one of
// Gaussian / Laplace / logistic at a common per-coordinate scale.
// Immutable after construction; safe to share across concurrent chains.
class RandomizationDist {
 public:
  RandomizationDist(RandomizationFamily family, double scale, int dim);

  RandomizationFamily family() const { return family_; }
  double scale() const { return scale_; }
  int dim() const { return dim_; }

  // log density of the whole vector, normalizing constant included.
  double log_density(const Eigen::VectorXd& w) const;

  // Coordinate-wise gradient of the log density (Langevin drift).
  // The Laplace score at an exact zero returns 0, the subgradient midpoint;
  // a chain visits that point with probability zero.
  Eigen::VectorXd grad_log_density(const Eigen::VectorXd& w) const;

  // Per-coordinate survival function G_bar(x) = P{w_j > x}.
  double survival(double x) const;

  // i.i.d. draw of all coordinates.
  Eigen::VectorXd sample(RngStream& rng) const;

  // Lipschitz constant of the negative log density; +inf for Gaussian.
  double lipschitz_constant() const;

  // Scalar helpers used in hot loops.
  double log_density1(double x) const;
  double grad_log_density1(double x) const;

 private:
  RandomizationFamily family_;
  double scale_;
  int dim_;
};

}  // namespace selinf
