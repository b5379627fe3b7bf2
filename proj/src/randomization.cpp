#include "selinf/randomization.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace selinf {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

std::string family_name(RandomizationFamily f) {
  switch (f) {
    case RandomizationFamily::Gaussian: return "gaussian";
    case RandomizationFamily::Laplace: return "laplace";
    case RandomizationFamily::Logistic: return "logistic";
  }
  return "?";
}

RandomizationFamily family_from_name(std::string_view name) {
  if (name == "gaussian") return RandomizationFamily::Gaussian;
  if (name == "laplace") return RandomizationFamily::Laplace;
  if (name == "logistic") return RandomizationFamily::Logistic;
  throw std::invalid_argument("unknown randomization family: " +
                              std::string(name));
}

RandomizationDist::RandomizationDist(RandomizationFamily family, double scale,
                                     int dim)
    : family_(family), scale_(scale), dim_(dim) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("randomization scale must be positive");
  }
  if (dim < 1) throw std::invalid_argument("randomization dim must be >= 1");
}

double RandomizationDist::log_density1(double x) const {
  const double z = x / scale_;
  switch (family_) {
    case RandomizationFamily::Gaussian:
      return -0.5 * kLog2Pi - std::log(scale_) - 0.5 * z * z;
    case RandomizationFamily::Laplace:
      return -std::log(2.0 * scale_) - std::abs(z);
    case RandomizationFamily::Logistic: {
      // log [ e^{-|z|} / (s (1+e^{-|z|})^2) ], written for either sign of z.
      const double a = std::abs(z);
      return -a - std::log(scale_) - 2.0 * std::log1p(std::exp(-a));
    }
  }
  return 0.0;
}

double RandomizationDist::grad_log_density1(double x) const {
  const double z = x / scale_;
  switch (family_) {
    case RandomizationFamily::Gaussian:
      return -x / (scale_ * scale_);
    case RandomizationFamily::Laplace:
      if (z == 0.0) return 0.0;
      return (z > 0.0 ? -1.0 : 1.0) / scale_;
    case RandomizationFamily::Logistic:
      return -std::tanh(0.5 * z) / scale_;
  }
  return 0.0;
}

double RandomizationDist::log_density(const Eigen::VectorXd& w) const {
  if (w.size() != dim_) {
    throw std::invalid_argument("log_density: dimension mismatch");
  }
  double s = 0.0;
  for (int j = 0; j < dim_; ++j) s += log_density1(w[j]);
  return s;
}

Eigen::VectorXd RandomizationDist::grad_log_density(
    const Eigen::VectorXd& w) const {
  if (w.size() != dim_) {
    throw std::invalid_argument("grad_log_density: dimension mismatch");
  }
  Eigen::VectorXd g(dim_);
  for (int j = 0; j < dim_; ++j) g[j] = grad_log_density1(w[j]);
  return g;
}

double RandomizationDist::survival(double x) const {
  const double z = x / scale_;
  switch (family_) {
    case RandomizationFamily::Gaussian:
      return 0.5 * std::erfc(z / std::sqrt(2.0));
    case RandomizationFamily::Laplace:
      return z >= 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
    case RandomizationFamily::Logistic:
      return 1.0 / (1.0 + std::exp(z));
  }
  return 0.0;
}

Eigen::VectorXd RandomizationDist::sample(RngStream& rng) const {
  Eigen::VectorXd w(dim_);
  switch (family_) {
    case RandomizationFamily::Gaussian:
      for (int j = 0; j < dim_; ++j) w[j] = scale_ * rng.normal();
      break;
    case RandomizationFamily::Laplace:
      for (int j = 0; j < dim_; ++j) {
        const double u = rng.uniform() - 0.5;
        const double mag = -std::log1p(-2.0 * std::abs(u));
        w[j] = scale_ * (u >= 0.0 ? mag : -mag);
      }
      break;
    case RandomizationFamily::Logistic:
      for (int j = 0; j < dim_; ++j) {
        double u = rng.uniform();
        if (u <= 0.0) u = std::numeric_limits<double>::min();
        w[j] = scale_ * std::log(u / (1.0 - u));
      }
      break;
  }
  return w;
}

double RandomizationDist::lipschitz_constant() const {
  switch (family_) {
    case RandomizationFamily::Gaussian:
      return std::numeric_limits<double>::infinity();
    case RandomizationFamily::Laplace:
    case RandomizationFamily::Logistic:
      return 1.0 / scale_;
  }
  return 0.0;
}

}  // namespace selinf
