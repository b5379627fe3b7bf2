#pragma once

#include <vector>

#include <Eigen/Core>

#include "selinf/targets.hpp"

namespace selinf {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x);

// Sorted complement of E in {0,...,p-1}.
std::vector<int> complement(const std::vector<int>& E, int p);

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X,
                               const std::vector<int>& idx);

// OLS coefficients on the submatrix X_E; throws numeric_error when
// X_E^T X_E is rank deficient.
Eigen::VectorXd ols_coef(const Eigen::MatrixXd& X_E, const Eigen::VectorXd& y);

// Logistic MLE by Newton iteration (no intercept; include a ones column in
// X_E if one is wanted). Throws numeric_error on non-convergence.
Eigen::VectorXd logistic_mle(const Eigen::MatrixXd& X_E,
                             const Eigen::VectorXd& y, int max_iter = 100,
                             double tol = 1e-10);

// The data vector D = (beta_bar_E, X_{-E}^T (y - fit)) that carries all the
// data randomness entering a selection event, along with the pieces needed
// elsewhere. For an empty E the first block is absent and fit is the null
// model (0 for Gaussian loss, 1/2 for logistic).
struct DataVector {
  Eigen::VectorXd D;         // p
  Eigen::VectorXd beta_bar;  // |E|
  Eigen::VectorXd fitted;    // n
  Eigen::VectorXd resid;     // n, y - fitted
};

DataVector build_data_vector(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const std::vector<int>& E, Loss loss);

// lambda heuristic: mean of ||X^T (sigma g)||_inf over standard-normal draws g.
double lambda_heuristic(const Eigen::MatrixXd& X, double sigma, int ndraws,
                        RngStream& rng);

}  // namespace selinf
