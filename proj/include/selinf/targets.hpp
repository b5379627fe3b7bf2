#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "selinf/rng.hpp"

namespace selinf {

enum class Loss { Gaussian, Logistic };

// The target statistic T = A^T D, its null value, and the covariance
// estimates needed to move only the target block in the sampler while the
// nuisance component F = D - Sigma_DT Sigma_T^{-1} T stays fixed.
struct TargetSpec {
  Eigen::MatrixXd A;         // p x a contrast on the data vector
  Eigen::VectorXd D_obs;     // p
  Eigen::VectorXd T_obs;     // a = A^T D_obs
  Eigen::VectorXd theta;     // a, null value
  Eigen::MatrixXd sigma_T;   // a x a
  Eigen::MatrixXd sigma_DT;  // p x a
  Eigen::MatrixXd C;         // p x a = sigma_DT sigma_T^{-1}
  Eigen::VectorXd F_obs;     // p
  bool regularized = false;  // set when sigma_T needed a ridge

  int target_dim() const { return static_cast<int>(T_obs.size()); }

  // Solve sigma_T x = b for the (cached) factorization.
  Eigen::VectorXd sigma_T_solve(const Eigen::VectorXd& b) const;
  // ||sigma_T^{-1/2} x||_2, the standardized norm used by the pivots.
  double standardized_norm(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd sigma_T_chol;  // lower Cholesky factor of sigma_T
};

// Builds a TargetSpec from explicit covariance estimates (e.g. pairs
// bootstrap output).
TargetSpec make_target(const Eigen::VectorXd& D_obs, const Eigen::MatrixXd& A,
                       const Eigen::MatrixXd& sigma_T,
                       const Eigen::MatrixXd& sigma_DT,
                       const Eigen::VectorXd& theta);

// Builds a TargetSpec from a joint p x p covariance estimate of D,
// with C = Sigma A (A^T Sigma A)^{-1} and F = (I - C A^T) D.
TargetSpec decompose(const Eigen::VectorXd& D_obs, const Eigen::MatrixXd& A,
                     const Eigen::MatrixXd& sigma_joint,
                     const Eigen::VectorXd& theta);

// Generic pairs bootstrap over rows of (X, y): each statistic functor is
// recomputed on every resample; returns the covariance of the first
// statistic with itself and the cross covariance of each remaining statistic
// with the first. A resample on which any functor throws is skipped and
// redrawn, up to 10*B attempts. Reduction order is fixed for determinism.
using StatFn =
    std::function<Eigen::VectorXd(const Eigen::MatrixXd&, const Eigen::VectorXd&)>;

struct BootstrapCov {
  Eigen::MatrixXd sigma_T;                 // a x a
  std::vector<Eigen::MatrixXd> sigma_DT;   // one p_k x a block per extra stat
  Eigen::MatrixXd t_draws_centered;        // B x a replicate draws
};

BootstrapCov pairs_bootstrap(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const StatFn& target_fn,
                             const std::vector<StatFn>& data_fns, int B_reps,
                             RngStream& rng);

// Pairs-bootstrap covariance of (T, D) for the regression data vector
// D = (beta_bar_E, X_{-E}^T (y - fit)); T = A^T D.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pairs_bootstrap_cov(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const std::vector<int>& E, const Eigen::MatrixXd& A, int B_reps,
    RngStream& rng, Loss loss = Loss::Gaussian);

// Wild-bootstrap target map W (a x n): T(alpha) = W alpha with
// W = A_beta^T (X_E^T X_E)^{-1} X_E^T diag(resid).
Eigen::MatrixXd wild_target_map(const Eigen::MatrixXd& X_E,
                                const Eigen::VectorXd& resid,
                                const Eigen::MatrixXd& A_beta);

Eigen::VectorXd wild_bootstrap_target(const Eigen::MatrixXd& X_E,
                                      const Eigen::VectorXd& resid,
                                      const Eigen::MatrixXd& A_beta,
                                      const Eigen::VectorXd& alpha);

}  // namespace selinf
