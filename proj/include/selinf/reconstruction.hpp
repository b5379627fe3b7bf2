#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "selinf/constraints.hpp"
#include "selinf/randomization.hpp"
#include "selinf/targets.hpp"

namespace selinf {

// One optimization-variable block of a reconstruction map: its coefficient
// matrix, constraint region and observed value.
struct OptBlock {
  std::string label;
  Eigen::MatrixXd coef;  // p_omega x block_dim
  ConstraintRegion region;
  Eigen::VectorXd observed;
};

// The affine randomization-reconstruction map of one selection procedure in
// terms of its data vector D:
//   omega(D, V) = data_coef * D + sum_b blocks[b].coef * V_b + offset.
// jacobian_log is the constant log Jacobian of the optimization-variable
// change of density (0 for every in-scope procedure).
struct AffineReconstruction {
  Eigen::MatrixXd data_coef;  // M: p_omega x p_D
  std::vector<OptBlock> blocks;
  Eigen::VectorXd offset;  // L
  double jacobian_log = 0.0;

  int omega_dim() const { return static_cast<int>(offset.size()); }

  Eigen::VectorXd omega(const Eigen::VectorXd& D,
                        const std::vector<Eigen::VectorXd>& V) const;
  Eigen::VectorXd omega_at_observed(const Eigen::VectorXd& D) const;
};

// A reconstruction bound to a target: only the target block moves, the
// nuisance component is folded into the offset.
//   omega(T, V) = target_coef * T + sum_b blocks[b].coef * V_b + offset
// with target_coef = M Sigma_DT sigma_T^{-1} and offset = L + M F_obs.
struct BoundView {
  Eigen::MatrixXd target_coef;  // M_tilde: p_omega x a
  std::vector<OptBlock> blocks;
  Eigen::VectorXd offset;  // L_tilde
  double jacobian_log = 0.0;
  RandomizationDist dist;

  int omega_dim() const { return static_cast<int>(offset.size()); }

  Eigen::VectorXd omega(const Eigen::VectorXd& T,
                        const std::vector<Eigen::VectorXd>& V) const;
  std::vector<Eigen::VectorXd> observed_opt() const;
};

// Binds a view to a target. sigma_DT is the covariance of this view's data
// vector with the target (views of the same data share a target but carry
// their own D_k); D_obs is the view's observed data vector.
BoundView bind_view(const AffineReconstruction& recon,
                    const RandomizationDist& dist, const Eigen::VectorXd& D_obs,
                    const Eigen::MatrixXd& sigma_DT, const TargetSpec& target);

// K views sharing one target block; the selective density is the product of
// the per-view randomization terms times the Gaussian target term.
struct MultiViewReconstruction {
  std::vector<BoundView> views;
  int target_dim = 0;
};

MultiViewReconstruction compose_views(std::vector<BoundView> views);

}  // namespace selinf
