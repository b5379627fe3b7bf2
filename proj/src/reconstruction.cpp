#include "selinf/reconstruction.hpp"

#include <stdexcept>

namespace selinf {

namespace {

Eigen::VectorXd accumulate_blocks(const std::vector<OptBlock>& blocks,
                                  const std::vector<Eigen::VectorXd>& V,
                                  Eigen::VectorXd acc) {
  if (V.size() != blocks.size()) {
    throw std::invalid_argument("reconstruction: wrong number of opt blocks");
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (V[b].size() != blocks[b].coef.cols()) {
      throw std::invalid_argument("reconstruction: block '" +
                                  blocks[b].label + "' has wrong dimension");
    }
    if (blocks[b].coef.size() > 0) acc += blocks[b].coef * V[b];
  }
  return acc;
}

}  // namespace

Eigen::VectorXd AffineReconstruction::omega(
    const Eigen::VectorXd& D, const std::vector<Eigen::VectorXd>& V) const {
  if (D.size() != data_coef.cols()) {
    throw std::invalid_argument("reconstruction: data vector has wrong size");
  }
  return accumulate_blocks(blocks, V, data_coef * D + offset);
}

Eigen::VectorXd AffineReconstruction::omega_at_observed(
    const Eigen::VectorXd& D) const {
  std::vector<Eigen::VectorXd> V;
  V.reserve(blocks.size());
  for (const auto& b : blocks) V.push_back(b.observed);
  return omega(D, V);
}

Eigen::VectorXd BoundView::omega(const Eigen::VectorXd& T,
                                 const std::vector<Eigen::VectorXd>& V) const {
  if (T.size() != target_coef.cols()) {
    throw std::invalid_argument("bound view: target has wrong size");
  }
  return accumulate_blocks(blocks, V, target_coef * T + offset);
}

std::vector<Eigen::VectorXd> BoundView::observed_opt() const {
  std::vector<Eigen::VectorXd> V;
  V.reserve(blocks.size());
  for (const auto& b : blocks) V.push_back(b.observed);
  return V;
}

BoundView bind_view(const AffineReconstruction& recon,
                    const RandomizationDist& dist, const Eigen::VectorXd& D_obs,
                    const Eigen::MatrixXd& sigma_DT, const TargetSpec& target) {
  if (dist.dim() != recon.omega_dim()) {
    throw std::invalid_argument("bind_view: randomization dim != omega dim");
  }
  if (sigma_DT.rows() != D_obs.size() ||
      sigma_DT.cols() != target.target_dim()) {
    throw std::invalid_argument("bind_view: sigma_DT has wrong shape");
  }
  // C_k = Sigma_{D_k,T} sigma_T^{-1}, column by column against the factor.
  Eigen::MatrixXd C(D_obs.size(), target.target_dim());
  for (int i = 0; i < static_cast<int>(D_obs.size()); ++i) {
    C.row(i) = target.sigma_T_solve(sigma_DT.row(i).transpose()).transpose();
  }
  const Eigen::VectorXd F = D_obs - C * target.T_obs;
  BoundView view{recon.data_coef * C,
                 recon.blocks,
                 recon.offset + recon.data_coef * F,
                 recon.jacobian_log,
                 dist};
  return view;
}

MultiViewReconstruction compose_views(std::vector<BoundView> views) {
  if (views.empty()) {
    throw std::invalid_argument("compose_views: need at least one view");
  }
  const int a = static_cast<int>(views.front().target_coef.cols());
  for (const auto& v : views) {
    if (v.target_coef.cols() != a) {
      throw std::invalid_argument(
          "compose_views: views reference different target dimensions");
    }
  }
  return MultiViewReconstruction{std::move(views), a};
}

}  // namespace selinf
