#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "selinf/glm.hpp"
#include "selinf/reconstruction.hpp"

namespace selinf {

// The recorded outcome of one randomized selection procedure. Observed
// optimization-variable values live in the reconstruction blocks.
struct SelectionOutcome {
  std::vector<int> active;          // E, ascending
  Eigen::VectorXd signs;            // s_E
  Eigen::VectorXd observed_omega;   // realized randomization draw
  Eigen::VectorXd D_obs;            // this procedure's data vector
};

struct SelectorResult {
  SelectionOutcome outcome;
  AffineReconstruction recon;
};

struct LassoOptions {
  double kkt_tol = 1e-9;
  int max_iter = 50000;
  double loss_scale = 1.0;  // multiplies the smooth loss (used by carving)
};

struct LassoResult {
  SelectionOutcome outcome;
  AffineReconstruction recon;
  Eigen::VectorXd beta_hat;  // p, the penalized solution
  Eigen::VectorXd beta_bar;  // |E|, refitted MLE on E
  int iterations = 0;
  double kkt_residual = 0.0;
};

// Randomized LASSO: minimize loss(beta) + lam ||beta||_1
//   + (eps/2) ||beta||_2^2 - omega^T beta, by proximal gradient with
// backtracking line search. Gaussian loss yields the exact affine
// reconstruction in D = (beta_bar_E, X_{-E}^T (y - fit)); logistic loss uses
// the observed-information plug-in blocks Q_E, C_E at beta_bar_E.
LassoResult solve_randomized_lasso(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, double lam,
                                   double eps, const Eigen::VectorXd& omega,
                                   Loss loss, const LassoOptions& opts = {});

// Randomized marginal screening of the statistics S: eta_hat = the clamp of
// S + omega to [-c, c], active set where the clamp binds. The data vector of
// this procedure is S itself.
SelectorResult marginal_screening(const Eigen::VectorXd& S,
                                  const Eigen::VectorXd& omega, double c);

struct StepwiseResult {
  std::vector<int> order;              // entry order j_1..j_K
  std::vector<double> step_signs;      // s_1..s_K
  std::vector<Eigen::VectorXd> scores; // z_k, the step-k score vectors
  std::vector<int> chosen_E;           // ascending set the recons are built on
  Eigen::VectorXd D_obs;
  std::vector<AffineReconstruction> recons;  // one per step
  std::vector<Eigen::VectorXd> omegas;       // realized draws
};

// K steps of randomized forward stepwise; at step k the procedure maximizes
// eta^T (X_{-E}^T P_perp y + omega_k) over the l1 ball, i.e. picks the
// largest randomized score. Reconstructions are expressed against the data
// vector of chosen_E (default: the step-K active set).
StepwiseResult forward_stepwise(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, int K,
                                const std::vector<Eigen::VectorXd>& omegas,
                                std::vector<int> chosen_E = {});

// Rebuilds the step reconstructions for a different final model.
std::vector<AffineReconstruction> stepwise_reconstructions(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const std::vector<int>& order, const std::vector<double>& step_signs,
    const std::vector<Eigen::VectorXd>& scores, const std::vector<int>& E);

// Data carving: the gradient of delta = rho*loss - loss_1 at beta, scaled by
// 1/rho, which plays the role of the randomization. Exactly zero when the
// subsample is the full data.
Eigen::VectorXd carve_omega(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const std::vector<int>& subsample, Loss loss,
                            const Eigen::VectorXd& beta_full);

struct CarveRandomization {
  Eigen::VectorXd omega;        // realized draw at beta_full
  Eigen::MatrixXd sigma_omega;  // bootstrap variance estimate
  Eigen::MatrixXd cross_D;      // bootstrap Cov(omega, D); near zero
};

// Realized carving randomization plus its pairs-bootstrap covariance; each
// bootstrap replicate resamples rows and redraws the stage-one split.
// Rejects rho == 1 (degenerate randomization; use non-randomized inference).
CarveRandomization carve_randomization(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y,
                                       const std::vector<int>& subsample,
                                       Loss loss,
                                       const Eigen::VectorXd& beta_full,
                                       int B_reps, RngStream& rng);

struct CarveResult {
  LassoResult stage_one;        // fit of the scaled stage-one objective
  Eigen::VectorXd omega;        // realized carving randomization
  Eigen::MatrixXd sigma_omega;  // estimated Var(omega)
  Eigen::MatrixXd cross_D;
  Eigen::MatrixXd whitening;       // sigma_omega^{-1/2}
  AffineReconstruction recon;      // whitened map; pairs with N(0, I)
  RandomizationDist dist;          // standard Gaussian, dim p
  SelectionOutcome outcome;        // whitened observed omega
};

// Runs the carved LASSO: stage-one selection on the subsample, randomization
// recast as Gaussian noise with covariance estimated by bootstrap. The
// returned reconstruction is pre-whitened so the sampler can use i.i.d.
// standard Gaussian randomization.
CarveResult solve_carved_lasso(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y,
                               const std::vector<int>& subsample, double lam,
                               double eps, Loss loss, int B_omega,
                               RngStream& rng);

}  // namespace selinf
