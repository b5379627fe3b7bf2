#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selinf/pivots.hpp"
#include "selinf/samplers.hpp"
#include "selinf/selectors.hpp"

namespace selinf {

struct ViewSpec {
  enum class Kind { Lasso, Screen, Stepwise, Carve };
  Kind kind = Kind::Lasso;
  Loss loss = Loss::Gaussian;
  double lam = 0.0;  // 0 -> heuristic E ||X^T noise||_inf
  double eps = 0.0;  // 0 -> 1/sqrt(n)
  double screen_c = 2.0;
  int fs_steps = 1;
  double carve_rho = 0.5;
  RandomizationFamily family = RandomizationFamily::Logistic;
  double scale = 1.0;
};

struct ViewPlan {
  enum class Rule { Union, Intersection, Explicit };
  std::vector<ViewSpec> views;
  Rule rule = Rule::Union;
  std::vector<int> explicit_E;  // the analyst's choice, batch style
};

// One executed view: its reconstruction(s) against its own data vector,
// the randomization each pairs with, and how to recompute D on a resample.
struct ExecutedView {
  ViewSpec spec;
  std::vector<int> selected;
  Eigen::VectorXd signs;
  Eigen::VectorXd observed_omega;             // realized draw (first recon's)
  std::vector<AffineReconstruction> recons;   // stepwise contributes K
  std::vector<RandomizationDist> dists;       // parallel to recons
  Eigen::VectorXd D_obs;
  StatFn d_fn;
  double recon_gap = 0.0;       // max-abs identity residual at observed values
  Eigen::MatrixXd carve_cross;  // bootstrap Cov(omega, D); carve views only
  std::vector<int> carve_split; // stage-one rows; carve views only
};

struct MultiViewRun {
  std::vector<ExecutedView> views;
  std::vector<int> chosen_E;
  Loss inference_loss = Loss::Gaussian;
  Eigen::VectorXd D_target_obs;  // data vector of the chosen model
  StatFn d_target_fn;
};

// Runs every view of the plan (independent randomizations, or disjoint
// stage-one splits for carving), applies the final-model rule, and builds
// the data vector of the chosen model. A view with an empty selected set is
// retained; its constraints still bind.
MultiViewRun run_views(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ViewPlan& plan, std::uint64_t seed);

// Binds every view to the coordinate target [beta_bar_E]_coord of the chosen
// model: one joint pairs bootstrap estimates sigma_T and each view's
// sigma_{D_k,T}.
struct BoundInference {
  TargetSpec target;
  MultiViewReconstruction mv;
  Eigen::MatrixXd boot_target_draws;  // B x 1, centered
};

BoundInference bind_coordinate_target(const MultiViewRun& run,
                                      const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y, int coord,
                                      int boot_reps, std::uint64_t seed);

struct InferOptions {
  std::string method = "weighted";  // plugin | wild | weighted
  double level = 0.9;
  int grid_points = 120;
  double grid_halfwidth_sds = 6.0;
  SamplerConfig sampler;
  int boot_reps = 600;
  TargetDrawSource source = TargetDrawSource::Gaussian;
};

// Per-coefficient pivots, p-values and confidence intervals for the listed
// coordinates of the chosen model (all of chosen_E when empty).
std::vector<InferenceResult> infer_coordinates(const MultiViewRun& run,
                                               const Eigen::MatrixXd& X,
                                               const Eigen::VectorXd& y,
                                               std::vector<int> coords,
                                               const InferOptions& opts);

}  // namespace selinf
