#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selinf/samplers.hpp"

namespace selinf {

struct PivotValue {
  double survival;   // weighted fraction with standardized norm >= observed
  double one_sided;  // weighted fraction with draw <= T_obs (1-D only, else NaN)
};

// The plugin pivot from weighted target draws: survival probability of
// ||sigma_T^{-1/2}(T - theta)||_2 under the conditional law, estimated by
// the weighted fraction of draws at or beyond the observed statistic.
PivotValue plugin_pivot(const WeightedSample& samples,
                        const Eigen::VectorXd& T_obs,
                        const Eigen::VectorXd& theta,
                        const Eigen::MatrixXd& sigma_T);

// Selection-probability-weighted bootstrap survival: the ratio
//   sum_b p_b 1{ ||stat_b|| >= observed } / sum_b p_b.
// Reduces to the plain empirical survival when all probabilities are equal.
double bootstrap_pivot_weighted(const std::vector<Eigen::VectorXd>& boot_stats,
                                const std::vector<double>& selection_probs,
                                double observed_stat);

// One-sided weighted bootstrap CDF for scalar statistics:
//   sum_b p_b 1{ stat_b <= t } / sum_b p_b.
double bootstrap_cdf_weighted(const std::vector<double>& boot_stats,
                              const std::vector<double>& selection_probs,
                              double t);

struct CiResult {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;      // empty acceptance region
  bool noncontiguous = false;   // acceptance region had gaps; hull returned
};

// Test inversion on a sorted grid: the interval of theta values whose pivot
// lies in [alpha/2, 1 - alpha/2]. An empty acceptance region collapses to
// the grid point with pivot closest to 1/2; a non-contiguous region returns
// its convex hull with a warning flag.
CiResult invert_ci(const std::function<double(double)>& pivot_fn,
                   const std::vector<double>& grid, double alpha);

// Gaussian importance tilt moving target draws taken at theta_ref to
// theta_new; exact for the selective-sampler draws since the randomization
// term is shared.
WeightedSample tilt_reuse(const WeightedSample& samples,
                          const Eigen::VectorXd& theta_ref,
                          const Eigen::VectorXd& theta_new,
                          const Eigen::MatrixXd& sigma_T);

struct InferenceResult {
  std::string name;
  double pivot = 0.0;
  double p_value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double ess = 0.0;
  std::string method;
  bool ci_degenerate = false;
  bool ci_noncontiguous = false;
  bool low_ess = false;
};

// Two-sided p-value convention: 2 min(pivot, 1-pivot) for scalar targets,
// the norm-based survival itself otherwise.
double two_sided_p_value(const PivotValue& pv, int target_dim);

}  // namespace selinf
