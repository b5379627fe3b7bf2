#include "selinf/pivots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "selinf/errors.hpp"
#include "selinf/numeric.hpp"

namespace selinf {

PivotValue plugin_pivot(const WeightedSample& samples,
                        const Eigen::VectorXd& T_obs,
                        const Eigen::VectorXd& theta,
                        const Eigen::MatrixXd& sigma_T) {
  const long S = samples.draws.rows();
  const int a = static_cast<int>(samples.draws.cols());
  if (S == 0) throw std::invalid_argument("plugin_pivot: empty sample");
  if (T_obs.size() != a || theta.size() != a) {
    throw std::invalid_argument("plugin_pivot: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_T);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("plugin_pivot: sigma_T not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  auto std_norm = [&](const Eigen::VectorXd& x) {
    return L.triangularView<Eigen::Lower>().solve(x).norm();
  };
  const double obs = std_norm(T_obs - theta);
  const Eigen::VectorXd w = normalize_log_weights(samples.log_weights);
  double surv = 0.0;
  double lower = 0.0;
  for (long s = 0; s < S; ++s) {
    const Eigen::VectorXd d = samples.draws.row(s).transpose() - theta;
    if (std_norm(d) >= obs) surv += w[s];
    if (a == 1 && samples.draws(s, 0) <= T_obs[0]) lower += w[s];
  }
  PivotValue out;
  out.survival = std::clamp(surv, 0.0, 1.0);
  out.one_sided =
      a == 1 ? std::clamp(lower, 0.0, 1.0)
             : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double bootstrap_pivot_weighted(const std::vector<Eigen::VectorXd>& boot_stats,
                                const std::vector<double>& selection_probs,
                                double observed_stat) {
  if (boot_stats.size() != selection_probs.size() || boot_stats.empty()) {
    throw std::invalid_argument("bootstrap_pivot_weighted: length mismatch");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < boot_stats.size(); ++b) {
    const double p = selection_probs[b];
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument(
          "bootstrap_pivot_weighted: probabilities must lie in [0,1]");
    }
    den += p;
    if (boot_stats[b].norm() >= observed_stat) num += p;
  }
  if (den <= 0.0) {
    throw numeric_error("bootstrap_pivot_weighted: all selection probabilities are zero");
  }
  return num / den;
}

double bootstrap_cdf_weighted(const std::vector<double>& boot_stats,
                              const std::vector<double>& selection_probs,
                              double t) {
  if (boot_stats.size() != selection_probs.size() || boot_stats.empty()) {
    throw std::invalid_argument("bootstrap_cdf_weighted: length mismatch");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < boot_stats.size(); ++b) {
    den += selection_probs[b];
    if (boot_stats[b] <= t) num += selection_probs[b];
  }
  if (den <= 0.0) {
    throw numeric_error("bootstrap_cdf_weighted: all selection probabilities are zero");
  }
  return num / den;
}

CiResult invert_ci(const std::function<double(double)>& pivot_fn,
                   const std::vector<double>& grid, double alpha) {
  if (grid.empty()) throw std::invalid_argument("invert_ci: empty grid");
  const double lo_level = alpha / 2.0;
  const double hi_level = 1.0 - alpha / 2.0;
  std::vector<double> pivots(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) pivots[i] = pivot_fn(grid[i]);

  CiResult out;
  int first = -1, last = -1;
  bool gap_after_first = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool accept = pivots[i] >= lo_level && pivots[i] <= hi_level;
    if (accept) {
      if (first < 0) first = static_cast<int>(i);
      if (last >= 0 && static_cast<int>(i) > last + 1) gap_after_first = true;
      last = static_cast<int>(i);
    }
  }
  if (first < 0) {
    // Empty acceptance region: collapse to the pivot-median grid point.
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (std::abs(pivots[i] - 0.5) < std::abs(pivots[best] - 0.5)) best = i;
    }
    out.lo = out.hi = grid[best];
    out.degenerate = true;
    return out;
  }
  out.lo = grid[first];
  out.hi = grid[last];
  out.noncontiguous = gap_after_first;
  return out;
}

WeightedSample tilt_reuse(const WeightedSample& samples,
                          const Eigen::VectorXd& theta_ref,
                          const Eigen::VectorXd& theta_new,
                          const Eigen::MatrixXd& sigma_T) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_T);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("tilt_reuse: sigma_T not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  auto quad = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(x);
    return z.squaredNorm();
  };
  WeightedSample out = samples;
  for (long s = 0; s < samples.draws.rows(); ++s) {
    const Eigen::VectorXd T = samples.draws.row(s).transpose();
    out.log_weights[s] += -0.5 * quad(T - theta_new) + 0.5 * quad(T - theta_ref);
  }
  return out;
}

double two_sided_p_value(const PivotValue& pv, int target_dim) {
  if (target_dim == 1) {
    return std::clamp(2.0 * std::min(pv.one_sided, 1.0 - pv.one_sided), 0.0, 1.0);
  }
  return pv.survival;
}

}  // namespace selinf
