#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selinf/constraints.hpp"
#include "selinf/reconstruction.hpp"
#include "selinf/rng.hpp"
#include "selinf/targets.hpp"

namespace selinf {

struct SamplerConfig {
  long steps = 10000;   // retained draws
  long burnin = 2000;
  int thin = 1;
  double eta = 0.0;     // 0 -> 0.5 / sqrt(total chain dimension)
  std::uint64_t seed = 1;
  double min_ess = 200.0;
};

// Draws of the target block together with importance log-weights
// (all zero for direct chains). Immutable once returned.
struct WeightedSample {
  Eigen::MatrixXd draws;        // S x a, absolute target scale
  Eigen::VectorXd log_weights;  // S
  double ess() const;
};

// Current point of a projected Langevin chain: an ordered list of labelled
// blocks, each carrying its own constraint region.
struct ChainState {
  struct Block {
    std::string label;
    Eigen::VectorXd value;
    ConstraintRegion region;
  };
  std::vector<Block> blocks;
  double eta = 0.1;
  long iteration = 0;
  RngStream rng;
};

// Per-block gradient of the log target density, evaluated at the block values.
using GradFn = std::function<std::vector<Eigen::VectorXd>(
    const std::vector<Eigen::VectorXd>&)>;

// One projected Langevin update
//   x_b <- P_b( x_b + eta * grad_b + sqrt(2 eta) xi_b )
// applied to every block. Throws when a gradient is non-finite, naming the
// offending block.
ChainState langevin_step(ChainState state, const GradFn& grad_log_target);

struct ChainDiagnostics {
  double eta_used = 0.0;
  int halvings = 0;
  long bad_gradient_steps = 0;
};

// Joint chain over (T, V_1..V_K) targeting the plugin selective density
//   phi_(theta, sigma_T)(T) * prod_k g_k(omega_k(T, V_k)).
// Chains start at the observed values, which are feasible by construction.
WeightedSample run_selective_sampler(const TargetSpec& target,
                                     const MultiViewReconstruction& mv,
                                     const SamplerConfig& config,
                                     ChainDiagnostics* diag = nullptr);

// Optimization-variable-only chain at the observed data; the base material
// of the weighted optimization sampler, reusable across targets.
struct OptimizationDraws {
  std::vector<Eigen::MatrixXd> omega_base;  // per view: S x p_omega
  Eigen::VectorXd log_g_base;               // S, summed over views
  ChainDiagnostics diag;
};

OptimizationDraws run_optimization_chain(const Eigen::VectorXd& T_obs,
                                         const MultiViewReconstruction& mv,
                                         const SamplerConfig& config);

enum class TargetDrawSource { Gaussian, PairsBootstrap };

// One chain, every null value on the grid: importance-weights the
// (target draw, optimization draw) pairs against the selective density at
// each theta. boot_draws supplies centered bootstrap target replicates when
// source == PairsBootstrap (rows resampled to the chain length).
struct WeightedOptResult {
  std::vector<Eigen::VectorXd> theta_grid;
  Eigen::MatrixXd target_draws;                    // S x a, centered
  std::vector<Eigen::VectorXd> log_weights;        // per theta
  std::vector<double> ess;                         // per theta
  std::vector<bool> low_ess;                       // per theta
  ChainDiagnostics diag;

  // Absolute-scale weighted sample for one grid point.
  WeightedSample sample_at(std::size_t theta_index) const;
};

WeightedOptResult run_weighted_optimization_sampler(
    const TargetSpec& target, const MultiViewReconstruction& mv,
    const std::vector<Eigen::VectorXd>& theta_grid, TargetDrawSource source,
    const SamplerConfig& config,
    const Eigen::MatrixXd& boot_draws = Eigen::MatrixXd());

// Same, but reusing a previously run optimization chain.
WeightedOptResult weight_optimization_draws(
    const TargetSpec& target, const MultiViewReconstruction& mv,
    const OptimizationDraws& opt, const std::vector<Eigen::VectorXd>& theta_grid,
    TargetDrawSource source, const SamplerConfig& config,
    const Eigen::MatrixXd& boot_draws = Eigen::MatrixXd());

// Wild-bootstrap chain over (alpha, V_1..V_K) targeting
//   prod_i h(alpha_i) * prod_k g_k(omega_k^B(alpha, V_k)),
// omega^B_k = M_tilde_k (W alpha + theta) + sum_b coef V_b + L_tilde_k.
struct WildSample {
  Eigen::MatrixXd t_draws;                 // S x a, centered T(alpha)
  std::vector<Eigen::MatrixXd> omega_draws;  // per view: S x p_omega
  bool degenerate = false;                 // zero wild map (perfect fit)
  ChainDiagnostics diag;
};

WildSample run_wild_bootstrap_sampler(const Eigen::MatrixXd& wild_map,
                                      const Eigen::VectorXd& theta,
                                      const MultiViewReconstruction& mv,
                                      const SamplerConfig& config);

// Density-ratio log-weights that move a wild sample from the null it was
// drawn at to another null value.
Eigen::VectorXd wild_reweight(const WildSample& sample,
                              const MultiViewReconstruction& mv,
                              const Eigen::VectorXd& theta_ref,
                              const Eigen::VectorXd& theta_new);

}  // namespace selinf
