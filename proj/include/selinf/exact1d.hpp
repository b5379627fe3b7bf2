#pragma once

#include <vector>

#include <Eigen/Core>

#include "selinf/randomization.hpp"
#include "selinf/reconstruction.hpp"
#include "selinf/rng.hpp"
#include "selinf/targets.hpp"

namespace selinf {

// Inference for a mean after the randomized threshold selection
//   sqrt(n) ybar + omega > threshold,
// with data variance known and equal to 1. Serves as the ground-truth
// oracle for every sampler and pivot construction.
struct SimpleExample {
  int n;
  double threshold;
  double mu;  // null mean
  RandomizationDist randomization;  // dim 1
  Eigen::VectorXd y;                // data, used by the bootstrap variants
};

// Conditional CDF F(t) = P{Z <= t | Z + sqrt(n) mu + omega > threshold}
// under Z ~ N(0,1) independent of omega, by adaptive quadrature over a
// [-12, 12] window (tail mass < 1e-30). Throws rare_event_error when the
// denominator underflows, or eagerly for Gaussian randomization when the
// threshold offset |threshold - sqrt(n) mu| exceeds 2.5 (1 + scale):
// Gaussian randomization is only valid near the selection region, while the
// Lipschitz families carry no such restriction.
double exact_plugin_cdf(const SimpleExample& ex, double t);

// Offset beyond which exact_plugin_cdf refuses Gaussian randomization.
double gaussian_rare_event_bound(double scale);

struct WeightedStats {
  std::vector<double> stats;
  std::vector<double> probs;
  double cdf(double t) const;
  double survival_abs(double t) const;  // weighted P{|stat| >= t}
};

// Sampling-with-replacement bootstrap statistics sqrt(n)(ybar* - ybar),
// each carrying its selection probability G_bar(threshold - sqrt(n) mu - stat).
WeightedStats bootstrap_table(const SimpleExample& ex, int B, RngStream& rng);

// Selection-probability-weighted bootstrap CDF at t (requires B >= 1000).
double exact_boot_cdf(const SimpleExample& ex, double t, int B, RngStream& rng);

enum class WildWeightLaw { Normal, Mammen };

// Direct Monte Carlo over wild-bootstrap weights: statistics
// (1/sqrt(n)) sum (y_i - ybar) alpha_i weighted by their selection
// probabilities.
WeightedStats wild_table(const SimpleExample& ex, int S, RngStream& rng,
                         WildWeightLaw law = WildWeightLaw::Normal);

double simple_wild_cdf(const SimpleExample& ex, double t, int S,
                       RngStream& rng, WildWeightLaw law = WildWeightLaw::Normal);

// The simple example expressed in engine terms, for sampler validation:
// target T = sqrt(n) ybar with unit variance and null theta = sqrt(n) mu;
// one view with omega = v - T, v constrained to [threshold, inf).
struct SimpleGeometry {
  TargetSpec target;
  MultiViewReconstruction mv;
  Eigen::MatrixXd wild_map;  // 1 x n
};

SimpleGeometry simple_example_geometry(const SimpleExample& ex,
                                       double omega_obs);

}  // namespace selinf
