#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace selinf {

// Adaptive Simpson quadrature on [lo, hi] with absolute tolerance abs_tol.
double adaptive_quadrature(const std::function<double(double)>& f, double lo,
                           double hi, double abs_tol = 1e-10,
                           int max_depth = 60);

// Standard normal CDF, survival and quantile.
double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);

// Kolmogorov-Smirnov distance between a sample and Unif[0,1].
double ks_uniform(std::vector<double> sample);

// KS distance between a sample and an arbitrary CDF.
double ks_distance(std::vector<double> sample,
                   const std::function<double(double)>& cdf);

double log_sum_exp(const Eigen::VectorXd& logs);

// Normalized weights from log-weights; sums to 1.
Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& logw);

// Effective sample size (sum w)^2 / sum w^2 of self-normalized weights.
double effective_sample_size(const Eigen::VectorXd& logw);

}  // namespace selinf
