#include "selinf/exact1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selinf/errors.hpp"
#include "selinf/numeric.hpp"

namespace selinf {

namespace {

constexpr double kWindow = 12.0;

double phi(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

void check_simple(const SimpleExample& ex) {
  if (ex.n < 2) throw std::invalid_argument("simple example: n must be >= 2");
  if (ex.randomization.dim() != 1) {
    throw std::invalid_argument("simple example: randomization must be 1-D");
  }
}

}  // namespace

double gaussian_rare_event_bound(double scale) { return 2.5 * (1.0 + scale); }

double exact_plugin_cdf(const SimpleExample& ex, double t) {
  check_simple(ex);
  if (!std::isfinite(t)) {
    throw std::invalid_argument("exact_plugin_cdf: t must be finite");
  }
  const double offset = ex.threshold - std::sqrt(double(ex.n)) * ex.mu;
  if (ex.randomization.family() == RandomizationFamily::Gaussian &&
      std::abs(offset) > gaussian_rare_event_bound(ex.randomization.scale())) {
    throw rare_event_error(
        "exact_plugin_cdf: threshold offset " + std::to_string(offset) +
        " is outside the local-alternatives regime for Gaussian "
        "randomization");
  }
  auto integrand = [&](double z) {
    return ex.randomization.survival(offset - z) * phi(z);
  };
  const double den = adaptive_quadrature(integrand, -kWindow, kWindow, 1e-10);
  if (den < 1e-300) {
    throw rare_event_error(
        "exact_plugin_cdf: selection probability underflows (rare-event "
        "regime)");
  }
  if (t <= -kWindow) return 0.0;
  const double num =
      adaptive_quadrature(integrand, -kWindow, std::min(t, kWindow), 1e-10);
  return std::clamp(num / den, 0.0, 1.0);
}

double WeightedStats::cdf(double t) const {
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < stats.size(); ++b) {
    den += probs[b];
    if (stats[b] <= t) num += probs[b];
  }
  if (den <= 0.0) {
    throw rare_event_error("weighted bootstrap: all selection weights underflow");
  }
  return num / den;
}

double WeightedStats::survival_abs(double t) const {
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < stats.size(); ++b) {
    den += probs[b];
    if (std::abs(stats[b]) >= t) num += probs[b];
  }
  if (den <= 0.0) {
    throw rare_event_error("weighted bootstrap: all selection weights underflow");
  }
  return num / den;
}

WeightedStats bootstrap_table(const SimpleExample& ex, int B, RngStream& rng) {
  check_simple(ex);
  const int n = ex.n;
  if (ex.y.size() != n) {
    throw std::invalid_argument("bootstrap_table: data vector has wrong length");
  }
  const double root_n = std::sqrt(double(n));
  const double offset = ex.threshold - root_n * ex.mu;
  // Plain sequential sums so resampled and original totals cancel exactly
  // on degenerate data.
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += ex.y[i];
  WeightedStats out;
  out.stats.reserve(B);
  out.probs.reserve(B);
  for (int b = 0; b < B; ++b) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += ex.y[rng.uniform_int(n)];
    const double stat = (acc - total) / root_n;
    out.stats.push_back(stat);
    out.probs.push_back(ex.randomization.survival(offset - stat));
  }
  return out;
}

double exact_boot_cdf(const SimpleExample& ex, double t, int B,
                      RngStream& rng) {
  if (B < 1000) {
    throw std::invalid_argument("exact_boot_cdf: needs B >= 1000 replicates");
  }
  return bootstrap_table(ex, B, rng).cdf(t);
}

WeightedStats wild_table(const SimpleExample& ex, int S, RngStream& rng,
                         WildWeightLaw law) {
  check_simple(ex);
  const int n = ex.n;
  if (ex.y.size() != n) {
    throw std::invalid_argument("wild_table: data vector has wrong length");
  }
  const double ybar = ex.y.mean();
  const double root_n = std::sqrt(double(n));
  const double offset = ex.threshold - root_n * ex.mu;
  // Mammen two-point law: mean 0, variance 1, skewness 1.
  const double g = (std::sqrt(5.0) + 1.0) / 2.0;
  const double mam_lo = 1.0 - g, mam_hi = g;
  const double p_lo = g / std::sqrt(5.0);
  WeightedStats out;
  out.stats.reserve(S);
  out.probs.reserve(S);
  for (int s = 0; s < S; ++s) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = (law == WildWeightLaw::Normal)
                           ? rng.normal()
                           : (rng.uniform() < p_lo ? mam_lo : mam_hi);
      acc += (ex.y[i] - ybar) * a;
    }
    const double stat = acc / root_n;
    out.stats.push_back(stat);
    out.probs.push_back(ex.randomization.survival(offset - stat));
  }
  return out;
}

double simple_wild_cdf(const SimpleExample& ex, double t, int S,
                       RngStream& rng, WildWeightLaw law) {
  if (S < 1000) {
    throw std::invalid_argument("simple_wild_cdf: needs S >= 1000 draws");
  }
  return wild_table(ex, S, rng, law).cdf(t);
}

SimpleGeometry simple_example_geometry(const SimpleExample& ex,
                                       double omega_obs) {
  check_simple(ex);
  const double root_n = std::sqrt(double(ex.n));
  const double T_obs = root_n * ex.y.mean();
  const double v_obs = T_obs + omega_obs;

  Eigen::VectorXd D(1), theta(1);
  D << T_obs;
  theta << root_n * ex.mu;
  TargetSpec target =
      make_target(D, Eigen::MatrixXd::Identity(1, 1),
                  Eigen::MatrixXd::Identity(1, 1),
                  Eigen::MatrixXd::Identity(1, 1), theta);

  AffineReconstruction recon;
  recon.data_coef = -Eigen::MatrixXd::Identity(1, 1);
  recon.offset = Eigen::VectorXd::Zero(1);
  OptBlock vb;
  vb.label = "v";
  vb.coef = Eigen::MatrixXd::Identity(1, 1);
  vb.region = ConstraintRegion::box(
      ex.threshold, std::numeric_limits<double>::infinity(), 1);
  vb.observed = Eigen::VectorXd::Constant(1, v_obs);
  recon.blocks.push_back(std::move(vb));

  BoundView view = bind_view(recon, ex.randomization, D,
                             Eigen::MatrixXd::Identity(1, 1), target);
  SimpleGeometry out{std::move(target), compose_views({std::move(view)}),
                     Eigen::MatrixXd()};
  out.wild_map = ((ex.y.array() - ex.y.mean()) / root_n).matrix().transpose();
  return out;
}

}  // namespace selinf
