#include <doctest.h>

#include <cmath>

#include "selinf/errors.hpp"
#include "selinf/numeric.hpp"
#include "selinf/pivots.hpp"
#include "selinf/rng.hpp"

using namespace selinf;

namespace {

WeightedSample unit_sample(const std::vector<double>& draws) {
  WeightedSample s;
  s.draws.resize(draws.size(), 1);
  for (std::size_t i = 0; i < draws.size(); ++i) s.draws(i, 0) = draws[i];
  s.log_weights = Eigen::VectorXd::Zero(draws.size());
  return s;
}

Eigen::VectorXd one(double x) { return Eigen::VectorXd::Constant(1, x); }

const Eigen::MatrixXd kUnit = Eigen::MatrixXd::Identity(1, 1);

}  // namespace

TEST_CASE("plugin pivot corner cases") {
  // every draw strictly below the observed statistic -> survival 0
  const WeightedSample s = unit_sample({0.1, -0.2, 0.3, 0.05});
  const PivotValue pv = plugin_pivot(s, one(2.0), one(0.0), kUnit);
  CHECK(pv.survival == 0.0);
  CHECK(pv.one_sided == 1.0);  // all draws <= T_obs

  // symmetric no-selection situation: T_obs = theta gives one-sided ~ 1/2
  RngStream rng(3);
  std::vector<double> sym(20000);
  for (auto& v : sym) v = rng.normal();
  const PivotValue pv2 = plugin_pivot(unit_sample(sym), one(0.0), one(0.0), kUnit);
  CHECK(std::abs(pv2.one_sided - 0.5) < 0.02);
  CHECK(pv2.survival == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(plugin_pivot(WeightedSample{Eigen::MatrixXd(), Eigen::VectorXd()},
                               one(0.0), one(0.0), kUnit),
                  std::invalid_argument);
}

TEST_CASE("plugin pivot rejects all-zero weights") {
  WeightedSample s = unit_sample({0.0, 1.0});
  s.log_weights = Eigen::VectorXd::Constant(
      2, -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(plugin_pivot(s, one(0.0), one(0.0), kUnit), numeric_error);
}

TEST_CASE("weighted bootstrap pivot") {
  SUBCASE("degenerate empirical law: 0 >= 0 always") {
    std::vector<Eigen::VectorXd> stats(50, Eigen::VectorXd::Zero(1));
    std::vector<double> probs(50, 0.3);
    CHECK(bootstrap_pivot_weighted(stats, probs, 0.0) == 1.0);
  }
  SUBCASE("equal probabilities reduce to the empirical survival") {
    RngStream rng(5);
    std::vector<Eigen::VectorXd> stats;
    for (int i = 0; i < 500; ++i) stats.push_back(rng.normal_vector(1));
    std::vector<double> probs(stats.size(), 0.42);
    const double obs = 0.8;
    double surv = 0.0;
    for (const auto& s : stats) surv += s.norm() >= obs;
    surv /= stats.size();
    CHECK(bootstrap_pivot_weighted(stats, probs, obs) ==
          doctest::Approx(surv).epsilon(1e-12));
  }
  SUBCASE("all-zero probabilities error out") {
    std::vector<Eigen::VectorXd> stats(3, Eigen::VectorXd::Zero(1));
    std::vector<double> probs(3, 0.0);
    CHECK_THROWS_AS(bootstrap_pivot_weighted(stats, probs, 0.0), numeric_error);
    std::vector<double> bad(3, 1.5);
    CHECK_THROWS_AS(bootstrap_pivot_weighted(stats, bad, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("ci inversion") {
  // no-selection limit: one-sided pivot is the shifted normal CDF and the
  // interval matches the classical z-interval to one grid cell
  const double T_obs = 1.3, sd = 0.8, alpha = 0.1;
  auto pivot_fn = [&](double th) { return normal_cdf((T_obs - th) / sd); };
  std::vector<double> grid;
  const int G = 400;
  for (int i = 0; i < G; ++i) grid.push_back(T_obs - 6 * sd + 12.0 * sd * i / (G - 1));
  const double cell = 12.0 * sd / (G - 1);
  const CiResult ci = invert_ci(pivot_fn, grid, alpha);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  CHECK(!ci.degenerate);
  CHECK(!ci.noncontiguous);
  CHECK(std::abs(ci.lo - (T_obs - z * sd)) <= cell + 1e-12);
  CHECK(std::abs(ci.hi - (T_obs + z * sd)) <= cell + 1e-12);

  // CI duality at grid resolution
  for (double th : grid) {
    const double piv = pivot_fn(th);
    const bool inside = th >= ci.lo && th <= ci.hi;
    const bool accepted = piv >= alpha / 2 && piv <= 1 - alpha / 2;
    CHECK(inside == accepted);
  }

  // alpha = 1 collapses to the pivot-median grid point
  const CiResult deg = invert_ci(pivot_fn, grid, 1.0);
  CHECK(deg.degenerate);
  CHECK(std::abs(pivot_fn(deg.lo) - 0.5) < 0.02);

  // a noisy pivot with a gap returns the hull and warns
  auto noisy = [&](double th) {
    if (std::abs(th - T_obs) < 0.05) return 0.999;  // dip out of the region
    return pivot_fn(th);
  };
  const CiResult hull = invert_ci(noisy, grid, alpha);
  CHECK(hull.noncontiguous);
  CHECK(hull.lo <= ci.lo + cell);
  CHECK(hull.hi >= ci.hi - cell);
}

TEST_CASE("tilt_reuse") {
  RngStream rng(9);
  const int S = 60000;
  WeightedSample s;
  s.draws.resize(S, 1);
  for (int i = 0; i < S; ++i) s.draws(i, 0) = rng.normal();  // N(0,1) at ref 0
  s.log_weights = Eigen::VectorXd::Zero(S);

  SUBCASE("identity tilt changes nothing") {
    const WeightedSample t = tilt_reuse(s, one(0.0), one(0.0), kUnit);
    CHECK((t.log_weights - s.log_weights).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("tilting to mean 1 reweights the mean to 1") {
    const WeightedSample t = tilt_reuse(s, one(0.0), one(1.0), kUnit);
    const Eigen::VectorXd w = normalize_log_weights(t.log_weights);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    const double mean = (w.array() * s.draws.col(0).array()).sum();
    CHECK(std::abs(mean - 1.0) < 0.05);
    CHECK(t.ess() > 1000.0);
  }
}

TEST_CASE("two-sided p-value convention") {
  PivotValue pv{0.8, 0.1};
  CHECK(two_sided_p_value(pv, 1) == doctest::Approx(0.2));
  CHECK(two_sided_p_value(pv, 3) == doctest::Approx(0.8));
}
