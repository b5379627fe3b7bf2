#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "selinf/errors.hpp"
#include "selinf/exact1d.hpp"
#include "selinf/numeric.hpp"
#include "selinf/pivots.hpp"
#include "selinf/samplers.hpp"
#include "selinf/selectors.hpp"

using namespace selinf;

namespace {

// A simple-example dataset that actually lands in the selection region.
struct SelectedSimple {
  SimpleExample ex;
  double omega_obs;
};

SelectedSimple make_selected_simple(int n, double mu, double threshold,
                                    RandomizationFamily fam, double scale,
                                    std::uint64_t seed) {
  RandomizationDist dist(fam, scale, 1);
  RngStream rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = mu + rng.normal();
    const double omega = dist.sample(rng)[0];
    if (std::sqrt(double(n)) * y.mean() + omega > threshold) {
      return {SimpleExample{n, threshold, mu, dist, y}, omega};
    }
  }
  throw std::runtime_error("no selection in 1000 attempts");
}

ChainState gaussian_chain_state(int dim, double eta, std::uint64_t seed) {
  ChainState s{{ChainState::Block{"x", Eigen::VectorXd::Zero(dim),
                                  ConstraintRegion::unconstrained(dim)}},
               eta, 0, RngStream(seed)};
  return s;
}

}  // namespace

TEST_CASE("langevin_step basics") {
  SUBCASE("vanishing step size leaves the state unchanged") {
    ChainState s = gaussian_chain_state(2, 1e-30, 1);
    s.blocks[0].value << 0.7, -0.2;
    const ChainState next = langevin_step(
        s, [](const std::vector<Eigen::VectorXd>&) {
          return std::vector<Eigen::VectorXd>{Eigen::VectorXd::Zero(2)};
        });
    CHECK((next.blocks[0].value - s.blocks[0].value).lpNorm<Eigen::Infinity>() <
          1e-10);
    CHECK(next.iteration == 1);
  }
  SUBCASE("proposals below zero are clamped by a nonneg block") {
    ChainState s{{ChainState::Block{"v", Eigen::VectorXd::Zero(1),
                                    ConstraintRegion::nonneg(1)}},
                 3e-7, 0, RngStream(2)};
    const ChainState next = langevin_step(
        s, [](const std::vector<Eigen::VectorXd>&) {
          return std::vector<Eigen::VectorXd>{
              Eigen::VectorXd::Constant(1, -1e6)};  // proposal ~ -0.3
        });
    CHECK(next.blocks[0].value[0] == 0.0);
  }
  SUBCASE("non-finite gradients are reported with the block name") {
    ChainState s = gaussian_chain_state(1, 0.1, 3);
    try {
      langevin_step(s, [](const std::vector<Eigen::VectorXd>&) {
        return std::vector<Eigen::VectorXd>{
            Eigen::VectorXd::Constant(1, std::nan(""))};
      });
      FAIL("expected numeric_error");
    } catch (const numeric_error& e) {
      CHECK(std::string(e.what()).find("'x'") != std::string::npos);
    }
  }
}

TEST_CASE("unadjusted chain reproduces standard Gaussian moments") {
  ChainState s = gaussian_chain_state(1, 0.05, 11);
  auto grad = [](const std::vector<Eigen::VectorXd>& v) {
    return std::vector<Eigen::VectorXd>{(-v[0]).eval()};
  };
  for (int i = 0; i < 10000; ++i) s = langevin_step(s, grad);
  double m = 0.0, m2 = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    s = langevin_step(s, grad);
    m += s.blocks[0].value[0];
    m2 += s.blocks[0].value[0] * s.blocks[0].value[0];
  }
  m /= N;
  m2 /= N;
  CHECK(std::abs(m) < 0.03);
  CHECK(m2 - m * m == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("projected chain matches quadrature on a truncated 2-D Gaussian") {
  Eigen::MatrixXd Sigma(2, 2);
  Sigma << 1.0, 0.5, 0.5, 1.0;
  const Eigen::MatrixXd Prec = Sigma.inverse();

  auto density = [&](double a, double b) {
    Eigen::Vector2d x(a, b);
    return std::exp(-0.5 * x.dot(Prec * x));
  };
  auto inner = [&](double a, auto&& f) {
    return adaptive_quadrature([&](double b) { return f(a, b); }, 0.0, 9.0,
                               1e-9);
  };
  const double mass = adaptive_quadrature(
      [&](double a) { return inner(a, density); }, 0.0, 9.0, 1e-9);
  const double mean0 =
      adaptive_quadrature(
          [&](double a) {
            return inner(a,
                         [&](double u, double v) { return u * density(u, v); });
          },
          0.0, 9.0, 1e-9) /
      mass;

  // The projection at the orthant boundary biases the chain mean at rate
  // O(sqrt(eta)), so the step size must be small and the run long; 1e5
  // thinned draws are retained.
  ChainState s{{ChainState::Block{"x", Eigen::VectorXd::Ones(2),
                                  ConstraintRegion::nonneg(2)}},
               0.001, 0, RngStream(21)};
  auto grad = [&](const std::vector<Eigen::VectorXd>& v) {
    return std::vector<Eigen::VectorXd>{(-Prec * v[0]).eval()};
  };
  for (int i = 0; i < 100000; ++i) s = langevin_step(s, grad);
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  const long N = 100000, thin = 80;
  for (long i = 0; i < N * thin; ++i) {
    s = langevin_step(s, grad);
    if ((i + 1) % thin == 0) acc += s.blocks[0].value;
  }
  acc /= N;
  CHECK(std::abs(acc[0] - mean0) < 0.03);
  CHECK(std::abs(acc[1] - mean0) < 0.03);
}

TEST_CASE("selective sampler: seed determinism") {
  const SelectedSimple sel = make_selected_simple(
      100, 0.2, 1.0, RandomizationFamily::Logistic, 1.0, 31);
  const SimpleGeometry geo = simple_example_geometry(sel.ex, sel.omega_obs);
  SamplerConfig cfg;
  cfg.steps = 2000;
  cfg.burnin = 500;
  cfg.seed = 99;
  const WeightedSample a = run_selective_sampler(geo.target, geo.mv, cfg);
  const WeightedSample b = run_selective_sampler(geo.target, geo.mv, cfg);
  CHECK((a.draws - b.draws).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("selective sampler: flat randomization recovers the Gaussian") {
  SelectedSimple sel = make_selected_simple(
      100, 0.0, -5.0, RandomizationFamily::Logistic, 1.0, 37);
  sel.ex.randomization =
      RandomizationDist(RandomizationFamily::Logistic, 1e8, 1);
  const SimpleGeometry geo = simple_example_geometry(sel.ex, sel.omega_obs);
  SamplerConfig cfg;
  cfg.steps = 40000;
  cfg.burnin = 3000;
  cfg.thin = 5;
  cfg.eta = 0.08;
  cfg.seed = 5;
  const WeightedSample s = run_selective_sampler(geo.target, geo.mv, cfg);
  const double theta = geo.target.theta[0];
  const double mean = s.draws.col(0).mean();
  const double var =
      (s.draws.col(0).array() - mean).square().sum() / (s.draws.rows() - 1);
  CHECK(std::abs(mean - theta) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("selective sampler agrees with the exact conditional CDF") {
  const SelectedSimple sel = make_selected_simple(
      64, 0.25, 2.4, RandomizationFamily::Logistic, 1.0, 41);
  const SimpleGeometry geo = simple_example_geometry(sel.ex, sel.omega_obs);
  SamplerConfig cfg;
  cfg.steps = 50000;
  cfg.burnin = 20000;
  cfg.thin = 8;
  cfg.eta = 0.01;
  cfg.seed = 7;
  const WeightedSample s = run_selective_sampler(geo.target, geo.mv, cfg);
  const double theta = geo.target.theta[0];
  for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    double frac = 0.0;
    for (long i = 0; i < s.draws.rows(); ++i) {
      frac += s.draws(i, 0) <= theta + t;
    }
    frac /= s.draws.rows();
    CHECK(std::abs(frac - exact_plugin_cdf(sel.ex, t)) < 0.025);
  }
}

TEST_CASE("weighted optimization sampler agrees with the oracle on a grid") {
  const SelectedSimple sel = make_selected_simple(
      64, 0.25, 2.4, RandomizationFamily::Logistic, 1.0, 43);
  const SimpleGeometry geo = simple_example_geometry(sel.ex, sel.omega_obs);
  SamplerConfig cfg;
  cfg.steps = 40000;
  cfg.burnin = 10000;
  cfg.thin = 5;
  cfg.eta = 0.01;
  cfg.seed = 13;

  const double root_n = std::sqrt(double(sel.ex.n));
  std::vector<Eigen::VectorXd> thetas;
  std::vector<double> mus = {sel.ex.mu - 0.15, sel.ex.mu, sel.ex.mu + 0.15};
  for (double mu : mus) {
    thetas.push_back(Eigen::VectorXd::Constant(1, root_n * mu));
  }
  const WeightedOptResult w = run_weighted_optimization_sampler(
      geo.target, geo.mv, thetas, TargetDrawSource::Gaussian, cfg);

  for (std::size_t i = 0; i < mus.size(); ++i) {
    SimpleExample ex = sel.ex;
    ex.mu = mus[i];
    const double t = root_n * (sel.ex.y.mean() - mus[i]);
    const double oracle = exact_plugin_cdf(ex, t);
    const PivotValue pv = plugin_pivot(w.sample_at(i), geo.target.T_obs,
                                       thetas[i], geo.target.sigma_T);
    CHECK(std::abs(pv.one_sided - oracle) < 0.02);
    CHECK(w.ess[i] > 500.0);
  }
}

TEST_CASE("weighted sampler pivot is monotone in theta (Gaussian omega)") {
  const SelectedSimple sel = make_selected_simple(
      64, 0.1, 1.2, RandomizationFamily::Gaussian, 1.0, 47);
  const SimpleGeometry geo = simple_example_geometry(sel.ex, sel.omega_obs);
  SamplerConfig cfg;
  cfg.steps = 50000;
  cfg.burnin = 10000;
  cfg.thin = 10;
  cfg.eta = 0.005;
  cfg.seed = 17;
  const double root_n = std::sqrt(double(sel.ex.n));
  std::vector<Eigen::VectorXd> thetas;
  std::vector<double> oracle;
  for (int i = 0; i <= 10; ++i) {
    const double mu = sel.ex.mu - 0.25 + 0.05 * i;
    thetas.push_back(Eigen::VectorXd::Constant(1, root_n * mu));
    SimpleExample ex = sel.ex;
    ex.mu = mu;
    oracle.push_back(exact_plugin_cdf(ex, root_n * (sel.ex.y.mean() - mu)));
  }
  const WeightedOptResult w = run_weighted_optimization_sampler(
      geo.target, geo.mv, thetas, TargetDrawSource::Gaussian, cfg);
  double prev = 2.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (i > 0) CHECK(oracle[i] < oracle[i - 1]);
    const double piv = plugin_pivot(w.sample_at(i), geo.target.T_obs,
                                    thetas[i], geo.target.sigma_T)
                           .one_sided;
    CHECK(std::abs(piv - oracle[i]) < 0.02);
    CHECK(piv <= prev + 0.02);
    prev = piv;
  }
}

TEST_CASE("weighted sampler: flat randomization gives equal weights") {
  SelectedSimple sel = make_selected_simple(
      50, 0.0, -3.0, RandomizationFamily::Logistic, 1.0, 53);
  sel.ex.randomization =
      RandomizationDist(RandomizationFamily::Logistic, 1e9, 1);
  const SimpleGeometry geo = simple_example_geometry(sel.ex, sel.omega_obs);
  SamplerConfig cfg;
  cfg.steps = 2000;
  cfg.burnin = 200;
  cfg.seed = 19;
  const std::vector<Eigen::VectorXd> thetas = {geo.target.T_obs};
  const WeightedOptResult w = run_weighted_optimization_sampler(
      geo.target, geo.mv, thetas, TargetDrawSource::Gaussian, cfg);
  CHECK(w.ess[0] == doctest::Approx(double(cfg.steps)).epsilon(1e-6));
}

TEST_CASE("wild bootstrap sampler") {
  const SelectedSimple sel = make_selected_simple(
      80, 0.2, 1.6, RandomizationFamily::Logistic, 1.0, 59);
  const SimpleGeometry geo = simple_example_geometry(sel.ex, sel.omega_obs);

  SUBCASE("flat randomization: alpha stays standard normal") {
    SimpleExample ex_flat = sel.ex;
    ex_flat.randomization =
        RandomizationDist(RandomizationFamily::Logistic, 1e9, 1);
    const SimpleGeometry geo_flat =
        simple_example_geometry(ex_flat, sel.omega_obs);
    SamplerConfig cfg;
    cfg.steps = 20000;
    cfg.burnin = 2000;
    cfg.thin = 4;
    cfg.eta = 0.05;
    cfg.seed = 23;
    const WildSample ws = run_wild_bootstrap_sampler(
        geo_flat.wild_map, geo_flat.target.theta, geo_flat.mv, cfg);
    const double mean = ws.t_draws.col(0).mean();
    const double var = (ws.t_draws.col(0).array() - mean).square().sum() /
                       (ws.t_draws.rows() - 1);
    const double expect = geo_flat.wild_map.row(0).squaredNorm();
    CHECK(std::abs(mean) < 0.05);
    CHECK(var == doctest::Approx(expect).epsilon(0.08));
  }

  SUBCASE("chain version agrees with direct Monte Carlo") {
    SamplerConfig cfg;
    cfg.steps = 30000;
    cfg.burnin = 3000;
    cfg.thin = 5;
    cfg.eta = 0.05;
    cfg.seed = 29;
    const WildSample ws = run_wild_bootstrap_sampler(
        geo.wild_map, geo.target.theta, geo.mv, cfg);
    REQUIRE(!ws.degenerate);
    RngStream mc(31);
    const WeightedStats direct = wild_table(sel.ex, 60000, mc);
    for (double t : {-1.5, -0.5, 0.0, 0.5, 1.5}) {
      double frac = 0.0;
      for (long i = 0; i < ws.t_draws.rows(); ++i) {
        frac += ws.t_draws(i, 0) <= t;
      }
      frac /= ws.t_draws.rows();
      CHECK(std::abs(frac - direct.cdf(t)) < 0.02);
    }
  }

  SUBCASE("perfect fit is reported as degenerate") {
    SamplerConfig cfg;
    cfg.steps = 100;
    cfg.burnin = 10;
    const WildSample ws = run_wild_bootstrap_sampler(
        Eigen::MatrixXd::Zero(1, sel.ex.n), geo.target.theta, geo.mv, cfg);
    CHECK(ws.degenerate);
  }
}

TEST_CASE("cross-sampler agreement on a lasso fixture") {
  RngStream rng(61);
  const int n = 100, p = 10;
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal() / std::sqrt(double(n));
  }
  Eigen::VectorXd y = rng.normal_vector(n);
  y += X.col(0) * 4.0 - X.col(3) * 3.5;
  RandomizationDist dist(RandomizationFamily::Logistic, 1.0, p);
  Eigen::VectorXd omega = dist.sample(rng);
  LassoResult fit = solve_randomized_lasso(X, y, 0.8, 0.1, omega, Loss::Gaussian);
  while (fit.outcome.active.empty()) {
    omega = dist.sample(rng);
    fit = solve_randomized_lasso(X, y, 0.8, 0.1, omega, Loss::Gaussian);
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, 1);
  A(0, 0) = 1.0;  // first refitted coefficient of the selected model
  RngStream brng(67);
  const auto [sT, sDT] =
      pairs_bootstrap_cov(X, y, fit.outcome.active, A, 600, brng);
  const TargetSpec target = make_target(fit.outcome.D_obs, A, sT, sDT,
                                        Eigen::VectorXd::Zero(1));
  const BoundView view =
      bind_view(fit.recon, dist, fit.outcome.D_obs, sDT, target);
  const MultiViewReconstruction mv = compose_views({view});

  SamplerConfig cfg;
  cfg.steps = 25000;
  cfg.burnin = 5000;
  cfg.thin = 6;
  cfg.eta = 0.02;
  cfg.seed = 71;
  const WeightedSample sel_draws = run_selective_sampler(target, mv, cfg);
  const double piv_selective =
      plugin_pivot(sel_draws, target.T_obs, target.theta, target.sigma_T)
          .one_sided;

  SamplerConfig wcfg = cfg;
  wcfg.eta = 0.03;
  const WeightedOptResult w = run_weighted_optimization_sampler(
      target, mv, {target.theta}, TargetDrawSource::Gaussian, wcfg);
  const double piv_weighted =
      plugin_pivot(w.sample_at(0), target.T_obs, target.theta, target.sigma_T)
          .one_sided;

  CHECK(std::abs(piv_selective - piv_weighted) < 0.03);
}
