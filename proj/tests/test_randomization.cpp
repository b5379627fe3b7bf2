#include <doctest.h>

#include <cmath>
#include <vector>

#include "selinf/numeric.hpp"
#include "selinf/randomization.hpp"
#include "selinf/rng.hpp"

using namespace selinf;

namespace {

const RandomizationFamily kFamilies[] = {RandomizationFamily::Gaussian,
                                         RandomizationFamily::Laplace,
                                         RandomizationFamily::Logistic};

Eigen::VectorXd scalar(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("log_density closed-form spot values") {
  RandomizationDist gauss(RandomizationFamily::Gaussian, 1.0, 1);
  CHECK(gauss.log_density(scalar(0.0)) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));

  RandomizationDist lap(RandomizationFamily::Laplace, 1.0, 1);
  CHECK(lap.log_density(scalar(0.0)) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(gauss.log_density(Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("densities integrate to one (quadrature oracle)") {
  for (auto fam : kFamilies) {
    for (double scale : {0.5, 1.0, 2.3}) {
      RandomizationDist d(fam, scale, 1);
      auto pdf = [&](double x) { return std::exp(d.log_density(scalar(x))); };
      const double mass =
          adaptive_quadrature(pdf, -60.0 * scale, 60.0 * scale, 1e-12);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("logistic log-density validated by the normalization oracle") {
  // Density value at 1.3 comes out right iff the normalization constant
  // in log_density is right, which the integral pins down.
  RandomizationDist d(RandomizationFamily::Logistic, 1.0, 1);
  const double direct = std::exp(d.log_density(scalar(1.3)));
  const double expected =
      std::exp(-1.3) / std::pow(1.0 + std::exp(-1.3), 2.0);
  CHECK(direct == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("grad_log_density matches finite differences") {
  RngStream rng(7);
  const double h = 1e-6;
  for (auto fam : kFamilies) {
    for (double scale : {0.7, 1.0, 1.9}) {
      RandomizationDist d(fam, scale, 1);
      for (int i = 0; i < 100; ++i) {
        double x = 6.0 * scale * (rng.uniform() - 0.5);
        if (fam == RandomizationFamily::Laplace && std::abs(x) < 1e-3) {
          x += 0.01;  // finite differences are invalid across the kink
        }
        const double fd = (d.log_density(scalar(x + h)) -
                           d.log_density(scalar(x - h))) /
                          (2.0 * h);
        const double g = d.grad_log_density(scalar(x))[0];
        CHECK(g == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("gaussian score and laplace subgradient conventions") {
  RandomizationDist gauss(RandomizationFamily::Gaussian, 2.0, 1);
  CHECK(gauss.grad_log_density(scalar(3.0))[0] ==
        doctest::Approx(-3.0 / 4.0).epsilon(1e-12));
  RandomizationDist lap(RandomizationFamily::Laplace, 1.0, 1);
  CHECK(lap.grad_log_density(scalar(2.0))[0] == doctest::Approx(-1.0));
  CHECK(lap.grad_log_density(scalar(0.0))[0] == 0.0);
  RandomizationDist logi(RandomizationFamily::Logistic, 1.0, 1);
  CHECK(logi.grad_log_density(scalar(0.0))[0] == 0.0);
}

TEST_CASE("survival function values and symmetry") {
  for (auto fam : kFamilies) {
    RandomizationDist d(fam, 1.3, 1);
    CHECK(d.survival(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    for (double x : {-2.0, -0.4, 0.9, 3.1}) {
      CHECK(d.survival(x) + d.survival(-x) ==
            doctest::Approx(1.0).epsilon(1e-12));
      CHECK(d.survival(x) > d.survival(x + 0.1));
    }
  }
  RandomizationDist lap(RandomizationFamily::Laplace, 1.0, 1);
  CHECK(lap.survival(std::log(2.0)) == doctest::Approx(0.25).epsilon(1e-12));
  // quadrature oracle for the tail mass
  RandomizationDist g2(RandomizationFamily::Gaussian, 2.0, 1);
  auto pdf = [&](double x) { return std::exp(g2.log_density(scalar(x))); };
  const double tail = adaptive_quadrature(pdf, 2.0, 60.0, 1e-12);
  CHECK(g2.survival(2.0) == doctest::Approx(tail).epsilon(1e-8));
  CHECK(g2.survival(2.0) == doctest::Approx(0.158655).epsilon(1e-4));
}

TEST_CASE("survival approaches its limits") {
  for (auto fam : kFamilies) {
    for (double scale : {0.5, 1.0, 2.0}) {
      RandomizationDist d(fam, scale, 1);
      const double tol = fam == RandomizationFamily::Laplace ? 1e-2 : 1e-3;
      CHECK(d.survival(-10.0 * scale) == doctest::Approx(1.0).epsilon(tol));
      CHECK(std::abs(d.survival(10.0 * scale)) < tol);
    }
  }
}

TEST_CASE("sampling: determinism, moments, KS against the model CDF") {
  for (auto fam : kFamilies) {
    RandomizationDist d(fam, 1.0, 5);
    RngStream r1(42), r2(42);
    CHECK(d.sample(r1) == d.sample(r2));
  }

  const int N = 100000;
  RandomizationDist gauss(RandomizationFamily::Gaussian, 1.0, 1);
  RandomizationDist lap(RandomizationFamily::Laplace, 1.0, 1);
  RngStream rng(11);
  double mean = 0.0;
  std::vector<double> gdraws(N), ldraws(N);
  for (int i = 0; i < N; ++i) {
    gdraws[i] = gauss.sample(rng)[0];
    ldraws[i] = lap.sample(rng)[0];
    mean += gdraws[i];
  }
  mean /= N;
  CHECK(std::abs(mean) < 0.02);  // CLT bound ~ 3/sqrt(N)
  double var = 0.0;
  for (double x : ldraws) var += x * x;
  var /= N;
  CHECK(var == doctest::Approx(2.0).epsilon(0.05));  // Var Laplace(1) = 2

  for (auto fam : kFamilies) {
    RandomizationDist d(fam, 1.0, 1);
    RngStream r(99);
    std::vector<double> draws(N);
    for (int i = 0; i < N; ++i) draws[i] = d.sample(r)[0];
    const double ks = ks_distance(
        std::move(draws), [&](double x) { return 1.0 - d.survival(x); });
    CHECK(ks < 0.01);
  }
}

TEST_CASE("lipschitz constant per family") {
  CHECK(std::isinf(
      RandomizationDist(RandomizationFamily::Gaussian, 1.0, 1).lipschitz_constant()));
  CHECK(RandomizationDist(RandomizationFamily::Laplace, 0.5, 1).lipschitz_constant() ==
        doctest::Approx(2.0));
  CHECK(RandomizationDist(RandomizationFamily::Logistic, 2.0, 1).lipschitz_constant() ==
        doctest::Approx(0.5));
}

TEST_CASE("constructor rejects bad parameters") {
  CHECK_THROWS_AS(RandomizationDist(RandomizationFamily::Gaussian, 0.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(RandomizationDist(RandomizationFamily::Gaussian, 1.0, 0),
                  std::invalid_argument);
}
