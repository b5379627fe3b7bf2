#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "selinf/errors.hpp"
#include "selinf/glm.hpp"
#include "selinf/targets.hpp"

using namespace selinf;

namespace {

Eigen::MatrixXd random_matrix(RngStream& rng, int r, int c) {
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Eigen::MatrixXd scaled_design(RngStream& rng, int n, int p) {
  return random_matrix(rng, n, p) / std::sqrt(double(n));
}

}  // namespace

TEST_CASE("decompose: full target and zero-cross block") {
  RngStream rng(3);
  const int p = 4;
  Eigen::MatrixXd S = random_matrix(rng, p, p);
  S = (S * S.transpose()).eval();
  S += p * Eigen::MatrixXd::Identity(p, p);
  const Eigen::VectorXd D = rng.normal_vector(p);

  // A = I: C = I, F = 0, T = D.
  const TargetSpec full =
      decompose(D, Eigen::MatrixXd::Identity(p, p), S, Eigen::VectorXd::Zero(p));
  CHECK((full.T_obs - D).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((full.C - Eigen::MatrixXd::Identity(p, p)).lpNorm<Eigen::Infinity>() <
        1e-8);
  CHECK(full.F_obs.lpNorm<Eigen::Infinity>() < 1e-8);

  // zero cross-covariance: F = D, the target moves independently.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, 1);
  A(0, 0) = 1.0;
  const TargetSpec indep =
      make_target(D, A, Eigen::MatrixXd::Identity(1, 1),
                  Eigen::MatrixXd::Zero(p, 1), Eigen::VectorXd::Zero(1));
  CHECK((indep.F_obs - D).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("decompose matches direct dense algebra (oracle)") {
  RngStream rng(17);
  const int p = 3;
  Eigen::MatrixXd S = random_matrix(rng, p, p);
  S = (S * S.transpose()).eval() + Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd A = random_matrix(rng, p, 1);
  const Eigen::VectorXd D = rng.normal_vector(p);
  const TargetSpec t = decompose(D, A, S, Eigen::VectorXd::Zero(1));
  // independent dense-algebra route
  const Eigen::MatrixXd sigma_A = A.transpose() * S * A;
  const Eigen::MatrixXd C = S * A * sigma_A.inverse();
  const Eigen::VectorXd D_A =
      (Eigen::MatrixXd::Identity(p, p) - C * A.transpose()) * D;
  CHECK((t.C - C).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((t.F_obs - D_A).lpNorm<Eigen::Infinity>() < 1e-10);
  // reconstruction invariant
  CHECK((t.F_obs + t.C * t.T_obs - D).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("decompose regularizes a singular target covariance") {
  const int p = 2;
  const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
  const TargetSpec t = decompose(Eigen::VectorXd::Ones(p),
                                 Eigen::MatrixXd::Identity(p, p), S,
                                 Eigen::VectorXd::Zero(p));
  CHECK(t.regularized);
}

TEST_CASE("pairs bootstrap: degenerate data gives a null covariance") {
  // Constant response and constant rows: every resample refits identically.
  const int n = 60;
  const Eigen::MatrixXd X =
      Eigen::MatrixXd::Constant(n, 1, 0.3 / std::sqrt(double(n)));
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 2.5);
  RngStream brng(9);
  const auto [sT, sDT] = pairs_bootstrap_cov(
      X, y, {0}, Eigen::MatrixXd::Identity(1, 1), 300, brng);
  CHECK(sT.lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("pairs bootstrap approaches the parametric covariance") {
  RngStream rng(21);
  const int n = 2000, p = 4;
  const Eigen::MatrixXd X = scaled_design(rng, n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();  // true beta = 0
  const std::vector<int> E = {0, 2};
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, 1);
  A(0, 0) = 1.0;  // target = first refitted coefficient
  RngStream brng(31);
  const auto [sT, sDT] = pairs_bootstrap_cov(X, y, E, A, 1200, brng);

  const Eigen::MatrixXd X_E = select_columns(X, E);
  const Eigen::VectorXd beta_bar = ols_coef(X_E, y);
  const double dof = n - 2.0;
  const double s2 = (y - X_E * beta_bar).squaredNorm() / dof;
  const Eigen::MatrixXd param = s2 * (X_E.transpose() * X_E).inverse();
  CHECK(sT(0, 0) == doctest::Approx(param(0, 0)).epsilon(0.10));
}

TEST_CASE("pairs bootstrap is deterministic given the seed") {
  RngStream rng(77);
  const int n = 80, p = 3;
  const Eigen::MatrixXd X = scaled_design(rng, n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, 1);
  A(1, 0) = 1.0;
  RngStream b1(123), b2(123);
  const auto r1 = pairs_bootstrap_cov(X, y, {1}, A, 250, b1);
  const auto r2 = pairs_bootstrap_cov(X, y, {1}, A, 250, b2);
  CHECK((r1.first - r2.first).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((r1.second - r2.second).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("pairs bootstrap output is symmetric PSD") {
  RngStream rng(41);
  const int n = 100, p = 4;
  const Eigen::MatrixXd X = scaled_design(rng, n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal() + X(i, 0);
  RngStream brng(51);
  const auto [sT, sDT] = pairs_bootstrap_cov(
      X, y, {0, 1}, Eigen::MatrixXd::Identity(p, p).leftCols(2), 400, brng);
  CHECK((sT - sT.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sT);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("wild bootstrap target: linearity and closed forms") {
  RngStream rng(61);
  const int n = 50;
  const Eigen::MatrixXd X_E = scaled_design(rng, n, 2);
  const Eigen::VectorXd resid = rng.normal_vector(n);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 1);

  CHECK(wild_bootstrap_target(X_E, resid, A, Eigen::VectorXd::Zero(n)).norm() ==
        0.0);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd direct =
      A.transpose() * (X_E.transpose() * X_E).inverse() * X_E.transpose() *
      resid;
  CHECK((wild_bootstrap_target(X_E, resid, A, ones) - direct)
            .lpNorm<Eigen::Infinity>() < 1e-10);

  const Eigen::VectorXd a1 = rng.normal_vector(n);
  const Eigen::VectorXd a2 = rng.normal_vector(n);
  const Eigen::VectorXd lhs =
      wild_bootstrap_target(X_E, resid, A, (2.0 * a1 - 0.7 * a2).eval());
  const Eigen::VectorXd rhs = 2.0 * wild_bootstrap_target(X_E, resid, A, a1) -
                              0.7 * wild_bootstrap_target(X_E, resid, A, a2);
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("wild bootstrap target variance matches the sandwich (MC oracle)") {
  RngStream rng(71);
  const int n = 120;
  const Eigen::MatrixXd X_E = scaled_design(rng, n, 2);
  const Eigen::VectorXd resid = rng.normal_vector(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 1);
  A(0, 0) = 1.0;
  const Eigen::MatrixXd W = wild_target_map(X_E, resid, A);

  const int N = 100000;
  RngStream arng(81);
  double m = 0.0, v = 0.0;
  for (int i = 0; i < N; ++i) {
    const double t = (W * arng.normal_vector(n))(0);
    m += t;
    v += t * t;
  }
  m /= N;
  v = v / N - m * m;
  const Eigen::MatrixXd G = (X_E.transpose() * X_E).inverse();
  const Eigen::MatrixXd sandwich =
      A.transpose() * G * X_E.transpose() * resid.array().square().matrix().asDiagonal() *
      X_E * G * A;
  CHECK(v == doctest::Approx(sandwich(0, 0)).epsilon(0.05));
}

TEST_CASE("bootstrap redraw budget errors out on impossible refits") {
  // n = 2 rows with |E| = 1: resamples picking the same row twice are fine,
  // but a column of zeros makes every refit singular.
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(5, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(5);
  RngStream rng(4);
  CHECK_THROWS_AS(pairs_bootstrap_cov(X, y, {0},
                                      Eigen::MatrixXd::Identity(2, 2).leftCols(1),
                                      100, rng),
                  numeric_error);
}
