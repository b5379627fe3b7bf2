#include "selinf/targets.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/Dense>

#include "selinf/errors.hpp"
#include "selinf/glm.hpp"

namespace selinf {

namespace {

// Factor sigma_T, adding the documented ridge when it is near singular.
Eigen::MatrixXd chol_with_ridge(Eigen::MatrixXd sigma, bool* regularized) {
  const int a = static_cast<int>(sigma.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.eigenvalues().minCoeff() <= 1e-10) {
    const double ridge = 1e-8 * sigma.trace() / a + 1e-12;
    sigma += ridge * Eigen::MatrixXd::Identity(a, a);
    *regularized = true;
    std::cerr << "[selinf] target covariance near singular; ridge " << ridge
              << " added\n";
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("target covariance is not positive definite");
  }
  return llt.matrixL();
}

}  // namespace

Eigen::VectorXd TargetSpec::sigma_T_solve(const Eigen::VectorXd& b) const {
  const Eigen::VectorXd z = sigma_T_chol.triangularView<Eigen::Lower>().solve(b);
  return sigma_T_chol.transpose().triangularView<Eigen::Upper>().solve(z);
}

double TargetSpec::standardized_norm(const Eigen::VectorXd& x) const {
  return sigma_T_chol.triangularView<Eigen::Lower>().solve(x).norm();
}

TargetSpec make_target(const Eigen::VectorXd& D_obs, const Eigen::MatrixXd& A,
                       const Eigen::MatrixXd& sigma_T,
                       const Eigen::MatrixXd& sigma_DT,
                       const Eigen::VectorXd& theta) {
  const int a = static_cast<int>(A.cols());
  if (A.rows() != D_obs.size() || sigma_T.rows() != a || sigma_T.cols() != a ||
      sigma_DT.rows() != D_obs.size() || sigma_DT.cols() != a ||
      theta.size() != a) {
    throw std::invalid_argument("make_target: inconsistent dimensions");
  }
  TargetSpec t;
  t.A = A;
  t.D_obs = D_obs;
  t.T_obs = A.transpose() * D_obs;
  t.theta = theta;
  t.sigma_DT = sigma_DT;
  t.sigma_T = 0.5 * (sigma_T + sigma_T.transpose());
  t.sigma_T_chol = chol_with_ridge(t.sigma_T, &t.regularized);
  // C = sigma_DT sigma_T^{-1}; solve row-by-row against the factor.
  t.C.resize(D_obs.size(), a);
  for (int i = 0; i < static_cast<int>(D_obs.size()); ++i) {
    t.C.row(i) = t.sigma_T_solve(sigma_DT.row(i).transpose()).transpose();
  }
  t.F_obs = D_obs - t.C * t.T_obs;
  return t;
}

TargetSpec decompose(const Eigen::VectorXd& D_obs, const Eigen::MatrixXd& A,
                     const Eigen::MatrixXd& sigma_joint,
                     const Eigen::VectorXd& theta) {
  if (sigma_joint.rows() != D_obs.size() ||
      sigma_joint.cols() != D_obs.size()) {
    throw std::invalid_argument("decompose: sigma_joint must be p x p");
  }
  const Eigen::MatrixXd sigma_DT = sigma_joint * A;
  const Eigen::MatrixXd sigma_T = A.transpose() * sigma_DT;
  return make_target(D_obs, A, sigma_T, sigma_DT, theta);
}

BootstrapCov pairs_bootstrap(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const StatFn& target_fn,
                             const std::vector<StatFn>& data_fns, int B_reps,
                             RngStream& rng) {
  const int n = static_cast<int>(X.rows());
  if (B_reps < 1) throw std::invalid_argument("pairs_bootstrap: B_reps < 1");
  std::vector<Eigen::VectorXd> t_reps;
  std::vector<std::vector<Eigen::VectorXd>> d_reps(data_fns.size());
  t_reps.reserve(B_reps);
  Eigen::MatrixXd Xb(n, X.cols());
  Eigen::VectorXd yb(n);
  long attempts = 0;
  const long max_attempts = 10L * B_reps;
  while (static_cast<int>(t_reps.size()) < B_reps) {
    if (++attempts > max_attempts) {
      throw numeric_error(
          "pairs_bootstrap: too many degenerate resamples (rank-deficient "
          "refits)");
    }
    for (int i = 0; i < n; ++i) {
      const int r = rng.uniform_int(n);
      Xb.row(i) = X.row(r);
      yb[i] = y[r];
    }
    try {
      Eigen::VectorXd tb = target_fn(Xb, yb);
      std::vector<Eigen::VectorXd> db(data_fns.size());
      for (std::size_t k = 0; k < data_fns.size(); ++k) {
        db[k] = data_fns[k](Xb, yb);
      }
      t_reps.push_back(std::move(tb));
      for (std::size_t k = 0; k < data_fns.size(); ++k) {
        d_reps[k].push_back(std::move(db[k]));
      }
    } catch (const numeric_error&) {
      continue;  // skip and redraw
    }
  }

  const int a = static_cast<int>(t_reps[0].size());
  Eigen::VectorXd t_mean = Eigen::VectorXd::Zero(a);
  for (const auto& t : t_reps) t_mean += t;
  t_mean /= B_reps;

  BootstrapCov out;
  out.sigma_T = Eigen::MatrixXd::Zero(a, a);
  out.t_draws_centered.resize(B_reps, a);
  for (int b = 0; b < B_reps; ++b) {
    const Eigen::VectorXd c = t_reps[b] - t_mean;
    out.sigma_T += c * c.transpose();
    out.t_draws_centered.row(b) = c.transpose();
  }
  out.sigma_T /= (B_reps - 1);

  out.sigma_DT.resize(data_fns.size());
  for (std::size_t k = 0; k < data_fns.size(); ++k) {
    const int pk = static_cast<int>(d_reps[k][0].size());
    Eigen::VectorXd d_mean = Eigen::VectorXd::Zero(pk);
    for (const auto& d : d_reps[k]) d_mean += d;
    d_mean /= B_reps;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(pk, a);
    for (int b = 0; b < B_reps; ++b) {
      cov += (d_reps[k][b] - d_mean) * (t_reps[b] - t_mean).transpose();
    }
    out.sigma_DT[k] = cov / (B_reps - 1);
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pairs_bootstrap_cov(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const std::vector<int>& E, const Eigen::MatrixXd& A, int B_reps,
    RngStream& rng, Loss loss) {
  if (static_cast<int>(E.size()) >= X.rows()) {
    throw std::invalid_argument("pairs_bootstrap_cov: |E| must be < n");
  }
  StatFn d_fn = [&E, loss](const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
    return build_data_vector(Xb, yb, E, loss).D;
  };
  // One refit per resample: compute D once, derive T from it.
  const int n = static_cast<int>(X.rows());
  std::vector<Eigen::VectorXd> d_reps;
  d_reps.reserve(B_reps);
  Eigen::MatrixXd Xb(n, X.cols());
  Eigen::VectorXd yb(n);
  long attempts = 0;
  const long max_attempts = 10L * B_reps;
  while (static_cast<int>(d_reps.size()) < B_reps) {
    if (++attempts > max_attempts) {
      throw numeric_error("pairs_bootstrap_cov: too many degenerate resamples");
    }
    for (int i = 0; i < n; ++i) {
      const int r = rng.uniform_int(n);
      Xb.row(i) = X.row(r);
      yb[i] = y[r];
    }
    try {
      d_reps.push_back(d_fn(Xb, yb));
    } catch (const numeric_error&) {
      continue;
    }
  }
  const int p = static_cast<int>(X.cols());
  const int a = static_cast<int>(A.cols());
  Eigen::VectorXd d_mean = Eigen::VectorXd::Zero(p);
  for (const auto& d : d_reps) d_mean += d;
  d_mean /= B_reps;
  Eigen::MatrixXd sigma_D = Eigen::MatrixXd::Zero(p, p);
  for (const auto& d : d_reps) {
    const Eigen::VectorXd c = d - d_mean;
    sigma_D += c * c.transpose();
  }
  sigma_D /= (B_reps - 1);
  const Eigen::MatrixXd sigma_DT = sigma_D * A;
  const Eigen::MatrixXd sigma_T = A.transpose() * sigma_DT;
  return {sigma_T, sigma_DT};
}

Eigen::MatrixXd wild_target_map(const Eigen::MatrixXd& X_E,
                                const Eigen::VectorXd& resid,
                                const Eigen::MatrixXd& A_beta) {
  const Eigen::MatrixXd G = X_E.transpose() * X_E;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    throw numeric_error("wild_target_map: X_E^T X_E is singular");
  }
  const Eigen::MatrixXd pinv = lu.solve(X_E.transpose());
  return A_beta.transpose() * pinv * resid.asDiagonal();
}

Eigen::VectorXd wild_bootstrap_target(const Eigen::MatrixXd& X_E,
                                      const Eigen::VectorXd& resid,
                                      const Eigen::MatrixXd& A_beta,
                                      const Eigen::VectorXd& alpha) {
  if (alpha.size() != X_E.rows()) {
    throw std::invalid_argument("wild_bootstrap_target: alpha has wrong size");
  }
  return wild_target_map(X_E, resid, A_beta) * alpha;
}

}  // namespace selinf
