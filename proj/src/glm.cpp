#include "selinf/glm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "selinf/errors.hpp"

namespace selinf {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

std::vector<int> complement(const std::vector<int>& E, int p) {
  std::vector<bool> in(p, false);
  for (int j : E) in[j] = true;
  std::vector<int> out;
  out.reserve(p - E.size());
  for (int j = 0; j < p; ++j) {
    if (!in[j]) out.push_back(j);
  }
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X,
                               const std::vector<int>& idx) {
  Eigen::MatrixXd out(X.rows(), idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = X.col(idx[k]);
  return out;
}

Eigen::VectorXd ols_coef(const Eigen::MatrixXd& X_E,
                         const Eigen::VectorXd& y) {
  const Eigen::MatrixXd G = X_E.transpose() * X_E;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    throw numeric_error("ols_coef: X_E^T X_E is singular");
  }
  return lu.solve(X_E.transpose() * y);
}

Eigen::VectorXd logistic_mle(const Eigen::MatrixXd& X_E,
                             const Eigen::VectorXd& y, int max_iter,
                             double tol) {
  const int k = static_cast<int>(X_E.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd pi = sigmoid((X_E * beta).eval());
    const Eigen::VectorXd grad = X_E.transpose() * (y - pi);
    if (grad.lpNorm<Eigen::Infinity>() < tol) return beta;
    const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
    const Eigen::MatrixXd H = X_E.transpose() * w.asDiagonal() * X_E;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      throw numeric_error("logistic_mle: singular information matrix");
    }
    Eigen::VectorXd step = lu.solve(grad);
    // Damp huge steps; guards against separation-driven blowup.
    const double norm = step.lpNorm<Eigen::Infinity>();
    if (norm > 8.0) step *= 8.0 / norm;
    beta += step;
    if (beta.lpNorm<Eigen::Infinity>() > 1e4) {
      throw numeric_error("logistic_mle: diverging iterates (separation?)");
    }
  }
  throw numeric_error("logistic_mle: Newton failed to converge");
}

DataVector build_data_vector(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const std::vector<int>& E, Loss loss) {
  const int p = static_cast<int>(X.cols());
  DataVector out;
  const Eigen::MatrixXd X_E = select_columns(X, E);
  if (E.empty()) {
    out.beta_bar.resize(0);
    out.fitted = (loss == Loss::Gaussian)
                     ? Eigen::VectorXd::Zero(y.size()).eval()
                     : Eigen::VectorXd::Constant(y.size(), 0.5).eval();
  } else if (loss == Loss::Gaussian) {
    out.beta_bar = ols_coef(X_E, y);
    out.fitted = X_E * out.beta_bar;
  } else {
    out.beta_bar = logistic_mle(X_E, y);
    out.fitted = sigmoid((X_E * out.beta_bar).eval());
  }
  out.resid = y - out.fitted;
  const std::vector<int> mE = complement(E, p);
  out.D.resize(p);
  const int ne = static_cast<int>(E.size());
  out.D.head(ne) = out.beta_bar;
  for (std::size_t k = 0; k < mE.size(); ++k) {
    out.D[ne + static_cast<int>(k)] = X.col(mE[k]).dot(out.resid);
  }
  return out;
}

double lambda_heuristic(const Eigen::MatrixXd& X, double sigma, int ndraws,
                        RngStream& rng) {
  double acc = 0.0;
  for (int d = 0; d < ndraws; ++d) {
    const Eigen::VectorXd g = sigma * rng.normal_vector(X.rows());
    acc += (X.transpose() * g).lpNorm<Eigen::Infinity>();
  }
  return acc / ndraws;
}

}  // namespace selinf
