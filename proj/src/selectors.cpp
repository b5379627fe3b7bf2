#include "selinf/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "selinf/errors.hpp"

namespace selinf {

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

struct SmoothPart {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  Loss loss;
  double scale;

  double value(const Eigen::VectorXd& beta) const {
    if (loss == Loss::Gaussian) {
      return 0.5 * scale * (y - X * beta).squaredNorm();
    }
    const Eigen::VectorXd lin = X * beta;
    double v = 0.0;
    for (int i = 0; i < lin.size(); ++i) v += softplus(lin[i]) - y[i] * lin[i];
    return scale * v;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& beta) const {
    if (loss == Loss::Gaussian) {
      return scale * (X.transpose() * (X * beta - y));
    }
    return scale * (X.transpose() * (sigmoid((X * beta).eval()) - y));
  }
};

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double x) {
    return x > t ? x - t : (x < -t ? x + t : 0.0);
  });
}

// Proximal gradient with backtracking on
//   smooth(beta) + (eps/2)||beta||^2 - omega^T beta + lam ||beta||_1.
struct ProxResult {
  Eigen::VectorXd beta;
  int iterations;
  double kkt_residual;
};

double kkt_residual(const Eigen::VectorXd& beta, const Eigen::VectorXd& g,
                    double lam) {
  double r = 0.0;
  for (int j = 0; j < beta.size(); ++j) {
    if (beta[j] > 0.0) {
      r = std::max(r, std::abs(g[j] + lam));
    } else if (beta[j] < 0.0) {
      r = std::max(r, std::abs(g[j] - lam));
    } else {
      r = std::max(r, std::max(std::abs(g[j]) - lam, 0.0));
    }
  }
  return r;
}

ProxResult prox_gradient_solve(const SmoothPart& smooth, double lam,
                               double eps, const Eigen::VectorXd& omega,
                               const LassoOptions& opts) {
  const int p = static_cast<int>(omega.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  auto f = [&](const Eigen::VectorXd& b) {
    return smooth.value(b) + 0.5 * eps * b.squaredNorm() - omega.dot(b);
  };
  auto fgrad = [&](const Eigen::VectorXd& b) {
    return (smooth.grad(b) + eps * b - omega).eval();
  };
  double t = 1.0;
  double fb = f(beta);
  Eigen::VectorXd g = fgrad(beta);
  int it = 0;
  double res = kkt_residual(beta, g, lam);
  for (; it < opts.max_iter && res > opts.kkt_tol; ++it) {
    t = std::min(t * 1.25, 1e8);
    Eigen::VectorXd beta_new;
    double f_new = 0.0;
    int backtracks = 0;
    for (;; ++backtracks) {
      beta_new = soft_threshold(beta - t * g, t * lam);
      f_new = f(beta_new);
      const Eigen::VectorXd d = beta_new - beta;
      if (f_new <= fb + g.dot(d) + d.squaredNorm() / (2.0 * t) + 1e-14) break;
      t *= 0.5;
      if (backtracks > 200) {
        throw numeric_error("randomized lasso: line search failed");
      }
    }
    beta = std::move(beta_new);
    fb = f_new;
    g = fgrad(beta);
    res = kkt_residual(beta, g, lam);
  }
  if (res > 1e-7) {
    throw numeric_error("randomized lasso: no convergence after " +
                        std::to_string(it) +
                        " iterations, KKT residual " + std::to_string(res));
  }
  return {beta, it, res};
}

struct LassoReconPieces {
  AffineReconstruction recon;
  Eigen::VectorXd D;
  Eigen::VectorXd beta_bar;
};

// Assembles the reconstruction map, in natural omega row order, for the
// penalty subgradient equation of the l1 objective. Gaussian loss uses the
// exact cross products; logistic loss the observed-information plug-ins at
// the refitted MLE.
LassoReconPieces build_lasso_reconstruction(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const std::vector<int>& E, const Eigen::VectorXd& signs,
    const Eigen::VectorXd& beta_hat_E, const Eigen::VectorXd& u_mE, double lam,
    double eps, Loss loss) {
  const int p = static_cast<int>(X.cols());
  const int ne = static_cast<int>(E.size());
  const std::vector<int> mE = complement(E, p);
  LassoReconPieces out;
  const DataVector dv = build_data_vector(X, y, E, loss);
  out.D = dv.D;
  out.beta_bar = dv.beta_bar;

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd L = Eigen::VectorXd::Zero(p);
  AffineReconstruction recon;

  Eigen::MatrixXd cross(p, ne);  // X^T X_E or X^T W X_E
  if (ne > 0) {
    const Eigen::MatrixXd X_E = select_columns(X, E);
    if (loss == Loss::Gaussian) {
      cross = X.transpose() * X_E;
    } else {
      const Eigen::VectorXd w =
          dv.fitted.array() * (1.0 - dv.fitted.array());
      cross = X.transpose() * w.asDiagonal() * X_E;
    }
    M.leftCols(ne) = -cross;
  }
  for (std::size_t k = 0; k < mE.size(); ++k) {
    M(mE[k], ne + static_cast<int>(k)) = -1.0;
  }
  for (int e = 0; e < ne; ++e) L[E[e]] = lam * signs[e];

  recon.data_coef = M;
  recon.offset = L;
  recon.jacobian_log = 0.0;

  if (ne > 0) {
    OptBlock pos;
    if (loss == Loss::Gaussian) {
      // beta_E block, constrained to the sign orthant.
      pos.label = "beta_E";
      pos.coef = cross;
      for (int e = 0; e < ne; ++e) pos.coef(E[e], e) += eps;
      pos.region = ConstraintRegion::orthant(signs);
      pos.observed = beta_hat_E;
    } else {
      // gamma block: |beta_E| with directions conditioned on.
      pos.label = "gamma_E";
      pos.coef = cross;
      for (int e = 0; e < ne; ++e) pos.coef(E[e], e) += eps;
      pos.coef = pos.coef * signs.asDiagonal();
      pos.region = ConstraintRegion::nonneg(ne);
      pos.observed = beta_hat_E.cwiseAbs();
    }
    recon.blocks.push_back(std::move(pos));
  }
  {
    OptBlock sub;
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(p, p - ne);
    const double u_scale = (loss == Loss::Gaussian) ? lam : 1.0;
    for (std::size_t k = 0; k < mE.size(); ++k) {
      U(mE[k], static_cast<int>(k)) = u_scale;
    }
    if (loss == Loss::Gaussian) {
      sub.label = "u_minus_E";
      sub.region = ConstraintRegion::box(-1.0, 1.0, p - ne);
      sub.observed = u_mE;
    } else {
      sub.label = "z_minus_E";
      sub.region = ConstraintRegion::box(-lam, lam, p - ne);
      sub.observed = lam * u_mE;
    }
    sub.coef = std::move(U);
    recon.blocks.push_back(std::move(sub));
  }
  out.recon = std::move(recon);
  return out;
}

}  // namespace

LassoResult solve_randomized_lasso(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, double lam,
                                   double eps, const Eigen::VectorXd& omega,
                                   Loss loss, const LassoOptions& opts) {
  if (!(lam > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("randomized lasso: lam and eps must be > 0");
  }
  if (X.rows() != y.size() || omega.size() != X.cols()) {
    throw std::invalid_argument("randomized lasso: dimension mismatch");
  }
  if (loss == Loss::Logistic) {
    for (int i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw std::invalid_argument(
            "randomized lasso: logistic loss needs a {0,1} response");
      }
    }
  }
  const SmoothPart smooth{X, y, loss, opts.loss_scale};
  ProxResult sol = prox_gradient_solve(smooth, lam, eps, omega, opts);

  std::vector<int> E;
  for (int j = 0; j < sol.beta.size(); ++j) {
    if (sol.beta[j] != 0.0) E.push_back(j);
  }
  const int ne = static_cast<int>(E.size());
  Eigen::VectorXd signs(ne), beta_hat_E(ne);
  for (int e = 0; e < ne; ++e) {
    beta_hat_E[e] = sol.beta[E[e]];
    signs[e] = beta_hat_E[e] > 0 ? 1.0 : -1.0;
  }
  // Inactive penalty subgradient from the stationarity equation.
  const Eigen::VectorXd grad_smooth = smooth.grad(sol.beta);
  const std::vector<int> mE = complement(E, static_cast<int>(X.cols()));
  Eigen::VectorXd u_mE(mE.size());
  for (std::size_t k = 0; k < mE.size(); ++k) {
    u_mE[k] = (omega[mE[k]] - grad_smooth[mE[k]]) / lam;
  }

  LassoReconPieces pieces = build_lasso_reconstruction(
      X, y, E, signs, beta_hat_E, u_mE, lam, eps, loss);

  LassoResult out;
  out.outcome = SelectionOutcome{E, signs, omega, pieces.D};
  out.recon = std::move(pieces.recon);
  out.beta_hat = sol.beta;
  out.beta_bar = pieces.beta_bar;
  out.iterations = sol.iterations;
  out.kkt_residual = sol.kkt_residual;
  return out;
}

SelectorResult marginal_screening(const Eigen::VectorXd& S,
                                  const Eigen::VectorXd& omega, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("marginal screening: c must be > 0");
  if (S.size() != omega.size()) {
    throw std::invalid_argument("marginal screening: dimension mismatch");
  }
  const int p = static_cast<int>(S.size());
  const Eigen::VectorXd raw = S + omega;
  std::vector<int> E;
  for (int j = 0; j < p; ++j) {
    if (std::abs(raw[j]) >= c) E.push_back(j);  // boundary ties are active
  }
  const int ne = static_cast<int>(E.size());
  const std::vector<int> mE = complement(E, p);
  Eigen::VectorXd signs(ne), z_E(ne);
  for (int e = 0; e < ne; ++e) {
    signs[e] = raw[E[e]] > 0 ? 1.0 : -1.0;
    z_E[e] = raw[E[e]] - c * signs[e];
  }
  Eigen::VectorXd eta_mE(mE.size());
  for (std::size_t k = 0; k < mE.size(); ++k) eta_mE[k] = raw[mE[k]];

  AffineReconstruction recon;
  recon.data_coef = -Eigen::MatrixXd::Identity(p, p);
  recon.offset = Eigen::VectorXd::Zero(p);
  for (int e = 0; e < ne; ++e) recon.offset[E[e]] = c * signs[e];
  {
    OptBlock zb;
    zb.label = "z_E";
    zb.coef = Eigen::MatrixXd::Zero(p, ne);
    for (int e = 0; e < ne; ++e) zb.coef(E[e], e) = 1.0;
    zb.region = ConstraintRegion::orthant(signs);
    zb.observed = z_E;
    recon.blocks.push_back(std::move(zb));
  }
  {
    OptBlock eb;
    eb.label = "eta_minus_E";
    eb.coef = Eigen::MatrixXd::Zero(p, p - ne);
    for (std::size_t k = 0; k < mE.size(); ++k) {
      eb.coef(mE[k], static_cast<int>(k)) = 1.0;
    }
    eb.region = ConstraintRegion::box(-c, c, p - ne);
    eb.observed = eta_mE;
    recon.blocks.push_back(std::move(eb));
  }
  SelectorResult out;
  out.outcome = SelectionOutcome{E, signs, omega, S};
  out.recon = std::move(recon);
  return out;
}

std::vector<AffineReconstruction> stepwise_reconstructions(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const std::vector<int>& order, const std::vector<double>& step_signs,
    const std::vector<Eigen::VectorXd>& scores, const std::vector<int>& E) {
  const int p = static_cast<int>(X.cols());
  const int ne = static_cast<int>(E.size());
  const std::vector<int> mE = complement(E, p);
  // G maps D = (beta_bar_E, X_{-E}^T resid) to X^T y in natural order.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p, p);
  if (ne > 0) {
    G.leftCols(ne) = X.transpose() * select_columns(X, E);
  }
  for (std::size_t k = 0; k < mE.size(); ++k) {
    G(mE[k], ne + static_cast<int>(k)) = 1.0;
  }

  std::vector<AffineReconstruction> recons;
  const int K = static_cast<int>(order.size());
  for (int k = 0; k < K; ++k) {
    const std::vector<int> cur(order.begin(), order.begin() + k);
    std::vector<int> cur_sorted = cur;
    std::sort(cur_sorted.begin(), cur_sorted.end());
    const std::vector<int> mcur = complement(cur_sorted, p);
    // X^T P_perp y = A_k X^T y with A_k = I - X^T X_cur (X_cur^T X_cur)^{-1} Sel.
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p);
    if (!cur_sorted.empty()) {
      const Eigen::MatrixXd X_cur = select_columns(X, cur_sorted);
      const Eigen::MatrixXd Gram = X_cur.transpose() * X_cur;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Gram);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) {
        throw numeric_error("forward stepwise: rank-deficient design at step " +
                            std::to_string(k + 1));
      }
      const Eigen::MatrixXd XtXcur = X.transpose() * X_cur;
      const Eigen::MatrixXd coef = lu.solve(XtXcur.transpose()).transpose();
      for (std::size_t e = 0; e < cur_sorted.size(); ++e) {
        A.col(cur_sorted[e]) -= coef.col(static_cast<int>(e));
      }
    }
    AffineReconstruction recon;
    recon.data_coef = Eigen::MatrixXd(mcur.size(), p);
    const Eigen::MatrixXd AG = A * G;
    for (std::size_t r = 0; r < mcur.size(); ++r) {
      recon.data_coef.row(r) = -AG.row(mcur[r]);
    }
    recon.offset = Eigen::VectorXd::Zero(mcur.size());
    OptBlock zb;
    zb.label = "z_step_" + std::to_string(k + 1);
    zb.coef = Eigen::MatrixXd::Identity(mcur.size(), mcur.size());
    const auto pivot_it = std::find(mcur.begin(), mcur.end(), order[k]);
    zb.region = ConstraintRegion::linf_normal_cone(
        static_cast<int>(pivot_it - mcur.begin()), step_signs[k],
        static_cast<int>(mcur.size()));
    zb.observed = scores[k];
    recon.blocks.push_back(std::move(zb));
    recons.push_back(std::move(recon));
  }
  return recons;
}

StepwiseResult forward_stepwise(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, int K,
                                const std::vector<Eigen::VectorXd>& omegas,
                                std::vector<int> chosen_E) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (K < 1 || K >= std::min(n, p) + 1) {
    throw std::invalid_argument("forward stepwise: K must satisfy 1 <= K < min(n,p)+1");
  }
  if (static_cast<int>(omegas.size()) != K) {
    throw std::invalid_argument("forward stepwise: need one omega per step");
  }
  StepwiseResult out;
  for (int k = 0; k < K; ++k) {
    std::vector<int> cur = out.order;
    std::sort(cur.begin(), cur.end());
    const std::vector<int> mcur = complement(cur, p);
    if (omegas[k].size() != static_cast<int>(mcur.size())) {
      throw std::invalid_argument("forward stepwise: omega_" +
                                  std::to_string(k + 1) + " has wrong size");
    }
    Eigen::VectorXd resid = y;
    if (!cur.empty()) {
      const Eigen::MatrixXd X_cur = select_columns(X, cur);
      Eigen::VectorXd beta;
      try {
        beta = ols_coef(X_cur, y);
      } catch (const numeric_error&) {
        throw numeric_error("forward stepwise: rank-deficient design at step " +
                            std::to_string(k + 1));
      }
      resid -= X_cur * beta;
    }
    Eigen::VectorXd score(mcur.size());
    for (std::size_t i = 0; i < mcur.size(); ++i) {
      score[i] = X.col(mcur[i]).dot(resid) + omegas[k][i];
    }
    int best = 0;
    for (int i = 1; i < score.size(); ++i) {
      if (std::abs(score[i]) > std::abs(score[best])) best = i;
    }
    out.order.push_back(mcur[best]);
    out.step_signs.push_back(score[best] > 0 ? 1.0 : -1.0);
    out.scores.push_back(score);
  }
  if (chosen_E.empty()) chosen_E = out.order;
  std::sort(chosen_E.begin(), chosen_E.end());
  out.chosen_E = chosen_E;
  out.D_obs = build_data_vector(X, y, chosen_E, Loss::Gaussian).D;
  out.omegas = omegas;
  out.recons = stepwise_reconstructions(X, y, out.order, out.step_signs,
                                        out.scores, chosen_E);
  return out;
}

Eigen::VectorXd carve_omega(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const std::vector<int>& subsample, Loss loss,
                            const Eigen::VectorXd& beta_full) {
  const int n = static_cast<int>(X.rows());
  const int n1 = static_cast<int>(subsample.size());
  if (n1 < 1 || n1 > n) {
    throw std::invalid_argument("carve_omega: bad subsample size");
  }
  const double rho = static_cast<double>(n1) / n;
  if (n1 == n) {
    // delta = rho*loss - loss_1 vanishes identically at rho = 1.
    std::vector<bool> seen(n, false);
    bool full = true;
    for (int i : subsample) {
      if (i < 0 || i >= n || seen[i]) full = false;
      if (full) seen[i] = true;
    }
    if (full) return Eigen::VectorXd::Zero(X.cols());
  }
  const Eigen::VectorXd fit = (loss == Loss::Gaussian)
                                  ? (X * beta_full).eval()
                                  : sigmoid((X * beta_full).eval());
  // (1/rho) grad delta = grad l - (1/rho) grad l_1, both at beta_full.
  Eigen::VectorXd grad_full = -(X.transpose() * (y - fit));
  Eigen::VectorXd grad_sub = Eigen::VectorXd::Zero(X.cols());
  for (int i : subsample) {
    grad_sub -= X.row(i).transpose() * (y[i] - fit[i]);
  }
  return grad_full - grad_sub / rho;
}

CarveRandomization carve_randomization(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y,
                                       const std::vector<int>& subsample,
                                       Loss loss,
                                       const Eigen::VectorXd& beta_full,
                                       int B_reps, RngStream& rng) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int n1 = static_cast<int>(subsample.size());
  if (n1 == n) {
    throw std::invalid_argument(
        "carve_randomization: rho = 1 gives a degenerate randomization; use "
        "non-randomized inference instead");
  }
  CarveRandomization out;
  out.omega = carve_omega(X, y, subsample, loss, beta_full);

  std::vector<int> E;
  for (int j = 0; j < p; ++j) {
    if (beta_full[j] != 0.0) E.push_back(j);
  }

  std::vector<Eigen::VectorXd> omega_reps, d_reps;
  omega_reps.reserve(B_reps);
  Eigen::MatrixXd Xb(n, p);
  Eigen::VectorXd yb(n);
  std::vector<int> rows(n);
  long attempts = 0;
  while (static_cast<int>(omega_reps.size()) < B_reps) {
    if (++attempts > 10L * B_reps) {
      throw numeric_error("carve_randomization: too many degenerate resamples");
    }
    for (int i = 0; i < n; ++i) {
      const int r = rng.uniform_int(n);
      Xb.row(i) = X.row(r);
      yb[i] = y[r];
    }
    // Fresh stage-one split for every replicate.
    for (int i = 0; i < n; ++i) rows[i] = i;
    for (int i = 0; i < n1; ++i) {
      std::swap(rows[i], rows[i + rng.uniform_int(n - i)]);
    }
    const std::vector<int> split(rows.begin(), rows.begin() + n1);
    try {
      Eigen::VectorXd db = build_data_vector(Xb, yb, E, loss).D;
      omega_reps.push_back(carve_omega(Xb, yb, split, loss, beta_full));
      d_reps.push_back(std::move(db));
    } catch (const numeric_error&) {
      continue;
    }
  }
  Eigen::VectorXd om = Eigen::VectorXd::Zero(p), dm = Eigen::VectorXd::Zero(p);
  for (int b = 0; b < B_reps; ++b) {
    om += omega_reps[b];
    dm += d_reps[b];
  }
  om /= B_reps;
  dm /= B_reps;
  out.sigma_omega = Eigen::MatrixXd::Zero(p, p);
  out.cross_D = Eigen::MatrixXd::Zero(p, p);
  for (int b = 0; b < B_reps; ++b) {
    out.sigma_omega += (omega_reps[b] - om) * (omega_reps[b] - om).transpose();
    out.cross_D += (omega_reps[b] - om) * (d_reps[b] - dm).transpose();
  }
  out.sigma_omega /= (B_reps - 1);
  out.cross_D /= (B_reps - 1);
  return out;
}

CarveResult solve_carved_lasso(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y,
                               const std::vector<int>& subsample, double lam,
                               double eps, Loss loss, int B_omega,
                               RngStream& rng) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int n1 = static_cast<int>(subsample.size());
  const double rho = static_cast<double>(n1) / n;
  // Stage one: minimize (1/rho) l_1 + penalty on the subsample.
  Eigen::MatrixXd X1(n1, p);
  Eigen::VectorXd y1(n1);
  for (int i = 0; i < n1; ++i) {
    X1.row(i) = X.row(subsample[i]);
    y1[i] = y[subsample[i]];
  }
  LassoOptions opts;
  opts.loss_scale = 1.0 / rho;
  LassoResult stage_one = solve_randomized_lasso(
      X1, y1, lam, eps, Eigen::VectorXd::Zero(p), loss, opts);

  CarveRandomization cr = carve_randomization(
      X, y, subsample, loss, stage_one.beta_hat, B_omega, rng);

  // Realized omega from the full-data stationarity equation; identical to
  // cr.omega up to the stage-one KKT residual, but exact for the map.
  const std::vector<int> E = stage_one.outcome.active;
  const int ne = static_cast<int>(E.size());
  Eigen::VectorXd beta_hat_E(ne);
  for (int e = 0; e < ne; ++e) beta_hat_E[e] = stage_one.beta_hat[E[e]];
  const std::vector<int> mE = complement(E, p);
  Eigen::VectorXd u_mE(mE.size());
  for (std::size_t k = 0; k < mE.size(); ++k) {
    u_mE[k] = stage_one.recon.blocks.back().observed[k] /
              (loss == Loss::Gaussian ? 1.0 : lam);
  }

  LassoReconPieces pieces = build_lasso_reconstruction(
      X, y, E, stage_one.outcome.signs, beta_hat_E, u_mE, lam, eps, loss);
  const Eigen::VectorXd omega_exact =
      pieces.recon.omega_at_observed(pieces.D);

  // Whiten so the sampler sees i.i.d. standard Gaussian randomization.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cr.sigma_omega);
  const double lam_max = es.eigenvalues().maxCoeff();
  if (!(lam_max > 1e-12)) {
    throw numeric_error("carving: randomization covariance is degenerate");
  }
  const Eigen::VectorXd inv_sqrt =
      es.eigenvalues().cwiseMax(1e-10 * lam_max).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd W =
      es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();

  CarveResult out{std::move(stage_one),
                  cr.omega,
                  cr.sigma_omega,
                  cr.cross_D,
                  W,
                  AffineReconstruction{},
                  RandomizationDist(RandomizationFamily::Gaussian, 1.0, p),
                  SelectionOutcome{}};
  out.recon = pieces.recon;
  out.recon.data_coef = W * pieces.recon.data_coef;
  out.recon.offset = W * pieces.recon.offset;
  for (auto& b : out.recon.blocks) b.coef = W * b.coef;
  out.outcome = SelectionOutcome{E, out.stage_one.outcome.signs,
                                 W * omega_exact, pieces.D};
  return out;
}

}  // namespace selinf
