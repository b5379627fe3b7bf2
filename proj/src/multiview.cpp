#include "selinf/multiview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "selinf/errors.hpp"
#include "selinf/numeric.hpp"

namespace selinf {

namespace {

// Marginal statistics S_j = X_j^T y / sigma_j with sigma_j = ||X_j|| sd(y).
// The scale estimate is frozen at the observed data (estimated then fixed),
// so resampled statistics reuse it.
Eigen::VectorXd marginal_scales(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y) {
  const double sd_y =
      std::sqrt((y.array() - y.mean()).square().sum() / (y.size() - 1));
  Eigen::VectorXd s(X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    s[j] = std::max(X.col(j).norm() * sd_y, 1e-12);
  }
  return s;
}

ExecutedView execute_view(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const ViewSpec& spec, RngStream rng) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  ExecutedView out;
  out.spec = spec;
  const double eps = spec.eps > 0 ? spec.eps : 1.0 / std::sqrt(double(n));
  double lam = spec.lam;
  if (lam <= 0 && (spec.kind == ViewSpec::Kind::Lasso ||
                   spec.kind == ViewSpec::Kind::Carve)) {
    RngStream lrng = rng.substream("lambda");
    const double sigma = spec.loss == Loss::Gaussian ? 1.0 : 0.5;
    lam = lambda_heuristic(X, sigma, 40, lrng);
  }
  switch (spec.kind) {
    case ViewSpec::Kind::Lasso: {
      RandomizationDist dist(spec.family, spec.scale, p);
      RngStream orng = rng.substream("omega");
      const Eigen::VectorXd omega = dist.sample(orng);
      LassoResult fit = solve_randomized_lasso(X, y, lam, eps, omega, spec.loss);
      out.selected = fit.outcome.active;
      out.signs = fit.outcome.signs;
      out.observed_omega = omega;
      out.D_obs = fit.outcome.D_obs;
      out.recon_gap = (fit.recon.omega_at_observed(out.D_obs) - omega)
                          .lpNorm<Eigen::Infinity>();
      out.recons.push_back(std::move(fit.recon));
      out.dists.push_back(dist);
      const std::vector<int> E = out.selected;
      const Loss loss = spec.loss;
      out.d_fn = [E, loss](const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
        return build_data_vector(Xb, yb, E, loss).D;
      };
      break;
    }
    case ViewSpec::Kind::Screen: {
      const Eigen::VectorXd scales = marginal_scales(X, y);
      const Eigen::VectorXd S =
          (X.transpose() * y).cwiseQuotient(scales);
      RandomizationDist dist(spec.family, spec.scale, p);
      RngStream orng = rng.substream("omega");
      const Eigen::VectorXd omega = dist.sample(orng);
      SelectorResult fit = marginal_screening(S, omega, spec.screen_c);
      out.selected = fit.outcome.active;
      out.signs = fit.outcome.signs;
      out.observed_omega = omega;
      out.D_obs = fit.outcome.D_obs;
      out.recon_gap = (fit.recon.omega_at_observed(out.D_obs) - omega)
                          .lpNorm<Eigen::Infinity>();
      out.recons.push_back(std::move(fit.recon));
      out.dists.push_back(dist);
      out.d_fn = [scales](const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
        return (Xb.transpose() * yb).cwiseQuotient(scales).eval();
      };
      break;
    }
    case ViewSpec::Kind::Stepwise: {
      std::vector<Eigen::VectorXd> omegas;
      RngStream orng = rng.substream("omega");
      for (int k = 0; k < spec.fs_steps; ++k) {
        RandomizationDist dk(spec.family, spec.scale, p - k);
        omegas.push_back(dk.sample(orng));
      }
      StepwiseResult fit = forward_stepwise(X, y, spec.fs_steps, omegas);
      out.selected = fit.chosen_E;
      out.signs = Eigen::Map<const Eigen::VectorXd>(fit.step_signs.data(),
                                                    fit.step_signs.size());
      out.observed_omega = omegas.front();
      out.D_obs = fit.D_obs;
      for (int k = 0; k < spec.fs_steps; ++k) {
        out.recon_gap = std::max(
            out.recon_gap,
            (fit.recons[k].omega_at_observed(out.D_obs) - omegas[k])
                .lpNorm<Eigen::Infinity>());
        out.dists.emplace_back(spec.family, spec.scale, p - k);
      }
      out.recons = std::move(fit.recons);
      const std::vector<int> E = out.selected;
      out.d_fn = [E](const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
        return build_data_vector(Xb, yb, E, Loss::Gaussian).D;
      };
      break;
    }
    case ViewSpec::Kind::Carve: {
      const int n1 = static_cast<int>(std::floor(spec.carve_rho * n));
      if (n1 < 1 || n1 > n) {
        throw std::invalid_argument("carve view: subsample fraction out of range");
      }
      RngStream srng = rng.substream("split");
      std::vector<int> rows(n);
      for (int i = 0; i < n; ++i) rows[i] = i;
      for (int i = 0; i < n1; ++i) {
        std::swap(rows[i], rows[i + srng.uniform_int(n - i)]);
      }
      std::vector<int> split(rows.begin(), rows.begin() + n1);
      std::sort(split.begin(), split.end());
      RngStream brng = rng.substream("carve-boot");
      CarveResult fit =
          solve_carved_lasso(X, y, split, lam, eps, spec.loss, 800, brng);
      out.selected = fit.outcome.active;
      out.signs = fit.outcome.signs;
      out.observed_omega = fit.outcome.observed_omega;
      out.D_obs = fit.outcome.D_obs;
      out.recon_gap = (fit.recon.omega_at_observed(out.D_obs) -
                       fit.outcome.observed_omega)
                          .lpNorm<Eigen::Infinity>();
      out.carve_cross = fit.cross_D;
      out.carve_split = split;
      out.recons.push_back(std::move(fit.recon));
      out.dists.push_back(fit.dist);
      const std::vector<int> E = out.selected;
      const Loss loss = spec.loss;
      out.d_fn = [E, loss](const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
        return build_data_vector(Xb, yb, E, loss).D;
      };
      break;
    }
  }
  return out;
}

}  // namespace

MultiViewRun run_views(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ViewPlan& plan, std::uint64_t seed) {
  if (plan.views.empty()) {
    throw std::invalid_argument("run_views: the plan needs at least one view");
  }
  const int p = static_cast<int>(X.cols());
  MultiViewRun run;
  RngStream root(seed);
  for (std::size_t k = 0; k < plan.views.size(); ++k) {
    run.views.push_back(
        execute_view(X, y, plan.views[k], root.substream(k)));
  }
  std::set<int> chosen;
  switch (plan.rule) {
    case ViewPlan::Rule::Union:
      for (const auto& v : run.views) chosen.insert(v.selected.begin(), v.selected.end());
      break;
    case ViewPlan::Rule::Intersection: {
      chosen.insert(run.views[0].selected.begin(), run.views[0].selected.end());
      for (std::size_t k = 1; k < run.views.size(); ++k) {
        std::set<int> next(run.views[k].selected.begin(),
                           run.views[k].selected.end());
        std::set<int> inter;
        std::set_intersection(chosen.begin(), chosen.end(), next.begin(),
                              next.end(), std::inserter(inter, inter.begin()));
        chosen = std::move(inter);
      }
      break;
    }
    case ViewPlan::Rule::Explicit:
      chosen.insert(plan.explicit_E.begin(), plan.explicit_E.end());
      break;
  }
  for (int j : chosen) {
    if (j < 0 || j >= p) {
      throw std::invalid_argument("run_views: chosen model references a bad column");
    }
  }
  if (chosen.empty()) {
    throw std::invalid_argument("run_views: the chosen model is empty");
  }
  run.chosen_E.assign(chosen.begin(), chosen.end());
  run.inference_loss = plan.views.front().loss;
  const std::vector<int> E = run.chosen_E;
  const Loss loss = run.inference_loss;
  run.d_target_fn = [E, loss](const Eigen::MatrixXd& Xb,
                              const Eigen::VectorXd& yb) {
    return build_data_vector(Xb, yb, E, loss).D;
  };
  run.D_target_obs = run.d_target_fn(X, y);
  return run;
}

namespace {

struct JointBoot {
  Eigen::MatrixXd sigma_D;                // p x p for the target data vector
  std::vector<Eigen::MatrixXd> cross;     // per view: p_k x p
  Eigen::MatrixXd d_draws_centered;       // B x p
};

JointBoot bootstrap_joint(const MultiViewRun& run, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, int B,
                          std::uint64_t seed) {
  RngStream rng(derive_seed(seed, "pairs-bootstrap"));
  std::vector<StatFn> view_fns;
  for (const auto& v : run.views) view_fns.push_back(v.d_fn);
  BootstrapCov cov =
      pairs_bootstrap(X, y, run.d_target_fn, view_fns, B, rng);
  JointBoot out;
  out.sigma_D = std::move(cov.sigma_T);
  out.cross = std::move(cov.sigma_DT);
  out.d_draws_centered = std::move(cov.t_draws_centered);
  return out;
}

BoundInference bind_coordinate(const MultiViewRun& run, const JointBoot& joint,
                               int coord) {
  const auto it =
      std::find(run.chosen_E.begin(), run.chosen_E.end(), coord);
  if (it == run.chosen_E.end()) {
    throw std::invalid_argument("coordinate is not in the chosen model");
  }
  const int pos = static_cast<int>(it - run.chosen_E.begin());
  const int p = static_cast<int>(run.D_target_obs.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, 1);
  A(pos, 0) = 1.0;
  Eigen::MatrixXd sigma_T(1, 1);
  sigma_T(0, 0) = joint.sigma_D(pos, pos);
  const Eigen::MatrixXd sigma_DT = joint.sigma_D.col(pos);
  BoundInference out{make_target(run.D_target_obs, A, sigma_T, sigma_DT,
                                 Eigen::VectorXd::Zero(1)),
                     {},
                     joint.d_draws_centered.col(pos)};
  std::vector<BoundView> views;
  for (std::size_t k = 0; k < run.views.size(); ++k) {
    const ExecutedView& v = run.views[k];
    const Eigen::MatrixXd sigma_DkT = joint.cross[k].col(pos);
    for (std::size_t r = 0; r < v.recons.size(); ++r) {
      views.push_back(
          bind_view(v.recons[r], v.dists[r], v.D_obs, sigma_DkT, out.target));
    }
  }
  out.mv = compose_views(std::move(views));
  return out;
}

// Wild map for the chosen model: Gaussian loss uses (X_E^T X_E)^{-1},
// logistic the observed information Q_E at the MLE.
Eigen::MatrixXd wild_map_for(const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y,
                             const std::vector<int>& E, Loss loss, int pos) {
  const Eigen::MatrixXd X_E = select_columns(X, E);
  const DataVector dv = build_data_vector(X, y, E, loss);
  Eigen::MatrixXd A_beta = Eigen::MatrixXd::Zero(E.size(), 1);
  A_beta(pos, 0) = 1.0;
  if (loss == Loss::Gaussian) {
    return wild_target_map(X_E, dv.resid, A_beta);
  }
  const Eigen::VectorXd w = dv.fitted.array() * (1.0 - dv.fitted.array());
  const Eigen::MatrixXd Q = X_E.transpose() * w.asDiagonal() * X_E;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Q);
  if (!lu.isInvertible()) {
    throw numeric_error("wild map: singular information matrix");
  }
  return A_beta.transpose() * lu.solve(X_E.transpose()) *
         dv.resid.asDiagonal();
}

}  // namespace

BoundInference bind_coordinate_target(const MultiViewRun& run,
                                      const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y, int coord,
                                      int boot_reps, std::uint64_t seed) {
  const JointBoot joint = bootstrap_joint(run, X, y, boot_reps, seed);
  return bind_coordinate(run, joint, coord);
}

std::vector<InferenceResult> infer_coordinates(const MultiViewRun& run,
                                               const Eigen::MatrixXd& X,
                                               const Eigen::VectorXd& y,
                                               std::vector<int> coords,
                                               const InferOptions& opts) {
  if (coords.empty()) coords = run.chosen_E;
  const JointBoot joint =
      bootstrap_joint(run, X, y, opts.boot_reps, opts.sampler.seed);

  std::vector<InferenceResult> results;
  // The optimization chain is target independent; run it once and reuse.
  OptimizationDraws opt;
  bool have_opt = false;
  if (opts.method == "weighted") {
    const BoundInference first = bind_coordinate(run, joint, coords.front());
    opt = run_optimization_chain(first.target.T_obs, first.mv, opts.sampler);
    have_opt = true;
  }

  for (int coord : coords) {
    const BoundInference bi = bind_coordinate(run, joint, coord);
    const double T_obs = bi.target.T_obs[0];
    const double sd = std::sqrt(bi.target.sigma_T(0, 0));
    std::vector<double> grid(opts.grid_points);
    for (int i = 0; i < opts.grid_points; ++i) {
      grid[i] = T_obs - opts.grid_halfwidth_sds * sd +
                2.0 * opts.grid_halfwidth_sds * sd * i /
                    (opts.grid_points - 1);
    }
    std::vector<double> pivots(grid.size());
    double pivot0 = 0.0, ess0 = 0.0;
    bool low_ess = false, degenerate = false;

    auto pivot_of_sample = [&](const WeightedSample& ws, double theta) {
      Eigen::VectorXd th(1);
      th << theta;
      return plugin_pivot(ws, bi.target.T_obs, th, bi.target.sigma_T).one_sided;
    };

    if (opts.method == "weighted") {
      if (!have_opt) {
        opt = run_optimization_chain(bi.target.T_obs, bi.mv, opts.sampler);
        have_opt = true;
      }
      std::vector<Eigen::VectorXd> thetas;
      for (double g : grid) thetas.push_back(Eigen::VectorXd::Constant(1, g));
      thetas.push_back(Eigen::VectorXd::Zero(1));
      const WeightedOptResult w = weight_optimization_draws(
          bi.target, bi.mv, opt, thetas, opts.source, opts.sampler,
          bi.boot_target_draws);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        pivots[i] = pivot_of_sample(w.sample_at(i), grid[i]);
      }
      pivot0 = pivot_of_sample(w.sample_at(grid.size()), 0.0);
      ess0 = w.ess.back();
      low_ess = w.low_ess.back();
    } else if (opts.method == "plugin") {
      TargetSpec ref = bi.target;
      ref.theta = bi.target.T_obs;  // chain at the pre-selection MLE
      const WeightedSample base =
          run_selective_sampler(ref, bi.mv, opts.sampler);
      auto tilted_pivot = [&](double theta) {
        const WeightedSample tilted =
            tilt_reuse(base, bi.target.T_obs,
                       Eigen::VectorXd::Constant(1, theta), bi.target.sigma_T);
        return std::make_pair(pivot_of_sample(tilted, theta), tilted.ess());
      };
      for (std::size_t i = 0; i < grid.size(); ++i) {
        pivots[i] = tilted_pivot(grid[i]).first;
      }
      const auto [pv, es] = tilted_pivot(0.0);
      pivot0 = pv;
      ess0 = es;
      low_ess = ess0 < opts.sampler.min_ess;
    } else if (opts.method == "wild") {
      const int pos = static_cast<int>(
          std::find(run.chosen_E.begin(), run.chosen_E.end(), coord) -
          run.chosen_E.begin());
      const Eigen::MatrixXd W =
          wild_map_for(X, y, run.chosen_E, run.inference_loss, pos);
      const Eigen::VectorXd theta_ref = bi.target.T_obs;
      const WildSample ws =
          run_wild_bootstrap_sampler(W, theta_ref, bi.mv, opts.sampler);
      if (ws.degenerate) {
        degenerate = true;
        pivot0 = std::numeric_limits<double>::quiet_NaN();
        std::fill(pivots.begin(), pivots.end(), 0.0);
      } else {
        auto wild_pivot = [&](double theta) {
          const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, theta);
          Eigen::MatrixXd abs_draws = ws.t_draws;
          abs_draws.array() += theta;
          WeightedSample s{std::move(abs_draws),
                           wild_reweight(ws, bi.mv, theta_ref, th)};
          return std::make_pair(pivot_of_sample(s, theta), s.ess());
        };
        for (std::size_t i = 0; i < grid.size(); ++i) {
          pivots[i] = wild_pivot(grid[i]).first;
        }
        const auto [pv, es] = wild_pivot(0.0);
        pivot0 = pv;
        ess0 = es;
        low_ess = ess0 < opts.sampler.min_ess;
      }
    } else {
      throw std::invalid_argument("infer: unknown method '" + opts.method + "'");
    }

    auto pivot_lookup = [&](double th) {
      const auto it = std::lower_bound(grid.begin(), grid.end(), th - 1e-12);
      return pivots[std::min<std::size_t>(it - grid.begin(), pivots.size() - 1)];
    };
    const CiResult ci =
        degenerate ? CiResult{0, 0, true, false}
                   : invert_ci(pivot_lookup, grid, 1.0 - opts.level);

    InferenceResult r;
    r.name = "b" + std::to_string(coord);
    r.pivot = pivot0;
    r.p_value = degenerate
                    ? std::numeric_limits<double>::quiet_NaN()
                    : std::clamp(2.0 * std::min(pivot0, 1.0 - pivot0), 0.0, 1.0);
    r.ci_lo = ci.lo;
    r.ci_hi = ci.hi;
    r.ess = ess0;
    r.method = opts.method;
    r.ci_degenerate = ci.degenerate;
    r.ci_noncontiguous = ci.noncontiguous;
    r.low_ess = low_ess;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace selinf
