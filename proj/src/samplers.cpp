#include "selinf/samplers.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "selinf/errors.hpp"
#include "selinf/numeric.hpp"

namespace selinf {

double WeightedSample::ess() const { return effective_sample_size(log_weights); }

namespace {

int total_dim(const std::vector<ChainState::Block>& blocks) {
  int d = 0;
  for (const auto& b : blocks) d += static_cast<int>(b.value.size());
  return d;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Unchecked update core shared by langevin_step and the chain drivers.
void step_core(ChainState& state, const std::vector<Eigen::VectorXd>& grads) {
  const double eta = state.eta;
  const double noise = std::sqrt(2.0 * eta);
  for (std::size_t b = 0; b < state.blocks.size(); ++b) {
    auto& blk = state.blocks[b];
    const Eigen::VectorXd prop =
        blk.value + eta * grads[b] +
        noise * state.rng.normal_vector(static_cast<int>(blk.value.size()));
    blk.value = blk.region.project(prop);
  }
  ++state.iteration;
}

std::vector<Eigen::VectorXd> values_of(const ChainState& state) {
  std::vector<Eigen::VectorXd> v;
  v.reserve(state.blocks.size());
  for (const auto& b : state.blocks) v.push_back(b.value);
  return v;
}

// Generic driver: burn-in with automatic step halving when too many
// gradient evaluations come back non-finite, then collection via a callback.
template <typename Collect>
ChainDiagnostics drive_chain(ChainState& state, const GradFn& grad,
                             const SamplerConfig& config, Collect&& collect) {
  const std::vector<ChainState::Block> start = state.blocks;
  const double eta0 =
      config.eta > 0.0 ? config.eta : 0.5 / std::sqrt(total_dim(state.blocks));
  ChainDiagnostics diag;
  int halvings = 0;
  for (;;) {
    state.blocks = start;
    state.eta = eta0 * std::pow(0.5, halvings);
    state.rng = RngStream(derive_seed(config.seed, "chain"));
    long bad = 0;
    for (long i = 0; i < config.burnin; ++i) {
      const auto g = grad(values_of(state));
      bool ok = true;
      for (const auto& gb : g) ok = ok && finite(gb);
      if (!ok) {
        ++bad;
        continue;
      }
      step_core(state, g);
    }
    diag.bad_gradient_steps = bad;
    if (bad <= config.burnin / 2) break;
    if (++halvings > 6) {
      throw numeric_error("sampler: gradients non-finite even after step halving");
    }
  }
  diag.halvings = halvings;
  diag.eta_used = state.eta;
  const long total = config.steps * std::max(config.thin, 1);
  for (long i = 0; i < total; ++i) {
    const auto g = grad(values_of(state));
    bool ok = true;
    for (const auto& gb : g) ok = ok && finite(gb);
    if (!ok) {
      ++diag.bad_gradient_steps;
    } else {
      step_core(state, g);
    }
    if ((i + 1) % std::max(config.thin, 1) == 0) {
      collect(state);
    }
  }
  return diag;
}

}  // namespace

ChainState langevin_step(ChainState state, const GradFn& grad_log_target) {
  if (!(state.eta > 0.0)) {
    throw std::invalid_argument("langevin_step: step size must be positive");
  }
  const auto grads = grad_log_target(values_of(state));
  if (grads.size() != state.blocks.size()) {
    throw std::invalid_argument("langevin_step: gradient block count mismatch");
  }
  for (std::size_t b = 0; b < state.blocks.size(); ++b) {
    if (!finite(grads[b])) {
      throw numeric_error("langevin_step: non-finite gradient in block '" +
                          state.blocks[b].label + "'");
    }
  }
  step_core(state, grads);
  return state;
}

namespace {

// Assembles the optimization-variable blocks of all views, remembering the
// (view, block) index for each chain block.
struct ViewBlockIndex {
  std::vector<std::pair<int, int>> owner;  // chain block -> (view, block)
  std::vector<std::vector<int>> by_view;   // view -> chain block indices
};

ViewBlockIndex append_view_blocks(const MultiViewReconstruction& mv,
                                  std::vector<ChainState::Block>& blocks) {
  ViewBlockIndex idx;
  idx.by_view.resize(mv.views.size());
  for (std::size_t k = 0; k < mv.views.size(); ++k) {
    for (std::size_t b = 0; b < mv.views[k].blocks.size(); ++b) {
      const OptBlock& ob = mv.views[k].blocks[b];
      if (ob.coef.cols() == 0) continue;  // empty block, nothing to move
      blocks.push_back(ChainState::Block{
          "view" + std::to_string(k) + ":" + ob.label, ob.observed, ob.region});
      idx.owner.emplace_back(static_cast<int>(k), static_cast<int>(b));
      idx.by_view[k].push_back(static_cast<int>(blocks.size()) - 1);
    }
  }
  return idx;
}

// omega_k for view k given chain values laid out as per ViewBlockIndex.
Eigen::VectorXd view_omega(const MultiViewReconstruction& mv,
                           const ViewBlockIndex& idx,
                           const std::vector<Eigen::VectorXd>& vals,
                           int first_opt_block, int k,
                           const Eigen::VectorXd& target_term) {
  const BoundView& view = mv.views[k];
  Eigen::VectorXd om = target_term + view.offset;
  for (int cb : idx.by_view[k]) {
    const auto [vk, bk] = idx.owner[cb - first_opt_block];
    om += view.blocks[bk].coef * vals[cb];
  }
  return om;
}

}  // namespace

WeightedSample run_selective_sampler(const TargetSpec& target,
                                     const MultiViewReconstruction& mv,
                                     const SamplerConfig& config,
                                     ChainDiagnostics* diag_out) {
  const int a = target.target_dim();
  if (mv.target_dim != a) {
    throw std::invalid_argument("run_selective_sampler: target dim mismatch");
  }
  std::vector<ChainState::Block> blocks;
  blocks.push_back(
      ChainState::Block{"target", target.T_obs, ConstraintRegion::unconstrained(a)});
  ViewBlockIndex idx = append_view_blocks(mv, blocks);

  GradFn grad = [&](const std::vector<Eigen::VectorXd>& vals) {
    std::vector<Eigen::VectorXd> g(vals.size());
    const Eigen::VectorXd& T = vals[0];
    Eigen::VectorXd gT = -target.sigma_T_solve(T - target.theta);
    for (std::size_t k = 0; k < mv.views.size(); ++k) {
      const BoundView& view = mv.views[k];
      const Eigen::VectorXd om = view_omega(mv, idx, vals, 1,
                                            static_cast<int>(k),
                                            view.target_coef * T);
      const Eigen::VectorXd glog = view.dist.grad_log_density(om);
      gT += view.target_coef.transpose() * glog;
      for (int cb : idx.by_view[k]) {
        const auto [vk, bk] = idx.owner[cb - 1];
        g[cb] = view.blocks[bk].coef.transpose() * glog;
      }
    }
    g[0] = gT;
    return g;
  };

  ChainState state{std::move(blocks), 0.1, 0, RngStream(config.seed)};
  Eigen::MatrixXd draws(config.steps, a);
  long row = 0;
  ChainDiagnostics diag = drive_chain(state, grad, config, [&](const ChainState& s) {
    draws.row(row++) = s.blocks[0].value.transpose();
  });
  if (diag_out) *diag_out = diag;
  return WeightedSample{std::move(draws), Eigen::VectorXd::Zero(config.steps)};
}

OptimizationDraws run_optimization_chain(const Eigen::VectorXd& T_obs,
                                         const MultiViewReconstruction& mv,
                                         const SamplerConfig& config) {
  std::vector<ChainState::Block> blocks;
  ViewBlockIndex idx = append_view_blocks(mv, blocks);
  if (blocks.empty()) {
    throw numeric_error("optimization chain: no optimization variables to move");
  }
  const int K = static_cast<int>(mv.views.size());
  std::vector<Eigen::VectorXd> base_term(K);
  for (int k = 0; k < K; ++k) {
    base_term[k] = mv.views[k].target_coef * T_obs;
  }

  GradFn grad = [&](const std::vector<Eigen::VectorXd>& vals) {
    std::vector<Eigen::VectorXd> g(vals.size());
    for (int k = 0; k < K; ++k) {
      const BoundView& view = mv.views[k];
      const Eigen::VectorXd om =
          view_omega(mv, idx, vals, 0, k, base_term[k]);
      const Eigen::VectorXd glog = view.dist.grad_log_density(om);
      for (int cb : idx.by_view[k]) {
        const auto [vk, bk] = idx.owner[cb];
        g[cb] = view.blocks[bk].coef.transpose() * glog;
      }
    }
    return g;
  };

  OptimizationDraws out;
  out.omega_base.resize(K);
  for (int k = 0; k < K; ++k) {
    out.omega_base[k].resize(config.steps, mv.views[k].omega_dim());
  }
  out.log_g_base = Eigen::VectorXd::Zero(config.steps);
  long row = 0;
  ChainState state{std::move(blocks), 0.1, 0, RngStream(config.seed)};
  out.diag = drive_chain(state, grad, config, [&](const ChainState& s) {
    const auto vals = values_of(s);
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd om = view_omega(mv, idx, vals, 0, k, base_term[k]);
      out.omega_base[k].row(row) = om.transpose();
      out.log_g_base[row] += mv.views[k].dist.log_density(om);
    }
    ++row;
  });
  return out;
}

WeightedOptResult weight_optimization_draws(
    const TargetSpec& target, const MultiViewReconstruction& mv,
    const OptimizationDraws& opt, const std::vector<Eigen::VectorXd>& theta_grid,
    TargetDrawSource source, const SamplerConfig& config,
    const Eigen::MatrixXd& boot_draws) {
  if (theta_grid.empty()) {
    throw std::invalid_argument("weighted optimization sampler: empty theta grid");
  }
  const int a = target.target_dim();
  const long S = opt.log_g_base.size();
  const int K = static_cast<int>(mv.views.size());

  WeightedOptResult out;
  out.theta_grid = theta_grid;
  out.diag = opt.diag;
  out.target_draws.resize(S, a);
  RngStream trng(derive_seed(config.seed, "target-draws"));
  if (source == TargetDrawSource::Gaussian) {
    const Eigen::MatrixXd& Lchol = target.sigma_T_chol;
    for (long s = 0; s < S; ++s) {
      out.target_draws.row(s) = (Lchol * trng.normal_vector(a)).transpose();
    }
  } else {
    if (boot_draws.rows() < 1 || boot_draws.cols() != a) {
      throw std::invalid_argument(
          "weighted optimization sampler: bootstrap draws required");
    }
    for (long s = 0; s < S; ++s) {
      out.target_draws.row(s) =
          boot_draws.row(trng.uniform_int(static_cast<int>(boot_draws.rows())));
    }
  }

  // Per view: M_tilde * T^s for all draws, shared across the grid.
  std::vector<Eigen::MatrixXd> mt(K);
  for (int k = 0; k < K; ++k) {
    mt[k] = out.target_draws * mv.views[k].target_coef.transpose();  // S x p
  }

  for (const Eigen::VectorXd& theta : theta_grid) {
    Eigen::VectorXd logw = -opt.log_g_base;
    for (int k = 0; k < K; ++k) {
      const BoundView& view = mv.views[k];
      const Eigen::VectorXd shift = view.target_coef * (theta - target.T_obs);
      const int pw = view.omega_dim();
      for (long s = 0; s < S; ++s) {
        double lg = 0.0;
        for (int j = 0; j < pw; ++j) {
          lg += view.dist.log_density1(opt.omega_base[k](s, j) + mt[k](s, j) +
                                       shift[j]);
        }
        logw[s] += lg;
      }
    }
    const double ess = effective_sample_size(logw);
    out.log_weights.push_back(std::move(logw));
    out.ess.push_back(ess);
    out.low_ess.push_back(ess < config.min_ess);
  }
  return out;
}

WeightedOptResult run_weighted_optimization_sampler(
    const TargetSpec& target, const MultiViewReconstruction& mv,
    const std::vector<Eigen::VectorXd>& theta_grid, TargetDrawSource source,
    const SamplerConfig& config, const Eigen::MatrixXd& boot_draws) {
  const OptimizationDraws opt = run_optimization_chain(target.T_obs, mv, config);
  return weight_optimization_draws(target, mv, opt, theta_grid, source, config,
                                   boot_draws);
}

WeightedSample WeightedOptResult::sample_at(std::size_t theta_index) const {
  const Eigen::VectorXd& theta = theta_grid.at(theta_index);
  Eigen::MatrixXd abs_draws = target_draws;
  abs_draws.rowwise() += theta.transpose();
  return WeightedSample{std::move(abs_draws), log_weights.at(theta_index)};
}

WildSample run_wild_bootstrap_sampler(const Eigen::MatrixXd& wild_map,
                                      const Eigen::VectorXd& theta,
                                      const MultiViewReconstruction& mv,
                                      const SamplerConfig& config) {
  const int n = static_cast<int>(wild_map.cols());
  const int a = static_cast<int>(wild_map.rows());
  if (theta.size() != a) {
    throw std::invalid_argument("wild sampler: theta has wrong dimension");
  }
  WildSample out;
  if (wild_map.lpNorm<Eigen::Infinity>() < 1e-14) {
    // Perfect fit: T(alpha) is identically zero, the bootstrap law is a
    // point mass and no pivot can be formed.
    out.degenerate = true;
    out.t_draws = Eigen::MatrixXd::Zero(config.steps, a);
    return out;
  }
  const int K = static_cast<int>(mv.views.size());
  std::vector<ChainState::Block> blocks;
  blocks.push_back(ChainState::Block{"alpha", Eigen::VectorXd::Zero(n),
                                     ConstraintRegion::unconstrained(n)});
  ViewBlockIndex idx = append_view_blocks(mv, blocks);

  std::vector<Eigen::MatrixXd> mbar(K);   // M_tilde_k W
  std::vector<Eigen::VectorXd> extra(K);  // M_tilde_k theta
  for (int k = 0; k < K; ++k) {
    mbar[k] = mv.views[k].target_coef * wild_map;
    extra[k] = mv.views[k].target_coef * theta;
  }

  GradFn grad = [&](const std::vector<Eigen::VectorXd>& vals) {
    std::vector<Eigen::VectorXd> g(vals.size());
    const Eigen::VectorXd& alpha = vals[0];
    Eigen::VectorXd ga = -alpha;  // standard normal weight law
    for (int k = 0; k < K; ++k) {
      const BoundView& view = mv.views[k];
      const Eigen::VectorXd om =
          view_omega(mv, idx, vals, 1, k, mbar[k] * alpha + extra[k]);
      const Eigen::VectorXd glog = view.dist.grad_log_density(om);
      ga += mbar[k].transpose() * glog;
      for (int cb : idx.by_view[k]) {
        const auto [vk, bk] = idx.owner[cb - 1];
        g[cb] = view.blocks[bk].coef.transpose() * glog;
      }
    }
    g[0] = ga;
    return g;
  };

  out.t_draws.resize(config.steps, a);
  out.omega_draws.resize(K);
  for (int k = 0; k < K; ++k) {
    out.omega_draws[k].resize(config.steps, mv.views[k].omega_dim());
  }
  long row = 0;
  ChainState state{std::move(blocks), 0.1, 0, RngStream(config.seed)};
  out.diag = drive_chain(state, grad, config, [&](const ChainState& s) {
    const auto vals = values_of(s);
    out.t_draws.row(row) = (wild_map * vals[0]).transpose();
    for (int k = 0; k < K; ++k) {
      out.omega_draws[k].row(row) =
          view_omega(mv, idx, vals, 1, k, mbar[k] * vals[0] + extra[k])
              .transpose();
    }
    ++row;
  });
  return out;
}

Eigen::VectorXd wild_reweight(const WildSample& sample,
                              const MultiViewReconstruction& mv,
                              const Eigen::VectorXd& theta_ref,
                              const Eigen::VectorXd& theta_new) {
  const long S = sample.t_draws.rows();
  Eigen::VectorXd logw = Eigen::VectorXd::Zero(S);
  for (std::size_t k = 0; k < mv.views.size(); ++k) {
    const BoundView& view = mv.views[k];
    const Eigen::VectorXd shift = view.target_coef * (theta_new - theta_ref);
    const int pw = view.omega_dim();
    for (long s = 0; s < S; ++s) {
      double d = 0.0;
      for (int j = 0; j < pw; ++j) {
        const double base = sample.omega_draws[k](s, j);
        d += view.dist.log_density1(base + shift[j]) -
             view.dist.log_density1(base);
      }
      logw[s] += d;
    }
  }
  return logw;
}

}  // namespace selinf
