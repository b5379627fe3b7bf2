#include "selinf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <Eigen/Dense>

#include "selinf/errors.hpp"
#include "selinf/numeric.hpp"

namespace selinf {

GeneratedData generate_data(const Scenario& sc, RngStream& rng) {
  GeneratedData out;
  const double root_n = std::sqrt(double(sc.n));
  out.X.resize(sc.n, sc.p);
  for (int i = 0; i < sc.n; ++i) {
    for (int j = 0; j < sc.p; ++j) out.X(i, j) = rng.normal() / root_n;
  }
  Eigen::VectorXd beta = sc.beta;
  if (beta.size() == 0) beta = Eigen::VectorXd::Zero(sc.p);
  const Eigen::VectorXd lin = out.X * beta;
  out.y.resize(sc.n);
  if (sc.loss == Loss::Gaussian) {
    for (int i = 0; i < sc.n; ++i) out.y[i] = lin[i] + rng.normal();
  } else {
    for (int i = 0; i < sc.n; ++i) {
      out.y[i] = rng.uniform() < sigmoid(lin[i]) ? 1.0 : 0.0;
    }
  }
  return out;
}

void parallel_replicates(int R, int threads,
                         const std::function<void(int)>& fn) {
  if (threads <= 0) {
    threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 2u));
  }
  if (const char* env = std::getenv("SELINF_THREADS")) {
    threads = std::max(1, std::atoi(env));
  }
  threads = std::min(threads, R);
  if (threads <= 1) {
    for (int r = 0; r < R; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= R) return;
      try {
        fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

ViewPlan plan_of(const Scenario& sc) {
  ViewPlan plan;
  for (int k = 0; k < sc.views; ++k) plan.views.push_back(sc.view);
  plan.rule = ViewPlan::Rule::Union;
  return plan;
}

InferOptions infer_options_of(const Scenario& sc, std::uint64_t rep_seed) {
  InferOptions opts;
  opts.method = sc.pivot_method;
  opts.level = sc.level;
  opts.boot_reps = sc.boot_reps;
  opts.source = sc.source;
  opts.sampler = sc.sampler;
  opts.sampler.seed = rep_seed;
  return opts;
}

// True support of the scenario coefficient vector.
std::vector<int> support_of(const Eigen::VectorXd& beta) {
  std::vector<int> s;
  for (int j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s.push_back(j);
  }
  return s;
}

bool contains_all(const std::vector<int>& E, const std::vector<int>& S) {
  for (int j : S) {
    if (std::find(E.begin(), E.end(), j) == E.end()) return false;
  }
  return true;
}

// Coordinates whose population value under the generator is known exactly:
// with an isotropic design the Gaussian-loss projection equals beta_j for
// any selected model; the logistic one does only when E covers the support.
bool replicate_qualifies(const Scenario& sc, const std::vector<int>& E) {
  if (sc.loss == Loss::Gaussian) return true;
  return contains_all(E, support_of(sc.beta));
}

}  // namespace

UniformityResult uniformity_experiment(const Scenario& sc) {
  const int R = sc.replicates;
  std::vector<std::vector<double>> pivots(R);
  std::vector<char> selected(R, 0);

  parallel_replicates(R, sc.threads, [&](int r) {
    const std::uint64_t rep_seed = derive_seed(sc.seed, r);
    RngStream rng(derive_seed(rep_seed, "data"));
    const GeneratedData data = generate_data(sc, rng);
    MultiViewRun run;
    try {
      run = run_views(data.X, data.y, plan_of(sc), derive_seed(rep_seed, "views"));
    } catch (const std::invalid_argument&) {
      return;  // no selection event
    }
    selected[r] = 1;
    if (!replicate_qualifies(sc, run.chosen_E)) return;
    const InferOptions opts = infer_options_of(sc, derive_seed(rep_seed, "chain"));
    // Pivot at the null for every selected coordinate (true value is 0).
    try {
      InferOptions null_only = opts;
      null_only.grid_points = 2;  // pivots at the null only; no CI needed
      const std::vector<InferenceResult> res =
          infer_coordinates(run, data.X, data.y, {}, null_only);
      for (const auto& ir : res) {
        if (std::isfinite(ir.pivot)) pivots[r].push_back(ir.pivot);
      }
    } catch (const numeric_error&) {
      // degenerate replicate (e.g. singular bootstrap); dropped
    }
  });

  UniformityResult out;
  for (int r = 0; r < R; ++r) {
    out.replicates_with_selection += selected[r];
    out.pivots.insert(out.pivots.end(), pivots[r].begin(), pivots[r].end());
  }
  out.qualifying = static_cast<int>(out.pivots.size());
  if (out.qualifying < sc.min_qualifying) {
    out.inconclusive = true;
    return out;
  }
  out.ks_stat = ks_uniform(out.pivots);
  out.ks_crit =
      sc.ks_crit > 0 ? sc.ks_crit : 1.63 / std::sqrt(double(out.qualifying));
  out.pass = out.ks_stat < out.ks_crit;
  return out;
}

CoverageResult coverage_experiment(const Scenario& sc, double level) {
  const int R = sc.replicates;
  std::vector<std::vector<std::pair<bool, double>>> hits(R);

  parallel_replicates(R, sc.threads, [&](int r) {
    const std::uint64_t rep_seed = derive_seed(sc.seed, r);
    RngStream rng(derive_seed(rep_seed, "data"));
    const GeneratedData data = generate_data(sc, rng);
    MultiViewRun run;
    try {
      run = run_views(data.X, data.y, plan_of(sc), derive_seed(rep_seed, "views"));
    } catch (const std::invalid_argument&) {
      return;
    }
    if (!replicate_qualifies(sc, run.chosen_E)) return;
    InferOptions opts = infer_options_of(sc, derive_seed(rep_seed, "chain"));
    opts.level = level;
    try {
      const std::vector<InferenceResult> res =
          infer_coordinates(run, data.X, data.y, {}, opts);
      for (std::size_t i = 0; i < res.size(); ++i) {
        const int j = run.chosen_E[i];
        const double truth = sc.beta.size() > j ? sc.beta[j] : 0.0;
        const bool cover = res[i].ci_lo <= truth && truth <= res[i].ci_hi;
        hits[r].emplace_back(cover, res[i].ci_hi - res[i].ci_lo);
      }
    } catch (const numeric_error&) {
    }
  });

  CoverageResult out;
  double len = 0.0;
  int covered = 0;
  for (int r = 0; r < R; ++r) {
    for (const auto& [cover, length] : hits[r]) {
      ++out.qualifying;
      covered += cover;
      len += length;
    }
  }
  if (out.qualifying < sc.min_qualifying) {
    out.inconclusive = true;
    return out;
  }
  out.coverage = double(covered) / out.qualifying;
  out.mean_length = len / out.qualifying;
  out.band_lo = sc.coverage_lo;
  out.band_hi = sc.coverage_hi;
  out.pass = out.coverage >= out.band_lo && out.coverage <= out.band_hi;
  return out;
}

CarveCompareResult carve_compare_experiment(const Scenario& sc, double level) {
  const int R = sc.replicates;
  struct Rep {
    std::vector<std::pair<bool, double>> carve;
    std::vector<std::pair<bool, double>> split;
  };
  std::vector<Rep> reps(R);
  const double z = normal_quantile(0.5 + level / 2.0);

  parallel_replicates(R, sc.threads, [&](int r) {
    const std::uint64_t rep_seed = derive_seed(sc.seed, r);
    RngStream rng(derive_seed(rep_seed, "data"));
    const GeneratedData data = generate_data(sc, rng);
    MultiViewRun run;
    try {
      run = run_views(data.X, data.y, plan_of(sc), derive_seed(rep_seed, "views"));
    } catch (const std::invalid_argument&) {
      return;
    }
    if (!replicate_qualifies(sc, run.chosen_E)) return;
    InferOptions opts = infer_options_of(sc, derive_seed(rep_seed, "chain"));
    opts.level = level;

    // Held-out rows for the classical split comparison.
    const std::vector<int>& split_rows = run.views.front().carve_split;
    std::vector<int> holdout =
        complement(split_rows, static_cast<int>(data.X.rows()));
    Eigen::MatrixXd X2(holdout.size(), data.X.cols());
    Eigen::VectorXd y2(holdout.size());
    for (std::size_t i = 0; i < holdout.size(); ++i) {
      X2.row(i) = data.X.row(holdout[i]);
      y2[i] = data.y[holdout[i]];
    }
    const Eigen::MatrixXd X2_E = select_columns(X2, run.chosen_E);

    try {
      const std::vector<InferenceResult> res =
          infer_coordinates(run, data.X, data.y, {}, opts);

      // Wald intervals on the held-out half.
      Eigen::VectorXd bhat;
      Eigen::MatrixXd info;
      if (sc.loss == Loss::Gaussian) {
        bhat = ols_coef(X2_E, y2);
        const double dof = double(y2.size()) - double(bhat.size());
        const double s2 = (y2 - X2_E * bhat).squaredNorm() / std::max(dof, 1.0);
        info = (X2_E.transpose() * X2_E) / s2;
      } else {
        bhat = logistic_mle(X2_E, y2);
        const Eigen::VectorXd pi = sigmoid((X2_E * bhat).eval());
        const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
        info = X2_E.transpose() * w.asDiagonal() * X2_E;
      }
      const Eigen::MatrixXd cov = info.inverse();

      for (std::size_t i = 0; i < res.size(); ++i) {
        const int j = run.chosen_E[i];
        const double truth = sc.beta.size() > j ? sc.beta[j] : 0.0;
        reps[r].carve.emplace_back(
            res[i].ci_lo <= truth && truth <= res[i].ci_hi,
            res[i].ci_hi - res[i].ci_lo);
        const double se = std::sqrt(cov(i, i));
        reps[r].split.emplace_back(std::abs(bhat[i] - truth) <= z * se,
                                   2.0 * z * se);
      }
    } catch (const numeric_error&) {
    }
  });

  CarveCompareResult out;
  double clen = 0, slen = 0;
  int ccov = 0, scov = 0, nq = 0;
  for (const auto& rep : reps) {
    for (std::size_t i = 0; i < rep.carve.size(); ++i) {
      ++nq;
      ccov += rep.carve[i].first;
      clen += rep.carve[i].second;
      scov += rep.split[i].first;
      slen += rep.split[i].second;
    }
  }
  out.carve.qualifying = nq;
  if (nq < sc.min_qualifying) {
    out.carve.inconclusive = true;
    return out;
  }
  out.carve.coverage = double(ccov) / nq;
  out.carve.mean_length = clen / nq;
  out.carve.band_lo = sc.coverage_lo;
  out.carve.band_hi = sc.coverage_hi;
  out.carve.pass = out.carve.coverage >= sc.coverage_lo &&
                   out.carve.coverage <= sc.coverage_hi;
  out.split_coverage = double(scov) / nq;
  out.split_mean_length = slen / nq;
  out.carve_shorter = out.carve.mean_length < out.split_mean_length;
  return out;
}

}  // namespace selinf
