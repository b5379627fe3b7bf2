#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selinf/multiview.hpp"

namespace selinf {

// A simulation scenario: generator, procedure, pivot method, replicate
// budget, seed, and explicit acceptance thresholds.
struct Scenario {
  std::string name = "scenario";
  int n = 100;
  int p = 10;
  Eigen::VectorXd beta;  // coefficients on the 1/sqrt(n)-scaled design
  Loss loss = Loss::Gaussian;

  ViewSpec view;   // the procedure each view runs
  int views = 1;   // number of independent views

  std::string pivot_method = "weighted";  // weighted | plugin | wild
  TargetDrawSource source = TargetDrawSource::Gaussian;
  int boot_reps = 600;
  SamplerConfig sampler;

  int replicates = 500;
  std::uint64_t seed = 1;
  double level = 0.9;

  // Thresholds; ks_crit 0 means the 1% critical value 1.63/sqrt(N).
  double ks_crit = 0.0;
  double coverage_lo = 0.86;
  double coverage_hi = 0.94;
  int min_qualifying = 50;

  int threads = 0;  // 0 -> min(hardware, 2)
};

struct GeneratedData {
  Eigen::MatrixXd X;  // columns scaled by 1/sqrt(n)
  Eigen::VectorXd y;
};

GeneratedData generate_data(const Scenario& sc, RngStream& rng);

// Deterministic parallel map over replicate indices: each worker writes only
// its own slots, aggregation order is fixed.
void parallel_replicates(int R, int threads, const std::function<void(int)>& fn);

struct UniformityResult {
  double ks_stat = 0.0;
  double ks_crit = 0.0;
  bool pass = false;
  bool inconclusive = false;
  int qualifying = 0;
  int replicates_with_selection = 0;
  std::vector<double> pivots;
};

// Null-scenario check that the pivot is Unif[0,1] over replicates where
// selection occurred and the tested coordinate was selected. Replicates are
// filtered on the selection event, never reweighted.
UniformityResult uniformity_experiment(const Scenario& sc);

struct CoverageResult {
  double coverage = 0.0;
  double mean_length = 0.0;
  int qualifying = 0;
  bool pass = false;
  bool inconclusive = false;
  double band_lo = 0.0, band_hi = 0.0;  // binomial 3-sigma band around nominal
};

CoverageResult coverage_experiment(const Scenario& sc, double level);

struct CarveCompareResult {
  CoverageResult carve;
  double split_coverage = 0.0;
  double split_mean_length = 0.0;
  bool carve_shorter = false;
};

// Data carving vs classical data splitting on the same replicates: carving
// selects on the stage-one rows but uses all rows for inference; splitting
// refits on the held-out rows with Wald intervals.
CarveCompareResult carve_compare_experiment(const Scenario& sc, double level);

}  // namespace selinf
