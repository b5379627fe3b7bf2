#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "selinf/multiview.hpp"
#include "selinf/pivots.hpp"

namespace selinf {

// A numeric design matrix and response, with the standardization record.
// Standardized columns are centered and scaled to unit norm, which is the
// 1/sqrt(n) column scaling the procedures expect.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> columns;  // predictor names
  std::string response;
  Eigen::VectorXd center;  // per predictor column
  Eigen::VectorXd scale;   // per predictor column (norm after centering)
  bool standardized = false;
};

// Reads a CSV with a header row; all cells must be numeric and present.
Dataset ingest_csv(const std::string& path, const std::string& response,
                   bool standardize);

// Versioned selection record: everything `infer` needs to resume, including
// the (standardized) data.
inline constexpr int kRecordSchemaVersion = 1;

struct SelectionRecord {
  int schema_version = kRecordSchemaVersion;
  std::string method;  // lasso | screen | stepwise | carve
  Loss loss = Loss::Gaussian;
  double lam = 0.0, eps = 0.0, screen_c = 0.0, carve_rho = 0.0;
  int fs_steps = 0;
  std::uint64_t seed = 0;
  RandomizationFamily family = RandomizationFamily::Logistic;
  double scale = 1.0;
  Dataset data;
  std::vector<int> active;
  Eigen::VectorXd signs;
  Eigen::VectorXd observed_omega;
  Eigen::VectorXd D_obs;
  std::vector<AffineReconstruction> recons;
  std::vector<int> dist_dims;           // randomization dim per recon
  Eigen::MatrixXd carve_sigma_omega;    // carve only
  std::vector<int> carve_split;         // carve only
  Eigen::VectorXd screen_scales;        // screen only (frozen)
};

std::string record_to_json(const SelectionRecord& rec);
SelectionRecord record_from_json(const std::string& text);

// Rebuilds the runnable multi-view state from a stored record.
MultiViewRun record_to_run(const SelectionRecord& rec);

enum class ReportFormat { Json, Table };

// Stable-order report of inference results: machine JSON or a fixed-width
// table with columns {coef, pivot, p, ci_lo, ci_hi, ess}.
std::string report(const std::vector<InferenceResult>& results,
                   ReportFormat format);

}  // namespace selinf
