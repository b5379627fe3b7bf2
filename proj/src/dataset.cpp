#include "selinf/dataset.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "selinf/errors.hpp"
#include "selinf/glm.hpp"

namespace selinf {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

json region_to_json(const ConstraintRegion& r) {
  json j;
  j["dim"] = r.dim();
  switch (r.kind()) {
    case ConstraintKind::Unconstrained:
      j["kind"] = "unconstrained";
      break;
    case ConstraintKind::Orthant:
      j["kind"] = "orthant";
      j["signs"] = vec_to_json(r.signs());
      break;
    case ConstraintKind::Box:
      j["kind"] = "box";
      j["lo"] = r.box_lo();
      j["hi"] = r.box_hi();
      break;
    case ConstraintKind::Nonneg:
      j["kind"] = "nonneg";
      break;
    case ConstraintKind::LinfNormalCone:
      j["kind"] = "linf_normal_cone";
      j["pivot"] = r.cone_pivot();
      j["sign"] = r.cone_sign();
      break;
  }
  return j;
}

ConstraintRegion region_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (kind == "unconstrained") return ConstraintRegion::unconstrained(dim);
  if (kind == "orthant") {
    return ConstraintRegion::orthant(vec_from_json(j.at("signs")));
  }
  if (kind == "box") {
    // nlohmann serializes infinities as null
    double lo = j.at("lo").is_number() ? j.at("lo").get<double>()
                                       : -std::numeric_limits<double>::infinity();
    double hi = j.at("hi").is_number() ? j.at("hi").get<double>()
                                       : std::numeric_limits<double>::infinity();
    return ConstraintRegion::box(lo, hi, dim);
  }
  if (kind == "nonneg") return ConstraintRegion::nonneg(dim);
  if (kind == "linf_normal_cone") {
    return ConstraintRegion::linf_normal_cone(j.at("pivot").get<int>(),
                                              j.at("sign").get<double>(), dim);
  }
  throw std::invalid_argument("unknown constraint kind: " + kind);
}

json recon_to_json(const AffineReconstruction& r) {
  json j;
  j["data_coef"] = mat_to_json(r.data_coef);
  j["offset"] = vec_to_json(r.offset);
  j["jacobian_log"] = r.jacobian_log;
  json blocks = json::array();
  for (const auto& b : r.blocks) {
    json jb;
    jb["label"] = b.label;
    jb["coef"] = mat_to_json(b.coef);
    jb["region"] = region_to_json(b.region);
    jb["observed"] = vec_to_json(b.observed);
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

AffineReconstruction recon_from_json(const json& j) {
  AffineReconstruction r;
  r.data_coef = mat_from_json(j.at("data_coef"));
  r.offset = vec_from_json(j.at("offset"));
  r.jacobian_log = j.at("jacobian_log").get<double>();
  for (const auto& jb : j.at("blocks")) {
    OptBlock b;
    b.label = jb.at("label").get<std::string>();
    b.coef = mat_from_json(jb.at("coef"));
    b.region = region_from_json(jb.at("region"));
    b.observed = vec_from_json(jb.at("observed"));
    r.blocks.push_back(std::move(b));
  }
  return r;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& response,
                   bool standardize) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty data file: " + path);
  }
  const std::vector<std::string> header = split_csv_line(line);
  int resp_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == response) resp_col = static_cast<int>(j);
  }
  if (resp_col < 0) {
    throw std::invalid_argument("response column '" + response +
                                "' not found in " + path);
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("row " + std::to_string(lineno) +
                                  " has wrong number of cells");
    }
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j].empty()) {
        throw std::invalid_argument("missing value at row " +
                                    std::to_string(lineno) + ", column " +
                                    header[j]);
      }
      try {
        std::size_t used = 0;
        row[j] = std::stod(cells[j], &used);
        if (used != cells[j].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::invalid_argument("non-numeric cell at row " +
                                    std::to_string(lineno) + ", column " +
                                    header[j]);
      }
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(header.size()) - 1;
  if (n == 0 || p < 1) {
    throw std::invalid_argument("data file needs rows and >= 1 predictor");
  }
  Dataset out;
  out.response = response;
  out.X.resize(n, p);
  out.y.resize(n);
  int jj = 0;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) == resp_col) continue;
    out.columns.push_back(header[j]);
    for (int i = 0; i < n; ++i) out.X(i, jj) = rows[i][j];
    ++jj;
  }
  for (int i = 0; i < n; ++i) out.y[i] = rows[i][resp_col];
  out.center = Eigen::VectorXd::Zero(p);
  out.scale = Eigen::VectorXd::Ones(p);
  if (standardize) {
    out.standardized = true;
    for (int j = 0; j < p; ++j) {
      out.center[j] = out.X.col(j).mean();
      out.X.col(j).array() -= out.center[j];
      const double norm = out.X.col(j).norm();
      if (norm < 1e-12) {
        throw std::invalid_argument("column '" + out.columns[j] +
                                    "' is constant; cannot standardize");
      }
      out.scale[j] = norm;
      out.X.col(j) /= norm;
    }
  }
  return out;
}

std::string record_to_json(const SelectionRecord& rec) {
  json j;
  j["schema_version"] = rec.schema_version;
  j["method"] = rec.method;
  j["loss"] = rec.loss == Loss::Gaussian ? "gaussian" : "logistic";
  j["lam"] = rec.lam;
  j["eps"] = rec.eps;
  j["screen_c"] = rec.screen_c;
  j["carve_rho"] = rec.carve_rho;
  j["fs_steps"] = rec.fs_steps;
  j["seed"] = rec.seed;
  j["randomization"] = {{"family", family_name(rec.family)},
                        {"scale", rec.scale}};
  j["data"] = {{"X", mat_to_json(rec.data.X)},
               {"y", vec_to_json(rec.data.y)},
               {"columns", rec.data.columns},
               {"response", rec.data.response},
               {"center", vec_to_json(rec.data.center)},
               {"scale", vec_to_json(rec.data.scale)},
               {"standardized", rec.data.standardized}};
  j["active"] = rec.active;
  j["signs"] = vec_to_json(rec.signs);
  j["observed_omega"] = vec_to_json(rec.observed_omega);
  j["D_obs"] = vec_to_json(rec.D_obs);
  json recons = json::array();
  for (const auto& r : rec.recons) recons.push_back(recon_to_json(r));
  j["reconstructions"] = std::move(recons);
  j["dist_dims"] = rec.dist_dims;
  if (rec.method == "carve") {
    j["carve_sigma_omega"] = mat_to_json(rec.carve_sigma_omega);
    j["carve_split"] = rec.carve_split;
  }
  if (rec.method == "screen") {
    j["screen_scales"] = vec_to_json(rec.screen_scales);
  }
  return j.dump(1);
}

SelectionRecord record_from_json(const std::string& text) {
  const json j = json::parse(text);
  const int version = j.at("schema_version").get<int>();
  if (version != kRecordSchemaVersion) {
    throw std::invalid_argument("unsupported selection record schema version " +
                                std::to_string(version));
  }
  SelectionRecord rec;
  rec.schema_version = version;
  rec.method = j.at("method").get<std::string>();
  rec.loss = j.at("loss").get<std::string>() == "gaussian" ? Loss::Gaussian
                                                           : Loss::Logistic;
  rec.lam = j.at("lam").get<double>();
  rec.eps = j.at("eps").get<double>();
  rec.screen_c = j.at("screen_c").get<double>();
  rec.carve_rho = j.at("carve_rho").get<double>();
  rec.fs_steps = j.at("fs_steps").get<int>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.family =
      family_from_name(j.at("randomization").at("family").get<std::string>());
  rec.scale = j.at("randomization").at("scale").get<double>();
  const json& d = j.at("data");
  rec.data.X = mat_from_json(d.at("X"));
  rec.data.y = vec_from_json(d.at("y"));
  rec.data.columns = d.at("columns").get<std::vector<std::string>>();
  rec.data.response = d.at("response").get<std::string>();
  rec.data.center = vec_from_json(d.at("center"));
  rec.data.scale = vec_from_json(d.at("scale"));
  rec.data.standardized = d.at("standardized").get<bool>();
  rec.active = j.at("active").get<std::vector<int>>();
  rec.signs = vec_from_json(j.at("signs"));
  rec.observed_omega = vec_from_json(j.at("observed_omega"));
  rec.D_obs = vec_from_json(j.at("D_obs"));
  for (const auto& r : j.at("reconstructions")) {
    rec.recons.push_back(recon_from_json(r));
  }
  rec.dist_dims = j.at("dist_dims").get<std::vector<int>>();
  if (rec.method == "carve") {
    rec.carve_sigma_omega = mat_from_json(j.at("carve_sigma_omega"));
    rec.carve_split = j.at("carve_split").get<std::vector<int>>();
  }
  if (rec.method == "screen") {
    rec.screen_scales = vec_from_json(j.at("screen_scales"));
  }
  return rec;
}

MultiViewRun record_to_run(const SelectionRecord& rec) {
  MultiViewRun run;
  ExecutedView view;
  view.selected = rec.active;
  view.D_obs = rec.D_obs;
  view.recons = rec.recons;
  for (std::size_t r = 0; r < rec.recons.size(); ++r) {
    if (rec.method == "carve") {
      view.dists.emplace_back(RandomizationFamily::Gaussian, 1.0,
                              rec.dist_dims[r]);
    } else {
      view.dists.emplace_back(rec.family, rec.scale, rec.dist_dims[r]);
    }
  }
  const Loss loss = rec.loss;
  if (rec.method == "screen") {
    const Eigen::VectorXd scales = rec.screen_scales;
    view.d_fn = [scales](const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
      return (Xb.transpose() * yb).cwiseQuotient(scales).eval();
    };
  } else {
    const std::vector<int> E = rec.active;
    view.d_fn = [E, loss](const Eigen::MatrixXd& Xb, const Eigen::VectorXd& yb) {
      return build_data_vector(Xb, yb, E, loss).D;
    };
  }
  view.carve_split = rec.carve_split;
  run.views.push_back(std::move(view));
  run.chosen_E = rec.active;
  run.inference_loss = rec.loss;
  const std::vector<int> E = rec.active;
  run.d_target_fn = [E, loss](const Eigen::MatrixXd& Xb,
                              const Eigen::VectorXd& yb) {
    return build_data_vector(Xb, yb, E, loss).D;
  };
  run.D_target_obs = run.d_target_fn(rec.data.X, rec.data.y);
  return run;
}

std::string report(const std::vector<InferenceResult>& results,
                   ReportFormat format) {
  if (format == ReportFormat::Json) {
    json arr = json::array();
    for (const auto& r : results) {
      json e;
      e["coef"] = r.name;
      e["pivot"] = r.pivot;
      e["p_value"] = r.p_value;
      e["ci_lo"] = r.ci_lo;
      e["ci_hi"] = r.ci_hi;
      e["ess"] = r.ess;
      e["method"] = r.method;
      e["flags"] = {{"ci_degenerate", r.ci_degenerate},
                    {"ci_noncontiguous", r.ci_noncontiguous},
                    {"low_ess", r.low_ess}};
      arr.push_back(std::move(e));
    }
    json doc;
    doc["results"] = std::move(arr);
    return doc.dump(1) + "\n";
  }
  std::ostringstream os;
  os << std::left << std::setw(10) << "coef" << std::right << std::setw(10)
     << "pivot" << std::setw(10) << "p" << std::setw(12) << "ci_lo"
     << std::setw(12) << "ci_hi" << std::setw(10) << "ess" << "\n";
  for (const auto& r : results) {
    os << std::left << std::setw(10) << r.name << std::right << std::fixed
       << std::setprecision(4) << std::setw(10) << r.pivot << std::setw(10)
       << r.p_value << std::setw(12) << r.ci_lo << std::setw(12) << r.ci_hi
       << std::setprecision(1) << std::setw(10) << r.ess;
    os.unsetf(std::ios::fixed);
    if (r.ci_degenerate) os << "  [degenerate]";
    if (r.ci_noncontiguous) os << "  [hull]";
    if (r.low_ess) os << "  [low-ess]";
    os << "\n";
  }
  return os.str();
}

}  // namespace selinf
