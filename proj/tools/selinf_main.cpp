#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selinf/dataset.hpp"
#include "selinf/errors.hpp"
#include "selinf/exact1d.hpp"
#include "selinf/harness.hpp"
#include "selinf/multiview.hpp"

using nlohmann::json;
using namespace selinf;

namespace {

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write output file: " + path);
  out << text;
}

ViewSpec::Kind kind_from_name(const std::string& m) {
  if (m == "lasso") return ViewSpec::Kind::Lasso;
  if (m == "screen") return ViewSpec::Kind::Screen;
  if (m == "stepwise") return ViewSpec::Kind::Stepwise;
  if (m == "carve") return ViewSpec::Kind::Carve;
  throw std::invalid_argument("unknown method: " + m);
}

SelectionRecord fit_record(const Dataset& data, const std::string& method,
                           Loss loss, double lam, double c, int steps,
                           double rho, const std::string& family, double scale,
                           std::uint64_t seed) {
  ViewSpec spec;
  spec.kind = kind_from_name(method);
  spec.loss = loss;
  spec.lam = lam;
  spec.screen_c = c;
  spec.fs_steps = steps;
  spec.carve_rho = rho;
  spec.family = family_from_name(family);
  spec.scale = scale;

  ViewPlan plan;
  plan.views.push_back(spec);
  const MultiViewRun run =
      run_views(data.X, data.y, plan, derive_seed(seed, "fit"));
  const ExecutedView& v = run.views.front();

  SelectionRecord rec;
  rec.method = method;
  rec.loss = loss;
  rec.lam = lam;
  rec.eps = spec.eps > 0 ? spec.eps : 1.0 / std::sqrt(double(data.X.rows()));
  rec.screen_c = c;
  rec.carve_rho = rho;
  rec.fs_steps = steps;
  rec.seed = seed;
  rec.family = spec.family;
  rec.scale = scale;
  rec.data = data;
  rec.active = run.chosen_E;
  rec.D_obs = v.D_obs;
  rec.recons = v.recons;
  for (const auto& d : v.dists) rec.dist_dims.push_back(d.dim());
  rec.carve_split = v.carve_split;
  // Per-view extras for resuming.
  if (method == "screen") {
    const double sd_y = std::sqrt((data.y.array() - data.y.mean()).square().sum() /
                                  (data.y.size() - 1));
    Eigen::VectorXd scales(data.X.cols());
    for (int j = 0; j < data.X.cols(); ++j) {
      scales[j] = std::max(data.X.col(j).norm() * sd_y, 1e-12);
    }
    rec.screen_scales = scales;
  }
  rec.signs = v.signs;
  rec.observed_omega = v.observed_omega;
  return rec;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"selinf: randomized model selection with valid post-selection "
               "inference"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string config_path, out_path;
  app.add_option("--seed", seed, "top-level RNG seed");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_path, "output path (default stdout)");

  // ------------------------------------------------------------------ fit
  auto* fit = app.add_subcommand("fit", "run a randomized selection procedure");
  std::string data_path, response, method = "lasso", family = "logistic";
  std::string loss_name = "gaussian";
  double lam = 0.0, screen_c = 2.0, rho = 0.5, scale = 1.0;
  int steps = 1;
  bool no_standardize = false;
  fit->add_option("--data", data_path, "CSV data file")->required();
  fit->add_option("--response", response, "response column")->required();
  fit->add_option("--method", method, "lasso|screen|stepwise|carve");
  fit->add_option("--loss", loss_name, "gaussian|logistic");
  fit->add_option("--lam", lam, "l1 penalty (0 = heuristic)");
  fit->add_option("--c", screen_c, "screening threshold");
  fit->add_option("--steps", steps, "forward stepwise steps");
  fit->add_option("--rho", rho, "carving stage-one fraction");
  fit->add_option("--family", family, "randomization family");
  fit->add_option("--scale", scale, "randomization scale");
  fit->add_flag("--no-standardize", no_standardize,
                "skip column standardization");

  // ---------------------------------------------------------------- infer
  auto* infer = app.add_subcommand("infer", "pivots and CIs from a record");
  std::string record_path, infer_method = "weighted", coords_arg = "all";
  std::string format_name = "json";
  double level = 0.9;
  long chain_steps = 8000, burnin = 2000;
  double eta = 0.0;
  int boot_reps = 600;
  infer->add_option("--record", record_path, "selection record")->required();
  infer->add_option("--level", level, "confidence level");
  infer->add_option("--method", infer_method, "plugin|wild|weighted");
  infer->add_option("--coords", coords_arg, "all or comma-separated indices");
  infer->add_option("--format", format_name, "json|table");
  infer->add_option("--chain-steps", chain_steps, "retained chain draws");
  infer->add_option("--burnin", burnin, "chain burn-in steps");
  infer->add_option("--eta", eta, "Langevin step size (0 = auto)");
  infer->add_option("--boot", boot_reps, "pairs bootstrap replicates");

  // ------------------------------------------------------------- multiview
  auto* mv = app.add_subcommand("multiview", "run a multi-view plan and infer");
  std::string plan_path, mv_data, mv_response, mv_format = "json";
  double mv_level = 0.9;
  std::string mv_method = "weighted";
  mv->add_option("--plan", plan_path, "JSON plan file")->required();
  mv->add_option("--data", mv_data, "CSV data file")->required();
  mv->add_option("--response", mv_response, "response column")->required();
  mv->add_option("--level", mv_level, "confidence level");
  mv->add_option("--method", mv_method, "plugin|wild|weighted");
  mv->add_option("--format", mv_format, "json|table");

  // ----------------------------------------------------------------- carve
  auto* carve = app.add_subcommand("carve", "data carving fit (stage one + "
                                            "randomization estimate)");
  std::string cv_data, cv_response, cv_loss = "logistic";
  double cv_rho = 0.5, cv_lam = 0.0;
  carve->add_option("--data", cv_data, "CSV data file")->required();
  carve->add_option("--response", cv_response, "response column")->required();
  carve->add_option("--rho", cv_rho, "stage-one fraction");
  carve->add_option("--lam", cv_lam, "l1 penalty (0 = heuristic)");
  carve->add_option("--loss", cv_loss, "gaussian|logistic");

  // -------------------------------------------------------------- simulate
  auto* sim = app.add_subcommand("simulate", "run a scenario file");
  std::string scenario_path;
  sim->add_option("--scenario", scenario_path, "JSON scenario")->required();

  // -------------------------------------------------------------- oracle1d
  auto* oracle = app.add_subcommand("oracle1d", "exact 1-D oracle tables");
  int o_n = 100;
  double o_threshold = 0.0, o_mu = 0.0, o_scale = 1.0;
  std::string o_family = "logistic";
  std::vector<double> o_ts;
  oracle->add_option("--n", o_n, "sample size");
  oracle->add_option("--threshold", o_threshold, "selection threshold");
  oracle->add_option("--mu", o_mu, "null mean");
  oracle->add_option("--family", o_family, "randomization family");
  oracle->add_option("--scale", o_scale, "randomization scale");
  oracle->add_option("--t", o_ts, "evaluation points")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  if (*fit) {
    const Loss loss = loss_name == "logistic" ? Loss::Logistic : Loss::Gaussian;
    const Dataset data = ingest_csv(data_path, response, !no_standardize);
    const SelectionRecord rec = fit_record(data, method, loss, lam, screen_c,
                                           steps, rho, family, scale, seed);
    write_output(out_path, record_to_json(rec) + "\n");
    return 0;
  }

  if (*infer) {
    std::ifstream in(record_path);
    if (!in) throw std::invalid_argument("cannot open record: " + record_path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const SelectionRecord rec = record_from_json(text);
    const MultiViewRun run = record_to_run(rec);
    std::vector<int> coords;
    if (coords_arg != "all") {
      std::stringstream ss(coords_arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) coords.push_back(std::stoi(tok));
    }
    InferOptions opts;
    opts.method = infer_method;
    opts.level = level;
    opts.boot_reps = boot_reps;
    opts.sampler.steps = chain_steps;
    opts.sampler.burnin = burnin;
    opts.sampler.eta = eta;
    opts.sampler.seed = derive_seed(seed, "chain");
    const std::vector<InferenceResult> results =
        infer_coordinates(run, rec.data.X, rec.data.y, coords, opts);
    write_output(out_path, report(results, format_name == "table"
                                               ? ReportFormat::Table
                                               : ReportFormat::Json));
    return 0;
  }

  if (*mv) {
    std::ifstream in(plan_path);
    if (!in) throw std::invalid_argument("cannot open plan: " + plan_path);
    json plan_json = json::parse(in);
    ViewPlan plan;
    for (const auto& jv : plan_json.at("views")) {
      ViewSpec spec;
      spec.kind = kind_from_name(jv.value("method", "lasso"));
      spec.loss = jv.value("loss", std::string("gaussian")) == "logistic"
                      ? Loss::Logistic
                      : Loss::Gaussian;
      spec.lam = jv.value("lam", 0.0);
      spec.screen_c = jv.value("c", 2.0);
      spec.fs_steps = jv.value("steps", 1);
      spec.carve_rho = jv.value("rho", 0.5);
      spec.family = family_from_name(jv.value("family", "logistic"));
      spec.scale = jv.value("scale", 1.0);
      plan.views.push_back(spec);
    }
    const std::string rule = plan_json.value("rule", "union");
    if (rule == "union") {
      plan.rule = ViewPlan::Rule::Union;
    } else if (rule == "intersection") {
      plan.rule = ViewPlan::Rule::Intersection;
    } else if (rule == "explicit") {
      plan.rule = ViewPlan::Rule::Explicit;
      plan.explicit_E = plan_json.at("model").get<std::vector<int>>();
    } else {
      throw std::invalid_argument("unknown rule: " + rule);
    }
    const Dataset data = ingest_csv(mv_data, mv_response, true);
    const MultiViewRun run =
        run_views(data.X, data.y, plan, derive_seed(seed, "views"));
    InferOptions opts;
    opts.method = mv_method;
    opts.level = mv_level;
    opts.sampler.seed = derive_seed(seed, "chain");
    const std::vector<InferenceResult> results =
        infer_coordinates(run, data.X, data.y, {}, opts);
    write_output(out_path, report(results, mv_format == "table"
                                               ? ReportFormat::Table
                                               : ReportFormat::Json));
    return 0;
  }

  if (*carve) {
    const Loss loss = cv_loss == "logistic" ? Loss::Logistic : Loss::Gaussian;
    const Dataset data = ingest_csv(cv_data, cv_response, true);
    SelectionRecord rec = fit_record(data, "carve", loss, cv_lam, 2.0, 1,
                                     cv_rho, "gaussian", 1.0, seed);
    write_output(out_path, record_to_json(rec) + "\n");
    return 0;
  }

  if (*sim) {
    std::ifstream in(scenario_path);
    if (!in) {
      throw std::invalid_argument("cannot open scenario: " + scenario_path);
    }
    json sj = json::parse(in);
    Scenario sc;
    sc.name = sj.value("name", "scenario");
    sc.n = sj.value("n", 100);
    sc.p = sj.value("p", 10);
    sc.beta = Eigen::VectorXd::Zero(sc.p);
    if (sj.contains("beta")) {
      const auto b = sj.at("beta").get<std::vector<double>>();
      for (std::size_t i = 0; i < b.size() && i < std::size_t(sc.p); ++i) {
        sc.beta[i] = b[i];
      }
    }
    sc.loss = sj.value("loss", std::string("gaussian")) == "logistic"
                  ? Loss::Logistic
                  : Loss::Gaussian;
    sc.view.kind = kind_from_name(sj.value("method", "lasso"));
    sc.view.loss = sc.loss;
    sc.view.lam = sj.value("lam", 0.0);
    sc.view.screen_c = sj.value("c", 2.0);
    sc.view.fs_steps = sj.value("steps", 1);
    sc.view.carve_rho = sj.value("rho", 0.5);
    sc.view.family = family_from_name(sj.value("family", "logistic"));
    sc.view.scale = sj.value("scale", 1.0);
    sc.views = sj.value("views", 1);
    sc.pivot_method = sj.value("pivot_method", "weighted");
    sc.boot_reps = sj.value("boot_reps", 600);
    sc.replicates = sj.value("replicates", 500);
    sc.seed = sj.value("seed", 1);
    sc.level = sj.value("level", 0.9);
    sc.sampler.steps = sj.value("chain_steps", 4000);
    sc.sampler.burnin = sj.value("burnin", 1500);
    sc.sampler.eta = sj.value("eta", 0.0);
    sc.sampler.thin = sj.value("thin", 1);
    sc.coverage_lo = sj.value("coverage_lo", 0.86);
    sc.coverage_hi = sj.value("coverage_hi", 0.94);
    sc.ks_crit = sj.value("ks_crit", 0.0);

    const std::string kind = sj.value("kind", "uniformity");
    json out;
    out["scenario"] = sc.name;
    out["kind"] = kind;
    std::ostringstream table;
    if (kind == "uniformity") {
      const UniformityResult r = uniformity_experiment(sc);
      out["ks_stat"] = r.ks_stat;
      out["ks_crit"] = r.ks_crit;
      out["pass"] = r.pass;
      out["inconclusive"] = r.inconclusive;
      out["qualifying"] = r.qualifying;
      out["replicates_with_selection"] = r.replicates_with_selection;
      table << sc.name << ": KS " << r.ks_stat << " vs crit " << r.ks_crit
            << " over " << r.qualifying << " pivots -> "
            << (r.inconclusive ? "INCONCLUSIVE" : (r.pass ? "PASS" : "FAIL"))
            << "\n";
    } else if (kind == "coverage") {
      const CoverageResult r = coverage_experiment(sc, sc.level);
      out["coverage"] = r.coverage;
      out["mean_length"] = r.mean_length;
      out["qualifying"] = r.qualifying;
      out["pass"] = r.pass;
      out["inconclusive"] = r.inconclusive;
      table << sc.name << ": coverage " << r.coverage << " mean length "
            << r.mean_length << " over " << r.qualifying << " CIs -> "
            << (r.inconclusive ? "INCONCLUSIVE" : (r.pass ? "PASS" : "FAIL"))
            << "\n";
    } else if (kind == "carve_compare") {
      const CarveCompareResult r = carve_compare_experiment(sc, sc.level);
      out["carve_coverage"] = r.carve.coverage;
      out["carve_mean_length"] = r.carve.mean_length;
      out["split_coverage"] = r.split_coverage;
      out["split_mean_length"] = r.split_mean_length;
      out["carve_shorter"] = r.carve_shorter;
      out["qualifying"] = r.carve.qualifying;
      table << sc.name << ": carve coverage " << r.carve.coverage << " length "
            << r.carve.mean_length << " | split coverage " << r.split_coverage
            << " length " << r.split_mean_length << " -> carve "
            << (r.carve_shorter ? "shorter" : "NOT shorter") << "\n";
    } else {
      throw std::invalid_argument("unknown scenario kind: " + kind);
    }
    std::cerr << table.str();
    write_output(out_path, out.dump(1) + "\n");
    return 0;
  }

  if (*oracle) {
    SimpleExample ex{o_n, o_threshold, o_mu,
                     RandomizationDist(family_from_name(o_family), o_scale, 1),
                     Eigen::VectorXd()};
    if (o_ts.empty()) {
      for (double t = -3.0; t <= 3.0 + 1e-9; t += 0.5) o_ts.push_back(t);
    }
    json rows = json::array();
    for (double t : o_ts) {
      rows.push_back({{"t", t}, {"plugin_cdf", exact_plugin_cdf(ex, t)}});
    }
    json out;
    out["n"] = o_n;
    out["threshold"] = o_threshold;
    out["mu"] = o_mu;
    out["family"] = o_family;
    out["scale"] = o_scale;
    out["table"] = std::move(rows);
    write_output(out_path, out.dump(1) + "\n");
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const rare_event_error& e) {
    std::cerr << "rare-event guard: " << e.what() << "\n";
    return 4;
  } catch (const numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
