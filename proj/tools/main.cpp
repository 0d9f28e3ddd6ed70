#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sfr/csv.hpp"
#include "sfr/errors.hpp"
#include "sfr/eval.hpp"
#include "sfr/model_io.hpp"
#include "sfr/parallel.hpp"
#include "sfr/pipeline.hpp"
#include "sfr/report_io.hpp"
#include "sfr/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 64 usage, 65 data/ingestion, 66 no candidates
// survive selection, 70 internal error.
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoCandidates = 66;
constexpr int kExitInternal = 70;

int exit_code_for(const sfr::Error& e) {
  switch (e.code()) {
    case sfr::errc::no_candidates:
      return kExitNoCandidates;
    case sfr::errc::missing_column:
    case sfr::errc::non_numeric_cell:
    case sfr::errc::duplicate_id:
    case sfr::errc::too_few_samples:
    case sfr::errc::non_finite_value:
    case sfr::errc::no_features:
    case sfr::errc::invalid_spec:
    case sfr::errc::degenerate_baseline:
    case sfr::errc::zero_variance:
    case sfr::errc::io_error:
    case sfr::errc::dimension_mismatch:
    case sfr::errc::feature_mismatch:
    case sfr::errc::bad_model_file:
      return kExitData;
    default:
      return kExitInternal;
  }
}

std::string sibling_path(const std::string& primary, const char* suffix) {
  fs::path p(primary);
  p.replace_extension();
  return p.string() + suffix;
}

void write_run_config(CLI::App* cmd, const std::string& path) {
  sfr::write_text_file(path, cmd->config_to_str(true, false));
}

struct DataArgs {
  std::string path;
  std::string target_column = "y";
  std::string baseline_column;
  std::string id_column;
  std::string target_mode = "given";

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", path, "input dataset CSV")->required();
    cmd->add_option("--target-column", target_column,
                    "target column name (post score when --target-mode is a "
                    "change transform)");
    cmd->add_option("--baseline-column", baseline_column,
                    "baseline (pre score) column name");
    cmd->add_option("--id-column", id_column, "sample id column name");
    cmd->add_option("--target-mode", target_mode,
                    "given | raw-change | residualized-change")
        ->check(CLI::IsMember({"given", "raw-change", "residualized-change"}));
  }

  sfr::Dataset load() const {
    sfr::CsvLoadOptions opts;
    opts.target_column = target_column;
    if (!baseline_column.empty()) opts.baseline_column = baseline_column;
    if (!id_column.empty()) opts.id_column = id_column;
    sfr::Dataset d = sfr::load_csv(path, opts);
    if (target_mode != "given") {
      if (!d.baseline) {
        sfr::fail(sfr::errc::missing_column,
                  "--target-mode " + target_mode +
                      " requires --baseline-column (pre scores)");
      }
      const auto mode = target_mode == "raw-change"
                            ? sfr::TargetMode::raw_change
                            : sfr::TargetMode::residualized_change;
      d.target = sfr::make_target(d.target, *d.baseline, mode);
    }
    return d;
  }
};

struct PipelineArgs {
  std::vector<std::string> methods{"rf-bs-bc"};
  std::size_t selection_trees = 5000;
  std::size_t final_trees = 1000;
  std::size_t m_ensembles = 10;
  double alpha = 0.05;
  std::size_t min_leaf = 5;
  std::size_t max_depth = 0;  // 0: unlimited
  std::size_t mtry = 0;       // 0: mode default
  bool standardize = true;
  std::string ttest = "pooled";
  std::string stepwise_init = "anchor-first";
  bool refit_after_accept = false;
  bool standardized_importance = false;
  std::uint64_t seed = 0;
  bool fast = false;
  CLI::App* cmd = nullptr;

  void attach(CLI::App* c, bool multi_method) {
    cmd = c;
    auto* method_opt =
        c->add_option("--method", methods,
                      "rf | rf-rf | rf-b | rf-bs | rf-bs-bc" +
                          std::string(multi_method ? " (repeatable)" : ""))
            ->check(CLI::IsMember({"rf", "rf-rf", "rf-b", "rf-bs", "rf-bs-bc"}));
    if (!multi_method) method_opt->expected(1);
    c->add_option("--selection-trees", selection_trees,
                  "trees in the selection forest");
    c->add_option("--final-trees", final_trees,
                  "trees per ensemble built on selected variables");
    c->add_option("--m-ensembles", m_ensembles,
                  "replicate ensembles per stepwise test");
    c->add_option("--alpha", alpha, "stepwise t-test significance level");
    c->add_option("--min-leaf", min_leaf, "minimum samples per leaf");
    c->add_option("--max-depth", max_depth, "tree depth cap (0 = none)");
    c->add_option("--mtry", mtry,
                  "candidate features per split (0 = mode default)");
    c->add_flag("--standardize-target,!--no-standardize-target", standardize,
                "fit on z-scored targets (default on)");
    c->add_option("--ttest", ttest, "pooled | welch")
        ->check(CLI::IsMember({"pooled", "welch"}));
    c->add_option("--stepwise-init", stepwise_init,
                  "anchor-first | empty-baseline")
        ->check(CLI::IsMember({"anchor-first", "empty-baseline"}));
    c->add_flag("--refit-baseline", refit_after_accept,
                "refit E_best after each stepwise acceptance");
    c->add_flag("--standardized-importance", standardized_importance,
                "divide importance scores by their across-tree SD");
    c->add_option("--seed", seed, "master seed");
    c->add_flag("--fast", fast,
                "reduced tree/permutation counts (selection 500, final 200, "
                "perms 200) unless set explicitly");
  }

  void resolve_fast() {
    if (!fast) return;
    if (cmd->count("--selection-trees") == 0) selection_trees = 500;
    if (cmd->count("--final-trees") == 0) final_trees = 200;
  }

  sfr::PipelineConfig config_for(const std::string& method) const {
    sfr::PipelineConfig cfg;
    const auto m = sfr::parse_method(method);
    if (!m) sfr::fail(sfr::errc::invalid_spec, "unknown method " + method);
    cfg.method = *m;
    cfg.selection_trees = selection_trees;
    cfg.final_trees = final_trees;
    cfg.m_ensembles = m_ensembles;
    cfg.alpha = alpha;
    cfg.tree.min_leaf = min_leaf;
    if (max_depth > 0) cfg.tree.max_depth = max_depth;
    if (mtry > 0) cfg.mtry_override = mtry;
    cfg.standardize_target = standardize;
    cfg.ttest = ttest == "welch" ? sfr::TTestVariant::welch
                                 : sfr::TTestVariant::pooled;
    cfg.stepwise_init = stepwise_init == "empty-baseline"
                            ? sfr::StepwiseInit::empty_baseline
                            : sfr::StepwiseInit::anchor_first;
    cfg.refit_after_accept = refit_after_accept;
    cfg.standardized_importance = standardized_importance;
    cfg.seed = seed;
    return cfg;
  }
};

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::size_t n = 19;
  std::size_t p = 267;
  std::size_t k = 5;
  std::vector<double> coeffs;
  double noise_sd = 1.0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  bool with_baseline = false;
  double baseline_mean = 80.0;
  double baseline_sd = 20.0;
  std::string out;
};

void run_synth(const SynthArgs& a, CLI::App* cmd) {
  sfr::SyntheticSpec spec;
  spec.n = a.n;
  spec.p = a.p;
  spec.k_informative = a.k;
  spec.coefficients =
      a.coeffs.empty() ? std::vector<double>(a.k, 1.0) : a.coeffs;
  spec.noise_sd = a.noise_sd;
  spec.correlation_rho = a.rho;
  spec.seed = a.seed;

  sfr::Dataset d = sfr::generate_synthetic(spec);
  if (a.with_baseline) {
    sfr::Rng rng(sfr::derive_seed(spec.seed, sfr::stream::synth_baseline));
    std::vector<double> baseline(spec.n);
    for (double& b : baseline) {
      b = a.baseline_mean + a.baseline_sd * rng.next_normal();
    }
    d.baseline = std::move(baseline);
  }
  sfr::write_csv(d, a.out);

  json meta;
  meta["format"] = "sfr.synthetic-meta";
  meta["spec"] = sfr::synthetic_spec_to_json(spec);
  std::vector<std::size_t> informative(spec.k_informative);
  for (std::size_t j = 0; j < informative.size(); ++j) informative[j] = j;
  meta["informative_indices"] = informative;
  json ids = json::array();
  for (std::size_t j = 0; j < spec.k_informative; ++j) {
    ids.push_back(d.feature_ids[j]);
  }
  meta["informative_feature_ids"] = ids;
  sfr::write_text_file(sibling_path(a.out, ".meta.json"),
                       meta.dump(2) + "\n");
  write_run_config(cmd, sibling_path(a.out, ".run.cfg"));
  std::cout << "wrote " << a.out << " (" << spec.n << " x " << spec.p
            << ") and sidecars\n";
}

// ---- fit ------------------------------------------------------------------

std::string fit_summary(const sfr::PipelineModel& model,
                        const sfr::Dataset& data) {
  std::ostringstream os;
  os << "method: " << sfr::method_name(model.method) << "\n";
  os << "samples: " << data.n() << ", features: " << data.p() << "\n";
  os << "candidates: " << model.candidates.size() << "\n";
  os << "selected (" << model.selected.size() << "):";
  for (std::size_t j : model.selected) os << ' ' << model.feature_ids[j];
  os << "\n";
  os << "bias: beta1=" << sfr::format_double(model.bias.beta1)
     << " beta0=" << sfr::format_double(model.bias.beta0)
     << (model.bias.degenerate ? " (degenerate: identity fallback)" : "")
     << "\n";
  if (model.target_transform) {
    os << "target transform: z-score (mean="
       << sfr::format_double(model.target_transform->mean)
       << ", sd=" << sfr::format_double(model.target_transform->sd) << ")\n";
  } else {
    os << "target transform: none\n";
  }
  os << "oob_mse (fit scale): " << sfr::format_double(model.oob_mse) << "\n";
  return os.str();
}

void run_fit(const DataArgs& data_args, const PipelineArgs& pipe,
             const std::string& out, const std::string& importance_out,
             CLI::App* cmd) {
  const sfr::Dataset d = data_args.load();
  const sfr::PipelineConfig cfg = pipe.config_for(pipe.methods.front());
  const sfr::PipelineModel model = sfr::fit_pipeline(d, cfg);
  sfr::save_pipeline_model(model, out);
  sfr::write_text_file(sibling_path(out, ".summary.txt"),
                       fit_summary(model, d));
  if (!importance_out.empty()) {
    if (!model.selection_scores) {
      std::cerr << "note: method " << sfr::method_name(cfg.method)
                << " has no selection stage; skipping importance export\n";
    } else {
      sfr::ImportanceReport report;
      report.scores = *model.selection_scores;
      report.feature_ids = model.feature_ids;
      report.ranking.resize(report.scores.size());
      std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
      std::sort(report.ranking.begin(), report.ranking.end(),
                [&](std::size_t a, std::size_t b) {
                  const double sa = report.scores[a], sb = report.scores[b];
                  return sa > sb || (sa == sb && a < b);
                });
      sfr::write_importance_csv(report, importance_out);
    }
  }
  write_run_config(cmd, sibling_path(out, ".run.cfg"));
  std::cout << fit_summary(model, d);
}

// ---- predict --------------------------------------------------------------

void run_predict(const std::string& model_path, const DataArgs& data_args,
                 const std::string& out, CLI::App* cmd) {
  const sfr::PipelineModel model = sfr::load_pipeline_model(model_path);
  sfr::FeatureCsvOptions opts;
  if (!data_args.target_column.empty()) {
    opts.drop_target_column = data_args.target_column;
  }
  if (!data_args.baseline_column.empty()) {
    opts.baseline_column = data_args.baseline_column;
  }
  if (!data_args.id_column.empty()) opts.id_column = data_args.id_column;
  const sfr::FeatureTable table = sfr::load_feature_csv(data_args.path, opts);
  if (table.feature_ids != model.feature_ids) {
    sfr::fail(sfr::errc::feature_mismatch,
              "data feature columns do not match the model (ids and order "
              "must be identical)");
  }
  std::ostringstream os;
  os << "sample_id,pred_change";
  if (table.baseline) os << ",pred_post";
  os << "\n";
  for (std::size_t i = 0; i < table.features.rows(); ++i) {
    const double pred = model.predict(table.features.row(i));
    os << table.sample_ids[i] << ',' << sfr::format_double(pred);
    if (table.baseline) {
      os << ',' << sfr::format_double((*table.baseline)[i] + pred);
    }
    os << "\n";
  }
  sfr::write_text_file(out, os.str());
  write_run_config(cmd, sibling_path(out, ".run.cfg"));
  std::cout << "wrote " << table.features.rows() << " predictions to " << out
            << "\n";
}

// ---- loocv ----------------------------------------------------------------

void run_loocv(const DataArgs& data_args, const PipelineArgs& pipe,
               const std::string& out_dir, CLI::App* cmd) {
  const sfr::Dataset d = data_args.load();
  fs::create_directories(out_dir);
  std::string summary = sfr::summary_table_header();
  for (const std::string& name : pipe.methods) {
    const sfr::PipelineConfig cfg = pipe.config_for(name);
    const sfr::EvalReport report = sfr::loocv(d, cfg);
    const fs::path base = fs::path(out_dir) / name;
    sfr::write_text_file(base.string() + ".report.json",
                         sfr::eval_report_to_json(report).dump(2) + "\n");
    sfr::write_folds_csv(report, base.string() + ".folds.csv");
    sfr::write_selection_csv(report, base.string() + ".selection.csv");
    summary += sfr::summary_table_row(name, report.metrics, report.p_values);
    std::cout << sfr::summary_table_row(name, report.metrics, report.p_values);
  }
  sfr::write_text_file((fs::path(out_dir) / "summary.txt").string(), summary);
  write_run_config(cmd, (fs::path(out_dir) / "run.cfg").string());
}

// ---- permtest ---------------------------------------------------------------

void run_permtest(const DataArgs& data_args, const PipelineArgs& pipe,
                  std::size_t n_perms, const std::string& out_dir,
                  CLI::App* cmd) {
  const sfr::Dataset d = data_args.load();
  fs::create_directories(out_dir);
  const std::string name = pipe.methods.front();
  const sfr::PipelineConfig cfg = pipe.config_for(name);
  const sfr::PermutationTestResult result =
      sfr::permutation_test(d, cfg, n_perms);
  const fs::path base = fs::path(out_dir) / name;
  sfr::write_text_file(base.string() + ".permtest.json",
                       sfr::permtest_to_json(result).dump(2) + "\n");
  sfr::write_folds_csv(result.observed, base.string() + ".folds.csv");
  std::string summary = sfr::summary_table_header() +
                        sfr::summary_table_row(name, result.observed.metrics,
                                               result.p_values);
  sfr::write_text_file((fs::path(out_dir) / "summary.txt").string(), summary);
  write_run_config(cmd, (fs::path(out_dir) / "run.cfg").string());
  std::cout << summary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sfr: small-sample regression with forest-screened stepwise "
               "bagged tree ensembles"};
  app.require_subcommand(1);

  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "worker thread cap (default: SFR_THREADS or hardware)")
      ->configurable(false);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a planted-signal dataset");
  synth->set_config("--config");
  SynthArgs sa;
  synth->add_option("--n", sa.n, "sample count");
  synth->add_option("--p", sa.p, "feature count");
  synth->add_option("--k", sa.k, "informative feature count");
  synth->add_option("--coeffs", sa.coeffs,
                    "coefficients of the informative features (default: 1s)");
  synth->add_option("--noise-sd", sa.noise_sd, "target noise SD");
  synth->add_option("--rho", sa.rho, "equicorrelation of features, [0,1)");
  synth->add_option("--seed", sa.seed, "generator seed");
  synth->add_flag("--with-baseline", sa.with_baseline,
                  "add a synthetic baseline (pre score) column");
  synth->add_option("--baseline-mean", sa.baseline_mean, "baseline mean");
  synth->add_option("--baseline-sd", sa.baseline_sd, "baseline SD");
  synth->add_option("--out", sa.out, "output CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit a pipeline model");
  fit->set_config("--config");
  DataArgs fit_data;
  fit_data.attach(fit);
  PipelineArgs fit_pipe;
  fit_pipe.attach(fit, /*multi_method=*/false);
  std::string fit_out, fit_importance_out;
  fit->add_option("--out", fit_out, "output model JSON path")->required();
  fit->add_option("--importance-out", fit_importance_out,
                  "export selection importance CSV");

  // predict
  auto* predict = app.add_subcommand("predict", "predict with a saved model");
  predict->set_config("--config");
  std::string predict_model, predict_out;
  DataArgs predict_data;
  predict->add_option("--model", predict_model, "model JSON path")->required();
  predict->add_option("--data", predict_data.path, "input CSV")->required();
  predict->add_option("--target-column", predict_data.target_column,
                      "target column to ignore if present");
  predict->add_option("--baseline-column", predict_data.baseline_column,
                      "baseline column for post-score predictions");
  predict->add_option("--id-column", predict_data.id_column, "sample ids");
  predict->add_option("--out", predict_out, "predictions CSV path")->required();

  // loocv
  auto* loocv_cmd =
      app.add_subcommand("loocv", "leave-one-out cross-validation report");
  loocv_cmd->set_config("--config");
  DataArgs loocv_data;
  loocv_data.attach(loocv_cmd);
  PipelineArgs loocv_pipe;
  loocv_pipe.attach(loocv_cmd, /*multi_method=*/true);
  std::string loocv_out_dir;
  loocv_cmd->add_option("--out-dir", loocv_out_dir, "report directory")
      ->required();

  // permtest
  auto* permtest =
      app.add_subcommand("permtest", "label-permutation significance test");
  permtest->set_config("--config");
  DataArgs perm_data;
  perm_data.attach(permtest);
  PipelineArgs perm_pipe;
  perm_pipe.attach(permtest, /*multi_method=*/false);
  std::size_t n_perms = 1000;
  permtest->add_option("--n-perms", n_perms, "permutation count");
  std::string perm_out_dir;
  permtest->add_option("--out-dir", perm_out_dir, "report directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  sfr::parallel::set_max_threads(threads);

  try {
    if (*synth) {
      run_synth(sa, synth);
    } else if (*fit) {
      fit_pipe.resolve_fast();
      run_fit(fit_data, fit_pipe, fit_out, fit_importance_out, fit);
    } else if (*predict) {
      run_predict(predict_model, predict_data, predict_out, predict);
    } else if (*loocv_cmd) {
      loocv_pipe.resolve_fast();
      run_loocv(loocv_data, loocv_pipe, loocv_out_dir, loocv_cmd);
    } else if (*permtest) {
      perm_pipe.resolve_fast();
      if (perm_pipe.fast && permtest->count("--n-perms") == 0) n_perms = 200;
      run_permtest(perm_data, perm_pipe, n_perms, perm_out_dir, permtest);
    }
  } catch (const sfr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
