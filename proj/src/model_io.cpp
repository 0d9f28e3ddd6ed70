#include "sfr/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "sfr/csv.hpp"
#include "sfr/errors.hpp"

namespace sfr {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;

json tree_config_to_json(const TreeConfig& c) {
  json j;
  j["mtry"] = c.mtry;
  j["min_leaf"] = c.min_leaf;
  j["max_depth"] = c.max_depth ? json(*c.max_depth) : json(nullptr);
  j["seed"] = c.seed;
  return j;
}

TreeConfig tree_config_from_json(const json& j) {
  TreeConfig c;
  c.mtry = j.at("mtry").get<std::size_t>();
  c.min_leaf = j.at("min_leaf").get<std::size_t>();
  if (!j.at("max_depth").is_null()) {
    c.max_depth = j.at("max_depth").get<std::size_t>();
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

const char* mode_name(EnsembleMode m) {
  return m == EnsembleMode::random_forest ? "random_forest" : "bagged";
}

EnsembleMode mode_from_name(const std::string& s) {
  if (s == "random_forest") return EnsembleMode::random_forest;
  if (s == "bagged") return EnsembleMode::bagged;
  fail(errc::bad_model_file, "unknown ensemble mode '" + s + "'");
}

json ensemble_config_to_json(const EnsembleConfig& c) {
  json j;
  j["n_trees"] = c.n_trees;
  j["tree"] = tree_config_to_json(c.tree);
  j["mode"] = mode_name(c.mode);
  j["mtry_override"] = c.mtry_override ? json(*c.mtry_override) : json(nullptr);
  j["seed"] = c.seed;
  return j;
}

EnsembleConfig ensemble_config_from_json(const json& j) {
  EnsembleConfig c;
  c.n_trees = j.at("n_trees").get<std::size_t>();
  c.tree = tree_config_from_json(j.at("tree"));
  c.mode = mode_from_name(j.at("mode").get<std::string>());
  if (!j.at("mtry_override").is_null()) {
    c.mtry_override = j.at("mtry_override").get<std::size_t>();
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

const char* ttest_name(TTestVariant v) {
  return v == TTestVariant::pooled ? "pooled" : "welch";
}

const char* init_name(StepwiseInit v) {
  return v == StepwiseInit::anchor_first ? "anchor_first" : "empty_baseline";
}

}  // namespace

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const TreeNode& nd : tree.nodes) {
    json n;
    n["leaf"] = nd.is_leaf;
    n["n"] = nd.n_samples;
    if (nd.is_leaf) {
      n["value"] = nd.value;
    } else {
      n["feature"] = nd.feature;
      n["threshold"] = nd.threshold;
      n["left"] = nd.left;
      n["right"] = nd.right;
    }
    nodes.push_back(std::move(n));
  }
  json j;
  j["nodes"] = std::move(nodes);
  j["n_features"] = tree.n_features;
  j["config"] = tree_config_to_json(tree.config);
  j["samples"] = tree.training_samples;
  return j;
}

RegressionTree tree_from_json(const json& j) {
  RegressionTree tree;
  tree.n_features = j.at("n_features").get<std::size_t>();
  tree.config = tree_config_from_json(j.at("config"));
  tree.training_samples = j.at("samples").get<std::vector<std::size_t>>();
  for (const json& n : j.at("nodes")) {
    TreeNode nd;
    nd.is_leaf = n.at("leaf").get<bool>();
    nd.n_samples = n.at("n").get<std::uint32_t>();
    if (nd.is_leaf) {
      nd.value = n.at("value").get<double>();
    } else {
      nd.feature = n.at("feature").get<std::uint32_t>();
      nd.threshold = n.at("threshold").get<double>();
      nd.left = n.at("left").get<std::int32_t>();
      nd.right = n.at("right").get<std::int32_t>();
    }
    tree.nodes.push_back(nd);
  }
  if (tree.nodes.empty()) fail(errc::bad_model_file, "tree has no nodes");
  return tree;
}

json ensemble_to_json(const EnsembleModel& model) {
  json trees = json::array();
  for (const RegressionTree& t : model.trees) trees.push_back(tree_to_json(t));
  json j;
  j["trees"] = std::move(trees);
  j["inbag"] = model.inbag;
  j["feature_ids"] = model.feature_ids;
  j["config"] = ensemble_config_to_json(model.config);
  return j;
}

EnsembleModel ensemble_from_json(const json& j) {
  EnsembleModel model;
  for (const json& t : j.at("trees")) model.trees.push_back(tree_from_json(t));
  model.inbag = j.at("inbag").get<std::vector<std::vector<std::uint32_t>>>();
  model.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
  model.config = ensemble_config_from_json(j.at("config"));
  if (model.trees.empty() || model.inbag.size() != model.trees.size()) {
    fail(errc::bad_model_file, "inconsistent ensemble document");
  }
  return model;
}

json pipeline_config_to_json(const PipelineConfig& c) {
  json j;
  j["method"] = method_name(c.method);
  j["selection_trees"] = c.selection_trees;
  j["final_trees"] = c.final_trees;
  j["m_ensembles"] = c.m_ensembles;
  j["alpha"] = c.alpha;
  j["tree"] = tree_config_to_json(c.tree);
  j["mtry_override"] = c.mtry_override ? json(*c.mtry_override) : json(nullptr);
  j["standardize_target"] = c.standardize_target;
  j["ttest"] = ttest_name(c.ttest);
  j["stepwise_init"] = init_name(c.stepwise_init);
  j["refit_after_accept"] = c.refit_after_accept;
  j["standardized_importance"] = c.standardized_importance;
  j["seed"] = c.seed;
  return j;
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  const auto method = parse_method(j.at("method").get<std::string>());
  if (!method) fail(errc::bad_model_file, "unknown method");
  c.method = *method;
  c.selection_trees = j.at("selection_trees").get<std::size_t>();
  c.final_trees = j.at("final_trees").get<std::size_t>();
  c.m_ensembles = j.at("m_ensembles").get<std::size_t>();
  c.alpha = j.at("alpha").get<double>();
  c.tree = tree_config_from_json(j.at("tree"));
  if (!j.at("mtry_override").is_null()) {
    c.mtry_override = j.at("mtry_override").get<std::size_t>();
  }
  c.standardize_target = j.at("standardize_target").get<bool>();
  c.ttest = j.at("ttest").get<std::string>() == "welch" ? TTestVariant::welch
                                                        : TTestVariant::pooled;
  c.stepwise_init = j.at("stepwise_init").get<std::string>() == "empty_baseline"
                        ? StepwiseInit::empty_baseline
                        : StepwiseInit::anchor_first;
  c.refit_after_accept = j.at("refit_after_accept").get<bool>();
  c.standardized_importance = j.at("standardized_importance").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json pipeline_model_to_json(const PipelineModel& model) {
  json j;
  j["format"] = "sfr.pipeline";
  j["version"] = kModelVersion;
  j["method"] = method_name(model.method);
  j["feature_ids"] = model.feature_ids;
  j["candidates"] = model.candidates;
  j["selection_scores"] = model.selection_scores
                              ? json(*model.selection_scores)
                              : json(nullptr);
  j["selected"] = model.selected;
  j["ensemble"] = ensemble_to_json(model.ensemble);
  j["bias"] = {{"beta0", model.bias.beta0},
               {"beta1", model.bias.beta1},
               {"degenerate", model.bias.degenerate}};
  if (model.target_transform) {
    j["target_transform"] = {{"mean", model.target_transform->mean},
                             {"sd", model.target_transform->sd}};
  } else {
    j["target_transform"] = nullptr;
  }
  j["oob_mse"] = std::isfinite(model.oob_mse) ? json(model.oob_mse)
                                              : json(nullptr);
  j["config"] = pipeline_config_to_json(model.config);
  return j;
}

PipelineModel pipeline_model_from_json(const json& j) {
  if (j.value("format", "") != "sfr.pipeline") {
    fail(errc::bad_model_file, "not a pipeline model document");
  }
  if (j.at("version").get<int>() != kModelVersion) {
    fail(errc::bad_model_file, "unsupported model version");
  }
  PipelineModel model;
  const auto method = parse_method(j.at("method").get<std::string>());
  if (!method) fail(errc::bad_model_file, "unknown method");
  model.method = *method;
  model.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
  model.candidates = j.at("candidates").get<std::vector<std::size_t>>();
  if (!j.at("selection_scores").is_null()) {
    model.selection_scores =
        j.at("selection_scores").get<std::vector<double>>();
  }
  model.selected = j.at("selected").get<std::vector<std::size_t>>();
  model.ensemble = ensemble_from_json(j.at("ensemble"));
  model.bias.beta0 = j.at("bias").at("beta0").get<double>();
  model.bias.beta1 = j.at("bias").at("beta1").get<double>();
  model.bias.degenerate = j.at("bias").at("degenerate").get<bool>();
  if (!j.at("target_transform").is_null()) {
    Standardization st;
    st.mean = j.at("target_transform").at("mean").get<double>();
    st.sd = j.at("target_transform").at("sd").get<double>();
    model.target_transform = st;
  }
  model.oob_mse = j.at("oob_mse").is_null()
                      ? std::numeric_limits<double>::quiet_NaN()
                      : j.at("oob_mse").get<double>();
  model.config = pipeline_config_from_json(j.at("config"));
  return model;
}

void save_pipeline_model(const PipelineModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  out << pipeline_model_to_json(model).dump(2) << '\n';
  if (!out) fail(errc::io_error, "write failed for '" + path + "'");
}

PipelineModel load_pipeline_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(errc::bad_model_file, path + ": " + e.what());
  }
  try {
    return pipeline_model_from_json(j);
  } catch (const json::exception& e) {
    fail(errc::bad_model_file, path + ": " + e.what());
  }
}

json synthetic_spec_to_json(const SyntheticSpec& spec) {
  json j;
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["k_informative"] = spec.k_informative;
  j["coefficients"] = spec.coefficients;
  j["noise_sd"] = spec.noise_sd;
  j["correlation_rho"] = spec.correlation_rho;
  j["seed"] = spec.seed;
  return j;
}

void write_importance_csv(const ImportanceReport& report,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  out << "feature_id,score,rank\n";
  for (std::size_t r = 0; r < report.ranking.size(); ++r) {
    const std::size_t j = report.ranking[r];
    out << report.feature_ids[j] << ',' << format_double(report.scores[j])
        << ',' << r + 1 << '\n';
  }
}

}  // namespace sfr
