#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfr/dataset.hpp"
#include "sfr/ensemble.hpp"

namespace sfr {

enum class Method { rf, rf_rf, rf_b, rf_bs, rf_bs_bc };

const char* method_name(Method m) noexcept;
std::optional<Method> parse_method(const std::string& name) noexcept;

enum class TTestVariant { pooled, welch };

enum class StepwiseInit {
  anchor_first,    // S starts as {V1}; testing begins at V2
  empty_baseline,  // S starts empty against a mean-predictor baseline
};

struct PipelineConfig {
  Method method = Method::rf_bs_bc;
  std::size_t selection_trees = 5000;
  std::size_t final_trees = 1000;
  std::size_t m_ensembles = 10;
  double alpha = 0.05;
  TreeConfig tree;  // min_leaf / max_depth; mtry is set per stage
  std::optional<std::size_t> mtry_override;
  bool standardize_target = true;
  TTestVariant ttest = TTestVariant::pooled;
  StepwiseInit stepwise_init = StepwiseInit::anchor_first;
  bool refit_after_accept = false;
  bool standardized_importance = false;
  std::uint64_t seed = 0;

  void validate() const;  // throws invalid_spec
};

struct TTestResult {
  double t = 0.0;
  double p = 0.5;
  bool reject = false;
};

// One-tailed two-sample t-test for H1: mean(a) < mean(b). Pooled variance by
// default (df = na + nb - 2), Welch-Satterthwaite otherwise. Both groups
// constant and equal gives p = 0.5, no rejection.
TTestResult one_tailed_ttest(std::span<const double> a,
                             std::span<const double> b, double alpha,
                             TTestVariant variant = TTestVariant::pooled);

struct BiasCorrection {
  double beta0 = 0.0;
  double beta1 = 1.0;
  bool degenerate = false;  // identity fallback: prediction variance ~ 0

  double apply(double y_ens) const noexcept { return beta1 * y_ens + beta0; }
};

// OLS of y on the present OOB predictions, used to counteract the ensemble's
// shrinkage toward the mean. Falls back to the identity when the predictions
// are (numerically) constant.
BiasCorrection fit_bias_correction(
    const std::vector<std::optional<double>>& oob_preds,
    std::span<const double> y);

// Candidate retention rule: keep features whose score exceeds the absolute
// value of the most negative score (zero when no score is negative), ordered
// by descending score. Throws no_candidates when nothing survives.
std::vector<std::size_t> select_candidates(const ImportanceReport& report);

struct StepwiseStep {
  std::size_t candidate = 0;  // candidate-space index tested
  double t = 0.0;
  double p = 1.0;
  bool accepted = false;
  double mean_best_error = 0.0;  // mean(E_best) after this step
};

struct StepwiseResult {
  std::vector<std::size_t> selected;  // candidate-space, inclusion order
  EnsembleModel ensemble;             // final bagged ensemble over selected
  std::vector<StepwiseStep> steps;
};

// Importance-ordered greedy inclusion gated by the t-test on M replicate OOB
// errors. `candidate_data` holds the candidates V1..VK as columns in ranking
// order.
StepwiseResult stepwise_build(const Dataset& candidate_data,
                              const PipelineConfig& config,
                              std::uint64_t seed);

struct PipelineModel {
  Method method = Method::rf;
  std::vector<std::string> feature_ids;          // full input space
  std::vector<std::size_t> candidates;           // full-space, ranking order
  std::optional<std::vector<double>> selection_scores;  // per feature
  std::vector<std::size_t> selected;             // full-space, inclusion order
  EnsembleModel ensemble;                        // over `selected`
  BiasCorrection bias;
  std::optional<Standardization> target_transform;
  double oob_mse = 0.0;  // final ensemble, fitting scale
  PipelineConfig config;

  // x spans the full feature space; the model extracts its selected features,
  // averages the trees, applies the bias correction and inverts the target
  // transform.
  double predict(std::span<const double> x) const;
};

PipelineModel fit_pipeline(const Dataset& data, const PipelineConfig& config);

}  // namespace sfr
