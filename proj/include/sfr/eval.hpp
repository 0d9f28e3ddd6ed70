#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfr/dataset.hpp"
#include "sfr/pipeline.hpp"

namespace sfr {

struct MetricBundle {
  double mse = 0.0;
  double sd_sq_err = 0.0;
  std::optional<double> pearson_r;  // absent when either vector is constant
  // Post-score metrics; present only when a baseline enables reconstruction.
  std::optional<double> rae;
  std::optional<double> mape;
  std::optional<double> sd_ape;
  std::size_t n_evaluated = 0;
  std::size_t mape_excluded = 0;  // zero-valued true post scores
};

// Strict metric computation per the library contract: throws constant_vector
// if either change vector is constant (Pearson undefined) or the true post
// scores are constant (RAE undefined), all_zero_targets if every true post
// score is zero (MAPE undefined).
MetricBundle compute_metrics(std::span<const double> true_change,
                             std::span<const double> pred_change,
                             std::span<const double> true_post = {},
                             std::span<const double> pred_post = {});

namespace detail {
// Lenient variant used by the evaluation loop: undefined metrics come back
// absent instead of throwing.
MetricBundle compute_metrics_lenient(std::span<const double> true_change,
                                     std::span<const double> pred_change,
                                     std::span<const double> true_post,
                                     std::span<const double> pred_post);
}  // namespace detail

struct FoldRecord {
  std::string sample_id;
  double true_change = 0.0;
  double pred_change = 0.0;
  std::optional<double> true_post;
  std::optional<double> pred_post;
  bool fallback = false;  // selection found no candidates; mean prediction
  std::size_t n_candidates = 0;
  std::size_t n_selected = 0;
};

struct EvalReport {
  std::vector<FoldRecord> folds;  // one per sample, in sample order
  MetricBundle metrics;
  std::map<std::string, double> p_values;  // filled by permutation_test
  std::vector<std::size_t> selection_frequency;   // per full-space feature
  std::vector<std::size_t> candidate_frequency;   // per full-space feature
  std::vector<std::string> feature_ids;
  std::size_t fallback_folds = 0;
  PipelineConfig config;
};

using FoldHook = std::function<void(std::size_t fold, const PipelineModel&)>;

// Leave-one-out cross-validation: each sample is predicted by a pipeline
// fitted from scratch (including the target transform) on the other n-1
// samples. Folds with no surviving candidates fall back to the training-fold
// target mean and are flagged. The hook, when set, receives every fitted fold
// model and may be invoked concurrently.
EvalReport loocv(const Dataset& data, const PipelineConfig& config,
                 const FoldHook& hook = {});

enum class Direction { lower, greater, two_sided };

std::map<std::string, Direction> default_metric_directions();

struct PermutationTestResult {
  EvalReport observed;
  std::map<std::string, double> p_values;
  std::map<std::string, std::vector<double>> permuted_stats;  // NaN = absent
  std::size_t n_perms = 0;
};

// Label-permutation significance test: the LOOCV procedure is re-run n_perms
// times with the targets permuted across training samples (the held-out label
// used for scoring stays honest). p = (# permuted runs at least as extreme as
// observed) / n_perms, where "extreme" is <= for error metrics and >= for
// pearson_r by default.
PermutationTestResult permutation_test(
    const Dataset& data, const PipelineConfig& config, std::size_t n_perms,
    const std::map<std::string, Direction>& directions =
        default_metric_directions());

}  // namespace sfr
