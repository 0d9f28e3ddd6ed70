#include "sfr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sfr/errors.hpp"
#include "sfr/parallel.hpp"
#include "sfr/rng.hpp"
#include "sfr/stats.hpp"

namespace sfr {

namespace detail {

MetricBundle compute_metrics_lenient(std::span<const double> true_change,
                                     std::span<const double> pred_change,
                                     std::span<const double> true_post,
                                     std::span<const double> pred_post) {
  const std::size_t n = true_change.size();
  if (pred_change.size() != n) {
    fail(errc::dimension_mismatch, "metrics: unequal change vectors");
  }
  if (n < 2) fail(errc::too_few_samples, "metrics need n >= 2");
  const bool with_post = !true_post.empty() || !pred_post.empty();
  if (with_post && (true_post.size() != n || pred_post.size() != n)) {
    fail(errc::dimension_mismatch, "metrics: unequal post vectors");
  }

  MetricBundle m;
  m.n_evaluated = n;

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = pred_change[i] - true_change[i];
    sq[i] = e * e;
  }
  m.mse = mean(sq);
  m.sd_sq_err = sample_sd(sq);

  try {
    m.pearson_r = pearson(true_change, pred_change);
  } catch (const Error& e) {
    if (e.code() != errc::constant_vector) throw;
  }

  if (with_post) {
    const double post_mean = mean(true_post);
    double abs_err = 0.0, abs_dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      abs_err += std::abs(pred_post[i] - true_post[i]);
      abs_dev += std::abs(true_post[i] - post_mean);
    }
    if (abs_dev > 0.0) m.rae = abs_err / abs_dev;

    std::vector<double> apes;
    apes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (true_post[i] == 0.0) {
        ++m.mape_excluded;
        continue;
      }
      apes.push_back(std::abs(pred_post[i] - true_post[i]) /
                     std::abs(true_post[i]));
    }
    if (!apes.empty()) {
      m.mape = mean(apes);
      if (apes.size() >= 2) m.sd_ape = sample_sd(apes);
    }
  }
  return m;
}

}  // namespace detail

MetricBundle compute_metrics(std::span<const double> true_change,
                             std::span<const double> pred_change,
                             std::span<const double> true_post,
                             std::span<const double> pred_post) {
  const MetricBundle m = detail::compute_metrics_lenient(
      true_change, pred_change, true_post, pred_post);
  if (!m.pearson_r) {
    fail(errc::constant_vector, "Pearson r undefined on constant vector");
  }
  if (!true_post.empty()) {
    if (!m.mape) {
      fail(errc::all_zero_targets, "every true post score is zero");
    }
    if (!m.rae) {
      fail(errc::constant_vector, "RAE undefined: constant true post scores");
    }
  }
  return m;
}

std::map<std::string, Direction> default_metric_directions() {
  return {{"mse", Direction::lower},
          {"pearson_r", Direction::greater},
          {"rae", Direction::lower},
          {"mape", Direction::lower}};
}

namespace {

struct FoldOutcome {
  double prediction = 0.0;
  bool fallback = false;
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> selected;
};

// LOOCV against separate scoring targets so the permutation test can train on
// permuted labels while scoring each held-out sample against its true value.
EvalReport loocv_scored(const Dataset& train_data,
                        std::span<const double> score_targets,
                        const PipelineConfig& config, const FoldHook& hook) {
  train_data.validate();
  config.validate();
  const std::size_t n = train_data.n();
  if (n < 3) fail(errc::too_few_samples, "LOOCV needs n >= 3");

  std::vector<FoldOutcome> outcomes(n);
  parallel::parallel_for(n, [&](std::size_t i) {
    std::vector<std::size_t> keep;
    keep.reserve(n - 1);
    for (std::size_t r = 0; r < n; ++r) {
      if (r != i) keep.push_back(r);
    }
    const Dataset fold = subset_samples(train_data, keep);
    PipelineConfig fold_cfg = config;
    fold_cfg.seed = derive_seed(config.seed, stream::loocv_fold, i);

    FoldOutcome& out = outcomes[i];
    try {
      const PipelineModel model = fit_pipeline(fold, fold_cfg);
      out.prediction = model.predict(train_data.features.row(i));
      out.candidates = model.candidates;
      out.selected = model.selected;
      if (hook) hook(i, model);
    } catch (const Error& e) {
      if (e.code() != errc::no_candidates) throw;
      out.prediction = mean(fold.target);
      out.fallback = true;
    }
  });

  EvalReport report;
  report.config = config;
  report.feature_ids = train_data.feature_ids;
  report.selection_frequency.assign(train_data.p(), 0);
  report.candidate_frequency.assign(train_data.p(), 0);
  report.folds.resize(n);

  std::vector<double> truth(n), preds(n);
  std::vector<double> true_post, pred_post;
  const bool with_post = train_data.baseline.has_value();
  if (with_post) {
    true_post.resize(n);
    pred_post.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const FoldOutcome& out = outcomes[i];
    FoldRecord& rec = report.folds[i];
    rec.sample_id = train_data.sample_ids[i];
    rec.true_change = score_targets[i];
    rec.pred_change = out.prediction;
    rec.fallback = out.fallback;
    rec.n_candidates = out.candidates.size();
    rec.n_selected = out.selected.size();
    if (out.fallback) ++report.fallback_folds;
    truth[i] = score_targets[i];
    preds[i] = out.prediction;
    if (with_post) {
      const double base = (*train_data.baseline)[i];
      rec.true_post = base + score_targets[i];
      rec.pred_post = base + out.prediction;
      true_post[i] = *rec.true_post;
      pred_post[i] = *rec.pred_post;
    }
    for (std::size_t j : out.candidates) report.candidate_frequency[j]++;
    for (std::size_t j : out.selected) report.selection_frequency[j]++;
  }

  report.metrics =
      detail::compute_metrics_lenient(truth, preds, true_post, pred_post);
  return report;
}

std::optional<double> metric_value(const MetricBundle& m,
                                   const std::string& name) {
  if (name == "mse") return m.mse;
  if (name == "pearson_r") return m.pearson_r;
  if (name == "rae") return m.rae;
  if (name == "mape") return m.mape;
  return std::nullopt;
}

bool at_least_as_extreme(double stat, double observed, Direction dir) {
  switch (dir) {
    case Direction::lower: return stat <= observed;
    case Direction::greater: return stat >= observed;
    case Direction::two_sided: return std::abs(stat) >= std::abs(observed);
  }
  return false;
}

}  // namespace

EvalReport loocv(const Dataset& data, const PipelineConfig& config,
                 const FoldHook& hook) {
  return loocv_scored(data, data.target, config, hook);
}

PermutationTestResult permutation_test(
    const Dataset& data, const PipelineConfig& config, std::size_t n_perms,
    const std::map<std::string, Direction>& directions) {
  if (n_perms < 1) fail(errc::invalid_spec, "n_perms must be >= 1");
  PermutationTestResult result;
  result.n_perms = n_perms;
  result.observed = loocv(data, config);

  std::vector<MetricBundle> permuted(n_perms);
  parallel::parallel_for(n_perms, [&](std::size_t r) {
    Rng label_rng(derive_seed(config.seed, stream::permtest_labels, r));
    Dataset shuffled = data;
    label_rng.shuffle(shuffled.target);
    PipelineConfig run_cfg = config;
    run_cfg.seed = derive_seed(config.seed, stream::permtest_run, r);
    permuted[r] = loocv_scored(shuffled, data.target, run_cfg, {}).metrics;
  });

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [name, dir] : directions) {
    const std::optional<double> observed =
        metric_value(result.observed.metrics, name);
    auto& stats = result.permuted_stats[name];
    stats.reserve(n_perms);
    std::size_t extreme = 0;
    for (std::size_t r = 0; r < n_perms; ++r) {
      const std::optional<double> stat = metric_value(permuted[r], name);
      stats.push_back(stat ? *stat : nan);
      if (observed && stat && at_least_as_extreme(*stat, *observed, dir)) {
        ++extreme;
      }
    }
    if (observed) {
      result.p_values[name] =
          static_cast<double>(extreme) / static_cast<double>(n_perms);
    }
  }
  result.observed.p_values = result.p_values;
  return result;
}

}  // namespace sfr
