#include "sfr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sfr/errors.hpp"
#include "sfr/parallel.hpp"
#include "sfr/rng.hpp"
#include "sfr/stats.hpp"

namespace sfr {

const char* method_name(Method m) noexcept {
  switch (m) {
    case Method::rf: return "rf";
    case Method::rf_rf: return "rf-rf";
    case Method::rf_b: return "rf-b";
    case Method::rf_bs: return "rf-bs";
    case Method::rf_bs_bc: return "rf-bs-bc";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) noexcept {
  for (Method m : {Method::rf, Method::rf_rf, Method::rf_b, Method::rf_bs,
                   Method::rf_bs_bc}) {
    if (name == method_name(m)) return m;
  }
  return std::nullopt;
}

void PipelineConfig::validate() const {
  if (selection_trees < 1 || final_trees < 1) {
    fail(errc::invalid_spec, "tree counts must be >= 1");
  }
  if (m_ensembles < 2) {
    fail(errc::invalid_spec, "m_ensembles must be >= 2 (t-test replicates)");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(errc::invalid_spec, "alpha must lie strictly in (0, 1)");
  }
  if (tree.min_leaf < 1) fail(errc::invalid_spec, "min_leaf must be >= 1");
}

TTestResult one_tailed_ttest(std::span<const double> a,
                             std::span<const double> b, double alpha,
                             TTestVariant variant) {
  if (a.size() < 2 || b.size() < 2) {
    fail(errc::too_few_replicates, "t-test needs >= 2 values per group");
  }
  for (double v : a) {
    if (!std::isfinite(v)) fail(errc::non_finite_value, "t-test input");
  }
  for (double v : b) {
    if (!std::isfinite(v)) fail(errc::non_finite_value, "t-test input");
  }

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a);
  const double vb = sample_variance(b);

  double se, df;
  if (variant == TTestVariant::pooled) {
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    se = std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    df = na + nb - 2.0;
  } else {
    const double qa = va / na;
    const double qb = vb / nb;
    se = std::sqrt(qa + qb);
    df = se > 0.0 ? (qa + qb) * (qa + qb) /
                        (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
                  : na + nb - 2.0;
  }

  TTestResult result;
  if (se == 0.0) {
    // Both groups constant: no sampling variability to test against.
    if (ma == mb) {
      result.t = 0.0;
      result.p = 0.5;
    } else {
      result.t = ma < mb ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
      result.p = ma < mb ? 0.0 : 1.0;
    }
  } else {
    result.t = (ma - mb) / se;
    result.p = student_t_cdf(result.t, df);
  }
  result.reject = result.p < alpha;
  return result;
}

BiasCorrection fit_bias_correction(
    const std::vector<std::optional<double>>& oob_preds,
    std::span<const double> y) {
  if (oob_preds.size() != y.size()) {
    fail(errc::dimension_mismatch, "bias correction: unequal lengths");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < oob_preds.size(); ++i) {
    if (!oob_preds[i]) continue;
    xs.push_back(*oob_preds[i]);
    ys.push_back(y[i]);
  }
  if (xs.size() < 2) {
    fail(errc::too_few_pairs, "bias correction needs >= 2 OOB pairs");
  }
  BiasCorrection bc;
  if (sample_variance(xs) < 1e-12) {
    bc.degenerate = true;  // identity fallback, recorded for the caller
    return bc;
  }
  const OlsFit fit = ols_fit(xs, ys);
  bc.beta0 = fit.intercept;
  bc.beta1 = fit.slope;
  return bc;
}

std::vector<std::size_t> select_candidates(const ImportanceReport& report) {
  if (report.scores.empty()) {
    fail(errc::invalid_spec, "importance report covers no features");
  }
  const double min_score =
      *std::min_element(report.scores.begin(), report.scores.end());
  const double tau = min_score < 0.0 ? -min_score : 0.0;
  std::vector<std::size_t> candidates;
  for (std::size_t idx : report.ranking) {  // descending score, ties by index
    if (report.scores[idx] > tau) {
      candidates.push_back(idx);
    } else {
      break;
    }
  }
  if (candidates.empty()) {
    fail(errc::no_candidates, "no importance score exceeds the threshold");
  }
  return candidates;
}

namespace {

// M replicate bagged ensembles on one input subset; returns their OOB errors.
std::vector<double> replicate_errors(const Dataset& sub,
                                     const PipelineConfig& config,
                                     std::uint64_t seed, std::uint64_t tag,
                                     std::size_t step) {
  std::vector<double> errors(config.m_ensembles);
  parallel::parallel_for(config.m_ensembles, [&](std::size_t m) {
    EnsembleConfig ec;
    ec.n_trees = config.final_trees;
    ec.tree = config.tree;
    ec.mode = EnsembleMode::bagged;
    ec.seed = derive_seed(seed, tag, step, m);
    const EnsembleModel model = fit_ensemble(sub, ec);
    errors[m] = oob_error(model, sub);
  });
  return errors;
}

}  // namespace

StepwiseResult stepwise_build(const Dataset& candidate_data,
                              const PipelineConfig& config,
                              std::uint64_t seed) {
  const std::size_t k_total = candidate_data.p();
  if (k_total < 1) fail(errc::invalid_spec, "stepwise needs >= 1 candidate");
  config.validate();

  StepwiseResult result;
  std::vector<std::size_t> selected;
  std::vector<double> e_best;
  std::size_t first_candidate;

  if (config.stepwise_init == StepwiseInit::anchor_first) {
    selected = {0};
    e_best = replicate_errors(subset_features(candidate_data, selected),
                              config, seed, stream::stepwise_step, 1);
    first_candidate = 1;
  } else {
    // Mean-predictor baseline: bagged "trees" with no features to split on.
    e_best = replicate_errors(subset_features(candidate_data, {}), config,
                              seed, stream::stepwise_step, 0);
    first_candidate = 0;
  }

  for (std::size_t cand = first_candidate; cand < k_total; ++cand) {
    std::vector<std::size_t> trial = selected;
    trial.push_back(cand);
    const std::vector<double> e_k =
        replicate_errors(subset_features(candidate_data, trial), config, seed,
                         stream::stepwise_step, cand + 1);
    const TTestResult tt =
        one_tailed_ttest(e_k, e_best, config.alpha, config.ttest);
    if (tt.reject) {
      selected = std::move(trial);
      e_best = e_k;
      if (config.refit_after_accept) {
        e_best = replicate_errors(subset_features(candidate_data, selected),
                                  config, seed, stream::stepwise_refit,
                                  cand + 1);
      }
    }
    result.steps.push_back(
        {cand, tt.t, tt.p, tt.reject, mean(e_best)});
  }

  if (selected.empty()) {
    fail(errc::no_candidates, "stepwise retained no candidate");
  }

  EnsembleConfig final_cfg;
  final_cfg.n_trees = config.final_trees;
  final_cfg.tree = config.tree;
  final_cfg.mode = EnsembleMode::bagged;
  final_cfg.seed = derive_seed(seed, stream::stepwise_final);
  result.ensemble =
      fit_ensemble(subset_features(candidate_data, selected), final_cfg);
  result.selected = std::move(selected);
  return result;
}

double PipelineModel::predict(std::span<const double> x) const {
  if (x.size() != feature_ids.size()) {
    fail(errc::dimension_mismatch,
         "predict: expected " + std::to_string(feature_ids.size()) +
             " features, got " + std::to_string(x.size()));
  }
  std::vector<double> xs(selected.size());
  for (std::size_t c = 0; c < selected.size(); ++c) {
    xs[c] = x[selected[c]];
    if (!std::isfinite(xs[c])) {
      fail(errc::non_finite_value, "predict: non-finite feature value");
    }
  }
  double v = ensemble.predict(xs);
  v = bias.apply(v);
  if (target_transform) v = target_transform->invert(v);
  return v;
}

PipelineModel fit_pipeline(const Dataset& data, const PipelineConfig& config) {
  data.validate();
  config.validate();

  Dataset work = data;
  PipelineModel model;
  model.method = config.method;
  model.config = config;
  model.feature_ids = data.feature_ids;
  if (config.standardize_target) {
    auto [z, st] = standardize_target(data.target);
    work.target = std::move(z);
    model.target_transform = st;
  }

  const std::size_t p = data.p();
  const std::uint64_t seed = config.seed;

  auto fit_final = [&](const Dataset& view, EnsembleMode mode) {
    EnsembleConfig ec;
    ec.n_trees = config.final_trees;
    ec.tree = config.tree;
    ec.mode = mode;
    ec.mtry_override = config.mtry_override;
    ec.seed = derive_seed(seed, stream::final_ensemble);
    return fit_ensemble(view, ec);
  };

  if (config.method == Method::rf) {
    model.candidates.resize(p);
    std::iota(model.candidates.begin(), model.candidates.end(),
              std::size_t{0});
    model.selected = model.candidates;
    model.ensemble = fit_final(work, EnsembleMode::random_forest);
  } else {
    EnsembleConfig sel_cfg;
    sel_cfg.n_trees = config.selection_trees;
    sel_cfg.tree = config.tree;
    sel_cfg.mode = EnsembleMode::random_forest;
    sel_cfg.mtry_override = config.mtry_override;
    sel_cfg.seed = derive_seed(seed, stream::selection_forest);
    const EnsembleModel selection_forest = fit_ensemble(work, sel_cfg);

    ImportanceOptions iopts;
    iopts.standardized = config.standardized_importance;
    const ImportanceReport report = permutation_importance(
        selection_forest, work, derive_seed(seed, stream::importance), iopts);
    model.selection_scores = report.scores;
    model.candidates = select_candidates(report);

    const Dataset candidate_data = subset_features(work, model.candidates);
    switch (config.method) {
      case Method::rf_rf:
        model.selected = model.candidates;
        model.ensemble = fit_final(candidate_data, EnsembleMode::random_forest);
        break;
      case Method::rf_b:
        model.selected = model.candidates;
        model.ensemble = fit_final(candidate_data, EnsembleMode::bagged);
        break;
      case Method::rf_bs:
      case Method::rf_bs_bc: {
        StepwiseResult sw = stepwise_build(candidate_data, config,
                                           derive_seed(seed, stream::stepwise));
        model.selected.reserve(sw.selected.size());
        for (std::size_t c : sw.selected) {
          model.selected.push_back(model.candidates[c]);
        }
        model.ensemble = std::move(sw.ensemble);
        break;
      }
      default:
        break;
    }
  }

  const Dataset training_view = subset_features(work, model.selected);
  const auto oob = oob_predictions(model.ensemble, training_view);
  if (config.method == Method::rf_bs_bc) {
    model.bias = fit_bias_correction(oob, work.target);
  }
  {
    double se = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < oob.size(); ++i) {
      if (!oob[i]) continue;
      const double e = *oob[i] - work.target[i];
      se += e * e;
      ++count;
    }
    model.oob_mse = count > 0 ? se / static_cast<double>(count)
                              : std::numeric_limits<double>::quiet_NaN();
  }
  return model;
}

}  // namespace sfr
