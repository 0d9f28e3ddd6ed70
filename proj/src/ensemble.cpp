#include "sfr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sfr/errors.hpp"
#include "sfr/parallel.hpp"
#include "sfr/rng.hpp"
#include "sfr/stats.hpp"

namespace sfr {

std::size_t effective_mtry(const EnsembleConfig& config, std::size_t p) {
  if (config.mtry_override) {
    if (*config.mtry_override < 1 || *config.mtry_override > p) {
      fail(errc::invalid_spec, "mtry override must lie in [1, p]");
    }
    return *config.mtry_override;
  }
  if (p == 0) return 0;  // mean-only trees (internal stepwise baseline)
  if (config.mode == EnsembleMode::random_forest) return (p + 2) / 3;
  return p;
}

double EnsembleModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const RegressionTree& tree : trees) sum += tree.predict(x);
  return sum / static_cast<double>(trees.size());
}

EnsembleModel fit_ensemble(const Dataset& data, const EnsembleConfig& config) {
  const std::size_t n = data.n();
  if (n < 2) fail(errc::too_few_samples, "ensemble needs n >= 2");
  if (config.n_trees < 1) fail(errc::invalid_spec, "n_trees must be >= 1");
  const std::size_t mtry = effective_mtry(config, data.p());
  const SortedFeatures sorted = presort_features(data);

  EnsembleModel model;
  model.config = config;
  model.feature_ids = data.feature_ids;
  model.trees.resize(config.n_trees);
  model.inbag.assign(config.n_trees, std::vector<std::uint32_t>(n, 0));

  parallel::parallel_for(config.n_trees, [&](std::size_t t) {
    Rng boot_rng(derive_seed(config.seed, stream::tree_bootstrap, t));
    std::vector<std::size_t> samples = boot_rng.bootstrap(n);
    auto& counts = model.inbag[t];
    for (std::size_t s : samples) counts[s]++;

    TreeConfig tc = config.tree;
    tc.mtry = mtry;
    tc.seed = derive_seed(config.seed, stream::tree_grow, t);
    Rng grow_rng(tc.seed);
    model.trees[t] = fit_tree(data, sorted, std::move(samples), tc, grow_rng);
  });
  return model;
}

namespace {

void check_training_data(const EnsembleModel& model, const Dataset& data) {
  if (model.trees.empty()) fail(errc::bad_model_file, "ensemble has no trees");
  if (data.n() != model.n_train() ||
      data.p() != model.trees.front().n_features) {
    fail(errc::dimension_mismatch,
         "data does not match the ensemble's training view");
  }
}

// Tree prediction with one feature's value overridden, so permutation
// importance never has to copy rows.
double predict_override(const RegressionTree& tree, std::span<const double> x,
                        std::size_t feature, double value) {
  std::size_t idx = 0;
  while (!tree.nodes[idx].is_leaf) {
    const TreeNode& nd = tree.nodes[idx];
    const double v = nd.feature == feature ? value : x[nd.feature];
    idx = static_cast<std::size_t>(v < nd.threshold ? nd.left : nd.right);
  }
  return tree.nodes[idx].value;
}

}  // namespace

std::vector<std::optional<double>> oob_predictions(const EnsembleModel& model,
                                                   const Dataset& data) {
  check_training_data(model, data);
  const std::size_t n = data.n();
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& inbag = model.inbag[t];
    for (std::size_t i = 0; i < n; ++i) {
      if (inbag[i] != 0) continue;
      sums[i] += model.trees[t].predict(data.features.row(i));
      counts[i]++;
    }
  }
  std::vector<std::optional<double>> preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) preds[i] = sums[i] / static_cast<double>(counts[i]);
  }
  return preds;
}

double oob_error(const EnsembleModel& model, const Dataset& data) {
  const auto preds = oob_predictions(model, data);
  double se = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!preds[i]) continue;
    const double e = *preds[i] - data.target[i];
    se += e * e;
    ++count;
  }
  if (count == 0) fail(errc::no_oob_samples, "no sample is OOB for any tree");
  return se / static_cast<double>(count);
}

ImportanceReport permutation_importance(const EnsembleModel& model,
                                        const Dataset& data,
                                        std::uint64_t seed,
                                        const ImportanceOptions& opts) {
  check_training_data(model, data);
  if (opts.repeats < 1) fail(errc::invalid_spec, "repeats must be >= 1");
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  const std::size_t n_trees = model.trees.size();

  std::vector<std::vector<double>> deltas(n_trees);
  std::vector<char> contributing(n_trees, 0);

  parallel::parallel_for(n_trees, [&](std::size_t t) {
    const RegressionTree& tree = model.trees[t];
    const auto& inbag = model.inbag[t];
    std::vector<std::size_t> oob;
    for (std::size_t i = 0; i < n; ++i) {
      if (inbag[i] == 0) oob.push_back(i);
    }
    if (oob.size() < 2) return;  // skipped, recorded below

    const double inv = 1.0 / static_cast<double>(oob.size());
    double base_se = 0.0;
    for (std::size_t i : oob) {
      const double e = tree.predict(data.features.row(i)) - data.target[i];
      base_se += e * e;
    }
    const double base_mse = base_se * inv;

    const std::vector<char> used = tree.used_features();
    auto& row = deltas[t];
    row.assign(p, 0.0);
    std::vector<double> values(oob.size());
    for (std::size_t j = 0; j < p; ++j) {
      // A feature no split reads cannot change any prediction: delta is
      // exactly zero, no permutation needed.
      if (!used[j]) continue;
      Rng perm_rng(derive_seed(seed, stream::importance_perm, t, j));
      double acc = 0.0;
      for (std::size_t rep = 0; rep < opts.repeats; ++rep) {
        for (std::size_t k = 0; k < oob.size(); ++k) {
          values[k] = data.features.at(oob[k], j);
        }
        perm_rng.shuffle(values);
        double se = 0.0;
        for (std::size_t k = 0; k < oob.size(); ++k) {
          const std::size_t i = oob[k];
          const double pred =
              predict_override(tree, data.features.row(i), j, values[k]);
          const double e = pred - data.target[i];
          se += e * e;
        }
        acc += se * inv;
      }
      row[j] = acc / static_cast<double>(opts.repeats) - base_mse;
    }
    contributing[t] = 1;
  });

  ImportanceReport report;
  report.feature_ids = data.feature_ids;
  report.scores.assign(p, 0.0);

  std::size_t n_contributing = 0;
  for (std::size_t t = 0; t < n_trees; ++t) {
    if (contributing[t]) ++n_contributing;
  }
  report.skipped_trees = n_trees - n_contributing;
  if (n_contributing == 0) {
    fail(errc::no_oob_samples, "every tree has < 2 OOB samples");
  }

  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (std::size_t t = 0; t < n_trees; ++t) {  // fixed-order reduction
      if (contributing[t]) sum += deltas[t][j];
    }
    report.scores[j] = sum / static_cast<double>(n_contributing);
  }

  if (opts.standardized && n_contributing >= 2) {
    for (std::size_t j = 0; j < p; ++j) {
      double ss = 0.0;
      for (std::size_t t = 0; t < n_trees; ++t) {
        if (!contributing[t]) continue;
        const double d = deltas[t][j] - report.scores[j];
        ss += d * d;
      }
      const double sd =
          std::sqrt(ss / static_cast<double>(n_contributing - 1));
      if (sd > 0.0) report.scores[j] /= sd;
    }
  }

  report.ranking.resize(p);
  std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
  std::sort(report.ranking.begin(), report.ranking.end(),
            [&](std::size_t a, std::size_t b) {
              const double sa = report.scores[a];
              const double sb = report.scores[b];
              return sa > sb || (sa == sb && a < b);
            });
  return report;
}

}  // namespace sfr
