#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfr/dataset.hpp"
#include "sfr/tree.hpp"

namespace sfr {

enum class EnsembleMode {
  random_forest,  // mtry = ceil(p / 3)
  bagged,         // mtry = p
};

struct EnsembleConfig {
  std::size_t n_trees = 1000;
  TreeConfig tree;  // tree.mtry is ignored; see mode / mtry_override
  EnsembleMode mode = EnsembleMode::bagged;
  std::optional<std::size_t> mtry_override;  // must satisfy 1 <= mtry <= p
  std::uint64_t seed = 0;
};

std::size_t effective_mtry(const EnsembleConfig& config, std::size_t p);

struct EnsembleModel {
  std::vector<RegressionTree> trees;
  // inbag[t][i] = number of times sample i was drawn into tree t's bootstrap.
  std::vector<std::vector<std::uint32_t>> inbag;
  std::vector<std::string> feature_ids;  // of the training view
  EnsembleConfig config;

  std::size_t n_train() const noexcept {
    return inbag.empty() ? 0 : inbag.front().size();
  }

  // Unweighted mean of all tree predictions.
  double predict(std::span<const double> x) const;
};

// Fits n_trees trees, each on its own bootstrap multiset of size n drawn with
// replacement. Each tree owns two derived generator streams (bootstrap and
// node sampling), so results do not depend on thread count or tree order.
EnsembleModel fit_ensemble(const Dataset& data, const EnsembleConfig& config);

// Entry i averages tree predictions over the trees for which sample i is
// out-of-bag; nullopt if no tree holds i out. `data` must be the training set.
std::vector<std::optional<double>> oob_predictions(const EnsembleModel& model,
                                                   const Dataset& data);

// MSE between present OOB predictions and true targets.
double oob_error(const EnsembleModel& model, const Dataset& data);

struct ImportanceReport {
  std::vector<double> scores;         // per feature, raw mean OOB-MSE increase
  std::vector<std::size_t> ranking;   // descending score, ties by index
  std::vector<std::string> feature_ids;
  std::size_t skipped_trees = 0;      // trees with < 2 OOB samples
};

struct ImportanceOptions {
  // Divide each score by the across-tree standard deviation of its deltas.
  bool standardized = false;
  // Permutations averaged per (tree, feature); 1 matches a single shuffle.
  std::size_t repeats = 1;
};

// OOB permutation importance: for each tree and feature, the change in the
// tree's OOB MSE after permuting that feature's values among the tree's OOB
// samples, averaged over trees. Features unused by every tree score exactly
// zero; negative scores are possible and are not clamped.
ImportanceReport permutation_importance(const EnsembleModel& model,
                                        const Dataset& data,
                                        std::uint64_t seed,
                                        const ImportanceOptions& opts = {});

}  // namespace sfr
