#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfr/dataset.hpp"
#include "sfr/rng.hpp"

namespace sfr {

struct TreeConfig {
  std::size_t mtry = 0;  // candidate features sampled per node; must be >= 1
  std::size_t min_leaf = 5;
  std::optional<std::size_t> max_depth;
  std::uint64_t seed = 0;
};

// Flat node arena. Internal nodes route x to `left` iff x[feature] <
// threshold; leaves predict the mean of the training targets reaching them.
struct TreeNode {
  bool is_leaf = true;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;        // leaf prediction
  std::uint32_t n_samples = 0;

  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  std::size_t n_features = 0;
  TreeConfig config;
  std::vector<std::size_t> training_samples;  // bootstrap multiset, draw order

  double predict(std::span<const double> x) const;

  // Features appearing in at least one internal node.
  std::vector<char> used_features() const;
};

// Per-feature ascending sample order, shared across the trees of an ensemble
// so each node split scan is a single sweep instead of a sort.
struct SortedFeatures {
  std::vector<std::vector<std::uint32_t>> order;  // [feature][rank] -> sample
};

SortedFeatures presort_features(const Dataset& d);

// Grows a CART regression tree on the sample multiset (duplicates allowed).
// At each node, mtry distinct candidate features are drawn without
// replacement; the split minimizing the summed child SSE (equivalently the
// weighted sum of child variances) is taken, with ties broken by lowest
// feature index then smallest threshold. Thresholds are midpoints between
// consecutive distinct sorted values.
RegressionTree fit_tree(const Dataset& data, std::vector<std::size_t> samples,
                        const TreeConfig& config);

// Same, continuing an existing generator stream and reusing a shared presort.
RegressionTree fit_tree(const Dataset& data, const SortedFeatures& sorted,
                        std::vector<std::size_t> samples,
                        const TreeConfig& config, Rng& rng);

}  // namespace sfr
