#include "sfr/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sfr/errors.hpp"

namespace sfr {

double RegressionTree::predict(std::span<const double> x) const {
  if (x.size() != n_features) {
    fail(errc::dimension_mismatch,
         "predict: x has " + std::to_string(x.size()) + " values, tree expects " +
             std::to_string(n_features));
  }
  std::size_t idx = 0;
  while (!nodes[idx].is_leaf) {
    const TreeNode& nd = nodes[idx];
    idx = static_cast<std::size_t>(x[nd.feature] < nd.threshold ? nd.left
                                                                : nd.right);
  }
  return nodes[idx].value;
}

std::vector<char> RegressionTree::used_features() const {
  std::vector<char> used(n_features, 0);
  for (const TreeNode& nd : nodes) {
    if (!nd.is_leaf) used[nd.feature] = 1;
  }
  return used;
}

SortedFeatures presort_features(const Dataset& d) {
  SortedFeatures sf;
  sf.order.resize(d.p());
  for (std::size_t j = 0; j < d.p(); ++j) {
    auto& ord = sf.order[j];
    ord.resize(d.n());
    std::iota(ord.begin(), ord.end(), 0u);
    std::sort(ord.begin(), ord.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                const double va = d.features.at(a, j);
                const double vb = d.features.at(b, j);
                return va < vb || (va == vb && a < b);
              });
  }
  return sf;
}

namespace {

struct BestSplit {
  bool found = false;
  double objective = std::numeric_limits<double>::infinity();
  std::size_t feature = 0;
  double threshold = 0.0;
};

class Grower {
 public:
  Grower(const Dataset& data, const SortedFeatures& sorted,
         const TreeConfig& cfg, Rng& rng)
      : data_(data), sorted_(sorted), cfg_(cfg), rng_(rng) {
    membership_.assign(data.n(), 0);
    pool_.resize(data.p());
    std::iota(pool_.begin(), pool_.end(), std::size_t{0});
  }

  std::vector<TreeNode> run(std::vector<std::size_t>&& samples) {
    grow(std::move(samples), 0);
    return std::move(nodes_);
  }

 private:
  std::int32_t make_leaf(double value, std::size_t count) {
    TreeNode nd;
    nd.is_leaf = true;
    nd.value = value;
    nd.n_samples = static_cast<std::uint32_t>(count);
    nodes_.push_back(nd);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t grow(std::vector<std::size_t>&& samples, std::size_t depth) {
    const std::size_t count = samples.size();
    double sum = 0.0, sumsq = 0.0;
    bool pure = true;
    const double y0 = data_.target[samples.front()];
    for (std::size_t s : samples) {
      const double y = data_.target[s];
      sum += y;
      sumsq += y * y;
      pure = pure && y == y0;
    }
    const double node_mean = sum / static_cast<double>(count);

    const bool depth_capped = cfg_.max_depth && depth >= *cfg_.max_depth;
    if (pure || count < 2 * cfg_.min_leaf || depth_capped || data_.p() == 0) {
      return make_leaf(node_mean, count);
    }

    const BestSplit best = find_split(samples, count, sum, sumsq);
    if (!best.found) return make_leaf(node_mean, count);

    std::vector<std::size_t> left, right;
    left.reserve(count);
    right.reserve(count);
    for (std::size_t s : samples) {
      if (data_.features.at(s, best.feature) < best.threshold) {
        left.push_back(s);
      } else {
        right.push_back(s);
      }
    }
    samples.clear();

    const std::int32_t me = static_cast<std::int32_t>(nodes_.size());
    TreeNode nd;
    nd.is_leaf = false;
    nd.feature = static_cast<std::uint32_t>(best.feature);
    nd.threshold = best.threshold;
    nd.n_samples = static_cast<std::uint32_t>(count);
    nodes_.push_back(nd);
    nodes_[static_cast<std::size_t>(me)].left = grow(std::move(left), depth + 1);
    nodes_[static_cast<std::size_t>(me)].right =
        grow(std::move(right), depth + 1);
    return me;
  }

  BestSplit find_split(const std::vector<std::size_t>& samples,
                       std::size_t count, double sum, double sumsq) {
    // mtry distinct candidate features, drawn fresh per node via a partial
    // Fisher-Yates over a persistent pool. The tie policy below is
    // independent of draw order.
    const std::size_t p = data_.p();
    const std::size_t m = std::min(cfg_.mtry, p);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng_.next_below(p - i));
      std::swap(pool_[i], pool_[j]);
    }

    for (std::size_t s : samples) membership_[s]++;

    BestSplit best;
    for (std::size_t i = 0; i < m; ++i) {
      scan_feature(pool_[i], count, sum, sumsq, best);
    }

    for (std::size_t s : samples) membership_[s] = 0;
    return best;
  }

  void scan_feature(std::size_t feature, std::size_t node_count,
                    double total_sum, double total_sumsq, BestSplit& best) {
    const auto& order = sorted_.order[feature];
    double left_sum = 0.0, left_sumsq = 0.0;
    std::size_t left_count = 0;
    double prev_value = 0.0;
    bool have_prev = false;

    for (std::uint32_t s : order) {
      const std::uint32_t mult = membership_[s];
      if (mult == 0) continue;
      const double value = data_.features.at(s, feature);
      if (have_prev && value != prev_value) {
        consider(feature, prev_value, value, left_count, left_sum, left_sumsq,
                 node_count, total_sum, total_sumsq, best);
      }
      const double y = data_.target[s];
      left_count += mult;
      left_sum += mult * y;
      left_sumsq += mult * y * y;
      prev_value = value;
      have_prev = true;
    }
  }

  void consider(std::size_t feature, double lo, double hi,
                std::size_t left_count, double left_sum, double left_sumsq,
                std::size_t node_count, double total_sum, double total_sumsq,
                BestSplit& best) const {
    const std::size_t right_count = node_count - left_count;
    if (left_count < cfg_.min_leaf || right_count < cfg_.min_leaf) return;
    const double mid = (lo + hi) * 0.5;
    if (!(mid > lo && mid < hi)) return;  // adjacent representable values

    const double right_sum = total_sum - left_sum;
    const double right_sumsq = total_sumsq - left_sumsq;
    // Summed child SSE == weighted sum of (biased) child variances.
    const double sse_left =
        left_sumsq - left_sum * left_sum / static_cast<double>(left_count);
    const double sse_right =
        right_sumsq - right_sum * right_sum / static_cast<double>(right_count);
    const double objective = sse_left + sse_right;

    bool better = false;
    if (!best.found || objective < best.objective) {
      better = true;
    } else if (objective == best.objective) {
      better = feature < best.feature ||
               (feature == best.feature && mid < best.threshold);
    }
    if (better) {
      best.found = true;
      best.objective = objective;
      best.feature = feature;
      best.threshold = mid;
    }
  }

  const Dataset& data_;
  const SortedFeatures& sorted_;
  const TreeConfig& cfg_;
  Rng& rng_;
  std::vector<TreeNode> nodes_;
  std::vector<std::uint32_t> membership_;  // node multiplicity per sample
  std::vector<std::size_t> pool_;
};

void check_config(const TreeConfig& cfg, std::size_t p) {
  if (cfg.min_leaf < 1) fail(errc::invalid_spec, "min_leaf must be >= 1");
  if (p > 0 && (cfg.mtry < 1 || cfg.mtry > p)) {
    fail(errc::invalid_spec, "mtry must lie in [1, p]");
  }
}

}  // namespace

RegressionTree fit_tree(const Dataset& data, const SortedFeatures& sorted,
                        std::vector<std::size_t> samples,
                        const TreeConfig& config, Rng& rng) {
  if (samples.empty()) fail(errc::empty_sample_set, "no training samples");
  check_config(config, data.p());
  RegressionTree tree;
  tree.n_features = data.p();
  tree.config = config;
  tree.training_samples = samples;
  Grower grower(data, sorted, config, rng);
  tree.nodes = grower.run(std::move(samples));
  return tree;
}

RegressionTree fit_tree(const Dataset& data, std::vector<std::size_t> samples,
                        const TreeConfig& config) {
  const SortedFeatures sorted = presort_features(data);
  Rng rng(config.seed);
  return fit_tree(data, sorted, std::move(samples), config, rng);
}

}  // namespace sfr
