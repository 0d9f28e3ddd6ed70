#include "sfr/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "sfr/errors.hpp"
#include "sfr/stats.hpp"

namespace sfr {

namespace {

void check_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      fail(errc::duplicate_id, std::string(what) + " '" + id + "'");
    }
  }
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      fail(errc::non_finite_value, std::string(what) + " contains NaN/inf");
    }
  }
}

}  // namespace

void Dataset::validate() const {
  const std::size_t rows = features.rows();
  const std::size_t cols = features.cols();
  if (rows < 2) fail(errc::too_few_samples, "need n >= 2 samples");
  if (cols < 1) fail(errc::no_features, "need p >= 1 features");
  if (sample_ids.size() != rows || target.size() != rows ||
      (baseline && baseline->size() != rows) || feature_ids.size() != cols) {
    fail(errc::dimension_mismatch, "dataset field lengths disagree");
  }
  check_unique(sample_ids, "duplicate sample id");
  check_unique(feature_ids, "duplicate feature id");
  check_finite(features.data(), "feature matrix");
  check_finite(target, "target");
  if (baseline) check_finite(*baseline, "baseline");
}

Dataset subset_samples(const Dataset& d, std::span<const std::size_t> keep) {
  Dataset out;
  out.feature_ids = d.feature_ids;
  out.features = Matrix(keep.size(), d.p());
  out.sample_ids.reserve(keep.size());
  out.target.reserve(keep.size());
  if (d.baseline) out.baseline.emplace();
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const std::size_t i = keep[r];
    out.sample_ids.push_back(d.sample_ids[i]);
    out.target.push_back(d.target[i]);
    if (d.baseline) out.baseline->push_back((*d.baseline)[i]);
    const auto src = d.features.row(i);
    auto dst = out.features.row(r);
    for (std::size_t j = 0; j < d.p(); ++j) dst[j] = src[j];
  }
  return out;
}

Dataset subset_features(const Dataset& d, std::span<const std::size_t> keep) {
  Dataset out;
  out.sample_ids = d.sample_ids;
  out.target = d.target;
  out.baseline = d.baseline;
  out.features = Matrix(d.n(), keep.size());
  out.feature_ids.reserve(keep.size());
  for (std::size_t j : keep) out.feature_ids.push_back(d.feature_ids[j]);
  for (std::size_t i = 0; i < d.n(); ++i) {
    auto dst = out.features.row(i);
    for (std::size_t c = 0; c < keep.size(); ++c) {
      dst[c] = d.features.at(i, keep[c]);
    }
  }
  return out;
}

std::vector<double> make_target(std::span<const double> post_score,
                                std::span<const double> pre_score,
                                TargetMode mode) {
  if (post_score.size() != pre_score.size()) {
    fail(errc::dimension_mismatch, "make_target: unequal lengths");
  }
  const std::size_t n = post_score.size();
  std::vector<double> change(n);
  for (std::size_t i = 0; i < n; ++i) change[i] = post_score[i] - pre_score[i];
  if (mode == TargetMode::raw_change) return change;

  if (n < 3) {
    fail(errc::too_few_samples, "residualized change needs n >= 3");
  }
  bool all_equal = true;
  for (std::size_t i = 1; i < n; ++i) {
    if (pre_score[i] != pre_score[0]) {
      all_equal = false;
      break;
    }
  }
  if (all_equal) {
    fail(errc::degenerate_baseline, "all baseline scores are equal");
  }
  const OlsFit fit = ols_fit(pre_score, change);
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = change[i] - (fit.intercept + fit.slope * pre_score[i]);
  }
  return resid;
}

std::pair<std::vector<double>, Standardization> standardize_target(
    std::span<const double> y) {
  if (y.size() < 2) fail(errc::too_few_samples, "standardize needs n >= 2");
  Standardization st;
  st.mean = mean(y);
  const double sd = sample_sd(y);
  if (sd == 0.0) fail(errc::zero_variance, "target has zero variance");
  st.sd = sd;
  std::vector<double> z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = st.apply(y[i]);
  return {std::move(z), st};
}

}  // namespace sfr
