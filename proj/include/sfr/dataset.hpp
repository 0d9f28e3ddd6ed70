#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sfr {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& at(std::size_t i, std::size_t j) noexcept {
    return data_[i * cols_ + j];
  }
  double at(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Immutable after construction; safe to share across concurrent readers.
struct Dataset {
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_ids;
  Matrix features;  // n x p
  std::vector<double> target;
  std::optional<std::vector<double>> baseline;

  std::size_t n() const noexcept { return features.rows(); }
  std::size_t p() const noexcept { return features.cols(); }

  // Enforces the ingestion invariants: consistent shapes, unique ids,
  // finite values, n >= 2, p >= 1.
  void validate() const;
};

// Copies the rows in `keep` (order preserved; duplicates allowed).
Dataset subset_samples(const Dataset& d, std::span<const std::size_t> keep);

// Copies the columns in `keep` (order preserved). The result may have p = 0,
// which is only meaningful as an internal ensemble input (mean-only trees).
Dataset subset_features(const Dataset& d, std::span<const std::size_t> keep);

enum class TargetMode { raw_change, residualized_change };

// raw_change: post - pre. residualized_change: residuals of OLS of
// (post - pre) on pre with intercept.
std::vector<double> make_target(std::span<const double> post_score,
                                std::span<const double> pre_score,
                                TargetMode mode);

struct Standardization {
  double mean = 0.0;
  double sd = 1.0;

  double apply(double y) const noexcept { return (y - mean) / sd; }
  double invert(double z) const noexcept { return z * sd + mean; }
};

// z = (y - mean) / sd with sample sd (divisor n-1). Throws zero_variance on
// constant input, too_few_samples for n < 2.
std::pair<std::vector<double>, Standardization> standardize_target(
    std::span<const double> y);

}  // namespace sfr
