#pragma once

#include <cstddef>
#include <span>

namespace sfr {

double mean(std::span<const double> v);

// Unbiased sample variance (divisor n-1). Requires n >= 2.
double sample_variance(std::span<const double> v);
double sample_sd(std::span<const double> v);

// Sample Pearson correlation. Throws constant_vector if either input has
// zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
};

// Simple linear regression of y on x with intercept.
// Throws zero_variance if x is constant, too_few_pairs if fewer than 2 points.
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

// Lower-tail CDF of Student's t distribution with df > 0 degrees of freedom.
double student_t_cdf(double t, double df);

}  // namespace sfr
