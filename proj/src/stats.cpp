#include "sfr/stats.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "sfr/errors.hpp"

namespace sfr {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) {
    fail(errc::too_few_samples, "sample variance needs n >= 2");
  }
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double sample_sd(std::span<const double> v) {
  return std::sqrt(sample_variance(v));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(errc::dimension_mismatch, "pearson: unequal lengths");
  }
  if (a.size() < 2) fail(errc::too_few_samples, "pearson needs n >= 2");
  const double ma = mean(a);
  const double mb = mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    fail(errc::constant_vector, "pearson: constant input vector");
  }
  return sab / std::sqrt(saa * sbb);
}

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(errc::dimension_mismatch, "ols_fit: unequal lengths");
  }
  if (x.size() < 2) fail(errc::too_few_pairs, "ols_fit needs n >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  if (sxx == 0.0) fail(errc::zero_variance, "ols_fit: constant regressor");
  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double student_t_cdf(double t, double df) {
  const boost::math::students_t dist(df);
  return boost::math::cdf(dist, t);
}

}  // namespace sfr
