#include "sfr/synthetic.hpp"

#include <cmath>
#include <sstream>

#include "sfr/errors.hpp"
#include "sfr/rng.hpp"

namespace sfr {

void SyntheticSpec::validate() const {
  if (n < 2) fail(errc::invalid_spec, "n must be >= 2");
  if (p < 1) fail(errc::invalid_spec, "p must be >= 1");
  if (k_informative > p) fail(errc::invalid_spec, "k_informative > p");
  if (coefficients.size() != k_informative) {
    fail(errc::invalid_spec, "coefficients must have length k_informative");
  }
  for (double c : coefficients) {
    if (!std::isfinite(c)) fail(errc::invalid_spec, "non-finite coefficient");
  }
  if (!(noise_sd >= 0.0)) fail(errc::invalid_spec, "noise_sd must be >= 0");
  if (!(correlation_rho >= 0.0 && correlation_rho < 1.0)) {
    fail(errc::invalid_spec, "correlation_rho must lie in [0, 1)");
  }
}

namespace {

std::string padded_id(char prefix, std::size_t index, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t v = count; v >= 10; v /= 10) ++width;
  std::ostringstream os;
  os << prefix;
  std::string digits = std::to_string(index + 1);
  os << std::string(width - digits.size(), '0') << digits;
  return os.str();
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Dataset d;
  d.features = Matrix(spec.n, spec.p);
  d.target.resize(spec.n);
  d.sample_ids.reserve(spec.n);
  d.feature_ids.reserve(spec.p);
  for (std::size_t i = 0; i < spec.n; ++i) {
    d.sample_ids.push_back(padded_id('s', i, spec.n));
  }
  for (std::size_t j = 0; j < spec.p; ++j) {
    d.feature_ids.push_back(padded_id('f', j, spec.p));
  }

  const double shared_w = std::sqrt(spec.correlation_rho);
  const double own_w = std::sqrt(1.0 - spec.correlation_rho);
  Rng feat_rng(derive_seed(spec.seed, stream::synth_features));
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double shared = feat_rng.next_normal();
    auto row = d.features.row(i);
    for (std::size_t j = 0; j < spec.p; ++j) {
      row[j] = shared_w * shared + own_w * feat_rng.next_normal();
    }
  }

  Rng noise_rng(derive_seed(spec.seed, stream::synth_noise));
  for (std::size_t i = 0; i < spec.n; ++i) {
    double y = 0.0;
    const auto row = d.features.row(i);
    for (std::size_t j = 0; j < spec.k_informative; ++j) {
      y += spec.coefficients[j] * row[j];
    }
    if (spec.noise_sd > 0.0) y += spec.noise_sd * noise_rng.next_normal();
    d.target[i] = y;
  }
  d.validate();
  return d;
}

}  // namespace sfr
