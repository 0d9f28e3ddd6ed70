#pragma once

#include <cstdint>
#include <vector>

#include "sfr/dataset.hpp"

namespace sfr {

// Planted-signal Gaussian generator. Features are standard normal with
// pairwise correlation correlation_rho (equicorrelation via a shared
// per-sample factor); the target is a linear combination of the first
// k_informative features plus Gaussian noise. Generation is a pure function
// of the spec: the same spec yields a bit-identical Dataset.
struct SyntheticSpec {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k_informative = 0;
  std::vector<double> coefficients;  // length k_informative
  double noise_sd = 1.0;
  double correlation_rho = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws invalid_spec
};

Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace sfr
