#include "sfr/rng.hpp"

#include <cmath>
#include <numbers>

namespace sfr {

double Rng::next_normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = next_unit();
  while (u1 <= 0.0) u1 = next_unit();  // log(0) guard
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<std::size_t> Rng::bootstrap(std::size_t n) {
  std::vector<std::size_t> draws(n);
  for (std::size_t i = 0; i < n; ++i) {
    draws[i] = static_cast<std::size_t>(next_below(n));
  }
  return draws;
}

}  // namespace sfr
