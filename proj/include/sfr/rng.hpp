#pragma once

#include <cstdint>
#include <cstddef>
#include <utility>
#include <vector>

namespace sfr {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Used both as the stream
// generator step and for deriving child stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Derives an independent child stream seed from a master seed and up to three
// stream coordinates. Pre-assigning one stream per work item (tree, fold,
// permutation, ...) keeps results byte-identical regardless of thread count,
// and changing e.g. the tree count never perturbs earlier trees.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(seed ^ 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ mix64(a ^ 0xD1B54A32D192ED03ULL));
  h = mix64(h ^ mix64(b ^ 0x8CB92BA72F3D8DD7ULL));
  h = mix64(h ^ mix64(c ^ 0xA24BAED4963EE407ULL));
  return h;
}

// Stream tags used with derive_seed throughout the library.
namespace stream {
inline constexpr std::uint64_t tree_bootstrap = 1;
inline constexpr std::uint64_t tree_grow = 2;
inline constexpr std::uint64_t importance_perm = 3;
inline constexpr std::uint64_t selection_forest = 4;
inline constexpr std::uint64_t importance = 5;
inline constexpr std::uint64_t stepwise = 6;
inline constexpr std::uint64_t stepwise_step = 7;
inline constexpr std::uint64_t stepwise_final = 8;
inline constexpr std::uint64_t stepwise_refit = 16;
inline constexpr std::uint64_t final_ensemble = 9;
inline constexpr std::uint64_t loocv_fold = 10;
inline constexpr std::uint64_t permtest_labels = 11;
inline constexpr std::uint64_t permtest_run = 12;
inline constexpr std::uint64_t synth_features = 13;
inline constexpr std::uint64_t synth_noise = 14;
inline constexpr std::uint64_t synth_baseline = 15;
}  // namespace stream

// Minimal seeded generator (splitmix64). The standard <random> distributions
// are implementation-defined, so the samplers below are spelled out to keep
// outputs bit-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be >= 1. Unbiased (rejection sampling).
  std::uint64_t next_below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; the second deviate is cached.
  double next_normal() noexcept;

  template <class T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // n independent draws from {0, ..., n-1} with replacement.
  std::vector<std::size_t> bootstrap(std::size_t n);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sfr
