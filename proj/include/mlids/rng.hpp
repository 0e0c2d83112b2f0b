#pragma once

#include <cstdint>

namespace mlids {

// splitmix64. All synthetic data in this project is drawn from it so that
// generated rulesets, floods and reports are bit-identical across platforms
// (std::uniform_int_distribution is not pinned by the standard).
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n). n must be > 0. Modulo bias is irrelevant at our scales.
  uint64_t bounded(uint64_t n) { return next() % n; }

  /// Uniform in [lo, hi], inclusive.
  uint64_t range(uint64_t lo, uint64_t hi) { return lo + bounded(hi - lo + 1); }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Per-item seed derivation: the required scheme for parallel-safe
  /// generation is seed_i = derive(seed, i).
  static uint64_t derive(uint64_t seed, uint64_t index) {
    uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

}  // namespace mlids
