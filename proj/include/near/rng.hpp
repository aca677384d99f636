#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace near {

// Seedable, splittable pseudo-random stream (SplitMix64). Substreams derived
// with split() are statistically independent of the parent and of each other,
// so parallel consumers can draw without coordination and still reproduce the
// serial result bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed), base_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform in [0, bound) without modulo bias.
  std::uint64_t next_below(std::uint64_t bound) {
    assert(bound > 0);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Knuth multiplication method; exact inverse-transform for small means.
  int poisson(double mean) {
    if (!(mean > 0.0)) throw std::domain_error("poisson: mean must be positive");
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

  // Independent substream keyed by (construction seed, stream id): neither
  // advances this stream nor depends on how much it has been drawn from.
  SplitMix64 split(std::uint64_t stream) const {
    std::uint64_t s = mix(base_ + 0x9E3779B97F4A7C15ULL * (stream + 1));
    return SplitMix64(mix(s ^ 0xD1B54A32D192ED03ULL));
  }

  std::uint64_t state() const { return state_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  std::uint64_t base_;
};

}  // namespace near
