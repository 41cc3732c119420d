#pragma once

#include <cmath>
#include <cstdint>

namespace oco {

// SplitMix64 finalizer; stateless and bit-stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, draw index). Streams can be split without coordination,
/// so per-round realizations are reproducible no matter how many draws
/// other components consume.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix64(seed ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return mix64(base_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in [0,1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Poisson by multiplicative counting; large means are folded into
  /// chunks so exp(-lambda) never underflows. Cost is O(lambda) draws.
  std::uint64_t poisson(double lambda) {
    std::uint64_t total = 0;
    while (lambda > 200.0) {
      total += poisson_small(200.0);
      lambda -= 200.0;
    }
    return total + poisson_small(lambda);
  }

 private:
  std::uint64_t poisson_small(double lambda) {
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace oco
