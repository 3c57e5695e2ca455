#pragma once

#include <cmath>
#include <cstdint>

#include "histopheno/common.hpp"

namespace histopheno {

// SplitMix64 generator. The standard <random> distributions are
// implementation-defined, so every stochastic component in the library draws
// from this generator to keep outputs identical across platforms and builds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for (seed, stream); used to give restarts, bootstrap
  // replicates and slides their own deterministic generators.
  static Rng derived(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t h = seed;
    h ^= stream + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n) without modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw ValidationError("Rng::next_below: n must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  double exponential(double rate) {
    return -std::log1p(-next_double()) / rate;
  }

  // Box-Muller; consumes two uniforms per draw, no caching.
  double normal(double mean, double sd) {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Exact Poisson sampling. Inversion for small means; larger means are split
  // into independent halves, which preserves the distribution exactly.
  long poisson(double lambda) {
    if (lambda < 0.0) throw ValidationError("Rng::poisson: negative mean");
    if (lambda == 0.0) return 0;
    if (lambda > 30.0) {
      const double half = lambda / 2.0;
      return poisson(half) + poisson(lambda - half);
    }
    const double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace histopheno
