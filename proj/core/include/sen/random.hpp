#ifndef SEN_RANDOM_HPP
#define SEN_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sen {

/// FNV-1a 64-bit hash. Stable across platforms and runs; used for seed
/// derivation and cache keys.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// splitmix64 finalizer; mixes two seeds into an independent stream seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

/// Seeded random source with explicitly coded variate transforms.
///
/// All distributions are implemented here rather than via <random>'s
/// distribution templates: the standard specifies the mt19937_64 stream
/// bit-exactly but not the distributions, and reproducibility of seeded
/// runs is part of this library's contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Exp(1) via inverse cdf; -log1p(-u) maps [0,1) to [0, inf).
  double exponential() { return -std::log1p(-uniform01()); }

  /// Standard Box-Muller (no second-value caching, so each call consumes a
  /// fixed number of engine draws).
  double normal(double mean = 0.0, double sd = 1.0) {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * M_PI * u2);
  }

  /// Gamma(shape, scale) via Marsaglia-Tsang squeeze; shape < 1 boosted.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = 1.0 - uniform01();  // (0, 1]
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v * scale;
    }
  }

  /// Poisson(mean) by Knuth's product method, chunked so exp(-chunk) stays
  /// well above the double underflow threshold for any mean.
  long long poisson(double mean) {
    long long total = 0;
    while (mean > 0.0) {
      const double chunk = std::min(mean, 500.0);
      const double limit = std::exp(-chunk);
      double p = 1.0;
      long long k = 0;
      do {
        ++k;
        p *= uniform01();
      } while (p > limit);
      total += k - 1;
      mean -= chunk;
    }
    return total;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sen

#endif  // SEN_RANDOM_HPP
