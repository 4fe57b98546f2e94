#pragma once

// Seeded random streams and the elementary samplers built on them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "equigrid/specfun.hpp"

namespace equigrid {

/// SplitMix64 finalizer. Used to derive child seeds from a master seed.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the `index`-th child of `master` (sweep rows, bound terms, ...).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Random stream identified by (seed, stream id). Identical ids reproduce
/// identical sequences; one instance must only be used by one thread.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x45514752u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  /// Exponential with unit rate.
  double exponential() noexcept { return -std::log(uniform()); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Standard normal conditioned on Z > lower (lower may be -inf).
/// Exponential-proposal rejection for lower >= 0, so the acceptance rate stays
/// above ~0.75 however deep in the tail the bound sits.
inline double sample_standard_normal_above(SeededRng& rng, double lower) {
  if (std::isnan(lower)) throw std::domain_error("truncated normal: NaN bound");
  if (lower < 0.0) {
    for (;;) {
      const double z = rng.normal();
      if (z > lower) return z;
    }
  }
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower + rng.exponential() / rate;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

/// Draw from N(mean, sd^2) conditioned on exceeding `lower`.
inline double sample_truncated_normal_tail(SeededRng& rng, double mean, double sd, double lower) {
  if (!(sd > 0.0)) throw std::domain_error("truncated normal: sd must be positive");
  const double a = (lower - mean) / sd;
  const double x = mean + sd * sample_standard_normal_above(rng, a);
  return std::max(x, lower);
}

inline std::int64_t sample_poisson(SeededRng& rng, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::domain_error("poisson: rate must be >= 0");
  if (rate == 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(rate);
  return dist(rng.engine());
}

}  // namespace equigrid
