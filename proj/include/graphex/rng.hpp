#pragma once

#include <cmath>
#include <cstdint>

#include "graphex/errors.hpp"

// Counter-based randomness. Every random quantity in the library is a pure
// function of (master seed, stream labels, counter), so replications and
// band pairs can be processed in any order, or in parallel, with identical
// results. The mixer is the splitmix64 finalizer, applied twice with a
// key injection in between.

namespace graphex {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

template <class... Parts>
std::uint64_t hash64(std::uint64_t first, Parts... parts) {
  std::uint64_t h = mix64(first);
  ((h = mix64(h ^ (static_cast<std::uint64_t>(parts) + kGolden))), ...);
  return h;
}

// Stream labels keep independent random streams from colliding.
enum StreamLabel : std::uint64_t {
  kStreamPointCount = 0x101,
  kStreamPointCoord = 0x102,
  kStreamBandCount = 0x103,
  kStreamVertexCoord = 0x104,
  kStreamBandPair = 0x105,
  kStreamNaiveEdges = 0x106,
  kStreamPlanted = 0x107,
  kStreamProbe = 0x108,
};

inline double u64_to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double u64_to_unit_open(std::uint64_t x) noexcept {
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;  // (0, 1], log-safe
}

class CounterRng {
public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }
  double next_unit() noexcept { return u64_to_unit(next_u64()); }      // [0, 1)
  double next_unit_open() noexcept { return u64_to_unit_open(next_u64()); }  // (0, 1]

  std::uint64_t key() const noexcept { return key_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

namespace detail {

// Inversion by sequential search; only used for small means.
inline std::uint64_t poisson_small(double lambda, CounterRng& rng) {
  double u = rng.next_unit();
  double p = std::exp(-lambda);
  double cum = p;
  std::uint64_t k = 0;
  while (u > cum) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cum += p;
    if (k > 2000) break;  // cumulative has saturated numerically
  }
  return k;
}

// Hormann's PTRD transformed-rejection sampler, exact for lambda >= 10 and
// stable for means as large as ~1e10 (counts stay well inside the exact
// integer range of a double).
inline std::uint64_t poisson_ptrd(double lambda, CounterRng& rng) {
  const double smu = std::sqrt(lambda);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    double u = rng.next_unit() - 0.5;
    double v = rng.next_unit_open();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr && kf >= 0.0) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    double rhs = kf * log_lambda - lambda - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
  }
}

}  // namespace detail

inline std::uint64_t poisson_draw(double lambda, CounterRng& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("poisson_draw: mean must be finite and nonnegative");
  }
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) return detail::poisson_small(lambda, rng);
  return detail::poisson_ptrd(lambda, rng);
}

// Number of indices skipped before the next success of a Bernoulli(p) scan.
// Returns a huge sentinel when the skip does not fit the remaining range.
inline std::uint64_t geometric_skip(double p, CounterRng& rng) {
  constexpr std::uint64_t kNoSuccess = ~0ull;
  if (p >= 1.0) return 0;
  if (p <= 0.0) return kNoSuccess;
  double u = rng.next_unit_open();
  double s = std::floor(std::log(u) / std::log1p(-p));
  if (!(s < 1.8e19)) return kNoSuccess;
  return static_cast<std::uint64_t>(s);
}

}  // namespace graphex
