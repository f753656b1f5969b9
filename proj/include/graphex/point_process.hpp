#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "graphex/errors.hpp"
#include "graphex/marginals.hpp"
#include "graphex/rng.hpp"
#include "graphex/stats.hpp"

// The latent vertex process: a unit-rate Poisson process on [0,t] x [0,inf),
// truncated at a level eta_max chosen so the expected number of edges lost
// to truncation stays under a budget.

namespace graphex {

struct PointSample {
  double t = 0.0;
  double eta_max = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> theta;
  std::vector<double> eta;

  std::size_t size() const noexcept { return eta.size(); }
};

// Materializes every latent point; guarded because the expected count grows
// like t * eta_max. Heavy truncation levels go through the banded sampler
// instead, which never stores untouched points.
inline PointSample sample_points(double t, double eta_max, std::uint64_t seed,
                                 double capacity = 1e8) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("sample_points: t must be positive");
  if (!(eta_max > 0.0) || !std::isfinite(eta_max)) {
    throw ValidationError("sample_points: eta_max must be positive");
  }
  const double mean = t * eta_max;
  if (mean > capacity) {
    throw CapacityError("sample_points: expected point count " + std::to_string(mean) +
                        " exceeds capacity " + std::to_string(capacity));
  }
  PointSample out;
  out.t = t;
  out.eta_max = eta_max;
  out.seed = seed;
  CounterRng count_rng(hash64(seed, kStreamPointCount));
  const std::uint64_t n = poisson_draw(mean, count_rng);
  out.theta.reserve(n);
  out.eta.reserve(n);
  CounterRng coord_rng(hash64(seed, kStreamPointCoord));
  for (std::uint64_t i = 0; i < n; ++i) {
    out.theta.push_back(t * coord_rng.next_unit());
    out.eta.push_back(eta_max * coord_rng.next_unit());
  }
  return out;
}

struct TruncationChoice {
  double eta_max = 0.0;
  double expected_missed_edges = 0.0;  // t^2 * int_eta_max^inf mu1
  bool flagged = false;                // budget unattainable, hard cap applied
  double budget = 0.0;
  double hard_cap = 0.0;
};

// Smallest truncation level whose expected-missed-edge bound meets the
// budget. Kernels whose mean-degree tail integral diverges (the sum families
// at alpha <= 2) can never meet it; they get the hard cap and a flag.
inline TruncationChoice choose_eta_max(const MarginalEvaluator& ev, double t,
                                       double budget = 0.1, double hard_cap = 1e7) {
  if (!(t > 0.0)) throw ValidationError("choose_eta_max: t must be positive");
  if (!(budget > 0.0)) throw ValidationError("choose_eta_max: budget must be positive");
  if (!(hard_cap > 0.0)) throw ValidationError("choose_eta_max: hard cap must be positive");

  TruncationChoice out;
  out.budget = budget;
  out.hard_cap = hard_cap;

  auto missed = [&](double eta) { return t * t * ev.mu1_tail(eta); };

  // An infinite budget disables bias control entirely: take the cap.
  if (std::isinf(budget)) {
    out.eta_max = hard_cap;
    try {
      out.expected_missed_edges = missed(hard_cap);
    } catch (const NumericError&) {
      out.expected_missed_edges = std::numeric_limits<double>::infinity();
    }
    return out;
  }

  double at_cap = std::numeric_limits<double>::infinity();
  bool cap_ok = false;
  if (!ev.known_divergent_tail()) {
    try {
      at_cap = missed(hard_cap);
      cap_ok = std::isfinite(at_cap) && at_cap <= budget;
    } catch (const NumericError&) {
      // Divergent or intractable tail integral: treat as unattainable.
    }
  }
  if (!cap_ok) {
    out.eta_max = hard_cap;
    out.expected_missed_edges = at_cap;
    out.flagged = true;
    return out;
  }

  if (missed(0.0) <= budget) {
    out.eta_max = 0.0;
    out.expected_missed_edges = missed(0.0);
    return out;
  }
  auto g = [&](double eta) { return missed(eta) - budget; };
  out.eta_max = bisect_monotone(g, 0.0, hard_cap, {1e-9, 200});
  out.expected_missed_edges = missed(out.eta_max);
  return out;
}

}  // namespace graphex
