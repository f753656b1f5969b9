#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "graphex/errors.hpp"
#include "graphex/graph.hpp"
#include "graphex/graphex_spec.hpp"
#include "graphex/point_process.hpp"
#include "graphex/quadrature.hpp"
#include "graphex/rng.hpp"

// Edge samplers. Given latent points (theta_i, eta_i), each unordered pair
// is an edge independently with probability W(eta_i, eta_j).
//
//  * naive: every pair gets a Bernoulli draw; the quadratic oracle.
//  * blocked: points are partitioned into geometric eta-bands. Within a band
//    pair the kernel is bounded by its value at the band corner (kernels are
//    nonincreasing), candidate pairs are drawn by geometric skipping at the
//    bound and thinned by W/bound. The resulting edge law is exactly the
//    naive sampler's.
//  * banded (lazy): the same partition, but only per-band Poisson counts are
//    drawn; coordinates of the few touched points derive from a counter RNG
//    keyed by (seed, band, index). This handles truncation levels where the
//    latent point count is billions.
//
// Band-pair streams, point coordinates and band counts all come from
// independent keyed streams, so the edge set is a pure function of the seed,
// independent of traversal order.

namespace graphex {

namespace detail {

inline constexpr double kMaxFirstBandWidth = 0.5;

inline std::vector<double> band_boundaries(double eta_max, double t) {
  double c = std::min(kMaxFirstBandWidth, std::sqrt(eta_max / t));
  c = std::max(c, eta_max * 1e-12);
  std::vector<double> bounds;
  bounds.push_back(0.0);
  double edge = c;
  while (edge < eta_max) {
    bounds.push_back(edge);
    edge *= 2.0;
    if (bounds.size() > 96) break;  // cannot happen for sane (t, eta_max); safety net
  }
  bounds.push_back(eta_max);
  return bounds;
}

using u128 = unsigned __int128;

inline u128 tri_count(std::uint64_t n) {
  return n < 2 ? u128{0} : (u128{n} * (n - 1)) / 2;
}

// Invert k = j(j-1)/2 + i, 0 <= i < j.
inline void tri_decode(u128 k, std::uint64_t& i, std::uint64_t& j) {
  const double kd = static_cast<double>(k);
  std::uint64_t jj = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * kd)) / 2.0);
  while (tri_count(jj + 1) <= k) ++jj;
  while (jj > 0 && tri_count(jj) > k) --jj;
  j = jj;
  i = static_cast<std::uint64_t>(k - tri_count(jj));
}

struct PendingEdge {
  std::uint64_t a, b;  // canonical keys, a < b
};

// Candidate enumeration over one band pair at bound p_bar, with thinning.
// EtaA/EtaB map local indices to eta values; emit receives local indices.
template <class EtaA, class EtaB, class Emit>
void thin_band_pair(const GraphexSpec& spec, double p_bar, std::uint64_t n_a,
                    std::uint64_t n_b, bool same_band, CounterRng& rng, EtaA&& eta_a,
                    EtaB&& eta_b, Emit&& emit) {
  const u128 total = same_band ? tri_count(n_a) : u128{n_a} * n_b;
  if (total == 0 || p_bar <= 0.0) return;
  if (p_bar > 1.0) throw ValidationError("sampler: kernel bound exceeds 1");

  auto test_candidate = [&](u128 idx) {
    std::uint64_t i, j;
    if (same_band) {
      tri_decode(idx, i, j);
    } else {
      i = static_cast<std::uint64_t>(idx / n_b);
      j = static_cast<std::uint64_t>(idx % n_b);
    }
    const double w = eval_W(spec, eta_a(i), eta_b(j));
    if (w > p_bar * (1.0 + 1e-9)) {
      throw ValidationError("sampler: band bound violated; kernel is not nonincreasing");
    }
    if (rng.next_unit() * p_bar < w) emit(i, j);
  };

  if (p_bar >= 1.0) {
    for (u128 idx = 0; idx < total; ++idx) test_candidate(idx);
    return;
  }
  u128 idx = 0;
  for (;;) {
    const std::uint64_t skip = geometric_skip(p_bar, rng);
    if (skip == ~0ull) return;
    idx += skip;
    if (idx >= total) return;
    test_candidate(idx);
    ++idx;
  }
}

template <class EtaOf, class ThetaOf>
SparseGraph assemble_graph(double t, double eta_max, std::uint64_t seed,
                           std::uint64_t total_points,
                           std::vector<PendingEdge>& edges, EtaOf&& eta_of,
                           ThetaOf&& theta_of) {
  std::sort(edges.begin(), edges.end(), [](const PendingEdge& l, const PendingEdge& r) {
    return l.a != r.a ? l.a < r.a : l.b < r.b;
  });
  std::vector<std::uint64_t> keys;
  keys.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    keys.push_back(e.a);
    keys.push_back(e.b);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (keys.size() > 0xffffffffull) {
    throw CapacityError("sampler: more than 2^32 non-isolated vertices");
  }
  auto index_of = [&keys](std::uint64_t key) {
    return static_cast<std::uint32_t>(
        std::lower_bound(keys.begin(), keys.end(), key) - keys.begin());
  };

  SparseGraph g;
  g.t = t;
  g.eta_max = eta_max;
  g.seed = seed;
  g.total_points = total_points;
  g.theta.resize(keys.size());
  g.eta.resize(keys.size());
  g.adj.resize(keys.size());
  for (std::size_t v = 0; v < keys.size(); ++v) {
    g.theta[v] = theta_of(keys[v]);
    g.eta[v] = eta_of(keys[v]);
  }
  for (const auto& e : edges) {
    const std::uint32_t u = index_of(e.a);
    const std::uint32_t v = index_of(e.b);
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
  g.edge_count = edges.size();
  return g;
}

}  // namespace detail

inline SparseGraph sample_graph_naive(const GraphexSpec& spec, const PointSample& pts,
                                      std::uint64_t edge_seed,
                                      std::size_t guard = 50000) {
  validate_spec(spec);
  const std::size_t n = pts.size();
  if (n > guard) {
    throw CapacityError("sample_graph_naive: " + std::to_string(n) +
                        " points exceed the quadratic-cost guard " + std::to_string(guard));
  }
  CounterRng rng(hash64(edge_seed, kStreamNaiveEdges));
  std::vector<detail::PendingEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = eval_W(spec, pts.eta[i], pts.eta[j]);
      if (w > 1.0) throw ValidationError("sample_graph_naive: kernel value exceeds 1");
      if (rng.next_unit() < w) edges.push_back({i, j});
    }
  }
  return detail::assemble_graph(
      pts.t, pts.eta_max, edge_seed, n, edges,
      [&pts](std::uint64_t k) { return pts.eta[k]; },
      [&pts](std::uint64_t k) { return pts.theta[k]; });
}

inline SparseGraph sample_graph_blocked(const GraphexSpec& spec, const PointSample& pts,
                                        std::uint64_t edge_seed) {
  validate_spec(spec);
  const bool monotone = has_monotone_kernel(spec);
  const std::vector<double> bounds = detail::band_boundaries(pts.eta_max, pts.t);
  const std::size_t n_bands = bounds.size() - 1;

  std::vector<std::vector<std::uint64_t>> members(n_bands);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto it = std::upper_bound(bounds.begin(), bounds.end(), pts.eta[i]);
    std::size_t b = static_cast<std::size_t>(it - bounds.begin());
    b = (b == 0) ? 0 : std::min(b - 1, n_bands - 1);
    members[b].push_back(i);
  }

  std::vector<detail::PendingEdge> edges;
  for (std::size_t a = 0; a < n_bands; ++a) {
    for (std::size_t b = a; b < n_bands; ++b) {
      const auto& ma = members[a];
      const auto& mb = members[b];
      // The bound at the lower corner is valid for nonincreasing kernels;
      // otherwise fall back to exhaustive Bernoulli within the band pair.
      const double p_bar = monotone ? eval_W(spec, bounds[a], bounds[b]) : 1.0;
      CounterRng rng(hash64(edge_seed, kStreamBandPair, a, b));
      detail::thin_band_pair(
          spec, p_bar, ma.size(), mb.size(), a == b, rng,
          [&](std::uint64_t i) { return pts.eta[ma[i]]; },
          [&](std::uint64_t j) { return pts.eta[mb[j]]; },
          [&](std::uint64_t i, std::uint64_t j) {
            std::uint64_t u = ma[i], v = mb[j];
            if (u > v) std::swap(u, v);
            edges.push_back({u, v});
          });
    }
  }
  return detail::assemble_graph(
      pts.t, pts.eta_max, edge_seed, pts.size(), edges,
      [&pts](std::uint64_t k) { return pts.eta[k]; },
      [&pts](std::uint64_t k) { return pts.theta[k]; });
}

// Lazy banded sampler: per-band Poisson counts only; point coordinates are
// deterministic functions of (seed, band, index) and are computed only for
// pairs the thinning actually inspects.
inline SparseGraph sample_graph_banded(const GraphexSpec& spec, double t, double eta_max,
                                       std::uint64_t seed) {
  validate_spec(spec);
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ValidationError("sample_graph_banded: t must be positive");
  }
  if (!(eta_max > 0.0) || !std::isfinite(eta_max)) {
    throw ValidationError("sample_graph_banded: eta_max must be positive");
  }
  const bool monotone = has_monotone_kernel(spec);
  const std::vector<double> bounds = detail::band_boundaries(eta_max, t);
  const std::size_t n_bands = bounds.size() - 1;

  std::vector<std::uint64_t> counts(n_bands);
  std::uint64_t total_points = 0;
  for (std::size_t b = 0; b < n_bands; ++b) {
    CounterRng rng(hash64(seed, kStreamBandCount, b));
    counts[b] = poisson_draw(t * (bounds[b + 1] - bounds[b]), rng);
    if (counts[b] >= (1ull << 56)) {
      throw CapacityError("sample_graph_banded: band population exceeds the 56-bit key space");
    }
    total_points += counts[b];
  }

  // Laziness makes the point count nearly free, but every candidate the
  // thinning inspects costs a kernel evaluation and potentially an edge, so
  // the expected candidate total (sum of pairs * band bound) is the real
  // workload. Guarded at the same scale as the eager sampler's point cap.
  if (monotone) {
    double expected_candidates = 0.0;
    for (std::size_t a = 0; a < n_bands; ++a) {
      for (std::size_t b = a; b < n_bands; ++b) {
        const double pairs = (a == b) ? 0.5 * static_cast<double>(counts[a]) *
                                            static_cast<double>(counts[a] > 0 ? counts[a] - 1 : 0)
                                      : static_cast<double>(counts[a]) *
                                            static_cast<double>(counts[b]);
        expected_candidates += pairs * eval_W(spec, bounds[a], bounds[b]);
      }
    }
    if (expected_candidates > 1e8) {
      throw CapacityError("sample_graph_banded: expected candidate count " +
                          std::to_string(expected_candidates) + " exceeds capacity 1e8");
    }
  }

  auto eta_of_band = [&](std::size_t band, std::uint64_t i) {
    const double u = u64_to_unit(hash64(seed, kStreamVertexCoord, band, i, 0));
    return bounds[band] + (bounds[band + 1] - bounds[band]) * u;
  };
  auto key_of = [](std::size_t band, std::uint64_t i) {
    return (static_cast<std::uint64_t>(band) << 56) | i;
  };

  std::vector<detail::PendingEdge> edges;
  for (std::size_t a = 0; a < n_bands; ++a) {
    for (std::size_t b = a; b < n_bands; ++b) {
      const double p_bar = monotone ? eval_W(spec, bounds[a], bounds[b]) : 1.0;
      if (!monotone) {
        const detail::u128 pairs = (a == b) ? detail::tri_count(counts[a])
                                            : detail::u128{counts[a]} * counts[b];
        if (pairs > detail::u128{1} << 34) {
          throw CapacityError(
              "sample_graph_banded: non-monotone kernel at a scale requiring kernel bounds");
        }
      }
      CounterRng rng(hash64(seed, kStreamBandPair, a, b));
      detail::thin_band_pair(
          spec, p_bar, counts[a], counts[b], a == b, rng,
          [&](std::uint64_t i) { return eta_of_band(a, i); },
          [&](std::uint64_t j) { return eta_of_band(b, j); },
          [&](std::uint64_t i, std::uint64_t j) {
            std::uint64_t u = key_of(a, i), v = key_of(b, j);
            if (u > v) std::swap(u, v);
            edges.push_back({u, v});
          });
    }
  }
  return detail::assemble_graph(
      t, eta_max, seed, total_points, edges,
      [&](std::uint64_t key) {
        return eta_of_band(static_cast<std::size_t>(key >> 56), key & 0x00ffffffffffffffull);
      },
      [&](std::uint64_t key) {
        const double u =
            u64_to_unit(hash64(seed, kStreamVertexCoord, key >> 56, key & 0x00ffffffffffffffull, 1));
        return t * u;
      });
}

// Truncation level for planted-pair draws: smallest doubling level whose
// neglected witness rate t*int_E^inf W(x,z)W(y,z)dz is at most rel_budget of
// the full rate. Keeps the per-draw latent count t*E small, which is what
// makes 1e5 draws affordable.
inline double planted_eta_max(const GraphexSpec& spec, double x, double y,
                              double rel_budget = 1e-5) {
  if (!(rel_budget > 0.0)) throw ValidationError("planted_eta_max: budget must be positive");
  auto product = [&](double z) { return eval_W(spec, x, z) * eval_W(spec, y, z); };
  const auto opts = QuadratureOptions::split_tolerance(1e-11);
  const double total = integrate_semi_infinite(product, 0.0, opts, 1.0 + std::min(x, y)).value;
  if (!(total > 0.0)) return 1.0;  // degenerate kernel: any level works
  double cap = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double tail = integrate_semi_infinite(product, cap, opts, cap).value;
    if (tail <= rel_budget * total) return cap;
    cap *= 2.0;
  }
  throw NumericError("planted_eta_max: witness rate tail does not meet the budget", 0.0);
}

// Common-neighbor counts of a planted pair (x, y): each draw materializes a
// fresh latent process and counts points adjacent to both plants. Only eta
// coordinates matter, so thetas are never drawn.
inline std::vector<std::uint64_t> sample_planted_pair(const GraphexSpec& spec, double t,
                                                      double eta_max, double x, double y,
                                                      std::uint64_t seed, std::size_t draws) {
  validate_spec(spec);
  if (!(t > 0.0) || !(eta_max > 0.0)) {
    throw ValidationError("sample_planted_pair: t and eta_max must be positive");
  }
  if (x < 0.0 || y < 0.0) throw ValidationError("sample_planted_pair: negative plant coordinate");
  if (x == y) {
    throw ValidationError("sample_planted_pair: coincident plants are a.s. absent from the process");
  }
  std::vector<std::uint64_t> counts;
  counts.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    CounterRng rng(hash64(seed, kStreamPlanted, d));
    const std::uint64_t n = poisson_draw(t * eta_max, rng);
    std::uint64_t common = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const double eta = eta_max * rng.next_unit();
      if (rng.next_unit() >= eval_W(spec, x, eta)) continue;
      if (rng.next_unit() < eval_W(spec, y, eta)) ++common;
    }
    counts.push_back(common);
  }
  return counts;
}

}  // namespace graphex
