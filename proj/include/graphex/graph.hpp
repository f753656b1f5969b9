#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "graphex/errors.hpp"
#include "graphex/point_process.hpp"

namespace graphex {

// Simulated graph. Only non-isolated vertices are materialized: every
// statistic downstream (degrees, common-neighbor counts, restricted pair
// counts) is blind to isolated points, whose latent count is kept as a
// scalar.
struct SparseGraph {
  double t = 0.0;
  double eta_max = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> theta;
  std::vector<double> eta;
  std::vector<std::vector<std::uint32_t>> adj;
  std::uint64_t edge_count = 0;
  std::uint64_t total_points = 0;
  TruncationChoice truncation;

  std::size_t vertex_count() const noexcept { return eta.size(); }
};

inline std::vector<std::uint64_t> degree_histogram(const SparseGraph& g) {
  std::size_t max_deg = 0;
  for (const auto& nbrs : g.adj) max_deg = std::max(max_deg, nbrs.size());
  std::vector<std::uint64_t> hist(max_deg + 1, 0);
  for (const auto& nbrs : g.adj) ++hist[nbrs.size()];
  return hist;
}

}  // namespace graphex
