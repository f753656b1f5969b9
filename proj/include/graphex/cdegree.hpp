#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphex/errors.hpp"
#include "graphex/graph.hpp"
#include "graphex/graphex_spec.hpp"
#include "graphex/limits.hpp"
#include "graphex/stats.hpp"

// Common-connection statistics. C(i,j) is the number of common neighbors of
// the unordered pair {i,j}; the histogram over pairs with C >= 1 is built by
// wedge enumeration: every vertex z contributes one increment per unordered
// pair of its neighbors. Pairs never co-witnessed have C = 0 and are not
// stored. An optional restriction keeps only pairs whose latent values both
// exceed b_t * epsilon (the witness z is unrestricted).

namespace graphex {

struct Restriction {
  double epsilon = 0.0;
  double b_t = 0.0;
};

struct CDegreeHistogram {
  std::map<std::uint32_t, std::uint64_t> counts;  // k -> pairs with exactly k
  std::uint64_t pairs_positive = 0;
  std::optional<Restriction> restriction;
  double t = 0.0;
  std::uint64_t wedge_increments = 0;
};

// Open-addressing map from packed pair key (i << 32 | j, i < j) to count.
// Key 0 never occurs (j > i >= 0 forces key >= 1), so it marks empty slots.
class PairCountMap {
 public:
  explicit PairCountMap(std::size_t initial_slots = 1u << 16)
      : keys_(round_up(initial_slots)), vals_(keys_.size()), mask_(keys_.size() - 1) {}

  void increment(std::uint64_t key) {
    std::size_t idx = probe(key);
    if (keys_[idx] == 0) {
      if ((size_ + 1) * 10 > keys_.size() * 7) {
        grow();
        idx = probe(key);
      }
      keys_[idx] = key;
      vals_[idx] = 0;
      ++size_;
    }
    ++vals_[idx];
  }

  std::size_t size() const { return size_; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      if (keys_[i] != 0) fn(keys_[i], vals_[i]);
    }
  }

 private:
  static std::size_t round_up(std::size_t n) {
    std::size_t p = 1024;
    while (p < n) p <<= 1;
    return p;
  }

  std::size_t probe(std::uint64_t key) const {
    std::size_t idx = static_cast<std::size_t>(mix64(key)) & mask_;
    while (keys_[idx] != 0 && keys_[idx] != key) idx = (idx + 1) & mask_;
    return idx;
  }

  void grow() {
    std::vector<std::uint64_t> old_keys = std::move(keys_);
    std::vector<std::uint32_t> old_vals = std::move(vals_);
    keys_.assign(old_keys.size() * 2, 0);
    vals_.assign(old_keys.size() * 2, 0);
    mask_ = keys_.size() - 1;
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if (old_keys[i] == 0) continue;
      const std::size_t idx = probe(old_keys[i]);
      keys_[idx] = old_keys[i];
      vals_[idx] = old_vals[i];
    }
  }

  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> vals_;
  std::size_t size_ = 0;
  std::uint64_t mask_;
};

inline CDegreeHistogram count_common(const SparseGraph& g,
                                     std::optional<Restriction> restriction = {},
                                     std::uint64_t max_increments = 10'000'000'000ull) {
  const std::size_t n = g.vertex_count();
  std::vector<char> qualifies(n, 1);
  if (restriction) {
    const double threshold = restriction->b_t * restriction->epsilon;
    for (std::size_t v = 0; v < n; ++v) qualifies[v] = g.eta[v] > threshold ? 1 : 0;
  }

  std::uint64_t planned = 0;
  for (std::size_t z = 0; z < n; ++z) {
    std::uint64_t q = 0;
    for (std::uint32_t nb : g.adj[z]) q += qualifies[nb];
    planned += q * (q - 1) / 2;
    if (planned > max_increments) {
      throw CapacityError("count_common: wedge enumeration needs more than " +
                          std::to_string(max_increments) + " increments");
    }
  }

  PairCountMap map;
  std::vector<std::uint32_t> buf;
  for (std::size_t z = 0; z < n; ++z) {
    buf.clear();
    for (std::uint32_t nb : g.adj[z]) {
      if (qualifies[nb]) buf.push_back(nb);
    }
    for (std::size_t a = 0; a < buf.size(); ++a) {
      const std::uint64_t hi = static_cast<std::uint64_t>(buf[a]) << 32;
      for (std::size_t b = a + 1; b < buf.size(); ++b) {
        map.increment(hi | buf[b]);
      }
    }
  }

  CDegreeHistogram hist;
  hist.restriction = restriction;
  hist.t = g.t;
  hist.wedge_increments = planned;
  map.for_each([&hist](std::uint64_t, std::uint32_t c) {
    ++hist.counts[c];
    ++hist.pairs_positive;
  });
  return hist;
}

inline std::uint64_t n_t_epsilon(const SparseGraph& g, const GraphexSpec& spec,
                                 double epsilon, std::uint32_t k) {
  if (!(epsilon > 0.0)) throw ValidationError("n_t_epsilon: epsilon must be positive");
  if (k < 1) throw ValidationError("n_t_epsilon: k must be >= 1");
  const double b_t = scaling_b(spec, g.t);
  const CDegreeHistogram hist = count_common(g, Restriction{epsilon, b_t});
  const auto it = hist.counts.find(k);
  return it == hist.counts.end() ? 0 : it->second;
}

inline std::vector<std::pair<double, double>> empirical_distribution(
    const CDegreeHistogram& hist) {
  if (hist.pairs_positive == 0) {
    throw ValidationError("empirical_distribution: histogram is empty");
  }
  std::vector<std::pair<double, double>> dist;
  dist.reserve(hist.counts.size());
  const double denom = static_cast<double>(hist.pairs_positive);
  for (const auto& [k, c] : hist.counts) {
    dist.emplace_back(static_cast<double>(k), static_cast<double>(c) / denom);
  }
  return dist;
}

struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::uint32_t k_min = 0, k_max = 0;  // inclusive retained range
  std::size_t n_points = 0;
  double index_estimate() const { return std::fabs(slope); }
};

namespace detail {

// Geometric binning of the support (factor-2 bins). Each bin contributes its
// average probability per integer slot at the geometric mean of its edges.
inline std::vector<std::pair<double, double>> log_bin(
    const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::pair<double, double>> binned;
  double lo = 1.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    const double hi = lo * 2.0;
    double mass = 0.0;
    bool any = false;
    while (i < pts.size() && pts[i].first < hi) {
      mass += pts[i].second;
      any = true;
      ++i;
    }
    if (any) {
      const double width = std::max(1.0, std::floor(hi) - std::ceil(lo));
      binned.emplace_back(std::sqrt(lo * (hi - 1.0)), mass / width);
    }
    lo = hi;
  }
  return binned;
}

}  // namespace detail

inline TailFit fit_tail_index(std::vector<std::pair<double, double>> dist,
                              double r2_target = 0.995, std::size_t min_points = 5,
                              bool log_binning = false) {
  if (!(r2_target > 0.0) || !(r2_target < 1.0)) {
    throw ValidationError("fit_tail_index: r2 target must lie in (0, 1)");
  }
  std::erase_if(dist, [](const auto& p) { return !(p.second > 0.0) || p.first < 1.0; });
  std::sort(dist.begin(), dist.end());
  if (log_binning) dist = detail::log_bin(dist);
  if (dist.size() < min_points) {
    throw ValidationError("fit_tail_index: needs at least " + std::to_string(min_points) +
                          " support points, got " + std::to_string(dist.size()));
  }

  std::vector<double> xs(dist.size()), ys(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    xs[i] = std::log(dist[i].first);
    ys[i] = std::log(dist[i].second);
  }

  double best_r2 = 0.0;
  for (std::size_t m = dist.size();; --m) {
    const LinearFit f = ols_linear(std::span(xs.data(), m), std::span(ys.data(), m));
    best_r2 = std::max(best_r2, f.r2);
    if (f.r2 >= r2_target) {
      TailFit out;
      out.slope = f.slope;
      out.intercept = f.intercept;
      out.r_squared = f.r2;
      out.k_min = static_cast<std::uint32_t>(std::lround(dist.front().first));
      out.k_max = static_cast<std::uint32_t>(std::lround(dist[m - 1].first));
      out.n_points = m;
      return out;
    }
    if (m == min_points) break;
  }
  throw NumericError("fit_tail_index: R2 target " + std::to_string(r2_target) +
                         " not reached; best achieved " + std::to_string(best_r2),
                     1.0 - best_r2);
}

}  // namespace graphex
