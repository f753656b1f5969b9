#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "graphex/cdegree.hpp"
#include "graphex/errors.hpp"
#include "graphex/graph.hpp"
#include "graphex/io.hpp"
#include "graphex/marginals.hpp"
#include "graphex/point_process.hpp"
#include "graphex/rng.hpp"
#include "graphex/samplers.hpp"
#include "graphex/theory.hpp"

// Replication harness for the simulation study: seed r maps to
// hash64(master_seed, r), each replication runs simulate -> count -> fit
// independently, and aggregation is an order-independent fold, so reports
// are identical under any worker count. Fit failures are recorded and
// excluded from aggregates; more than 10% of them aborts the run.

namespace graphex {

struct FitConfig {
  double r2_target = 0.995;
  std::size_t min_points = 5;
};

struct ExperimentConfig {
  GraphexSpec spec;
  double t = 1000.0;
  std::size_t replications = 500;
  std::uint64_t master_seed = 0;
  double missed_edge_budget = 0.1;
  double truncation_hard_cap = 1e7;
  FitConfig fit;
  std::optional<double> epsilon;  // restrict pairs to eta > b_t * epsilon
  std::string outputs;            // directory; empty = no files
  std::size_t workers = 1;
  bool keep_dists = false;
};

struct ReplicationRecord {
  std::size_t rep = 0;  // 1-based
  std::uint64_t seed = 0;
  std::uint64_t edge_count = 0;
  bool fit_ok = false;
  double index_estimate = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  std::uint32_t k_min = 0, k_max = 0;
  std::string error;
  std::vector<std::pair<double, double>> distribution;  // kept on request
};

struct ExperimentReport {
  std::vector<ReplicationRecord> per_replication;
  std::size_t successful = 0;
  std::size_t failed = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std_dev = std::numeric_limits<double>::quiet_NaN();  // NaN when n < 2
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double mean_edges = std::numeric_limits<double>::quiet_NaN();
  BoundInterval bound;
  double coverage_pct = 0.0;        // estimates inside the full interval
  double coverage_upper_pct = 0.0;  // estimates at or below the upper endpoint
  TruncationChoice truncation;
  double b_t = 0.0;  // only set when a restriction is configured
  std::uint64_t determinism_hash = 0;
};

inline void validate_config(const ExperimentConfig& cfg) {
  validate_spec(cfg.spec);
  if (!(cfg.t > 0.0)) throw ValidationError("experiment: t must be positive");
  if (cfg.replications < 1) throw ValidationError("experiment: need at least 1 replication");
  if (!(cfg.fit.r2_target > 0.0) || !(cfg.fit.r2_target < 1.0)) {
    throw ValidationError("experiment: r2 target must lie in (0, 1)");
  }
  if (!(cfg.missed_edge_budget > 0.0)) {
    throw ValidationError("experiment: missed-edge budget must be positive");
  }
  if (cfg.epsilon && !(*cfg.epsilon > 0.0)) {
    throw ValidationError("experiment: epsilon must be positive");
  }
}

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  MarginalEvaluator ev(cfg.spec);
  const TruncationChoice trunc =
      choose_eta_max(ev, cfg.t, cfg.missed_edge_budget, cfg.truncation_hard_cap);

  std::optional<Restriction> restriction;
  double b_t = 0.0;
  if (cfg.epsilon) {
    b_t = scaling_b(cfg.spec, cfg.t);
    restriction = Restriction{*cfg.epsilon, b_t};
  }

  std::vector<ReplicationRecord> records(cfg.replications);
  std::atomic<std::size_t> next{0};
  std::mutex fatal_mu;
  std::exception_ptr fatal;

  auto run_one = [&](std::size_t r0) {
    ReplicationRecord& rec = records[r0];
    rec.rep = r0 + 1;
    rec.seed = hash64(cfg.master_seed, rec.rep);
    SparseGraph g = sample_graph_banded(cfg.spec, cfg.t, trunc.eta_max, rec.seed);
    g.truncation = trunc;
    rec.edge_count = g.edge_count;
    try {
      const CDegreeHistogram hist = count_common(g, restriction);
      const auto dist = empirical_distribution(hist);
      if (cfg.keep_dists) rec.distribution = dist;
      const TailFit fit = fit_tail_index(dist, cfg.fit.r2_target, cfg.fit.min_points);
      rec.fit_ok = true;
      rec.index_estimate = fit.index_estimate();
      rec.r_squared = fit.r_squared;
      rec.k_min = fit.k_min;
      rec.k_max = fit.k_max;
    } catch (const NumericError& e) {
      rec.fit_ok = false;
      rec.error = e.what();
    } catch (const ValidationError& e) {
      // Degenerate histogram (too few support points, or no positive pairs).
      rec.fit_ok = false;
      rec.error = e.what();
    }
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t r0 = next.fetch_add(1);
      if (r0 >= cfg.replications) return;
      try {
        run_one(r0);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, cfg.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  ExperimentReport report;
  report.per_replication = std::move(records);
  report.truncation = trunc;
  report.b_t = b_t;
  report.bound = bound_interval(cfg.spec.alpha, is_separable(cfg.spec));

  double sum = 0.0, sum_sq = 0.0, edge_sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t inside = 0, below_upper = 0;
  for (const ReplicationRecord& rec : report.per_replication) {
    edge_sum += static_cast<double>(rec.edge_count);
    if (!rec.fit_ok) {
      ++report.failed;
      continue;
    }
    ++report.successful;
    sum += rec.index_estimate;
    sum_sq += rec.index_estimate * rec.index_estimate;
    lo = std::min(lo, rec.index_estimate);
    hi = std::max(hi, rec.index_estimate);
    if (report.bound.contains(rec.index_estimate)) ++inside;
    if (rec.index_estimate <= report.bound.upper) ++below_upper;
  }
  report.mean_edges = edge_sum / static_cast<double>(cfg.replications);
  if (report.failed * 10 > cfg.replications) {
    throw NumericError("experiment: " + std::to_string(report.failed) + " of " +
                           std::to_string(cfg.replications) + " fits failed (over 10%)",
                       static_cast<double>(report.failed) /
                           static_cast<double>(cfg.replications));
  }
  if (report.successful > 0) {
    const double n = static_cast<double>(report.successful);
    report.mean = sum / n;
    if (report.successful > 1) {
      const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
      report.std_dev = std::sqrt(var);
    }
    report.min = lo;
    report.max = hi;
  }
  report.coverage_pct = 100.0 * static_cast<double>(inside) /
                        static_cast<double>(cfg.replications);
  report.coverage_upper_pct = 100.0 * static_cast<double>(below_upper) /
                              static_cast<double>(cfg.replications);

  std::uint64_t h = detail::kFnvOffset;
  for (const ReplicationRecord& rec : report.per_replication) {
    h = detail::fnv1a(h, std::to_string(rec.rep));
    h = detail::fnv1a(h, std::to_string(rec.seed));
    h = detail::fnv1a(h, std::to_string(rec.edge_count));
    h = detail::fnv1a(h, rec.fit_ok ? "ok" : "fail");
    h = detail::fnv1a(h, format_double(rec.index_estimate));
    h = detail::fnv1a(h, format_double(rec.r_squared));
    h = detail::fnv1a(h, std::to_string(rec.k_min));
    h = detail::fnv1a(h, std::to_string(rec.k_max));
  }
  report.determinism_hash = h;
  return report;
}

struct MatchedComparison {
  ExperimentReport separable;
  ExperimentReport non_separable;
  double mu1_tail_index = 0.0;
  bool separable_heavier = false;  // separable mean index below non-separable
};

// Side-by-side runs with matched first-marginal tail index: a separable
// kernel at alpha has mu1 index alpha, a sum-power kernel at alpha has mu1
// index alpha - 1, so matching requires alpha_sep = alpha_nonsep - 1.
inline MatchedComparison compare_mu1_matched(const ExperimentConfig& cfg_sep,
                                             const ExperimentConfig& cfg_nonsep) {
  if (!is_separable(cfg_sep.spec)) {
    throw ValidationError("compare_mu1_matched: first config must be separable");
  }
  if (is_separable(cfg_nonsep.spec)) {
    throw ValidationError("compare_mu1_matched: second config must be non-separable");
  }
  const double idx_sep = cfg_sep.spec.alpha;
  const double idx_nonsep = cfg_nonsep.spec.alpha - 1.0;
  if (std::fabs(idx_sep - idx_nonsep) > 1e-12) {
    throw ValidationError("compare_mu1_matched: mu1 tail indices differ (" +
                          std::to_string(idx_sep) + " vs " + std::to_string(idx_nonsep) + ")");
  }
  MatchedComparison cmp;
  cmp.mu1_tail_index = idx_sep;
  cmp.separable = run_experiment(cfg_sep);
  cmp.non_separable = run_experiment(cfg_nonsep);
  cmp.separable_heavier = cmp.separable.mean < cmp.non_separable.mean;
  return cmp;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.spec = spec_from_json(j.contains("spec") ? j.at("spec") : j);
  cfg.t = j.value("t", cfg.t);
  cfg.replications = j.value("replications", cfg.replications);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.missed_edge_budget = j.value("missed_edge_budget", cfg.missed_edge_budget);
  cfg.truncation_hard_cap = j.value("truncation_hard_cap", cfg.truncation_hard_cap);
  if (j.contains("fit")) {
    cfg.fit.r2_target = j.at("fit").value("r2_target", cfg.fit.r2_target);
    cfg.fit.min_points = j.at("fit").value("min_points", cfg.fit.min_points);
  }
  if (j.contains("restriction") && !j.at("restriction").is_null()) {
    cfg.epsilon = j.at("restriction").at("epsilon").get<double>();
  } else if (j.contains("epsilon") && !j.at("epsilon").is_null()) {
    cfg.epsilon = j.at("epsilon").get<double>();
  }
  cfg.outputs = j.value("outputs", cfg.outputs);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.keep_dists = j.value("keep_dists", cfg.keep_dists);
  validate_config(cfg);
  return cfg;
}

inline nlohmann::json report_to_json(const ExperimentConfig& cfg,
                                     const ExperimentReport& rep) {
  auto num_or_null = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json per = nlohmann::json::array();
  for (const ReplicationRecord& r : rep.per_replication) {
    per.push_back({{"rep", r.rep},
                   {"seed", r.seed},
                   {"edges", r.edge_count},
                   {"fit_ok", r.fit_ok},
                   {"index", num_or_null(r.index_estimate)},
                   {"r2", num_or_null(r.r_squared)},
                   {"k_min", r.k_min},
                   {"k_max", r.k_max},
                   {"error", r.error}});
  }
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(rep.determinism_hash));
  nlohmann::json j{
      {"config",
       {{"spec", spec_to_json(cfg.spec)},
        {"t", cfg.t},
        {"replications", cfg.replications},
        {"master_seed", cfg.master_seed},
        {"missed_edge_budget", cfg.missed_edge_budget},
        {"fit", {{"r2_target", cfg.fit.r2_target}, {"min_points", cfg.fit.min_points}}},
        {"epsilon", cfg.epsilon ? nlohmann::json(*cfg.epsilon) : nlohmann::json(nullptr)},
        {"workers", cfg.workers}}},
      {"successful", rep.successful},
      {"failed", rep.failed},
      {"mean", num_or_null(rep.mean)},
      {"std_dev", num_or_null(rep.std_dev)},
      {"range", {num_or_null(rep.min), num_or_null(rep.max)}},
      {"mean_edges", num_or_null(rep.mean_edges)},
      {"bound",
       {{"kind", rep.bound.kind == BoundKind::kSeparableTwoSided ? "separable-two-sided"
                                                                 : "non-separable-upper-range"},
        {"alpha", rep.bound.alpha},
        {"lower", rep.bound.lower},
        {"upper", rep.bound.upper}}},
      {"coverage_pct", rep.coverage_pct},
      {"coverage_upper_pct", rep.coverage_upper_pct},
      {"truncation",
       {{"eta_max", rep.truncation.eta_max},
        {"expected_missed_edges", num_or_null(rep.truncation.expected_missed_edges)},
        {"flagged", rep.truncation.flagged},
        {"budget", num_or_null(rep.truncation.budget)},
        {"hard_cap", rep.truncation.hard_cap}}},
      {"determinism_hash", hash_hex},
      {"per_replication", std::move(per)},
  };
  if (cfg.epsilon) j["b_t"] = rep.b_t;
  return j;
}

inline std::string replications_csv(const ExperimentReport& rep) {
  std::string body = "rep,seed,edges,index,r2,kmin,kmax\n";
  for (const ReplicationRecord& r : rep.per_replication) {
    body += std::to_string(r.rep);
    body += ',';
    body += std::to_string(r.seed);
    body += ',';
    body += std::to_string(r.edge_count);
    body += ',';
    body += r.fit_ok ? format_double(r.index_estimate) : "";
    body += ',';
    body += r.fit_ok ? format_double(r.r_squared) : "";
    body += ',';
    body += std::to_string(r.k_min);
    body += ',';
    body += std::to_string(r.k_max);
    body += '\n';
  }
  return body;
}

// Writes report.json and replications.csv (plus per-replication
// distribution csvs when kept) into cfg.outputs.
inline void write_experiment_outputs(const ExperimentConfig& cfg,
                                     const ExperimentReport& rep) {
  if (cfg.outputs.empty()) return;
  const std::filesystem::path dir(cfg.outputs);
  std::filesystem::create_directories(dir);
  nlohmann::json j = report_to_json(cfg, rep);
  j["timestamp"] = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  atomic_write_text(dir / "report.json", j.dump(2) + "\n");
  atomic_write_text(dir / "replications.csv", replications_csv(rep));
  if (cfg.keep_dists) {
    for (const ReplicationRecord& r : rep.per_replication) {
      if (r.distribution.empty()) continue;
      write_distribution_csv(dir / ("distribution_" + std::to_string(r.rep) + ".csv"),
                             r.distribution);
    }
  }
}

}  // namespace graphex
