#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "graphex/cdegree.hpp"
#include "graphex/errors.hpp"
#include "graphex/graph.hpp"
#include "graphex/graphex_spec.hpp"

// File formats:
//   edges.txt     one "i j" per line, 0-based vertex indices, i < j
//   vertices.txt  one "idx theta eta" per line, 17-significant-digit floats
//   meta.json     spec, horizon, truncation and edge-count sidecar
//   *.csv         "k,count" histograms and "k,prob" distributions
// All writes go through a temp-file-then-rename so readers never observe a
// partial file.

namespace graphex {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw ValidationError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) {
    throw ValidationError(std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) {
    throw ValidationError(std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

inline Family family_from_name(const std::string& name) {
  if (name == "sum-power-shifted") return Family::kSumPowerShifted;
  if (name == "sum-power-stable") return Family::kSumPowerStable;
  if (name == "separable-shifted") return Family::kSeparableShifted;
  throw ValidationError("unknown family '" + name +
                        "' (expected sum-power-shifted, sum-power-stable or separable-shifted)");
}

inline nlohmann::json spec_to_json(const GraphexSpec& spec) {
  if (spec.family == Family::kCustomSeparable || spec.family == Family::kCustomSymmetric) {
    throw ValidationError("custom kernels cannot be serialized to JSON");
  }
  return nlohmann::json{{"family", family_name(spec.family)}, {"alpha", spec.alpha}};
}

inline GraphexSpec spec_from_json(const nlohmann::json& j) {
  if (!j.contains("family") || !j.contains("alpha")) {
    throw ValidationError("spec JSON needs 'family' and 'alpha'");
  }
  GraphexSpec spec;
  spec.family = family_from_name(j.at("family").get<std::string>());
  spec.alpha = j.at("alpha").get<double>();
  validate_spec(spec);
  return spec;
}

inline void write_graph(const std::filesystem::path& dir, const SparseGraph& g,
                        const GraphexSpec& spec) {
  std::filesystem::create_directories(dir);

  std::string edges;
  edges.reserve(g.edge_count * 14);
  for (std::uint32_t u = 0; u < g.vertex_count(); ++u) {
    for (std::uint32_t v : g.adj[u]) {
      if (u < v) {
        edges += std::to_string(u);
        edges += ' ';
        edges += std::to_string(v);
        edges += '\n';
      }
    }
  }
  atomic_write_text(dir / "edges.txt", edges);

  std::string verts;
  verts.reserve(g.vertex_count() * 48);
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    verts += std::to_string(v);
    verts += ' ';
    verts += format_double(g.theta[v]);
    verts += ' ';
    verts += format_double(g.eta[v]);
    verts += '\n';
  }
  atomic_write_text(dir / "vertices.txt", verts);

  nlohmann::json meta{
      {"spec", spec_to_json(spec)},
      {"t", g.t},
      {"eta_max", g.eta_max},
      {"seed", g.seed},
      {"edge_count", g.edge_count},
      {"vertex_count", g.vertex_count()},
      {"total_points", g.total_points},
      {"truncation",
       {{"eta_max", g.truncation.eta_max},
        {"expected_missed_edges", g.truncation.expected_missed_edges},
        {"flagged", g.truncation.flagged},
        {"budget", g.truncation.budget},
        {"hard_cap", g.truncation.hard_cap}}},
  };
  atomic_write_text(dir / "meta.json", meta.dump(2) + "\n");
}

struct LoadedGraph {
  SparseGraph graph;
  GraphexSpec spec;
};

inline LoadedGraph read_graph(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw ValidationError("cannot open " + (dir / "meta.json").string());
  nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, true);

  LoadedGraph out;
  out.spec = spec_from_json(meta.at("spec"));
  out.graph.t = meta.at("t").get<double>();
  out.graph.eta_max = meta.at("eta_max").get<double>();
  out.graph.seed = meta.at("seed").get<std::uint64_t>();
  out.graph.total_points = meta.value("total_points", std::uint64_t{0});
  if (meta.contains("truncation")) {
    const auto& tr = meta.at("truncation");
    out.graph.truncation.eta_max = tr.value("eta_max", 0.0);
    out.graph.truncation.expected_missed_edges = tr.value("expected_missed_edges", 0.0);
    out.graph.truncation.flagged = tr.value("flagged", false);
    out.graph.truncation.budget = tr.value("budget", 0.0);
    out.graph.truncation.hard_cap = tr.value("hard_cap", 0.0);
  }

  std::ifstream vin(dir / "vertices.txt");
  if (!vin) throw ValidationError("cannot open " + (dir / "vertices.txt").string());
  std::string line;
  while (std::getline(vin, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string idx_s, theta_s, eta_s;
    if (!(ls >> idx_s >> theta_s >> eta_s)) {
      throw ValidationError("malformed vertex line: " + line);
    }
    const std::uint64_t idx = detail::parse_u64(idx_s, "vertex index");
    if (idx != out.graph.theta.size()) {
      throw ValidationError("vertex indices must be dense and ascending");
    }
    out.graph.theta.push_back(detail::parse_double(theta_s, "theta"));
    out.graph.eta.push_back(detail::parse_double(eta_s, "eta"));
  }
  out.graph.adj.assign(out.graph.theta.size(), {});

  std::ifstream ein(dir / "edges.txt");
  if (!ein) throw ValidationError("cannot open " + (dir / "edges.txt").string());
  while (std::getline(ein, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a_s, b_s;
    if (!(ls >> a_s >> b_s)) throw ValidationError("malformed edge line: " + line);
    const std::uint64_t a = detail::parse_u64(a_s, "edge endpoint");
    const std::uint64_t b = detail::parse_u64(b_s, "edge endpoint");
    if (a >= b || b >= out.graph.adj.size()) {
      throw ValidationError("edge endpoints must satisfy i < j < vertex count: " + line);
    }
    out.graph.adj[a].push_back(static_cast<std::uint32_t>(b));
    out.graph.adj[b].push_back(static_cast<std::uint32_t>(a));
    ++out.graph.edge_count;
  }
  for (auto& nbrs : out.graph.adj) std::sort(nbrs.begin(), nbrs.end());
  return out;
}

inline void write_histogram_csv(const std::filesystem::path& path,
                                const CDegreeHistogram& hist) {
  std::string body = "k,count\n";
  for (const auto& [k, c] : hist.counts) {
    body += std::to_string(k);
    body += ',';
    body += std::to_string(c);
    body += '\n';
  }
  atomic_write_text(path, body);
}

inline void write_distribution_csv(const std::filesystem::path& path,
                                   const std::vector<std::pair<double, double>>& dist) {
  std::string body = "k,prob\n";
  for (const auto& [k, p] : dist) {
    body += format_double(k);
    body += ',';
    body += format_double(p);
    body += '\n';
  }
  atomic_write_text(path, body);
}

inline std::vector<std::pair<double, double>> read_distribution_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::pair<double, double>> dist;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("malformed csv line: " + line);
    const std::string_view k_s(line.data(), comma);
    const std::string_view p_s(line.data() + comma + 1, line.size() - comma - 1);
    if (first) {
      first = false;
      if (k_s == "k") continue;  // header row optional
    }
    dist.emplace_back(detail::parse_double(k_s, "k"), detail::parse_double(p_s, "probability"));
  }
  return dist;
}

inline nlohmann::json tail_fit_to_json(const TailFit& fit) {
  return nlohmann::json{{"slope", fit.slope},     {"intercept", fit.intercept},
                        {"r2", fit.r_squared},    {"k_min", fit.k_min},
                        {"k_max", fit.k_max},     {"n_points", fit.n_points},
                        {"index_estimate", fit.index_estimate()}};
}

}  // namespace graphex
