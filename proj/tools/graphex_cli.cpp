// Command-line front end: theory queries, graph simulation, common-neighbor
// statistics, tail fitting and the replication experiment harness.
//
// Exit codes: 0 success, 2 configuration / validation, 3 numeric failure,
// 4 capacity guard. Diagnostics go to stderr; data goes to files or stdout.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphex/graphex.hpp"

namespace {

using namespace graphex;

// Family token -> spec. "zero" is a diagnostic kernel (W == 0) accepted by
// the read-only subcommands; simulation of it produces edgeless graphs.
GraphexSpec spec_from_cli(const std::string& family, double alpha) {
  if (family == "zero") {
    return GraphexSpec::custom_symmetric([](double, double) { return 0.0; }, alpha,
                                         /*separable=*/true, /*monotone=*/true);
  }
  GraphexSpec spec;
  spec.family = family_from_name(family);
  spec.alpha = alpha;
  return spec;
}

void print_warnings(const GraphexSpec& spec) {
  for (const std::string& w : validate_spec(spec)) {
    std::cerr << "warning: " << w << "\n";
  }
}

// Endpoint formatting used by `theory bounds`: fixed 4 decimals with
// trailing zeros trimmed (at least one decimal kept), e.g. 1.5, 2.3333.
std::string format_endpoint(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

std::string format_interval(const BoundInterval& b) {
  const bool open = b.kind == BoundKind::kNonSeparableUpperRange;
  std::string s(1, open ? '(' : '[');
  s += format_endpoint(b.lower);
  s += ", ";
  s += format_endpoint(b.upper);
  s += open ? ')' : ']';
  return s;
}

void print_value(const char* name, double v) {
  std::printf("%s = %s\n", name, format_double(v).c_str());
}

int cmd_theory_marginals(const std::string& family, double alpha, const std::string& at,
                         double t) {
  GraphexSpec spec = spec_from_cli(family, alpha);
  print_warnings(spec);
  double x = 0.0;
  std::optional<double> y;
  const auto comma = at.find(',');
  if (comma == std::string::npos) {
    x = detail::parse_double(at, "--at");
  } else {
    x = detail::parse_double(at.substr(0, comma), "--at");
    y = detail::parse_double(at.substr(comma + 1), "--at");
  }
  MarginalEvaluator ev(spec);
  const double yy = y.value_or(x);
  print_value("mu1", ev.mu1(x));
  print_value("mu2", ev.mu2(x, yy));
  LimitFunctions lf = limit_functions(spec);
  print_value("lambda", eval_lambda(lf, x, yy));
  print_value("b_t", scaling_b(spec, t));
  return 0;
}

int cmd_theory_bounds(double alpha, bool separable) {
  std::printf("%s\n", format_interval(bound_interval(alpha, separable)).c_str());
  return 0;
}

int cmd_simulate(const std::string& family, double alpha, double t, std::uint64_t seed,
                 const std::string& out, double eta_max, double budget, double hard_cap) {
  GraphexSpec spec = spec_from_cli(family, alpha);
  print_warnings(spec);
  double level = eta_max;
  if (!(level > 0.0)) {
    MarginalEvaluator ev(spec);
    TruncationChoice choice = choose_eta_max(ev, t, budget, hard_cap);
    level = choice.eta_max;
    if (choice.flagged) {
      std::cerr << "warning: truncation budget unattainable; using hard cap eta_max="
                << format_double(level) << "\n";
    }
  }
  SparseGraph g = sample_graph_banded(spec, t, level, seed);
  write_graph(out, g, spec);
  std::cerr << "wrote " << out << ": " << g.vertex_count() << " vertices, " << g.edge_count
            << " edges (eta_max " << format_double(level) << ")\n";
  return 0;
}

int cmd_cdegree(const std::string& graph_dir, std::optional<double> epsilon,
                std::string out_dir) {
  LoadedGraph loaded = read_graph(graph_dir);
  std::optional<Restriction> restriction;
  if (epsilon) {
    Restriction r;
    r.epsilon = *epsilon;
    r.b_t = scaling_b(loaded.spec, loaded.graph.t);
    restriction = r;
  }
  CDegreeHistogram hist = count_common(loaded.graph, restriction);
  if (out_dir.empty()) out_dir = graph_dir;
  std::filesystem::create_directories(out_dir);
  const auto hist_path = std::filesystem::path(out_dir) / "histogram.csv";
  const auto dist_path = std::filesystem::path(out_dir) / "distribution.csv";
  write_histogram_csv(hist_path, hist);
  write_distribution_csv(dist_path, empirical_distribution(hist));
  std::cerr << "wrote " << hist_path.string() << " and " << dist_path.string() << " ("
            << hist.pairs_positive << " pairs with shared neighbors)\n";
  return 0;
}

int cmd_fit(const std::string& dist_file, double r2, std::size_t min_points,
            bool log_binning) {
  auto dist = read_distribution_csv(dist_file);
  TailFit fit = fit_tail_index(dist, r2, min_points, log_binning);
  std::printf("%s\n", tail_fit_to_json(fit).dump(2).c_str());
  return 0;
}

int cmd_verify_poisson(const std::string& family, double alpha, double t, double x, double y,
                       std::size_t draws, std::uint64_t seed, double eta_max,
                       double rate_budget) {
  GraphexSpec spec = spec_from_cli(family, alpha);
  print_warnings(spec);
  MarginalEvaluator ev(spec);
  const double rate_full = t * ev.mu2(x, y);
  double level = eta_max;
  if (!(level > 0.0)) level = planted_eta_max(spec, x, y, rate_budget);
  auto counts = sample_planted_pair(spec, t, level, x, y, seed, draws);
  PoissonCheck check = verify_poisson(counts, rate_full);
  print_value("rate", check.rate);
  std::printf("draws = %zu\n", check.draws);
  print_value("sample_mean", check.sample_mean);
  print_value("standard_error", check.standard_error);
  print_value("mean_z", check.mean_z);
  print_value("dispersion", check.dispersion);
  print_value("chi_square_p", check.chi_square_p);
  const char* verdict = check.degenerate ? "degenerate-pass"
                        : check.passes() ? "pass"
                                         : "fail";
  std::printf("verdict = %s\n", verdict);
  return check.degenerate || check.passes() ? 0 : 3;
}

int cmd_experiment(const std::string& config_file, std::optional<std::size_t> workers) {
  std::ifstream in(config_file);
  if (!in) throw ValidationError("cannot open config file '" + config_file + "'");
  nlohmann::json j;
  in >> j;
  ExperimentConfig cfg = experiment_config_from_json(j);
  if (workers) cfg.workers = *workers;
  ExperimentReport rep = run_experiment(cfg);
  write_experiment_outputs(cfg, rep);
  std::printf("replications %zu (failed %zu)\n", rep.per_replication.size(), rep.failed);
  std::printf("mean %.3f  sd %.3f  range [%.3f, %.3f]\n", rep.mean, rep.std_dev, rep.min,
              rep.max);
  std::printf("bound %s  coverage %.1f%%  upper-only %.1f%%\n",
              format_interval(rep.bound).c_str(), rep.coverage_pct, rep.coverage_upper_pct);
  std::printf("determinism %016" PRIx64 "\n", rep.determinism_hash);
  if (!cfg.outputs.empty()) std::fprintf(stderr, "outputs written to %s\n", cfg.outputs.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and tail statistics for sparse heavy-tailed random graphs"};
  app.require_subcommand(1);

  std::string family = "sum-power-shifted";
  double alpha = 3.0;
  double t = 1000.0;
  std::uint64_t seed = 1;

  auto* theory = app.add_subcommand("theory", "closed forms, limits and bound intervals");
  theory->require_subcommand(1);

  std::string at = "1";
  auto* marginals = theory->add_subcommand("marginals", "print mu1/mu2/lambda/b(t) at a point");
  marginals->add_option("--spec", family, "kernel family name");
  marginals->add_option("--alpha", alpha, "tail exponent");
  marginals->add_option("--at", at, "evaluation point x or x,y")->required();
  marginals->add_option("--t", t, "horizon for b(t)");

  bool separable = false;
  auto* bounds = theory->add_subcommand("bounds", "tail-index interval for an exponent");
  bounds->add_option("--alpha", alpha, "tail exponent")->required();
  bounds->add_flag("--separable", separable, "separable kernel bounds");

  std::string out_dir;
  double eta_max = 0.0, budget = 0.1, hard_cap = 1e7;
  auto* simulate = app.add_subcommand("simulate", "sample a graph and write it to a directory");
  simulate->add_option("--spec", family, "kernel family name");
  simulate->add_option("--alpha", alpha, "tail exponent");
  simulate->add_option("--t", t, "time horizon");
  simulate->add_option("--seed", seed, "graph seed");
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_option("--eta-max", eta_max, "explicit truncation level (overrides budget)");
  simulate->add_option("--budget", budget, "expected missed edges allowed by truncation");
  simulate->add_option("--hard-cap", hard_cap, "upper limit for the truncation level");

  std::string graph_dir, cd_out;
  double epsilon = -1.0;
  auto* cdegree = app.add_subcommand("cdegree", "common-neighbor histogram of a stored graph");
  cdegree->add_option("--graph", graph_dir, "directory written by simulate")->required();
  cdegree->add_option("--epsilon", epsilon, "restrict pairs to eta > b(t)*epsilon");
  cdegree->add_option("--out", cd_out, "output directory (default: graph directory)");

  std::string dist_file;
  double r2 = 0.995;
  std::size_t min_points = 5;
  bool log_binning = false;
  auto* fit = app.add_subcommand("fit", "tail-index regression on a distribution file");
  fit->add_option("--dist", dist_file, "k,probability CSV")->required();
  fit->add_option("--r2", r2, "target R^2 for the trimmed fit");
  fit->add_option("--min-points", min_points, "minimum points kept");
  fit->add_flag("--log-binning", log_binning, "bin support geometrically before fitting");

  auto* verify = app.add_subcommand("verify", "distributional checks");
  verify->require_subcommand(1);
  double vx = 1.0, vy = 2.0, rate_budget = 1e-5;
  std::size_t draws = 100000;
  auto* vpoisson = verify->add_subcommand("poisson", "planted-pair law vs Poisson(t*mu2)");
  vpoisson->add_option("--spec", family, "kernel family name");
  vpoisson->add_option("--alpha", alpha, "tail exponent");
  vpoisson->add_option("--t", t, "time horizon");
  vpoisson->add_option("--x", vx, "first plant")->required();
  vpoisson->add_option("--y", vy, "second plant")->required();
  vpoisson->add_option("--draws", draws, "number of independent draws");
  vpoisson->add_option("--seed", seed, "draw seed");
  vpoisson->add_option("--eta-max", eta_max, "explicit witness truncation");
  vpoisson->add_option("--rate-budget", rate_budget, "relative witness rate allowed beyond truncation");

  std::string config_file;
  std::size_t workers_opt = 0;
  auto* experiment = app.add_subcommand("experiment", "replication study from a JSON config");
  experiment->add_option("--config", config_file, "experiment config JSON")->required();
  experiment->add_option("--workers", workers_opt, "override worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (marginals->parsed()) return cmd_theory_marginals(family, alpha, at, t);
    if (bounds->parsed()) return cmd_theory_bounds(alpha, separable);
    if (simulate->parsed())
      return cmd_simulate(family, alpha, t, seed, out_dir, eta_max, budget, hard_cap);
    if (cdegree->parsed())
      return cmd_cdegree(graph_dir, epsilon >= 0.0 ? std::optional<double>(epsilon) : std::nullopt,
                         cd_out);
    if (fit->parsed()) return cmd_fit(dist_file, r2, min_points, log_binning);
    if (vpoisson->parsed())
      return cmd_verify_poisson(family, alpha, t, vx, vy, draws, seed, eta_max, rate_budget);
    if (experiment->parsed())
      return cmd_experiment(config_file,
                            workers_opt ? std::optional<std::size_t>(workers_opt) : std::nullopt);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
