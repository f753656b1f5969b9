#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "graphex/errors.hpp"
#include "graphex/limits.hpp"
#include "graphex/marginals.hpp"
#include "graphex/quadrature.hpp"
#include "graphex/rng.hpp"

// Theoretical targets for the simulation study: tail-index bound intervals,
// the limiting restricted-pair-count integral, its finite-horizon analogue,
// and a probe-based diagnostic for the fourth-moment domination condition.

namespace graphex {

enum class BoundKind {
  kSeparableTwoSided,        // [1 + 1/a, max(3/2 + 1/a, 1 + 2/a)]
  kNonSeparableUpperRange,   // (1 + 2/(2a-1), 1 + 4/a)
};

struct BoundInterval {
  double lower = 0.0;
  double upper = 0.0;
  BoundKind kind = BoundKind::kSeparableTwoSided;
  double alpha = 0.0;

  // Coverage scoring treats both kinds as closed intervals at 3-decimal
  // reporting precision: an estimate that rounds onto an endpoint counts as
  // covered.
  bool contains(double v) const { return v >= lower - 5e-4 && v <= upper + 5e-4; }
};

inline BoundInterval bound_interval(double alpha, bool separable) {
  BoundInterval b;
  b.alpha = alpha;
  if (separable) {
    if (!(alpha > 1.0)) {
      throw ValidationError("bound_interval: separable bounds need alpha > 1");
    }
    b.kind = BoundKind::kSeparableTwoSided;
    b.lower = 1.0 + 1.0 / alpha;
    b.upper = std::max(1.5 + 1.0 / alpha, 1.0 + 2.0 / alpha);
  } else {
    // alpha = 2 is admitted as the boundary case: both endpoint formulas stay
    // finite there even though the mean kernel mass diverges.
    if (!(alpha >= 2.0)) {
      throw ValidationError("bound_interval: non-separable bounds need alpha >= 2");
    }
    b.kind = BoundKind::kNonSeparableUpperRange;
    b.lower = 1.0 + 2.0 / (2.0 * alpha - 1.0);
    b.upper = 1.0 + 4.0 / alpha;
  }
  return b;
}

namespace detail {

// lam^k e^(-lam) / k! in log space; exact 0 at lam = 0 for k >= 1.
inline double poisson_weight(double lam, unsigned k) {
  if (!(lam > 0.0)) return 0.0;
  return std::exp(k * std::log(lam) - lam - std::lgamma(k + 1.0));
}

}  // namespace detail

// Limit of the scaled restricted pair count over ordered pairs:
//   (1/k!) int_eps^inf int_eps^inf lambda(u,v)^k exp(-lambda(u,v)) du dv.
inline double limit_nk(const LimitFunctions& lf, double epsilon, unsigned k,
                       double rel_tol = 1e-6) {
  if (!(epsilon > 0.0)) throw ValidationError("limit_nk: epsilon must be positive");
  if (k < 1) throw ValidationError("limit_nk: k must be >= 1");
  auto f = [&lf, k](double u, double v) {
    return detail::poisson_weight(eval_lambda(lf, u, v), k);
  };
  const double scale = 1.0 + epsilon;
  const QuadratureResult r = integrate_2d_semi_infinite(
      f, epsilon, epsilon, QuadratureOptions::pure_relative(rel_tol), scale, scale);
  if (!r.converged) {
    throw NumericError("limit_nk: quadrature did not converge (error " +
                           std::to_string(r.error) + ")",
                       r.error);
  }
  return r.value;
}

// Finite-horizon expectation over ordered pairs:
//   t^2 int int_{(b_t eps, inf)^2} (t mu2)^k exp(-t mu2) / k! dx dy.
// Divide by (t b_t)^2 to compare against limit_nk.
inline double expected_nk_finite_t(const MarginalEvaluator& ev, double t, double epsilon,
                                   unsigned k, double b_t, double rel_tol = 1e-6) {
  if (!(t > 0.0)) throw ValidationError("expected_nk_finite_t: t must be positive");
  if (!(epsilon > 0.0)) throw ValidationError("expected_nk_finite_t: epsilon must be positive");
  if (!(b_t > 0.0)) throw ValidationError("expected_nk_finite_t: b_t must be positive");
  if (k < 1) throw ValidationError("expected_nk_finite_t: k must be >= 1");
  auto f = [&ev, t, k](double x, double y) {
    return detail::poisson_weight(t * ev.mu2(x, y), k);
  };
  const double lower = b_t * epsilon;
  const double scale = 1.0 + lower;
  const QuadratureResult r = integrate_2d_semi_infinite(
      f, lower, lower, QuadratureOptions::pure_relative(rel_tol), scale, scale);
  if (!r.converged) {
    throw NumericError("expected_nk_finite_t: quadrature did not converge (error " +
                           std::to_string(r.error) + ")",
                       r.error);
  }
  return t * t * r.value;
}

struct Mu4ScanResult {
  double sup_ratio = 0.0;
  std::array<double, 4> argmax{0.0, 0.0, 0.0, 0.0};
  double box_lo = 0.0, box_hi = 0.0;
  std::size_t n_probes = 0;
  double q = 0.0;
};

// Empirical supremum of mu4(x1..x4) / (mu2(x1,x2) mu2(x3,x4))^q over
// log-uniform quadruples in [box_lo, box_hi]^4. A lower bound on the
// domination constant, never a proof of its finiteness.
inline Mu4ScanResult mu4_condition_scan(const MarginalEvaluator& ev, double q,
                                        std::size_t n_probes, double box_lo = 1e-2,
                                        double box_hi = 1e2,
                                        std::uint64_t seed = 0x6d753473636e) {
  if (!(q > 0.5) || !(q <= 1.0)) {
    throw ValidationError("mu4_condition_scan: q must lie in (1/2, 1]");
  }
  if (!(box_lo > 0.0) || !(box_hi > box_lo)) {
    throw ValidationError("mu4_condition_scan: bad probe box");
  }
  if (n_probes == 0) throw ValidationError("mu4_condition_scan: need at least one probe");

  Mu4ScanResult res;
  res.box_lo = box_lo;
  res.box_hi = box_hi;
  res.n_probes = n_probes;
  res.q = q;

  CounterRng rng(hash64(seed, kStreamProbe));
  const double log_span = std::log(box_hi / box_lo);
  for (std::size_t p = 0; p < n_probes; ++p) {
    std::array<double, 4> xs;
    for (double& x : xs) x = box_lo * std::exp(log_span * rng.next_unit());
    const double den = ev.mu2(xs[0], xs[1]) * ev.mu2(xs[2], xs[3]);
    if (!(den > 0.0)) continue;
    const double ratio = ev.mu_d(xs) / std::pow(den, q);
    if (ratio > res.sup_ratio) {
      res.sup_ratio = ratio;
      res.argmax = xs;
    }
  }
  return res;
}

}  // namespace graphex
