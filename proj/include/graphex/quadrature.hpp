#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

#include "graphex/errors.hpp"

// Adaptive Gauss-Kronrod 15(7) quadrature. Semi-infinite integrals share one
// substitution z = lower + scale*u/(1-u); the scale factor is a hint that
// places the integrand's mass in the interior of [0,1] so the first rule
// application already sees it (critical when the integral's magnitude is far
// below the absolute tolerance, e.g. second marginals at arguments ~1e5).
//
// Integrands may return either a plain double or a ValueWithError pair; the
// carried error flows through the rule with absolute weights, which is how
// nested 2-D integration composes inner tolerances conservatively.

namespace graphex {

struct QuadratureResult {
  double value = 0.0;
  double error = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 5e-10;
  double rel_tol = 5e-10;
  std::size_t max_intervals = 4000;

  // The single-knob form: tolerance split evenly between absolute and
  // relative targets.
  static QuadratureOptions split_tolerance(double tol) {
    if (!(tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
    return QuadratureOptions{tol / 2.0, tol / 2.0, 4000};
  }

  static QuadratureOptions pure_relative(double rel) {
    if (!(rel > 0.0)) throw ValidationError("quadrature tolerance must be positive");
    return QuadratureOptions{0.0, rel, 4000};
  }
};

struct ValueWithError {
  double value = 0.0;
  double carried_error = 0.0;
};

namespace detail {

// QUADPACK DQK15 nodes and weights.
inline constexpr double kXgk[8] = {
    0.9914553711208126392068547, 0.9491079123427585245261897,
    0.8648644233597690727897128, 0.7415311855993944398638648,
    0.5860872354676911302941448, 0.4058451513773971669066064,
    0.2077849550078984676006894, 0.0};
inline constexpr double kWgk[8] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992};
inline constexpr double kWg[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020};

template <class F>
ValueWithError eval_point(F&& f, double x) {
  if constexpr (std::is_convertible_v<std::invoke_result_t<F&, double>, double>) {
    return ValueWithError{static_cast<double>(f(x)), 0.0};
  } else {
    return f(x);
  }
}

struct Segment {
  double a, b;
  double value;
  double error;    // reducible rule error
  double carried;  // irreducible error carried in by the integrand
};

template <class F>
Segment gk15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  ValueWithError fc = eval_point(f, center);
  double resg = kWg[3] * fc.value;
  double resk = kWgk[7] * fc.value;
  double resabs = kWgk[7] * std::fabs(fc.value);
  double carried = kWgk[7] * fc.carried_error;
  double fv[15];
  fv[7] = fc.value;

  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    ValueWithError f1 = eval_point(f, center - dx);
    ValueWithError f2 = eval_point(f, center + dx);
    fv[j] = f1.value;
    fv[14 - j] = f2.value;
    const double sum = f1.value + f2.value;
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::fabs(f1.value) + std::fabs(f2.value));
    carried += kWgk[j] * (f1.carried_error + f2.carried_error);
    if (j % 2 == 1) resg += kWg[(j - 1) / 2] * sum;
  }

  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::fabs(fv[7] - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::fabs(fv[j] - reskh) + std::fabs(fv[14 - j] - reskh));
  }

  Segment seg;
  seg.a = a;
  seg.b = b;
  seg.value = resk * half;
  seg.carried = carried * half;
  resabs *= half;
  resasc *= half;
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50) {
    err = std::max(eps50 * resabs, err);
  }
  seg.error = err;
  return seg;
}

struct SegmentWorse {
  bool operator()(const Segment& l, const Segment& r) const { return l.error < r.error; }
};

}  // namespace detail

template <class F>
QuadratureResult integrate_finite(F&& f, double a, double b,
                                  const QuadratureOptions& opts = {}) {
  QuadratureResult result;
  if (!(a < b)) throw ValidationError("integrate_finite: requires a < b");

  std::priority_queue<detail::Segment, std::vector<detail::Segment>, detail::SegmentWorse> heap;
  detail::Segment first = detail::gk15(f, a, b);
  result.evaluations = 15;
  double total_value = first.value;
  double total_error = first.error;
  double total_carried = first.carried;
  heap.push(first);

  auto target = [&]() {
    return opts.abs_tol + opts.rel_tol * std::fabs(total_value);
  };

  while (true) {
    if (!std::isfinite(total_value)) {
      result.value = total_value;
      result.error = std::numeric_limits<double>::infinity();
      return result;
    }
    if (total_error + total_carried <= target()) {
      result.converged = true;
      break;
    }
    if (heap.size() >= opts.max_intervals) break;
    // Further refinement cannot push the total below the carried floor.
    if (total_error <= 0.01 * total_carried) break;

    detail::Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) break;  // interval width exhausted
    heap.pop();
    total_value -= worst.value;
    total_error -= worst.error;
    total_carried -= worst.carried;

    detail::Segment left = detail::gk15(f, worst.a, mid);
    detail::Segment right = detail::gk15(f, mid, worst.b);
    result.evaluations += 30;
    total_value += left.value + right.value;
    total_error += left.error + right.error;
    total_carried += left.carried + right.carried;
    heap.push(left);
    heap.push(right);
  }

  result.value = total_value;
  result.error = total_error + total_carried;
  result.converged = result.converged || (result.error <= target());
  return result;
}

// Integral over [lower, infinity). `scale` stretches the substitution so the
// mass of the transformed integrand sits mid-interval.
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double lower,
                                         const QuadratureOptions& opts = {},
                                         double scale = 1.0) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("integrate_semi_infinite: scale must be positive and finite");
  }
  if (!std::isfinite(lower)) {
    throw ValidationError("integrate_semi_infinite: lower limit must be finite");
  }
  auto g = [&f, lower, scale](double u) {
    const double omu = 1.0 - u;
    if (omu <= 1e-280) {
      return ValueWithError{0.0, 0.0};  // integrable tails have vanished long before this
    }
    const double z = lower + scale * u / omu;
    const double jac = scale / (omu * omu);
    ValueWithError fv = detail::eval_point(f, z);
    return ValueWithError{fv.value * jac, fv.carried_error * jac};
  };
  return integrate_finite(g, 0.0, 1.0, opts);
}

// Iterated 2-D integral over [lower_x, inf) x [lower_y, inf). The inner
// integral runs at a tenth of the outer tolerance and its error estimate is
// carried through the outer rule.
template <class F2>
QuadratureResult integrate_2d_semi_infinite(F2&& f, double lower_x, double lower_y,
                                            const QuadratureOptions& opts = {},
                                            double scale_x = 1.0, double scale_y = 1.0) {
  QuadratureOptions inner = opts;
  inner.abs_tol = opts.abs_tol / 10.0;
  inner.rel_tol = opts.rel_tol / 10.0;

  bool inner_converged = true;
  std::size_t inner_evals = 0;
  auto outer_integrand = [&](double x) {
    auto slice = [&f, x](double y) { return f(x, y); };
    QuadratureResult r = integrate_semi_infinite(slice, lower_y, inner, scale_y);
    inner_converged = inner_converged && r.converged;
    inner_evals += r.evaluations;
    return ValueWithError{r.value, r.error};
  };
  QuadratureResult outer = integrate_semi_infinite(outer_integrand, lower_x, opts, scale_x);
  outer.evaluations += inner_evals;
  outer.converged = outer.converged && inner_converged;
  return outer;
}

}  // namespace graphex
