#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "graphex/errors.hpp"

namespace graphex {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of y on x. R^2 = 1 - SS_res/SS_tot; a perfectly
// flat response counts as a perfect fit of the constant model.
inline LinearFit ols_linear(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) throw ValidationError("ols_linear: need >= 2 paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ValidationError("ols_linear: degenerate x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

struct BisectOptions {
  double rel_tol = 1e-10;
  std::size_t max_iter = 200;
};

// Root of a continuous monotone g on [lo, hi]; requires a sign change.
template <class G>
double bisect_monotone(G&& g, double lo, double hi, const BisectOptions& opts = {}) {
  if (!(lo < hi)) throw ValidationError("bisect_monotone: requires lo < hi");
  double flo = g(lo);
  double fhi = g(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericError("bisect_monotone: root not bracketed");
  }
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= opts.rel_tol * std::max(1.0, std::fabs(mid))) return mid;
    const double fm = g(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Regularized incomplete gamma P(a,x) via series / continued fraction.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  constexpr double kFpMin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ValidationError("gamma_p: requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  return (x < a + 1.0) ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_contfrac(a, x);
}

inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ValidationError("gamma_q: requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  return (x < a + 1.0) ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_contfrac(a, x);
}

// Survival function of the chi-square distribution.
inline double chi_square_sf(double stat, double dof) {
  if (!(dof > 0.0)) throw ValidationError("chi_square_sf: dof must be positive");
  if (stat <= 0.0) return 1.0;
  return gamma_q(dof / 2.0, stat / 2.0);
}

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t pooled_bins = 0;
};

namespace detail {

// Pool adjacent bins so every expected count reaches the floor. Trailing
// sparse bins merge into a tail bin first; any interior stragglers are then
// folded forward.
inline void pool_bins(std::vector<double>& observed, std::vector<double>& expected,
                      double floor_expected) {
  // Merge from the back until the tail bin is heavy enough.
  while (expected.size() > 1 && expected.back() < floor_expected) {
    expected[expected.size() - 2] += expected.back();
    observed[observed.size() - 2] += observed.back();
    expected.pop_back();
    observed.pop_back();
  }
  std::vector<double> obs_out, exp_out;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= floor_expected || i + 1 == expected.size()) {
      obs_out.push_back(o_acc);
      exp_out.push_back(e_acc);
      o_acc = 0.0;
      e_acc = 0.0;
    }
  }
  // A final underweight group folds back into its predecessor.
  if (exp_out.size() > 1 && exp_out.back() < floor_expected) {
    exp_out[exp_out.size() - 2] += exp_out.back();
    obs_out[obs_out.size() - 2] += obs_out.back();
    exp_out.pop_back();
    obs_out.pop_back();
  }
  observed = std::move(obs_out);
  expected = std::move(exp_out);
}

}  // namespace detail

// Goodness of fit against fully specified expected counts. Bins with
// expected below the floor are pooled toward the tail.
inline ChiSquareResult chi_square_gof(std::span<const double> observed,
                                      std::span<const double> expected,
                                      double floor_expected = 5.0) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw ValidationError("chi_square_gof: need matching nonempty bins");
  }
  std::vector<double> obs(observed.begin(), observed.end());
  std::vector<double> exp(expected.begin(), expected.end());
  for (double e : exp) {
    if (e < 0.0 || !std::isfinite(e)) throw ValidationError("chi_square_gof: bad expected count");
  }
  detail::pool_bins(obs, exp, floor_expected);
  ChiSquareResult res;
  res.pooled_bins = exp.size();
  if (exp.size() < 2) {
    res.dof = 0;
    res.p_value = 1.0;  // nothing left to test: degenerate pass
    return res;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < exp.size(); ++i) {
    if (exp[i] <= 0.0) continue;
    const double d = obs[i] - exp[i];
    stat += d * d / exp[i];
  }
  res.statistic = stat;
  res.dof = exp.size() - 1;
  res.p_value = chi_square_sf(stat, static_cast<double>(res.dof));
  return res;
}

// Two-sample homogeneity test on histograms over a shared set of bins.
inline ChiSquareResult chi_square_two_sample(std::span<const double> h1,
                                             std::span<const double> h2,
                                             double floor_expected = 5.0) {
  const std::size_t bins = std::max(h1.size(), h2.size());
  if (bins == 0) throw ValidationError("chi_square_two_sample: empty histograms");
  std::vector<double> a(bins, 0.0), b(bins, 0.0), pooled(bins, 0.0);
  for (std::size_t i = 0; i < h1.size(); ++i) a[i] = h1[i];
  for (std::size_t i = 0; i < h2.size(); ++i) b[i] = h2[i];
  const double n1 = std::accumulate(a.begin(), a.end(), 0.0);
  const double n2 = std::accumulate(b.begin(), b.end(), 0.0);
  if (n1 <= 0.0 || n2 <= 0.0) throw ValidationError("chi_square_two_sample: empty sample");
  for (std::size_t i = 0; i < bins; ++i) pooled[i] = a[i] + b[i];

  // Pool on the combined expected mass, applying identical merges to both.
  std::vector<std::pair<double, double>> cells;  // (obs1, obs2) per pooled bin
  double acc1 = 0.0, acc2 = 0.0, accp = 0.0;
  const double frac1 = n1 / (n1 + n2);
  std::vector<std::pair<double, double>> merged;
  for (std::size_t i = 0; i < bins; ++i) {
    acc1 += a[i];
    acc2 += b[i];
    accp += pooled[i];
    const double e_min = std::min(frac1, 1.0 - frac1) * accp;
    if (e_min >= floor_expected || i + 1 == bins) {
      merged.emplace_back(acc1, acc2);
      acc1 = acc2 = accp = 0.0;
    }
  }
  if (merged.size() > 1) {
    auto& last = merged.back();
    const double e_last = std::min(frac1, 1.0 - frac1) * (last.first + last.second);
    if (e_last < floor_expected) {
      merged[merged.size() - 2].first += last.first;
      merged[merged.size() - 2].second += last.second;
      merged.pop_back();
    }
  }
  ChiSquareResult res;
  res.pooled_bins = merged.size();
  if (merged.size() < 2) {
    res.dof = 0;
    res.p_value = 1.0;
    return res;
  }
  double stat = 0.0;
  for (const auto& [o1, o2] : merged) {
    const double tot = o1 + o2;
    const double e1 = frac1 * tot;
    const double e2 = (1.0 - frac1) * tot;
    stat += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
  }
  res.statistic = stat;
  res.dof = merged.size() - 1;
  res.p_value = chi_square_sf(stat, static_cast<double>(res.dof));
  return res;
}

// Variance-to-mean ratio with the unbiased variance; NaN when the mean is 0.
inline double dispersion_index(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw ValidationError("dispersion_index: need >= 2 samples");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (mean == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return var / mean;
}

inline double poisson_pmf(std::uint64_t k, double lambda) {
  if (lambda < 0.0) throw ValidationError("poisson_pmf: negative mean");
  if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0));
}

}  // namespace graphex
