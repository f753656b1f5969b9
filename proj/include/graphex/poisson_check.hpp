#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "graphex/errors.hpp"
#include "graphex/stats.hpp"

// Goodness-of-fit of planted-pair common-neighbor draws against the
// predicted Poisson(rate) law: sample mean vs rate in standard-error units,
// variance/mean dispersion, and a chi-square test on the binned counts.

namespace graphex {

struct PoissonCheck {
  double rate = 0.0;
  std::size_t draws = 0;
  double sample_mean = 0.0;
  double standard_error = 0.0;   // of the sample mean under the Poisson model
  double mean_z = 0.0;           // (sample_mean - rate) / standard_error
  double dispersion = 1.0;       // sample variance / sample mean
  double chi_square_p = 1.0;
  bool degenerate = false;       // rate == 0 and every draw was 0

  bool passes(double significance = 0.01, double mean_z_max = 3.0,
              double dispersion_lo = 0.97, double dispersion_hi = 1.03) const {
    if (degenerate) return true;
    return std::fabs(mean_z) <= mean_z_max && dispersion >= dispersion_lo &&
           dispersion <= dispersion_hi && chi_square_p > significance;
  }
};

inline PoissonCheck verify_poisson(std::span<const std::uint64_t> counts, double rate) {
  if (counts.empty()) throw ValidationError("verify_poisson: no draws");
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw ValidationError("verify_poisson: rate must be finite and nonnegative");
  }
  PoissonCheck out;
  out.rate = rate;
  out.draws = counts.size();
  const double n = static_cast<double>(counts.size());

  std::uint64_t max_k = 0;
  double sum = 0.0;
  for (std::uint64_t c : counts) {
    sum += static_cast<double>(c);
    max_k = std::max(max_k, c);
  }
  out.sample_mean = sum / n;

  if (rate == 0.0) {
    out.degenerate = max_k == 0;
    out.standard_error = 0.0;
    out.mean_z = max_k == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    out.dispersion = max_k == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    out.chi_square_p = max_k == 0 ? 1.0 : 0.0;
    return out;
  }

  out.standard_error = std::sqrt(rate / n);
  out.mean_z = (out.sample_mean - rate) / out.standard_error;

  double ss = 0.0;
  for (std::uint64_t c : counts) {
    const double d = static_cast<double>(c) - out.sample_mean;
    ss += d * d;
  }
  const double var = ss / (n - 1.0);
  out.dispersion = out.sample_mean > 0.0 ? var / out.sample_mean : 1.0;

  std::vector<double> observed(static_cast<std::size_t>(max_k) + 1, 0.0);
  for (std::uint64_t c : counts) observed[static_cast<std::size_t>(c)] += 1.0;
  std::vector<double> expected(observed.size());
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < expected.size(); ++k) {
    expected[k] = n * poisson_pmf(k, rate);
    cum += expected[k];
  }
  expected.back() = std::max(0.0, n - cum);  // everything at or beyond max_k
  out.chi_square_p = chi_square_gof(observed, expected).p_value;
  return out;
}

}  // namespace graphex
