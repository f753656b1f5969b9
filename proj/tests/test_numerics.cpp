#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "graphex/quadrature.hpp"
#include "graphex/rng.hpp"
#include "graphex/stats.hpp"

using namespace graphex;

namespace {

constexpr double kPi = std::numbers::pi;

TEST(Quadrature, SemiInfiniteAntiderivatives) {
  auto opts = QuadratureOptions::split_tolerance(1e-10);
  auto r1 = integrate_semi_infinite([](double z) { return std::pow(1.0 + z, -2.0); }, 0.0, opts);
  EXPECT_TRUE(r1.converged);
  EXPECT_NEAR(r1.value, 1.0, 1e-10);

  auto r2 = integrate_semi_infinite([](double z) { return 1.0 / (1.0 + z * z); }, 0.0, opts);
  EXPECT_TRUE(r2.converged);
  EXPECT_NEAR(r2.value, kPi / 2.0, 1e-10);

  auto r3 = integrate_semi_infinite([](double z) { return std::pow(z, -3.0); }, 1.0, opts);
  EXPECT_TRUE(r3.converged);
  EXPECT_NEAR(r3.value, 0.5, 1e-10);
}

TEST(Quadrature, ErrorEstimatesHonestOnBattery) {
  auto opts = QuadratureOptions::split_tolerance(1e-10);
  struct Case {
    double (*f)(double);
    double lower;
    double exact;
  };
  const Case battery[] = {
      {[](double z) { return std::pow(1.0 + z, -2.0); }, 0.0, 1.0},
      {[](double z) { return 1.0 / (1.0 + z * z); }, 0.0, kPi / 2.0},
      {[](double z) { return std::pow(z, -3.0); }, 1.0, 0.5},
      {[](double z) { return std::exp(-z); }, 0.0, 1.0},
  };
  for (const Case& c : battery) {
    auto r = integrate_semi_infinite(c.f, c.lower, opts);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(std::fabs(r.value - c.exact), std::max(r.error, 1e-14));
    EXPECT_GT(r.evaluations, 0u);
  }
}

TEST(Quadrature, FinitePolynomialExactness) {
  // Gauss-Kronrod nodes integrate low-degree polynomials to machine accuracy
  // on a single pass.
  auto opts = QuadratureOptions::split_tolerance(1e-12);
  auto r = integrate_finite([](double x) { return 5.0 * x * x * x * x; }, -1.0, 2.0, opts);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 33.0, 1e-12);
}

TEST(Quadrature, TwoDimensionalProductForms) {
  // Inner-slice error estimates carry into the outer pass, so the practical
  // tolerance floor for nested integrals sits near 1e-7.
  auto opts = QuadratureOptions::split_tolerance(1e-7);
  auto r1 = integrate_2d_semi_infinite(
      [](double x, double y) { return std::exp(-x - y); }, 0.0, 0.0, opts);
  EXPECT_TRUE(r1.converged);
  EXPECT_NEAR(r1.value, 1.0, 1e-8);

  auto r2 = integrate_2d_semi_infinite(
      [](double x, double y) { return std::pow(x, -2.0) * std::pow(y, -2.0); }, 1.0, 1.0, opts);
  EXPECT_TRUE(r2.converged);
  EXPECT_NEAR(r2.value, 1.0, 1e-8);

  // double integral of (1+x+y)^-3 over the quadrant = 1/2
  auto r3 = integrate_2d_semi_infinite(
      [](double x, double y) { return std::pow(1.0 + x + y, -3.0); }, 0.0, 0.0, opts);
  EXPECT_TRUE(r3.converged);
  EXPECT_NEAR(r3.value, 0.5, 1e-8);
}

TEST(Quadrature, ToleranceValidation) {
  EXPECT_THROW(QuadratureOptions::split_tolerance(0.0), ValidationError);
  EXPECT_THROW(QuadratureOptions::pure_relative(-1.0), ValidationError);
}

TEST(Ols, ExactPowerLawLogLog) {
  const std::vector<double> xs = {std::log(1.0), std::log(2.0), std::log(4.0)};
  const std::vector<double> ys = {std::log(1.0), std::log(0.25), std::log(0.0625)};
  LinearFit fit = ols_linear(xs, ys);
  EXPECT_NEAR(fit.slope, -2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
}

TEST(Ols, RequiresTwoDistinctPoints) {
  const std::vector<double> one = {1.0};
  EXPECT_THROW(ols_linear(one, one), ValidationError);
  const std::vector<double> same_x = {2.0, 2.0, 2.0};
  const std::vector<double> ys = {1.0, 2.0, 3.0};
  EXPECT_THROW(ols_linear(same_x, ys), ValidationError);
}

TEST(Bisection, SquareRootOfTwo) {
  const double root =
      bisect_monotone([](double b) { return b * b - 2.0; }, 1.0, 2.0, {1e-12, 200});
  EXPECT_NEAR(root, std::sqrt(2.0), 1e-11);
}

TEST(Bisection, RequiresSignChange) {
  EXPECT_THROW(bisect_monotone([](double b) { return b * b + 1.0; }, 0.0, 1.0), NumericError);
  EXPECT_THROW(bisect_monotone([](double b) { return b; }, 1.0, 0.5), ValidationError);
}

TEST(ChiSquare, SurvivalSpotValues) {
  // Reference values from an independent implementation of the regularized
  // incomplete gamma function.
  EXPECT_NEAR(chi_square_sf(3.84, 1.0), 0.05004352124870519, 1e-9);
  EXPECT_NEAR(chi_square_sf(10.0, 4.0), 0.04042768199451279, 1e-9);
  EXPECT_NEAR(chi_square_sf(0.5, 2.0), 0.7788007830714049, 1e-9);
  EXPECT_NEAR(chi_square_sf(25.0, 10.0), 0.005345505487134069, 1e-9);
}

TEST(ChiSquare, PoolsSmallBinsAndDegeneratePasses) {
  // Everything pools into one bin: nothing left to test.
  const std::vector<double> obs = {1.0, 0.0, 1.0};
  const std::vector<double> exp_counts = {0.5, 1.0, 0.5};
  ChiSquareResult r = chi_square_gof(obs, exp_counts);
  EXPECT_EQ(r.dof, 0u);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(ChiSquare, PoissonCalibrationRejectRate) {
  // 500 independent trials of 1e5 Poisson(0.625) draws tested against the
  // true law at significance 0.01 should reject about 1% of the time.
  const double lambda = 0.625;
  const std::size_t trials = 500, draws = 100000;
  std::size_t rejects = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    CounterRng rng(hash64(0xca11b7a7e, trial));
    std::vector<double> observed(16, 0.0);
    for (std::size_t d = 0; d < draws; ++d) {
      std::uint64_t k = poisson_draw(lambda, rng);
      if (k >= observed.size()) k = observed.size() - 1;
      observed[static_cast<std::size_t>(k)] += 1.0;
    }
    std::vector<double> expected(observed.size(), 0.0);
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < expected.size(); ++k) {
      expected[k] = static_cast<double>(draws) * poisson_pmf(k, lambda);
      cum += expected[k];
    }
    expected.back() = static_cast<double>(draws) - cum;
    if (chi_square_gof(observed, expected).p_value <= 0.01) ++rejects;
  }
  // Binomial(500, 0.01): mean 5, sd 2.2. Allow a generous band.
  EXPECT_LE(rejects, 14u);
}

TEST(Dispersion, NearOneForPoissonSample) {
  CounterRng rng(42);
  std::vector<double> samples;
  samples.reserve(200000);
  for (std::size_t i = 0; i < 200000; ++i) {
    samples.push_back(static_cast<double>(poisson_draw(3.0, rng)));
  }
  EXPECT_NEAR(dispersion_index(samples), 1.0, 0.02);
}

TEST(PoissonPmf, NormalizesAndMatchesDirectFormula) {
  double total = 0.0;
  for (std::uint64_t k = 0; k < 60; ++k) total += poisson_pmf(k, 7.5);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(poisson_pmf(0, 2.0), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(poisson_pmf(3, 2.0), std::exp(-2.0) * 8.0 / 6.0, 1e-15);
  EXPECT_EQ(poisson_pmf(2, 0.0), 0.0);
  EXPECT_EQ(poisson_pmf(0, 0.0), 1.0);
}

}  // namespace
