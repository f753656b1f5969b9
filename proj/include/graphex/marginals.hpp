#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "graphex/errors.hpp"
#include "graphex/graphex_spec.hpp"
#include "graphex/quadrature.hpp"

// Marginals of a graphon kernel:
//   mu1(x)      = int_0^inf W(x,z) dz
//   mu2(x,y)    = int_0^inf W(x,z) W(y,z) dz
//   mu_d(xs)    = int_0^inf prod_i W(xs_i, z) dz
// Closed forms are used where the family admits them; everything falls back
// to adaptive quadrature, which is also exposed directly so the two routes
// can be cross-checked.

namespace graphex {

enum class EvalMode { kAuto, kClosedForm, kQuadrature };

namespace detail {

// int_0^inf (1+u^a)^(-d) du = Gamma(1/a) Gamma(d - 1/a) / (a Gamma(d))
inline double stable_profile_integral(double alpha, double d) {
  if (!(d * alpha > 1.0)) return std::numeric_limits<double>::infinity();
  return std::exp(std::lgamma(1.0 / alpha) + std::lgamma(d - 1.0 / alpha) - std::lgamma(d)) /
         alpha;
}

inline bool nearly_equal(double x, double y) {
  return std::fabs(x - y) <= 1e-12 * (1.0 + std::fabs(x) + std::fabs(y));
}

}  // namespace detail

class MarginalEvaluator {
public:
  explicit MarginalEvaluator(GraphexSpec spec, double quadrature_tolerance = 1e-9,
                             EvalMode mode = EvalMode::kAuto)
      : spec_(std::move(spec)),
        opts_(QuadratureOptions::split_tolerance(quadrature_tolerance)),
        mode_(mode) {
    validate_spec(spec_);
    if (spec_.family == Family::kCustomSeparable) {
      u_int_ = factor_integral(1.0);
      u2_int_ = factor_integral(2.0);
    }
  }

  const GraphexSpec& spec() const noexcept { return spec_; }
  EvalMode mode() const noexcept { return mode_; }

  void set_tolerances(double abs_tol, double rel_tol) {
    if (abs_tol < 0.0 || !(rel_tol >= 0.0) || (abs_tol == 0.0 && rel_tol == 0.0)) {
      throw ValidationError("set_tolerances: need nonnegative tolerances, not both zero");
    }
    opts_.abs_tol = abs_tol;
    opts_.rel_tol = rel_tol;
  }

  double mu1(double x) const {
    check_coord(x);
    if (use_closed()) {
      double v;
      if (closed_mu1(x, v)) return v;
      require_closed("mu1");
    }
    return integrate([this, x](double z) { return eval_W(spec_, x, z); }, 0.0, 1.0 + x, "mu1");
  }

  double mu2(double x, double y) const {
    check_coord(x);
    check_coord(y);
    if (use_closed()) {
      double v;
      if (closed_mu2(x, y, v)) return v;
      require_closed("mu2");
    }
    return integrate(
        [this, x, y](double z) { return eval_W(spec_, x, z) * eval_W(spec_, y, z); }, 0.0,
        1.0 + std::min(x, y), "mu2");
  }

  double mu_d(std::span<const double> xs) const {
    if (xs.size() < 2) throw ValidationError("mu_d: need at least two coordinates");
    double mn = std::numeric_limits<double>::infinity();
    for (double x : xs) {
      check_coord(x);
      mn = std::min(mn, x);
    }
    if (use_closed()) {
      double v;
      if (closed_mu_d(xs, v)) return v;
      require_closed("mu_d");
    }
    return integrate(
        [this, xs](double z) {
          double p = 1.0;
          for (double x : xs) p *= eval_W(spec_, x, z);
          return p;
        },
        0.0, 1.0 + mn, "mu_d");
  }

  // int int W = int mu1
  double w_bar() const {
    if (use_closed()) {
      double v;
      if (closed_w_bar(v)) return v;
      require_closed("w_bar");
    }
    return integrate([this](double x) { return mu1_quadrature(x); }, 0.0, 1.0, "w_bar");
  }

  // int_eta^inf mu1(y) dy, the expected-missed-edge kernel for truncation.
  // Returns +inf when the family is known to have a divergent tail.
  double mu1_tail(double eta) const {
    check_coord(eta);
    if (use_closed()) {
      double v;
      if (closed_mu1_tail(eta, v)) return v;
      require_closed("mu1_tail");
    }
    if (known_divergent_tail()) return std::numeric_limits<double>::infinity();
    return integrate([this](double y) { return mu1(y); }, eta, 1.0 + eta, "mu1_tail");
  }

  bool known_divergent_tail() const {
    return (spec_.family == Family::kSumPowerShifted ||
            spec_.family == Family::kSumPowerStable) &&
           spec_.alpha <= 2.0;
  }

  // Quadrature route regardless of mode (for closed-vs-quadrature checks).
  double mu1_quadrature(double x) const {
    check_coord(x);
    return integrate([this, x](double z) { return eval_W(spec_, x, z); }, 0.0, 1.0 + x, "mu1");
  }
  double mu2_quadrature(double x, double y) const {
    check_coord(x);
    check_coord(y);
    return integrate(
        [this, x, y](double z) { return eval_W(spec_, x, z) * eval_W(spec_, y, z); }, 0.0,
        1.0 + std::min(x, y), "mu2");
  }

private:
  void check_coord(double x) const {
    if (x < 0.0 || !std::isfinite(x)) throw ValidationError("marginal: coordinate must be finite and >= 0");
  }

  bool use_closed() const noexcept { return mode_ != EvalMode::kQuadrature; }

  void require_closed(const char* op) const {
    if (mode_ == EvalMode::kClosedForm) {
      throw ValidationError(std::string("no closed form for ") + op + " on family " +
                            family_name(spec_.family));
    }
  }

  template <class F>
  double integrate(F&& f, double lower, double scale, const char* op) const {
    QuadratureResult r = integrate_semi_infinite(f, lower, opts_, scale);
    if (!r.converged) {
      throw NumericError(std::string(op) + ": quadrature did not converge", r.error);
    }
    return r.value;
  }

  double factor_integral(double power) const {
    return integrate(
        [this, power](double z) { return std::pow(spec_.custom_u(z), power); }, 0.0, 1.0,
        "factor_integral");
  }

  bool closed_mu1(double x, double& out) const {
    const double a = spec_.alpha;
    switch (spec_.family) {
      case Family::kSumPowerShifted:
        out = std::pow(1.0 + x, 1.0 - a) / (a - 1.0);
        return true;
      case Family::kSumPowerStable:
        out = detail::stable_profile_integral(a, 1.0) *
              std::pow(1.0 + std::pow(x, a), (1.0 - a) / a);
        return true;
      case Family::kSeparableShifted:
        out = std::pow(1.0 + x, -a) / (a - 1.0);
        return true;
      case Family::kCustomSeparable:
        out = spec_.custom_u(x) * u_int_;
        return true;
      default:
        return false;
    }
  }

  bool closed_mu2(double x, double y, double& out) const {
    const double a = spec_.alpha;
    switch (spec_.family) {
      case Family::kSumPowerShifted:
        if (detail::nearly_equal(x, y)) {
          out = std::pow(1.0 + x, 1.0 - 2.0 * a) / (2.0 * a - 1.0);
          return true;
        }
        return false;
      case Family::kSumPowerStable:
        if (a == 2.0) {
          const double ax = std::sqrt(1.0 + x * x);
          const double by = std::sqrt(1.0 + y * y);
          out = std::numbers::pi / (2.0 * ax * by * (ax + by));
          return true;
        }
        if (detail::nearly_equal(x, y)) {
          out = detail::stable_profile_integral(a, 2.0) *
                std::pow(1.0 + std::pow(x, a), 1.0 / a - 2.0);
          return true;
        }
        return false;
      case Family::kSeparableShifted:
        out = std::pow((1.0 + x) * (1.0 + y), -a) / (2.0 * a - 1.0);
        return true;
      case Family::kCustomSeparable:
        out = spec_.custom_u(x) * spec_.custom_u(y) * u2_int_;
        return true;
      default:
        return false;
    }
  }

  bool closed_mu_d(std::span<const double> xs, double& out) const {
    const double a = spec_.alpha;
    const double d = static_cast<double>(xs.size());
    const bool all_equal = std::all_of(xs.begin(), xs.end(), [&](double v) {
      return detail::nearly_equal(v, xs.front());
    });
    switch (spec_.family) {
      case Family::kSumPowerShifted:
        if (!all_equal) return false;
        out = std::pow(1.0 + xs.front(), 1.0 - d * a) / (d * a - 1.0);
        return true;
      case Family::kSumPowerStable:
        if (!all_equal) return false;
        out = detail::stable_profile_integral(a, d) *
              std::pow(1.0 + std::pow(xs.front(), a), 1.0 / a - d);
        return true;
      case Family::kSeparableShifted: {
        double prod = 1.0;
        for (double x : xs) prod *= std::pow(1.0 + x, -a);
        out = prod / (d * a - 1.0);
        return true;
      }
      case Family::kCustomSeparable: {
        double prod = 1.0;
        for (double x : xs) prod *= spec_.custom_u(x);
        out = prod * factor_integral(d);
        return true;
      }
      default:
        return false;
    }
  }

  bool closed_w_bar(double& out) const {
    const double a = spec_.alpha;
    switch (spec_.family) {
      case Family::kSumPowerShifted:
        out = (a > 2.0) ? 1.0 / ((a - 1.0) * (a - 2.0))
                        : std::numeric_limits<double>::infinity();
        return true;
      case Family::kSumPowerStable: {
        if (a <= 2.0) {
          out = std::numeric_limits<double>::infinity();
          return true;
        }
        // int (1+x^a)^((1-a)/a) dx via the Beta integral
        const double b = (a - 1.0) / a;
        const double second =
            std::exp(std::lgamma(1.0 / a) + std::lgamma(b - 1.0 / a) - std::lgamma(b)) / a;
        out = detail::stable_profile_integral(a, 1.0) * second;
        return true;
      }
      case Family::kSeparableShifted:
        out = 1.0 / ((a - 1.0) * (a - 1.0));
        return true;
      case Family::kCustomSeparable:
        out = u_int_ * u_int_;
        return true;
      default:
        return false;
    }
  }

  bool closed_mu1_tail(double eta, double& out) const {
    const double a = spec_.alpha;
    switch (spec_.family) {
      case Family::kSumPowerShifted:
        out = (a > 2.0) ? std::pow(1.0 + eta, 2.0 - a) / ((a - 1.0) * (a - 2.0))
                        : std::numeric_limits<double>::infinity();
        return true;
      case Family::kSeparableShifted:
        out = std::pow(1.0 + eta, 1.0 - a) / ((a - 1.0) * (a - 1.0));
        return true;
      default:
        return false;
    }
  }

  GraphexSpec spec_;
  QuadratureOptions opts_;
  EvalMode mode_;
  double u_int_ = 0.0;   // custom separable: int U
  double u2_int_ = 0.0;  // custom separable: int U^2
};

}  // namespace graphex
