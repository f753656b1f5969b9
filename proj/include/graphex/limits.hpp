#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "graphex/errors.hpp"
#include "graphex/graphex_spec.hpp"
#include "graphex/marginals.hpp"
#include "graphex/quadrature.hpp"
#include "graphex/stats.hpp"

// Tail-limit objects of a regularly varying kernel:
//   omega(x,y) = lim_t W(tx, ty) / h(t)          (homogeneous of degree -2a
//                for separable kernels, -a for the sum families)
//   lambda(x,y): the limit of t * mu2(b_t x, b_t y); equals C * omega for
//                separable kernels with C = int U^2, and
//                int omega(x,z) omega(y,z) dz otherwise.
//   b(t): the scaling radius. Separable kernels use the generalized inverse
//         of 1/U at sqrt(t); non-separable kernels solve
//         t * mu2(b,b) = lambda(1,1).
//
// Built-in families use the natural normalizations h(t) = t^(-alpha) (sum
// families) and h(t) = U(t)^2 (separable). Custom symmetric kernels are
// self-normalized so omega(1,1) = 1.

namespace graphex {

struct LimitFunctions {
  double alpha = 0.0;
  bool separable = false;
  double gamma = 0.0;     // index of regular variation of (t b_t)^2-type scaling
  double c_sep = 0.0;     // int U^2 (separable only)
  double lambda11 = 0.0;  // lambda(1,1)
  std::function<double(double, double)> omega;
  std::function<double(double)> h;
  double quad_rel_tol = 1e-9;
};

namespace detail {

inline double stable_k(double alpha) {  // int_0^inf du/(1+u^a)
  return (std::numbers::pi / alpha) / std::sin(std::numbers::pi / alpha);
}

}  // namespace detail

inline double eval_omega(const LimitFunctions& lf, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw ValidationError("omega: coordinates must be positive");
  return lf.omega(x, y);
}

inline double scaling_h(const LimitFunctions& lf, double t) {
  if (!(t > 0.0)) throw ValidationError("scaling_h: t must be positive");
  return lf.h(t);
}

// int_0^inf omega(x,y) dy; finite only for the non-separable families.
inline double omega_bar(const LimitFunctions& lf, double x) {
  if (!(x > 0.0)) throw ValidationError("omega_bar: coordinate must be positive");
  if (lf.separable) {
    throw ValidationError("omega_bar diverges for separable limits");
  }
  auto f = [&](double y) { return lf.omega(x, y); };
  QuadratureResult r =
      integrate_semi_infinite(f, 0.0, QuadratureOptions::pure_relative(lf.quad_rel_tol), x);
  if (!r.converged) throw NumericError("omega_bar: quadrature did not converge", r.error);
  return r.value;
}

inline double eval_lambda(const LimitFunctions& lf, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw ValidationError("lambda: coordinates must be positive");
  if (lf.separable) return lf.c_sep * lf.omega(x, y);
  auto f = [&](double z) { return lf.omega(x, z) * lf.omega(y, z); };
  QuadratureResult r = integrate_semi_infinite(
      f, 0.0, QuadratureOptions::pure_relative(lf.quad_rel_tol), 0.5 * (x + y));
  if (!r.converged) throw NumericError("lambda: quadrature did not converge", r.error);
  return r.value;
}

inline LimitFunctions limit_functions(const GraphexSpec& spec, double quad_rel_tol = 1e-9) {
  validate_spec(spec);
  LimitFunctions lf;
  lf.alpha = spec.alpha;
  lf.separable = is_separable(spec);
  lf.gamma = lf.separable ? 2.0 * spec.alpha : 2.0 * spec.alpha - 1.0;
  lf.quad_rel_tol = quad_rel_tol;
  const double a = spec.alpha;

  switch (spec.family) {
    case Family::kSumPowerShifted:
      lf.omega = [a](double x, double y) { return std::pow(x + y, -a); };
      lf.h = [a](double t) { return std::pow(t, -a); };
      lf.lambda11 = 1.0 / (2.0 * a - 1.0);
      break;
    case Family::kSumPowerStable:
      lf.omega = [a](double x, double y) {
        return 1.0 / (std::pow(x, a) + std::pow(y, a));
      };
      lf.h = [a](double t) { return std::pow(t, -a); };
      lf.lambda11 = detail::stable_k(a) * (a - 1.0) / a;
      break;
    case Family::kSeparableShifted:
      lf.omega = [a](double x, double y) { return std::pow(x * y, -a); };
      lf.h = [a](double t) { return std::pow(1.0 + t, -2.0 * a); };
      lf.c_sep = 1.0 / (2.0 * a - 1.0);
      lf.lambda11 = lf.c_sep;
      break;
    case Family::kCustomSeparable: {
      lf.omega = [a](double x, double y) { return std::pow(x * y, -a); };
      auto u = spec.custom_u;
      lf.h = [u](double t) {
        const double v = u(t);
        return v * v;
      };
      QuadratureResult r = integrate_semi_infinite(
          [&](double z) {
            const double v = u(z);
            return v * v;
          },
          0.0, QuadratureOptions::pure_relative(quad_rel_tol), 1.0);
      if (!r.converged) throw NumericError("limit_functions: int U^2 did not converge", r.error);
      lf.c_sep = r.value;
      lf.lambda11 = lf.c_sep;
      break;
    }
    case Family::kCustomSymmetric: {
      auto w = spec.custom_w;
      double ref = 1e6;
      while (ref > 10.0 && eval_W(spec, ref, ref) < 1e-290) ref /= 100.0;
      const double wref = eval_W(spec, ref, ref);
      if (wref <= 0.0) {
        throw ValidationError("limit_functions: custom kernel vanishes at reference scale");
      }
      lf.omega = [w, ref, wref](double x, double y) { return w(ref * x, ref * y) / wref; };
      lf.h = [w](double t) { return w(t, t); };
      if (lf.separable) {
        // C = int U^2 with U = sqrt(W(z,z))
        QuadratureResult r = integrate_semi_infinite(
            [&](double z) { return eval_W(spec, z, z); }, 0.0,
            QuadratureOptions::pure_relative(quad_rel_tol), 1.0);
        if (!r.converged) {
          throw NumericError("limit_functions: int U^2 did not converge", r.error);
        }
        lf.c_sep = r.value;
        lf.lambda11 = lf.c_sep;
      } else {
        LimitFunctions probe = lf;
        probe.separable = false;
        lf.lambda11 = eval_lambda(probe, 1.0, 1.0);
      }
      break;
    }
  }
  return lf;
}

// Scaling radius b(t).
inline double scaling_b(const GraphexSpec& spec, double t, double rel_tol = 1e-10) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("scaling_b: t must be positive");
  validate_spec(spec);
  const double a = spec.alpha;

  if (spec.family == Family::kSeparableShifted) {
    return std::max(0.0, std::pow(t, 1.0 / (2.0 * a)) - 1.0);
  }
  if (is_separable(spec)) {
    // Generalized inverse of 1/U at sqrt(t).
    auto u_of = [&](double x) {
      return spec.family == Family::kCustomSeparable ? spec.custom_u(x)
                                                     : std::sqrt(eval_W(spec, x, x));
    };
    const double rt = std::sqrt(t);
    if (rt * u_of(0.0) <= 1.0) return 0.0;
    double hi = 1.0;
    while (rt * u_of(hi) > 1.0) {
      hi *= 2.0;
      if (hi > 1e300) throw NumericError("scaling_b: inverse not bracketed");
    }
    auto g = [&](double b) { return rt * u_of(b) - 1.0; };
    return bisect_monotone(g, hi / 2.0 > 1.0 ? hi / 2.0 : 0.0, hi, {rel_tol, 200});
  }

  // Non-separable: root of t * mu2(b,b) = lambda(1,1).
  LimitFunctions lf = limit_functions(spec);
  MarginalEvaluator ev(spec);
  if (spec.family == Family::kCustomSymmetric) ev.set_tolerances(1e-13, 1e-12);
  auto g = [&](double b) { return t * ev.mu2(b, b) - lf.lambda11; };
  if (g(0.0) <= 0.0) return 0.0;
  double hi = 1.0;
  while (g(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("scaling_b: root not bracketed");
  }
  const double lo = hi / 2.0 > 1.0 ? hi / 2.0 : 0.0;
  return bisect_monotone(g, lo, hi, {rel_tol, 200});
}

}  // namespace graphex
