#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "coxsplit/errors.hpp"

namespace coxsplit {

namespace detail {

inline void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(who) + ": argument must be finite");
  }
}

}  // namespace detail

/// Standard normal density.
inline double normal_pdf(double x) {
  detail::require_finite(x, "normal_pdf");
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal distribution function. Computed through erfc so that the
/// lower tail keeps full relative precision (Phi(-8) ~ 6e-16).
inline double normal_cdf(double x) {
  detail::require_finite(x, "normal_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Inverse of normal_cdf. The critical value k*_alpha with Phi(-k) = alpha is
/// -normal_quantile(alpha).
inline double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("normal_quantile: probability must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
}

/// Finite integration window standing in for the real line.
struct QuadratureSpec {
  double lower = -10.0;
  double upper = 10.0;
  double abs_tolerance = 1e-10;
  // Maximum bisection depth of the adaptive Gauss-Kronrod scheme.
  unsigned max_depth = 20;

  void validate() const {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
      throw DomainError("QuadratureSpec: need finite lower < upper");
    }
    if (!(abs_tolerance > 0.0)) {
      throw DomainError("QuadratureSpec: abs_tolerance must be positive");
    }
  }
};

/// Adaptive 15-point Gauss-Kronrod integration of f over [lower, upper].
///
/// The tolerance is absolute: the interval is bisected until the Kronrod
/// error estimate is below spec.abs_tolerance. Throws NumericalError (with the
/// achieved estimate) when the depth budget runs out first.
template <typename F>
  requires std::invocable<F&, double> &&
           std::convertible_to<std::invoke_result_t<F&, double>, double>
double integrate(F&& f, const QuadratureSpec& spec) {
  spec.validate();
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto g = [&f](double v) -> double { return static_cast<double>(f(v)); };

  // Boost stops on error <= tol * L1; scale by a coarse L1 so the criterion
  // becomes absolute.
  double coarse_l1 = 0.0;
  Rule::integrate(g, spec.lower, spec.upper, 0, 0.0, nullptr, &coarse_l1);
  const double rel_tol = spec.abs_tolerance / std::max(coarse_l1, 1.0) / 4.0;

  double error = 0.0;
  double l1 = 0.0;
  const double value =
      Rule::integrate(g, spec.lower, spec.upper, spec.max_depth, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > spec.abs_tolerance) {
    throw NumericalError("integrate: tolerance not reached within node budget", error);
  }
  return value;
}

}  // namespace coxsplit
