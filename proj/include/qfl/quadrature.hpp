/**
 * @file quadrature.hpp
 * @brief Adaptive Gauss-Kronrod integration with an explicit accuracy contract.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qfl/errors.hpp"

namespace qfl {

struct QuadratureOptions {
  double rel_tol = 1e-13;
  double abs_tol = 1e-12;
  unsigned max_depth = 18;
};

namespace detail {

// Non-adaptive GK21 on [a, b]; the rule is applied on the reference
// interval [-1, 1] so that the returned error estimate is in the units of
// the caller's interval.
template <class F>
double gk21(F& f, double a, double b, double& error, double& l1) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const auto g = [&](double x) { return half * f(mid + half * x); };
  const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(g, -1.0, 1.0, 0, 0.0,
                                                                                  &error, &l1);
  error = std::abs(error);
  l1 = std::abs(l1);
  return v;
}

// Bisection until the local error estimate meets its share of the budget.
template <class F>
double gk21_adapt(F& f, double a, double b, double budget, unsigned depth, double& error) {
  double e = 0.0, l1 = 0.0;
  const double v = gk21(f, a, b, e, l1);
  if (e <= budget || depth == 0) {
    error += e;
    return v;
  }
  const double m = 0.5 * (a + b);
  return gk21_adapt(f, a, m, 0.5 * budget, depth - 1, error) +
         gk21_adapt(f, m, b, 0.5 * budget, depth - 1, error);
}

}  // namespace detail

/// Integrates f over [a, b] (either orientation) by adaptive Gauss-Kronrod
/// (21 points) bisection. The error budget is max(abs_tol, rel_tol * L1),
/// with L1 estimated on the whole interval; throws AccuracyError when the
/// accumulated estimate stays above it.
template <class F>
[[nodiscard]] double integrate(F&& f, double a, double b, const QuadratureOptions& opt = {},
                               const char* what = "integral") {
  if (a == b) return 0.0;
  double error = 0.0, l1 = 0.0;
  double value = detail::gk21(f, a, b, error, l1);
  const double allowed = std::max(opt.abs_tol, opt.rel_tol * l1);
  if (error > allowed && opt.max_depth > 0) {
    const double m = 0.5 * (a + b);
    error = 0.0;
    value = detail::gk21_adapt(f, a, m, 0.5 * allowed, opt.max_depth - 1, error) +
            detail::gk21_adapt(f, m, b, 0.5 * allowed, opt.max_depth - 1, error);
  }
  if (!std::isfinite(value) || error > allowed) {
    std::ostringstream msg;
    msg << what << ": quadrature on [" << a << ", " << b << "] did not converge (error estimate "
        << error << ", allowed " << allowed << ")";
    throw AccuracyError(msg.str());
  }
  return value;
}

}  // namespace qfl
