/**
 * @file test_quadrature.cpp
 * @brief Adaptive Gauss-Kronrod driver: exact integrals, tolerances, failure.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qfl/quadrature.hpp"

TEST(Quadrature, PolynomialExact) {
  const double v = qfl::integrate([](double x) { return 3 * x * x - 2 * x + 1; }, -1.0, 2.0);
  EXPECT_NEAR(v, 9.0 - 3.0 + 3.0, 1e-13);
}

TEST(Quadrature, OrientationReversesSign) {
  const auto f = [](double x) { return std::exp(x); };
  EXPECT_NEAR(qfl::integrate(f, 1.0, 0.0), -(std::numbers::e - 1.0), 1e-14);
  EXPECT_EQ(qfl::integrate(f, 0.5, 0.5), 0.0);
}

TEST(Quadrature, PeakedIntegrandConverges) {
  // integral of 1/(1 + 1e4 x^2) over [-1, 1] = 2 atan(100)/100
  const double v = qfl::integrate([](double x) { return 1.0 / (1.0 + 1e4 * x * x); }, -1.0, 1.0);
  EXPECT_NEAR(v, 2.0 * std::atan(100.0) / 100.0, 1e-13);
}

TEST(Quadrature, NearZeroIntegrandTerminatesOnAbsoluteTolerance) {
  // relative-only stopping would recurse to max depth on this cell
  const double v = qfl::integrate([](double x) { return 1e-16 * std::sin(1e3 * x); }, 0.0, 1.0);
  EXPECT_LT(std::abs(v), 1e-15);
}

TEST(Quadrature, SingularIntegrandFailsLoudly) {
  qfl::QuadratureOptions opt{1e-14, 1e-14, 4};
  EXPECT_THROW((void)qfl::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt),
               qfl::AccuracyError);
}
