/**
 * @file test_jet.cpp
 * @brief Jet arithmetic against closed-form derivatives.
 */
#include <gtest/gtest.h>

#include <cmath>

#include "qfl/jet.hpp"

namespace {

using J = qfl::Jet<6>;

// exp(a y) at y0: derivatives a^k e^{a y0}
J exp_jet(double a, double y0) {
  J j;
  for (int k = 0; k <= 6; ++k) j[k] = std::pow(a, k) * std::exp(a * y0);
  return j;
}

}  // namespace

TEST(Jet, ProductOfExponentialsIsExponential) {
  const J p = exp_jet(0.7, 0.3) * exp_jet(-1.2, 0.3);
  const J e = exp_jet(-0.5, 0.3);
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(p[k], e[k], 1e-14) << k;
}

TEST(Jet, QuotientInvertsProduct) {
  const J a = exp_jet(1.3, -0.2) + 2.0;
  const J b = exp_jet(-0.4, -0.2) * 3.0 + 1.0;
  const J q = (a * b) / b;
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(q[k], a[k], 1e-12) << k;
}

TEST(Jet, ReciprocalOfPolynomial) {
  // 1/(1+y) at y = 0: (-1)^k k!
  J b = J::constant(1.0);
  b[1] = 1.0;
  const J r = 1.0 / b;
  double f = 1.0;
  for (int k = 0; k <= 6; ++k) {
    if (k > 0) f *= k;
    EXPECT_NEAR(r[k], (k % 2 ? -1.0 : 1.0) * f, 1e-12) << k;
  }
}

TEST(Jet, ReflectionFlipsOddDerivatives) {
  const J a = exp_jet(0.9, 0.5);
  const J r = a.reflected();
  const J oracle = exp_jet(-0.9, -0.5);  // e^{0.9 (-y)} at y = -0.5
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(r[k], oracle[k], 1e-14) << k;
}

TEST(Jet, ScalarMinusJet) {
  const J a = exp_jet(1.0, 0.0);
  const J r = 2.0 - a;
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  for (int k = 1; k <= 6; ++k) EXPECT_DOUBLE_EQ(r[k], -1.0);
}

TEST(Harmonic, PartialsMatchTrigonometry) {
  qfl::Harmonic<6> h;
  h.cos_part = exp_jet(1.0, 0.2);
  h.sin_part = exp_jet(2.0, 0.2);
  h.constant_part = J::constant(5.0);
  const double x = 0.8, c = std::exp(0.2), s = std::exp(0.4);
  EXPECT_NEAR(h.partial(0, 0, x), c * std::cos(x) + s * std::sin(x) + 5.0, 1e-14);
  EXPECT_NEAR(h.partial(1, 0, x), -c * std::sin(x) + s * std::cos(x), 1e-14);
  EXPECT_NEAR(h.partial(2, 1, x), -c * std::cos(x) - 2.0 * s * std::sin(x), 1e-14);
  EXPECT_NEAR(h.partial(3, 0, x), c * std::sin(x) - s * std::cos(x), 1e-14);
  EXPECT_NEAR(h.partial(4, 2, x), c * std::cos(x) + 4.0 * s * std::sin(x), 1e-13);
}
