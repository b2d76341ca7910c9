/**
 * @file test_quartic_integral.cpp
 * @brief Criterion, construction of the quartic integral and the bracket /
 *        Killing verification engines, with broken-integral controls.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qfl/quartic_integral.hpp"

namespace {

const qfl::PsiSolution& sol() {
  static const qfl::PsiSolution s = qfl::solve_psi(8.0, 1e-10);
  return s;
}
const qfl::QuarticIntegral& fam1() {
  static const qfl::QuarticIntegral F = qfl::build_quartic(qfl::build_family1(sol(), 1.0));
  return F;
}
const qfl::QuarticIntegral& fam2() {
  static const qfl::QuarticIntegral F = qfl::build_quartic(qfl::build_family2(sol(), 1.0, 0.0, 1.0));
  return F;
}

double max_bracket(const qfl::QuarticIntegral& F) {
  double m = 0.0;
  for (const auto& b : qfl::bracket_scan(F)) m = std::max(m, std::abs(b.bracket));
  return m;
}

double max_killing(const qfl::QuarticIntegral& F) {
  const auto [b, th] = qfl::killing_data(F);
  double m = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k <= 5; ++k)
      m = std::max(m, std::abs(qfl::killing_residual(b, th, k, {0.31 * i, -1.5 + 0.15 * i})));
  return m;
}

}  // namespace

TEST(Criterion, VanishesOnFamiliesOnly) {
  EXPECT_LE(qfl::pde_residual_max(*qfl::build_family1(sol(), 1.0).ansatz()), 1e-8);
  EXPECT_LE(qfl::pde_residual_max(*qfl::build_family1(sol(), 2.0, 0.7).ansatz()), 1e-8);
  EXPECT_LE(qfl::pde_residual_max(*qfl::build_family2(sol(), 1.0, 0.0, 1.0).ansatz()), 1e-8);
  EXPECT_LE(qfl::pde_residual_max(*qfl::build_family2(sol(), 0.5, 0.3, 2.0).ansatz()), 1e-8);
  auto perturbed = *qfl::build_family2(sol(), 1.0, 0.0, 1.0).ansatz();
  perturbed.xi_scale = 1.1;
  EXPECT_GT(qfl::pde_residual_max(perturbed), 1e-3);
  auto wrong_d = *qfl::build_family2(sol(), 1.0, 0.0, 1.0).ansatz();
  wrong_d.d = 0.25;
  EXPECT_GT(qfl::pde_residual_max(wrong_d), 1e-3);
}

TEST(Criterion, IntegratedCompatibilityConstant) {
  const auto a1 = *qfl::build_family1(sol(), 1.0, 0.4).ansatz();
  const auto a2 = *qfl::build_family2(sol(), 1.5, 0.4, 1.0).ansatz();
  for (double y : {-2.0, 0.3, 1.7}) {
    EXPECT_NEAR(qfl::xi_consistency(a1, y), 0.0, 1e-10);
    EXPECT_NEAR(qfl::xi_consistency(a2, y), 0.0, 1e-10);
  }
}

TEST(Construction, RefusesNonIntegrableAndSingular) {
  // (scaling xi'' of fam1 with d1 = 0 only changes c; scale fam2's instead)
  auto perturbed = *qfl::build_family2(sol(), 1.0, 0.0, 1.0).ansatz();
  perturbed.xi_scale = 1.1;
  EXPECT_THROW((void)qfl::build_quartic(qfl::metric_from_ansatz("broken", perturbed)), qfl::NotIntegrable);
  EXPECT_THROW((void)qfl::build_quartic(qfl::round_sphere()), qfl::NotIntegrable);
  // c too small: Lambda changes sign
  EXPECT_THROW((void)qfl::build_quartic(qfl::build_family1(sol(), 0.01)), qfl::SingularMetric);
}

TEST(Construction, FlatAnsatzHasHandComputedCoefficients) {
  // f = xi(y) + d (x^2 - y^2), xi'' = c: Lambda = c, f_zz = (4d - c)/4, g = 0
  qfl::FAnsatzData a;
  a.c = 2.0;
  a.d = 0.3;
  const auto F = qfl::build_quartic(qfl::metric_from_ansatz("flat", a));
  const std::complex<double> a1 = 4.0 * (a.c - 4.0 * a.d) / a.c;
  const qfl::PhaseState s{qfl::Chart::NORTH, 1.0, 0.5, 0.8, -1.3};
  const std::complex<double> P(0.5 * s.px, -0.5 * s.py);
  const double expect = 2.0 * std::real(P * P * P * P + a1 * P * P * P * std::conj(P));
  EXPECT_NEAR(F.value(s), expect, 1e-13);
  EXPECT_NEAR(std::abs(F.a1(1.0, 0.5) - a1), 0.0, 1e-13);
  EXPECT_NEAR(F.a2(1.0, 0.5), 0.0, 1e-13);
  EXPECT_LE(max_bracket(F), 1e-9);
}

TEST(Construction, LoopClosureAndCachedPotential) {
  EXPECT_LE(fam1().loop_residual(), 1e-8);
  EXPECT_LE(fam2().loop_residual(), 1e-8);
  for (int i = 0; i < 10; ++i) {
    const double x = 0.6 * i, y = -2.5 + 0.5 * i;
    const double ref = fam1().h_path(x, y, qfl::PathOrder::Y_THEN_X);
    EXPECT_NEAR(fam1().h(x, y), ref, 1e-10 * std::max(1.0, std::abs(ref)));
    EXPECT_NEAR(fam1().h_path(x, y, qfl::PathOrder::X_THEN_Y), ref, 1e-9 * std::max(1.0, std::abs(ref)));
  }
  EXPECT_EQ(fam1().h(0.0, 0.0), 0.0);
}

TEST(Construction, A1IdentityAndScaleInvariance) {
  auto doubled = fam2().ansatz();
  doubled.f_scale = 2.0;
  const auto G = qfl::build_quartic(qfl::metric_from_ansatz("fam2x2", doubled));
  for (int i = 0; i < 16; ++i) {
    const double x = 0.4 * i, y = -3.0 + 0.4 * i;
    EXPECT_LE(std::abs(fam2().a1(x, y) * fam2().lambda(x, y) + 4.0 * fam2().fzz(x, y)), 1e-10);
    EXPECT_LE(std::abs(G.a1(x, y) - fam2().a1(x, y)), 1e-10);
    EXPECT_LE(std::abs(G.a2(x, y) - fam2().a2(x, y)), 1e-10);
  }
}

TEST(Integral, HomogeneousAndChartInvariant) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const qfl::PhaseState s = qfl::random_state(rng);
    qfl::PhaseState t = s;
    t.px *= 2.0;
    t.py *= 2.0;
    EXPECT_NEAR(fam1().value(t), 16.0 * fam1().value(s), 1e-10 * std::max(1.0, std::abs(fam1().value(t))));
    EXPECT_NEAR(qfl::eval_quartic(fam1(), qfl::chart_switch(s)), qfl::eval_quartic(fam1(), s), 1e-8);
  }
  EXPECT_EQ(fam1().value({qfl::Chart::NORTH, 0.4, 0.2, 0.0, 0.0}), 0.0);
}

TEST(Integral, MomentumGradientMatchesDifferences) {
  for (const qfl::Chart ch : {qfl::Chart::NORTH, qfl::Chart::SOUTH}) {
    const qfl::PhaseState s{ch, 1.2, -0.7, 0.9, 0.4};
    const auto g = fam2().momentum_gradient(s);
    const double h = 1e-5;
    auto at = [&](double dx, double dy) {
      qfl::PhaseState t = s;
      t.px += dx;
      t.py += dy;
      return fam2().value(t);
    };
    EXPECT_NEAR(g[0], (at(h, 0) - at(-h, 0)) / (2 * h), 1e-7);
    EXPECT_NEAR(g[1], (at(0, h) - at(0, -h)) / (2 * h), 1e-7);
  }
}

TEST(Bracket, CommutesWithGeodesicHamiltonian) {
  EXPECT_LE(max_bracket(fam1()), 1e-6);
  EXPECT_LE(max_bracket(fam2()), 1e-6);
}

TEST(Bracket, GaugeShiftAddsMultipleOfHSquared) {
  // h -> h + c0 changes F by -4 c0 H^2, still an integral
  const auto G = fam1().with_gauge(0.7);
  EXPECT_LE(max_bracket(G), 1e-6);
  const qfl::PhaseState s{qfl::Chart::NORTH, 0.5, 0.2, 1.1, -0.6};
  const double H = 0.5 * (s.px * s.px + s.py * s.py) / fam1().metric().lambda(s.x, s.y);
  EXPECT_NEAR(G.value(s) - fam1().value(s), -4.0 * 0.7 * H * H, 1e-10);
}

TEST(Bracket, BrokenIntegralDetected) {
  EXPECT_GT(max_bracket(fam1().with_a2_offset(1e-2)), 1e-4);
  EXPECT_GT(max_bracket(fam2().with_a2_offset(1e-2)), 1e-4);
}

TEST(Bracket, EngineOnKnownPair) {
  // rotational symmetry: {p_x, H} = 0 for the round sphere, {y, H} = p_y / Lambda
  const auto rs = qfl::round_sphere();
  const auto H = qfl::geodesic_hamiltonian(rs, rs);
  const qfl::PhaseFunction px{[](const qfl::PhaseState& s) { return s.px; }, {}};
  const qfl::PhaseFunction y{[](const qfl::PhaseState& s) { return s.y; }, {}};
  const qfl::PhaseState s{qfl::Chart::NORTH, 0.3, 0.8, 1.0, 0.5};
  EXPECT_NEAR(qfl::poisson_bracket(px, H, s), 0.0, 1e-10);
  EXPECT_NEAR(qfl::poisson_bracket(y, H, s), s.py / rs.lambda(s.x, s.y), 1e-9);
  EXPECT_THROW((void)qfl::poisson_bracket(px, H, s, 1e-2), qfl::DomainError);
}

TEST(Killing, RecursionHoldsAndDetectsBrokenIntegral) {
  EXPECT_LE(max_killing(fam1()), 1e-6);
  EXPECT_LE(max_killing(fam2()), 1e-6);
  EXPECT_GT(max_killing(fam1().with_a2_offset(1e-2)), 1e-4);
  const auto [b, th] = qfl::killing_data(fam1());
  EXPECT_THROW((void)qfl::killing_residual(b, th, 7, {0.0, 0.0}), qfl::DomainError);
}
