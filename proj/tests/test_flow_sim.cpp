/**
 * @file test_flow_sim.cpp
 * @brief Symplectic flows: conservation, chart switching, reversibility and
 *        the step-size laws of the drift.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qfl/flow_sim.hpp"

namespace {

const qfl::PsiSolution& sol() {
  static const qfl::PsiSolution s = qfl::solve_psi(8.0, 1e-10);
  return s;
}
const qfl::ConformalMetric& fam1() {
  static const qfl::ConformalMetric m = qfl::build_family1(sol(), 1.0);
  return m;
}
const qfl::QuarticIntegral& quartic1() {
  static const qfl::QuarticIntegral F = qfl::build_quartic(fam1());
  return F;
}

}  // namespace

TEST(ChartSwitch, IsAnInvolution) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const qfl::PhaseState s = qfl::normalized(qfl::random_state(rng));
    const qfl::PhaseState t = qfl::chart_switch(qfl::chart_switch(s));
    EXPECT_EQ(t.chart, s.chart);
    EXPECT_NEAR(t.x, s.x, 1e-15);
    EXPECT_EQ(t.y, s.y);
    EXPECT_EQ(t.px, s.px);
    EXPECT_EQ(t.py, s.py);
  }
}

TEST(ChartSwitch, PreservesEnergies) {
  const auto s1 = qfl::build_natural(sol(), qfl::Variant::S1);
  const auto s2 = qfl::build_natural(sol(), qfl::Variant::S2, 1.0);
  const auto geo = qfl::geodesic_model(fam1());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const qfl::PhaseState s = qfl::random_state(rng);
    for (const auto& m : {qfl::natural_model(s1), qfl::natural_model(s2), geo})
      EXPECT_NEAR(m.energy(qfl::chart_switch(s)), m.energy(s), 1e-10);
  }
}

TEST(Flow, GeodesicConservesHAndF) {
  const auto s0 = qfl::geodesic_state(fam1(), 0.4, 0.2, 1.0);
  const auto tr = qfl::integrate_geodesic(fam1(), s0, 20.0, 1e-3, &quartic1());
  EXPECT_EQ(tr.steps, 20000);
  EXPECT_EQ(tr.samples.size(), 2001u);
  EXPECT_NEAR(tr.H.initial, 0.5, 1e-14);
  EXPECT_LE(tr.H.relative(), 1e-8);
  ASSERT_TRUE(tr.F.has_value());
  EXPECT_LE(tr.F->relative(), 1e-6);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) ASSERT_GT(tr.samples[i].t, tr.samples[i - 1].t);
}

TEST(Flow, RotationalSymmetryConservesPx) {
  // x-independent metric 1/psi'^2: p_x is exactly conserved
  const qfl::ConformalMetric m("inv_dpsi2", [](double y) {
    const qfl::YJet dp = sol().derivative_jet(1, y);
    qfl::YField h;
    h.constant_part = 1.0 / (dp * dp);
    return h;
  });
  const auto s0 = qfl::geodesic_state(m, 1.0, 0.5, 0.9);
  const auto tr = qfl::integrate_geodesic(m, s0, 50.0, 1e-3);
  EXPECT_LE(tr.px.relative(), 1e-10);
}

TEST(Flow, NaturalFlowsConserveHAndJacobiIntegral) {
  const auto s1 = qfl::build_natural(sol(), qfl::Variant::S1);
  const auto s2 = qfl::build_natural(sol(), qfl::Variant::S2, 1.0);
  for (const auto* sys : {&s1, &s2}) {
    const auto FE = qfl::build_quartic(qfl::jacobi_metric(*sys, 1.0));
    const auto s0 = qfl::sample_energy_surface(*sys, 1.0, 44);
    const auto tr = qfl::integrate_natural(*sys, s0, 20.0, 1e-3, &FE);
    EXPECT_NEAR(tr.H.initial, 1.0, 1e-12);
    EXPECT_LE(tr.H.relative(), 1e-8);
    EXPECT_LE(tr.F->relative(), 1e-6);
  }
}

TEST(Flow, TimeReversalRecoversInitialState) {
  const auto s0 = qfl::geodesic_state(fam1(), 2.0, -0.3, 2.2);
  const auto fwd = qfl::integrate_geodesic(fam1(), s0, 5.0, 1e-3);
  const auto back = qfl::integrate_geodesic(fam1(), fwd.final_state, -5.0, -1e-3);
  const qfl::PhaseState e = qfl::to_north(back.final_state);
  EXPECT_NEAR(std::remainder(e.x - s0.x, 2 * std::numbers::pi), 0.0, 1e-8);
  EXPECT_NEAR(e.y, s0.y, 1e-8);
  EXPECT_NEAR(e.px, s0.px, 1e-8);
  EXPECT_NEAR(e.py, s0.py, 1e-8);
}

TEST(Flow, ChartSwitchIsTransparent) {
  // head north across y_switch; compare with the single-chart run while it stays valid
  const auto s0 = qfl::geodesic_state(fam1(), 0.5, 1.2, std::numbers::pi / 2);
  qfl::FlowOptions single;
  single.chart_switching = false;
  single.store_every = 1;
  qfl::FlowOptions sw;
  sw.store_every = 1;
  const auto a = qfl::integrate_geodesic(fam1(), s0, 2.0, 1e-3, nullptr, sw);
  const auto b = qfl::integrate_geodesic(fam1(), s0, 2.0, 1e-3, nullptr, single);
  ASSERT_GT(a.switches, 0);
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const qfl::PhaseState p = qfl::to_north(a.samples[i].state), q = b.samples[i].state;
    if (std::abs(q.y) > 4.0) break;
    worst = std::max({worst, std::abs(std::remainder(p.x - q.x, 2 * std::numbers::pi)), std::abs(p.y - q.y)});
    ++compared;
  }
  EXPECT_GT(compared, 100u);
  EXPECT_LE(worst, 1e-6);
}

TEST(Flow, MidpointDriftIsSecondOrder) {
  qfl::FlowOptions o;
  o.stepper = qfl::Stepper::MIDPOINT;
  const auto s0 = qfl::geodesic_state(fam1(), 1.0, 0.3, 0.7);
  const auto a = qfl::integrate_geodesic(fam1(), s0, 10.0, 1e-2, nullptr, o);
  const auto b = qfl::integrate_geodesic(fam1(), s0, 10.0, 5e-3, nullptr, o);
  const double ratio = a.H.relative() / b.H.relative();
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 5.0);
  EXPECT_EQ(a.method, "implicit_midpoint");
}

TEST(Flow, FDriftIsStepLimitedUnlessIntegralIsBroken) {
  qfl::FlowOptions o;
  o.stepper = qfl::Stepper::MIDPOINT;
  const auto s0 = qfl::geodesic_state(fam1(), 1.0, 0.3, 0.7);
  const auto broken = quartic1().with_a2_offset(5e-2);
  const auto a = qfl::integrate_geodesic(fam1(), s0, 10.0, 1e-2, &quartic1(), o);
  const auto b = qfl::integrate_geodesic(fam1(), s0, 10.0, 5e-3, &quartic1(), o);
  EXPECT_LT(b.F->relative(), a.F->relative());
  const auto c = qfl::integrate_geodesic(fam1(), s0, 10.0, 1e-2, &broken, o);
  const auto d = qfl::integrate_geodesic(fam1(), s0, 10.0, 5e-3, &broken, o);
  EXPECT_GT(c.F->relative(), 1e-3);
  EXPECT_GT(d.F->relative(), 1e-3);
  // plateau: refining dt does not reduce the drift of a non-integral
  EXPECT_GT(d.F->relative(), 0.5 * c.F->relative());
}

TEST(Flow, InvalidStepsRejected) {
  const auto s0 = qfl::geodesic_state(fam1(), 1.0, 0.3, 0.7);
  EXPECT_THROW((void)qfl::integrate_geodesic(fam1(), s0, 1.0, 2e-2), qfl::DomainError);
  EXPECT_THROW((void)qfl::integrate_geodesic(fam1(), s0, 1.0, -1e-3), qfl::DomainError);
  EXPECT_THROW((void)qfl::integrate_geodesic(fam1(), s0, 1.0, 0.0), qfl::DomainError);
}

TEST(EnergySurface, SamplesLieOnLevelAndRespectRoom) {
  const auto s1 = qfl::build_natural(sol(), qfl::Variant::S1);
  const auto model = qfl::natural_model(s1);
  for (std::uint64_t seed = 1; seed < 6; ++seed) {
    const auto s = qfl::sample_energy_surface(s1, 0.8, seed);
    EXPECT_NEAR(model.energy(s), 0.8, 1e-12);
  }
  EXPECT_THROW((void)qfl::sample_energy_surface(s1, -1.0, 1), qfl::NoRoom);
}
