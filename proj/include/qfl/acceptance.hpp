/**
 * @file acceptance.hpp
 * @brief The eleven end-to-end acceptance checks, each with its measured values.
 *
 * Shared by the `qfl report` subcommand and the acceptance test binary. All
 * checks run on the default configuration (y_max = 8, tol = 1e-10, c = 1,
 * d1 = 0, p = p0 + 1, E = 1, seed 42).
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qfl/io.hpp"
#include "qfl/lab.hpp"

namespace qfl {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  Json metrics = Json::object();
  std::string error;      // set when the check itself threw
  double seconds = 0.0;   // wall time; not serialized (reports stay deterministic)
};

[[nodiscard]] inline Json to_json(const CriterionResult& r) {
  Json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["pass"] = r.pass;
  j["metrics"] = r.metrics;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

namespace acceptance {

// Bounds of the acceptance criteria.
inline constexpr double kFirstIntegralBound = 1e-8;
inline constexpr double kInverseDerivativeBound = 1e-8;
inline constexpr double kGResidualBound = 1e-12;
inline constexpr double kOdeConstantBound = 1e-9;
inline constexpr double kCriterionBound = 1e-8;
inline constexpr double kCriterionControlFloor = 1e-3;
inline constexpr double kLoopBound = 1e-8;
inline constexpr double kA1IdentityBound = 1e-10;
inline constexpr double kScaleBound = 1e-10;
inline constexpr double kBracketBound = 1e-6;
inline constexpr double kKillingBound = 1e-6;
inline constexpr double kBrokenBracketFloor = 1e-4;
inline constexpr double kDriftHBound = 1e-8;
inline constexpr double kDriftFBound = 1e-6;
inline constexpr double kMaupertuisBound = 1e-12;
inline constexpr double kP0RefinementBound = 1e-6;
inline constexpr double kStencilBound = 1e-4;
inline constexpr double kSwitchBound = 1e-10;
inline constexpr double kMaxVBound = 1e-6;
inline constexpr double kRoundCurvatureBound = 1e-9;
inline constexpr double kCurvatureVariationFloor = 1e-3;
inline constexpr double kKovalevskayaBound = 1e-10;

/// Offset added to a2 for the broken-integral controls.
inline constexpr double kBrokenA2Offset = 1e-2;
/// xi'' scaling of the perturbed-ansatz control.
inline constexpr double kPerturbedXiScale = 1.1;

/// 50 points log-spaced on [0.01, 0.99 psi(y_max)].
[[nodiscard]] inline std::vector<double> inverse_grid(const PsiSolution& s) {
  std::vector<double> g;
  const double hi = 0.99 * s.psi(s.y_max());
  for (int i = 0; i < 50; ++i) g.push_back(0.01 * std::pow(hi / 0.01, i / 49.0));
  return g;
}

/// Seeded geodesic initial state for fam1 flows (H = 1/2).
[[nodiscard]] inline PhaseState geodesic_seed_state(const ConformalMetric& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const PhaseState st = random_state(rng, 1.0, 1.0);
  return geodesic_state(m, st.x, st.y, std::atan2(st.py, st.px));
}

[[nodiscard]] inline double max_abs_bracket(const std::vector<BracketSample>& v) {
  double m = 0.0;
  for (const auto& b : v) m = std::max(m, std::abs(b.bracket));
  return m;
}

/// max over 20 points and all recursion equations of |killing residual|.
[[nodiscard]] inline double max_killing(const QuarticIntegral& F) {
  const auto [b, th] = killing_data(F);
  double m = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Point p{0.31 * i, -1.5 + 0.15 * i};
    for (int k = 0; k <= 5; ++k) m = std::max(m, std::abs(killing_residual(b, th, k, p)));
  }
  return m;
}

[[nodiscard]] inline Json drift_record(const Trajectory& tr) {
  Json j;
  j["drift_H"] = tr.H.relative();
  j["drift_F"] = tr.F ? Json(tr.F->relative()) : Json();
  j["steps"] = tr.steps;
  j["switches"] = tr.switches;
  return j;
}

// ---------------------------------------------------------------------------

inline bool first_integral(Lab& lab, Json& m) {
  const PsiSolution& s = lab.psi();
  double res = 0.0;
  for (int i = -8000; i <= 8000; ++i) res = std::max(res, std::abs(s.first_integral_residual(i * 1e-3)));
  for (const auto& n : s.nodes()) res = std::max(res, std::abs(s.first_integral_residual(n.y)));
  m["max_residual"] = res;
  m["nodes"] = s.nodes().size();
  m["runtime_under_1s"] = lab.solve_seconds() < 1.0;
  return res <= kFirstIntegralBound && lab.solve_seconds() < 1.0;
}

inline bool closed_form_inverse(Lab& lab, Json& m) {
  const InverseFormulaReport r = hadeler_inverse_check(lab.psi(), inverse_grid(lab.psi()));
  m["max_derivative_deviation"] = r.max_derivative_deviation;
  m["offset"] = r.offset;
  m["offset_minus_quarter_pi"] = r.offset - std::numbers::pi / 4.0;
  m["offset_spread"] = r.offset_spread;
  m["samples"] = r.samples;
  return r.max_derivative_deviation <= kInverseDerivativeBound && r.samples == 50;
}

inline bool phase_plane(Lab& lab, Json& m) {
  const PhaseAnalysisReport r = verify_phase_analysis(lab.psi());
  m["eigenvalues"] = {r.eigenvalues[0], r.eigenvalues[1]};
  m["g_residual_max"] = r.g_residual_max;
  m["ode_constant_at_zero"] = r.ode_at_zero;
  m["ode_constant_max"] = r.ode_residual_max;
  const bool eig = (r.eigenvalues[0] == -3.0 && r.eigenvalues[1] == -4.0);
  return eig && r.g_residual_max <= kGResidualBound && std::abs(r.ode_at_zero) <= kOdeConstantBound &&
         r.ode_residual_max <= kOdeConstantBound;
}

inline bool integrability_criterion(Lab& lab, Json& m) {
  const double r1 = pde_residual_max(*lab.fam1().ansatz());
  const double r2 = pde_residual_max(*lab.fam2().ansatz());
  FAnsatzData broken = *lab.fam2().ansatz();
  broken.xi_scale = kPerturbedXiScale;
  const double rc = pde_residual_max(broken);
  m["fam1"] = r1;
  m["fam2"] = r2;
  m["perturbed_control"] = rc;
  return r1 <= kCriterionBound && r2 <= kCriterionBound && rc > kCriterionControlFloor;
}

inline bool quartic_construction(Lab& lab, Json& m) {
  const QuarticIntegral& F1 = lab.quartic1();
  const QuarticIntegral& F2 = lab.quartic2();
  double a1_identity = 0.0, scale = 0.0;
  for (const QuarticIntegral* F : {&F1, &F2}) {
    FAnsatzData doubled = F->ansatz();
    doubled.f_scale *= 2.0;
    const QuarticIntegral G = build_quartic(metric_from_ansatz(F->metric().name() + "_x2", doubled));
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) {
        const double x = 2.0 * std::numbers::pi * i / 16.0, y = -3.0 + 6.0 * j / 15.0;
        a1_identity = std::max(a1_identity, std::abs(F->a1(x, y) * F->lambda(x, y) + 4.0 * F->fzz(x, y)));
        scale = std::max({scale, std::abs(G.a1(x, y) - F->a1(x, y)), std::abs(G.a2(x, y) - F->a2(x, y))});
      }
  }
  m["loop_residual_fam1"] = F1.loop_residual();
  m["loop_residual_fam2"] = F2.loop_residual();
  m["a1_identity"] = a1_identity;
  m["scale_invariance"] = scale;
  return F1.loop_residual() <= kLoopBound && F2.loop_residual() <= kLoopBound &&
         a1_identity <= kA1IdentityBound && scale <= kScaleBound;
}

inline bool bracket_scan_check(Lab& lab, Json& m) {
  bool ok = true;
  for (const QuarticIntegral* F : {&lab.quartic1(), &lab.quartic2()}) {
    const double b = max_abs_bracket(bracket_scan(*F, 100, lab.config().seed));
    const double k = max_killing(*F);
    const double broken = max_abs_bracket(bracket_scan(F->with_a2_offset(kBrokenA2Offset), 100, lab.config().seed));
    Json j;
    j["bracket_max"] = b;
    j["killing_max"] = k;
    j["broken_a2_bracket_max"] = broken;
    m[F->metric().name()] = j;
    ok = ok && b <= kBracketBound && k <= kKillingBound && broken > kBrokenBracketFloor;
  }
  return ok;
}

inline bool flow_conservation(Lab& lab, Json& m) {
  const RunConfig& c = lab.config();
  bool ok = true;
  {
    const Trajectory tr = integrate_geodesic(lab.fam1(), geodesic_seed_state(lab.fam1(), c.seed), c.T, c.dt,
                                             &lab.quartic1());
    m["fam1_geodesic"] = drift_record(tr);
    ok = ok && tr.H.relative() <= kDriftHBound && tr.F->relative() <= kDriftFBound;
  }
  for (const NaturalSystem* sys : {&lab.s1(), &lab.s2()}) {
    const QuarticIntegral FE = build_quartic(jacobi_metric(*sys, c.E));
    const Trajectory tr = integrate_natural(*sys, sample_energy_surface(*sys, c.E, c.seed), c.T, c.dt, &FE);
    m[sys->variant == Variant::S1 ? "s1_natural" : "s2_natural"] = drift_record(tr);
    ok = ok && tr.H.relative() <= kDriftHBound && tr.F->relative() <= kDriftFBound;
  }
  {
    FlowOptions o;
    o.stepper = Stepper::MIDPOINT;
    const PhaseState s0 = geodesic_state(lab.fam1(), 1.0, 0.3, 0.7);
    const Trajectory a = integrate_geodesic(lab.fam1(), s0, 10.0, 1e-2, nullptr, o);
    const Trajectory b = integrate_geodesic(lab.fam1(), s0, 10.0, 5e-3, nullptr, o);
    const double ratio = a.H.relative() / b.H.relative();
    m["midpoint_drift_dt"] = a.H.relative();
    m["midpoint_drift_half_dt"] = b.H.relative();
    m["midpoint_ratio"] = ratio;
    ok = ok && ratio >= 3.0 && ratio <= 5.0;
  }
  return ok;
}

inline bool maupertuis(Lab& lab, Json& m) {
  std::mt19937_64 rng(lab.config().seed);
  std::uniform_real_distribution<double> ux(0.0, 2.0 * std::numbers::pi), uy(-3.0, 3.0);
  std::vector<std::pair<double, double>> pts(100);
  for (auto& p : pts) p = {ux(rng), uy(rng)};
  const double p = lab.config().p;
  double worst = 0.0;
  for (double E : {0.5, 1.0, 2.0}) {
    const ConformalMetric J1 = jacobi_metric(lab.s1(), E), F1 = build_family1(lab.psi(), E);
    const ConformalMetric J2 = jacobi_metric(lab.s2(), E), F2 = build_family2(lab.psi(), E, 0.0, p);
    for (const auto& [x, y] : pts) {
      for (const auto& [a, b] : {std::pair{&J1, &F1}, std::pair{&J2, &F2}}) {
        const MetricPartials u = a->partials(x, y), v = b->partials(x, y);
        const double scale = std::max(1.0, std::abs(v.v));
        worst = std::max({worst, std::abs(u.v - v.v) / scale, std::abs(u.x - v.x) / scale,
                          std::abs(u.y - v.y) / scale});
      }
    }
  }
  m["max_difference"] = worst;
  m["points"] = pts.size();
  return worst <= kMaupertuisBound;
}

inline bool sphere_smoothness(Lab& lab, Json& m) {
  const double p0 = lab.p0();
  const PsiSolution fine = solve_psi(lab.config().y_max, 1e-12);
  const double p0_fine = compute_p0(fine, 129, 1e-11).p0;
  m["p0"] = p0;
  m["p0_refined"] = p0_fine;
  m["M1"] = lab.asymptotics().M1;
  m["M2"] = lab.asymptotics().M2;
  bool ok = std::abs(p0 - p0_fine) <= kP0RefinementBound;

  // S2 kinetic coefficient on both charts
  const NaturalSystem& s2 = lab.s2();
  double kmin = std::numeric_limits<double>::infinity();
  const double ym = lab.psi().y_max();
  for (int i = -800; i <= 800; ++i) kmin = std::min(kmin, s2.kinetic(ym * i / 800.0));
  for (Chart ch : {Chart::NORTH, Chart::SOUTH})
    for (int j = -20; j <= 20; ++j)
      for (int i = -20; i <= 20; ++i) {
        const double u = 0.1 * i, v = 0.1 * j;
        if (u * u + v * v <= 4.0) kmin = std::min(kmin, to_plane_chart(s2, ch, u, v).kinetic_factor);
      }
  m["s2_kinetic_min"] = kmin;
  ok = ok && kmin > 0.0;

  double stencil = 0.0;
  for (const NaturalSystem* sys : {&lab.s1(), &s2})
    for (Chart ch : {Chart::NORTH, Chart::SOUTH}) {
      const StencilProbe pr = plane_c2_probe(*sys, ch);
      stencil = std::max({stencil, pr.kinetic, pr.potential});
    }
  m["stencil_max"] = stencil;
  ok = ok && stencil <= kStencilBound;

  const FlowModel model = natural_model(lab.s1());
  std::mt19937_64 rng(lab.config().seed);
  double sw = 0.0;
  for (int i = 0; i < 100; ++i) {
    const PhaseState s = random_state(rng);
    sw = std::max(sw, std::abs(model.energy(s) - model.energy(chart_switch(s))));
  }
  m["chart_switch_H"] = sw;
  return ok && sw <= kSwitchBound;
}

inline bool derived_extremum(Lab& lab, Json& m) {
  const PotentialMax v = max_potential(lab.s1());
  const double expect = std::pow(3.0, -0.75);
  m["max_V"] = v.value;
  m["expected"] = expect;
  m["at_y"] = v.y;
  m["psi_squared_times_sqrt3"] = std::pow(lab.psi().psi(v.y), 2) * std::sqrt(3.0);
  return std::abs(v.value - expect) <= kMaxVBound;
}

inline bool nontriviality(Lab& lab, Json& m) {
  const bool w1 = nontriviality_witness(lab.fam1()).has_value();
  const bool w2 = nontriviality_witness(lab.fam2()).has_value();
  const ConformalMetric round = round_sphere();
  const bool wr = nontriviality_witness(round).has_value();
  double kmin = 1e300, kmax = -1e300, fmin = 1e300, fmax = -1e300;
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) {
      const double x = 2.0 * std::numbers::pi * i / 16.0, y = -3.0 + 6.0 * j / 15.0;
      const double kr = gauss_curvature(round, x, y), kf = gauss_curvature(lab.fam1(), x, y);
      kmin = std::min(kmin, kr);
      kmax = std::max(kmax, kr);
      fmin = std::min(fmin, kf);
      fmax = std::max(fmax, kf);
    }
  const std::vector<double> roots = potential_root_scan(lab.psi());
  const bool roots_ok = roots.size() == 1 && std::abs(roots.front()) <= 1e-12;
  bool distinct = false;
  try {
    distinct = distinctness_check(lab.psi(), lab.config().p, lab.config().p + 1.0, lab.p0());
  } catch (const Inconclusive&) {
    distinct = false;
  }
  const double kov = kovalevskaya_comparison(lab.psi());
  m["witness_fam1"] = w1;
  m["witness_fam2"] = w2;
  m["witness_round_sphere"] = wr;
  m["round_curvature_spread"] = kmax - kmin;
  m["fam1_curvature_spread"] = fmax - fmin;
  m["roots"] = roots;
  m["distinct"] = distinct;
  m["kovalevskaya_comparison"] = kov;
  return w1 && w2 && !wr && kmax - kmin <= kRoundCurvatureBound && fmax - fmin > kCurvatureVariationFloor &&
         roots_ok && distinct && std::abs(kov) <= kKovalevskayaBound;
}

}  // namespace acceptance

struct AcceptanceCheck {
  int id;
  const char* title;
  bool (*run)(Lab&, Json&);
};

inline constexpr AcceptanceCheck kAcceptanceChecks[] = {
    {1, "ODE vs first integral", acceptance::first_integral},
    {2, "closed-form inverse", acceptance::closed_form_inverse},
    {3, "phase-plane analysis", acceptance::phase_plane},
    {4, "integrability criterion", acceptance::integrability_criterion},
    {5, "quartic construction", acceptance::quartic_construction},
    {6, "bracket scan and Killing recursion", acceptance::bracket_scan_check},
    {7, "flow conservation", acceptance::flow_conservation},
    {8, "Maupertuis identity", acceptance::maupertuis},
    {9, "S2 smoothness data", acceptance::sphere_smoothness},
    {10, "potential maximum", acceptance::derived_extremum},
    {11, "nontriviality and inequivalence", acceptance::nontriviality},
};

/**
 * Runs every acceptance check on the default configuration (seed and
 * output settings taken from `cfg`). A check that throws fails with the
 * error recorded. `on_result` is called as each check finishes.
 */
[[nodiscard]] inline std::vector<CriterionResult> run_acceptance(
    const RunConfig& cfg = {}, const std::function<void(const CriterionResult&)>& on_result = {}) {
  RunConfig base;
  base.seed = cfg.seed;
  base.output_dir = cfg.output_dir;
  base.command = Command::REPORT;
  Lab lab(base);
  std::vector<CriterionResult> out;
  for (const auto& c : kAcceptanceChecks) {
    CriterionResult r;
    r.id = c.id;
    r.title = c.title;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.pass = c.run(lab, r.metrics);
    } catch (const std::exception& e) {
      r.pass = false;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qfl
