/**
 * @file flow_sim.hpp
 * @brief Geodesic and natural Hamiltonian flows on S^2 with chart switching
 *        and conservation-drift measurement.
 *
 * Every flow has the form H = (p_x^2 + p_y^2) / (2 K(x,y)) + U(x,y) in the
 * (x, y)-chart of the state. Steppers are Gauss-Legendre collocation methods
 * (implicit midpoint = 1 stage, order 2; Gauss-4 = 2 stages, order 4), both
 * symplectic and symmetric, solved by Newton's method with the analytic
 * Jacobian of the vector field.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qfl/errors.hpp"
#include "qfl/metric_family.hpp"
#include "qfl/phase_state.hpp"
#include "qfl/quartic_integral.hpp"

namespace qfl {

/**
 * The metric seen from the opposite pole: Lambda_S(x, y) = Lambda(-x, -y).
 * For harmonic metrics the decomposition transforms term by term.
 */
[[nodiscard]] inline ConformalMetric south_view(const ConformalMetric& m) {
  std::optional<FAnsatzData> a = m.ansatz();
  if (a) a->psi_sign = -a->psi_sign;
  return ConformalMetric(
      m.name() + "_south",
      [m](double y) {
        const YField h = m.field(-y);
        YField s;
        s.cos_part = h.cos_part.reflected();
        s.sin_part = -h.sin_part.reflected();
        s.constant_part = h.constant_part.reflected();
        return s;
      },
      a);
}

/// H = |p|^2 / (2K) + U with K, U given per chart as harmonic fields.
struct FlowModel {
  std::array<std::function<YField(double)>, 2> kinetic;    // [NORTH, SOUTH]
  std::array<std::function<YField(double)>, 2> potential;  // empty when U = 0

  [[nodiscard]] static std::size_t index(Chart c) { return c == Chart::NORTH ? 0 : 1; }

  [[nodiscard]] MetricPartials K(Chart c, double x, double y) const {
    return partials_of(kinetic[index(c)](y), x);
  }
  [[nodiscard]] MetricPartials U(Chart c, double x, double y) const {
    const auto& f = potential[index(c)];
    return f ? partials_of(f(y), x) : MetricPartials{};
  }
  [[nodiscard]] double energy(const PhaseState& s) const {
    const double k = kinetic[index(s.chart)](s.y).partial(0, 0, s.x);
    const auto& f = potential[index(s.chart)];
    const double u = f ? f(s.y).partial(0, 0, s.x) : 0.0;
    return 0.5 * (s.px * s.px + s.py * s.py) / k + u;
  }
};

[[nodiscard]] inline FlowModel geodesic_model(const ConformalMetric& north) {
  const ConformalMetric south = south_view(north);
  FlowModel m;
  m.kinetic = {[north](double y) { return north.field(y); },
               [south](double y) { return south.field(y); }};
  return m;
}

[[nodiscard]] inline FlowModel natural_model(const NaturalSystem& sys) {
  const NaturalSystem south = sys.flipped();
  const auto kin = [sys](double y) {
    YField h;
    h.constant_part = sys.kinetic_jet(y);
    return h;
  };
  FlowModel m;
  m.kinetic = {kin, kin};
  m.potential = {[sys](double y) { return sys.potential_field(y); },
                 [south](double y) { return south.potential_field(y); }};
  return m;
}

enum class Stepper { MIDPOINT, GAUSS4 };

[[nodiscard]] inline const char* to_string(Stepper s) {
  return s == Stepper::MIDPOINT ? "implicit_midpoint" : "gauss4";
}

struct FlowOptions {
  Stepper stepper = Stepper::GAUSS4;
  double newton_tol = 1e-12;
  int newton_max_iter = 20;
  int store_every = 10;
  double y_switch = 1.5;
  bool chart_switching = true;
};

namespace detail {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct FieldEval {
  Vec4 f;
  Mat4 J;
};

// Vector field of H = |p|^2/(2K) + U and its Jacobian in (x, y, px, py).
[[nodiscard]] inline FieldEval vector_field(const FlowModel& m, Chart c, const Vec4& z) {
  const MetricPartials K = m.K(c, z[0], z[1]);
  const MetricPartials U = m.U(c, z[0], z[1]);
  if (!(K.v > 0.0))
    throw DomainError("flow left the domain: kinetic coefficient <= 0 at y = " + std::to_string(z[1]));
  const double px = z[2], py = z[3];
  const double P2 = px * px + py * py;
  const double iK = 1.0 / K.v, iK2 = iK * iK, iK3 = iK2 * iK;
  FieldEval e;
  e.f << px * iK, py * iK, 0.5 * P2 * K.x * iK2 - U.x, 0.5 * P2 * K.y * iK2 - U.y;
  e.J << -px * K.x * iK2, -px * K.y * iK2, iK, 0.0,
         -py * K.x * iK2, -py * K.y * iK2, 0.0, iK,
         0.5 * P2 * (K.xx * iK2 - 2.0 * K.x * K.x * iK3) - U.xx,
         0.5 * P2 * (K.xy * iK2 - 2.0 * K.x * K.y * iK3) - U.xy, px * K.x * iK2, py * K.x * iK2,
         0.5 * P2 * (K.xy * iK2 - 2.0 * K.x * K.y * iK3) - U.xy,
         0.5 * P2 * (K.yy * iK2 - 2.0 * K.y * K.y * iK3) - U.yy, px * K.y * iK2, py * K.y * iK2;
  return e;
}

// One step of an s-stage Gauss-Legendre method.
[[nodiscard]] inline Vec4 gauss_step(const FlowModel& m, Chart c, const Vec4& z, double dt,
                                     Stepper method, const FlowOptions& opt) {
  const int s = method == Stepper::MIDPOINT ? 1 : 2;
  const double r3 = std::sqrt(3.0) / 6.0;
  Eigen::Matrix2d A;
  Eigen::Vector2d b, cc;
  if (s == 1) {
    A(0, 0) = 0.5;
    b(0) = 1.0;
    cc(0) = 0.5;
  } else {
    A << 0.25, 0.25 - r3, 0.25 + r3, 0.25;
    b << 0.5, 0.5;
    cc << 0.5 - r3, 0.5 + r3;
  }
  const FieldEval e0 = vector_field(m, c, z);
  std::vector<Vec4> Z(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) Z[static_cast<std::size_t>(i)] = z + cc(i) * dt * e0.f;

  const int n = 4 * s;
  std::vector<FieldEval> ev(static_cast<std::size_t>(s));
  for (int it = 0; it < opt.newton_max_iter; ++it) {
    for (int i = 0; i < s; ++i) ev[static_cast<std::size_t>(i)] = vector_field(m, c, Z[static_cast<std::size_t>(i)]);
    Eigen::VectorXd R(n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < s; ++i) {
      Vec4 acc = Z[static_cast<std::size_t>(i)] - z;
      for (int j = 0; j < s; ++j) {
        acc -= dt * A(i, j) * ev[static_cast<std::size_t>(j)].f;
        M.block(4 * i, 4 * j, 4, 4) -= dt * A(i, j) * ev[static_cast<std::size_t>(j)].J;
      }
      R.segment(4 * i, 4) = acc;
    }
    const Eigen::VectorXd delta = M.partialPivLu().solve(-R);
    double dn = 0.0, zn = 0.0;
    for (int i = 0; i < s; ++i) {
      Z[static_cast<std::size_t>(i)] += delta.segment(4 * i, 4);
      dn = std::max(dn, delta.segment(4 * i, 4).cwiseAbs().maxCoeff());
      zn = std::max(zn, Z[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff());
    }
    if (!std::isfinite(dn)) break;
    if (dn <= opt.newton_tol * std::max(1.0, zn)) {
      Vec4 out = z;
      for (int i = 0; i < s; ++i) out += dt * b(i) * vector_field(m, c, Z[static_cast<std::size_t>(i)]).f;
      return out;
    }
  }
  throw StepperError("Newton iteration did not converge in the implicit step");
}

}  // namespace detail

/// Running max |Q - Q0| over every step.
struct DriftStats {
  std::string quantity;
  double initial = 0.0;
  double max_abs_drift = 0.0;
  [[nodiscard]] double relative() const { return max_abs_drift / std::max(std::abs(initial), 1.0); }
  void update(double v) { max_abs_drift = std::max(max_abs_drift, std::abs(v - initial)); }
};

struct TrajectorySample {
  double t = 0.0;
  PhaseState state;
  double H = 0.0;
  double F = std::numeric_limits<double>::quiet_NaN();
  double px_north = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;  // every store_every-th step (first and last always)
  std::string method;
  double dt = 0.0;
  long steps = 0;
  int switches = 0;
  DriftStats H{"H"};
  std::optional<DriftStats> F;
  DriftStats px{"px"};
  PhaseState final_state;
};

/**
 * Fixed-step integration of a flow model. After each step the state moves
 * to the other chart when its y exceeds y_switch (the hemisphere far from
 * the chart's own pole); the tracked F is evaluated in the north chart.
 */
[[nodiscard]] inline Trajectory integrate_flow(const FlowModel& model, const PhaseState& s0, double T,
                                               double dt, const QuarticIntegral* F = nullptr,
                                               const FlowOptions& opt = {}) {
  if (!(dt > 0.0 && dt <= 1e-2) && !(dt < 0.0 && dt >= -1e-2))
    throw DomainError("integrate: |dt| must lie in (0, 1e-2]");
  if (!(T * dt > 0.0)) throw DomainError("integrate: T and dt must have the same sign");
  const long n = std::lround(T / dt);
  Trajectory tr;
  tr.method = to_string(opt.stepper);
  tr.dt = dt;
  PhaseState s = normalized(s0);
  const auto sample = [&](double t) {
    TrajectorySample smp;
    smp.t = t;
    smp.state = s;
    smp.H = model.energy(s);
    if (F) smp.F = F->value(s);
    smp.px_north = to_north(s).px;
    return smp;
  };
  TrajectorySample first = sample(0.0);
  tr.H.initial = first.H;
  if (F) tr.F = DriftStats{"F", first.F, 0.0};
  tr.px.initial = first.px_north;
  tr.samples.push_back(first);

  for (long k = 1; k <= n; ++k) {
    detail::Vec4 z(s.x, s.y, s.px, s.py);
    z = detail::gauss_step(model, s.chart, z, dt, opt.stepper, opt);
    s = PhaseState{s.chart, wrap_angle(z[0]), z[1], z[2], z[3]};
    if (opt.chart_switching && s.y > opt.y_switch) {
      s = chart_switch(s);
      ++tr.switches;
    }
    const TrajectorySample smp = sample(static_cast<double>(k) * dt);
    tr.H.update(smp.H);
    if (F) tr.F->update(smp.F);
    tr.px.update(smp.px_north);
    if (k % opt.store_every == 0 || k == n) tr.samples.push_back(smp);
  }
  tr.steps = n;
  tr.final_state = s;
  return tr;
}

/// Geodesic flow of H = |p|^2 / (2 Lambda).
[[nodiscard]] inline Trajectory integrate_geodesic(const ConformalMetric& metric, const PhaseState& s0,
                                                   double T, double dt,
                                                   const QuarticIntegral* F = nullptr,
                                                   const FlowOptions& opt = {}) {
  return integrate_flow(geodesic_model(metric), s0, T, dt, F, opt);
}

/// Natural flow; F_E (built from the Jacobi metric at E = H(s0)) is tracked when given.
[[nodiscard]] inline Trajectory integrate_natural(const NaturalSystem& sys, const PhaseState& s0,
                                                  double T, double dt,
                                                  const QuarticIntegral* F_E = nullptr,
                                                  const FlowOptions& opt = {}) {
  return integrate_flow(natural_model(sys), s0, T, dt, F_E, opt);
}

/**
 * State on {H = E}: (x, y) uniform in [0, 2pi) x [-y_range, y_range] with
 * V(x, y) < E (rejection), direction uniform, |p| = sqrt(2 Lambda_K (E - V)).
 */
[[nodiscard]] inline PhaseState sample_energy_surface(const NaturalSystem& sys, double E,
                                                      std::uint64_t seed, double y_range = 1.5) {
  // min V over the same grid the positivity probe uses
  double vmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kProbeGrid; ++j) {
    const double y = -y_range + 2.0 * y_range * j / (kProbeGrid - 1);
    const YField V = sys.potential_field(y);
    for (int i = 0; i < kProbeGrid; ++i)
      vmin = std::min(vmin, V.partial(0, 0, 2.0 * std::numbers::pi * i / kProbeGrid));
  }
  if (!(E > vmin))
    throw NoRoom("sample_energy_surface: E = " + std::to_string(E) + " <= min V = " + std::to_string(vmin));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int tries = 0; tries < 100000; ++tries) {
    const double x = 2.0 * std::numbers::pi * U(rng);
    const double y = y_range * (2.0 * U(rng) - 1.0);
    const double a = 2.0 * std::numbers::pi * U(rng);
    const double V = sys.potential(x, y);
    if (!(V < E)) continue;
    const double p = std::sqrt(2.0 * sys.kinetic(y) * (E - V));
    return PhaseState{Chart::NORTH, x, y, p * std::cos(a), p * std::sin(a)};
  }
  throw NoRoom("sample_energy_surface: no admissible point found");
}

/// Geodesic state with H = |p|^2 / (2 Lambda) = H0 at (x, y) in direction alpha.
[[nodiscard]] inline PhaseState geodesic_state(const ConformalMetric& m, double x, double y,
                                               double alpha, double H0 = 0.5) {
  const double p = std::sqrt(2.0 * m.lambda(x, y) * H0);
  return PhaseState{Chart::NORTH, x, y, p * std::cos(alpha), p * std::sin(alpha)};
}

}  // namespace qfl
