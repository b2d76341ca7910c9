/**
 * @file psi_core.hpp
 * @brief The odd solution psi_0 of  psi''' psi' + 2 psi''^2 - 3 psi^2 = 0,
 *        psi(0) = 0, psi'(0) = 1, psi''(0) = 0, and the scalar functions
 *        derived from it (nu, mu, Phi, p0).
 *
 * The positive half-line is integrated with an adaptive Dormand-Prince 5(4)
 * pair. The state is carried as (psi, r1, r2) with r_k = psi^(k) - psi;
 * for large y every derivative approaches psi and the differences that
 * matter (psi'' - psi, psi'^2 - psi^2, psi'^4 - psi^4 - 1) are otherwise
 * lost to cancellation. Negative y is obtained by odd reflection.
 *
 * Derivatives of order >= 3 always come from the differentiated ODE
 * (never from finite differences).
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qfl/errors.hpp"
#include "qfl/jet.hpp"
#include "qfl/quadrature.hpp"

namespace qfl {

/// Order of the derivative jets handed out by PsiSolution.
inline constexpr int kJetOrder = 6;
using YJet = Jet<kJetOrder>;

namespace detail {

// Highest offset r_k computed at a point: the e- and q-jets of order
// kJetOrder need two more than the psi jet.
inline constexpr int kOffsetOrder = kJetOrder + 2;
using Offsets = std::array<double, kOffsetOrder + 1>;

/**
 * Offsets r_k = psi^(k) - psi, k = 0..kOffsetOrder, from (psi, r1, r2).
 *
 * With u_k = psi + r_k the n-th derivative of the ODE reads
 *   sum_j C(n,j) [u_{1+j} u_{3+n-j} + 2 u_{2+j} u_{2+n-j} - 3 u_j u_{n-j}] = 0.
 * The psi^2 terms cancel identically, so the remainder is linear in psi
 * times offsets plus offset products, and r_{n+3} enters only through
 * (psi + r1) r_{n+3}.
 */
[[nodiscard]] inline Offsets psi_offsets(double psi, double r1, double r2) {
  Offsets r{};
  r[0] = 0.0;
  r[1] = r1;
  r[2] = r2;
  for (int n = 0; n + 3 <= kOffsetOrder; ++n) {
    r[static_cast<std::size_t>(n + 3)] = 0.0;
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
      const auto R = [&](int k) { return r[static_cast<std::size_t>(k)]; };
      const double a = R(1 + j), b = R(3 + n - j);
      const double c = R(2 + j), d = R(2 + n - j);
      const double e = R(j), f = R(n - j);
      acc += binom(n, j) * (psi * (a + b) + a * b + 2.0 * (psi * (c + d) + c * d) -
                            3.0 * (psi * (e + f) + e * f));
    }
    r[static_cast<std::size_t>(n + 3)] = -acc / (psi + r1);
  }
  return r;
}

// Right-hand side of the offset system.
[[nodiscard]] inline std::array<double, 3> offset_rhs(const std::array<double, 3>& s) {
  const double psi = s[0], r1 = s[1], r2 = s[2];
  const double r3 = -(psi * r1 + 4.0 * psi * r2 + 2.0 * r2 * r2) / (psi + r1);
  return {psi + r1, r2 - r1, r3 - r1};
}

// Two-point Taylor (Hermite) interpolation of degree 2M-1 on t in [0,1],
// given the first M derivatives (already scaled by h^k) at both ends.
template <std::size_t M>
[[nodiscard]] inline double two_point_taylor(const std::array<double, M>& left,
                                             const std::array<double, M>& right, double t) {
  const auto side = [](const std::array<double, M>& a, double s, double sign) {
    // (1-s)^M * sum_k a_k sign^k s^k/k! * sum_{j<=M-1-k} C(M-1+j,j) s^j
    double total = 0.0;
    double sk = 1.0;
    double signk = 1.0;
    double fact = 1.0;
    for (std::size_t k = 0; k < M; ++k) {
      double inner = 0.0;
      double sj = 1.0;
      for (std::size_t j = 0; j + k < M; ++j) {
        inner += binom(static_cast<int>(M - 1 + j), static_cast<int>(j)) * sj;
        sj *= s;
      }
      total += a[k] * signk * sk / fact * inner;
      sk *= s;
      signk *= sign;
      fact *= static_cast<double>(k + 1);
    }
    double w = 1.0;
    for (std::size_t k = 0; k < M; ++k) w *= 1.0 - s;
    return total * w;
  };
  return side(left, t, 1.0) + side(right, 1.0 - t, -1.0);
}

}  // namespace detail

/// Accepted step of the positive half-line solve.
struct PsiNode {
  double y = 0.0;
  double psi = 0.0;
  std::array<double, 6> r{};  // r_0..r_5
};

/**
 * @brief Dense-output solution of the IVP on [-y_max, y_max].
 *
 * Immutable after construction; all accessors are const and reentrant.
 */
class PsiSolution {
 public:
  PsiSolution(double y_max, double tolerance, std::vector<PsiNode> nodes)
      : y_max_(y_max), tolerance_(tolerance), nodes_(std::move(nodes)) {
    ys_.reserve(nodes_.size());
    for (const auto& n : nodes_) ys_.push_back(n.y);
  }

  [[nodiscard]] double y_max() const noexcept { return y_max_; }
  [[nodiscard]] double tolerance() const noexcept { return tolerance_; }
  [[nodiscard]] static constexpr int interpolant_order() noexcept { return 7; }
  /// Accepted steps on [0, y_max]; the negative side is their odd reflection.
  [[nodiscard]] const std::vector<PsiNode>& nodes() const noexcept { return nodes_; }

  /// (psi, psi', ..., psi^(6)) at y.
  [[nodiscard]] YJet jet(double y) const { return derivative_jet(0, y); }

  /// Jet of psi^(m), i.e. (psi^(m), ..., psi^(m+6)) at y, for m in {0, 1, 2}.
  [[nodiscard]] YJet derivative_jet(int m, double y) const {
    if (m < 0 || m > detail::kOffsetOrder - kJetOrder)
      throw DomainError("derivative_jet: shift must lie in [0, 2]");
    const auto [a, r] = offsets_at(y);
    YJet j;
    for (int k = 0; k <= kJetOrder; ++k) j[k] = a + r[static_cast<std::size_t>(k + m)];
    if (y >= 0.0) return j;
    // psi^(m) is odd for even m and even for odd m
    return m % 2 == 0 ? -j.reflected() : j.reflected();
  }

  [[nodiscard]] double psi(double y) const { return jet(y)[0]; }
  [[nodiscard]] double dpsi(double y) const { return jet(y)[1]; }
  [[nodiscard]] double ddpsi(double y) const { return jet(y)[2]; }

  /// Jet of psi'' - psi (odd), accurate for large |y|.
  [[nodiscard]] YJet curvature_gap_jet(double y) const {
    const auto [a, r] = offsets_at(y);
    (void)a;
    YJet j;
    for (int k = 0; k <= kJetOrder; ++k)
      j[k] = r[static_cast<std::size_t>(k + 2)] - r[static_cast<std::size_t>(k)];
    return y < 0.0 ? -j.reflected() : j;
  }

  /// Jet of psi'^2 - psi^2 (even), accurate for large |y|.
  [[nodiscard]] YJet square_gap_jet(double y) const {
    const auto [a, r] = offsets_at(y);
    YJet d1;   // psi' - psi
    YJet sum;  // psi' + psi
    for (int k = 0; k <= kJetOrder; ++k) {
      const double rk = r[static_cast<std::size_t>(k)];
      const double rk1 = r[static_cast<std::size_t>(k + 1)];
      d1[k] = rk1 - rk;
      sum[k] = 2.0 * a + rk1 + rk;
    }
    const YJet q = d1 * sum;
    return y < 0.0 ? q.reflected() : q;
  }

  /// psi'^4 - psi^4 - 1, evaluated without cancellation.
  [[nodiscard]] double first_integral_residual(double y) const {
    const auto [a, r] = offsets_at(y);
    const double dp = a + r[1];
    return r[1] * (2.0 * a + r[1]) * (dp * dp + a * a) - 1.0;
  }

  /// psi'' psi'^2 - psi^3 (the phase-plane orbit relation), without cancellation.
  [[nodiscard]] double orbit_residual(double y) const {
    const auto [a, r] = offsets_at(y);
    const double v = a * a * (2.0 * r[1] + r[2]) + a * (r[1] * r[1] + 2.0 * r[1] * r[2]) +
                     r[1] * r[1] * r[2];
    return y < 0.0 ? -v : v;
  }

  /// psi''' psi' + 2 psi''^2 - 3 psi^2 with psi''' from the recurrence.
  [[nodiscard]] double ode_residual(double y) const {
    const auto [a, r] = offsets_at(y);
    return a * (r[1] + r[3]) + r[1] * r[3] + 4.0 * a * r[2] + 2.0 * r[2] * r[2];
  }

 private:
  // (psi(|y|), offsets at |y|)
  [[nodiscard]] std::pair<double, detail::Offsets> offsets_at(double y) const {
    const double ay = std::abs(y);
    if (!(ay <= y_max_ * (1.0 + 1e-14)))
      throw DomainError("psi evaluated at |y| = " + std::to_string(ay) + " beyond y_max = " +
                        std::to_string(y_max_));
    auto it = std::upper_bound(ys_.begin(), ys_.end(), ay);
    std::size_t i = it == ys_.begin() ? 0 : static_cast<std::size_t>(it - ys_.begin()) - 1;
    if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;
    const PsiNode& L = nodes_[i];
    const PsiNode& R = nodes_[i + 1];
    const double h = R.y - L.y;
    const double t = std::clamp((ay - L.y) / h, 0.0, 1.0);
    if (t == 0.0) return {L.psi, detail::psi_offsets(L.psi, L.r[1], L.r[2])};
    if (t == 1.0) return {R.psi, detail::psi_offsets(R.psi, R.r[1], R.r[2])};

    std::array<double, 4> l{}, rr{};
    double hk = 1.0;
    // psi^(k) = psi + r_k
    for (int k = 0; k < 4; ++k, hk *= h) {
      l[static_cast<std::size_t>(k)] = (L.psi + L.r[static_cast<std::size_t>(k)]) * hk;
      rr[static_cast<std::size_t>(k)] = (R.psi + R.r[static_cast<std::size_t>(k)]) * hk;
    }
    const double psi = detail::two_point_taylor(l, rr, t);
    // r1^(k) = r_{k+1} - r_k ; r2^(k) = r_{k+2} - r_k
    hk = 1.0;
    std::array<double, 4> l1{}, r1{}, l2{}, r2{};
    for (std::size_t k = 0; k < 4; ++k, hk *= h) {
      l1[k] = (L.r[k + 1] - L.r[k]) * hk;
      r1[k] = (R.r[k + 1] - R.r[k]) * hk;
      l2[k] = (L.r[k + 2] - L.r[k]) * hk;
      r2[k] = (R.r[k + 2] - R.r[k]) * hk;
    }
    const double o1 = detail::two_point_taylor(l1, r1, t);
    const double o2 = detail::two_point_taylor(l2, r2, t);
    return {psi, detail::psi_offsets(psi, o1, o2)};
  }

  double y_max_;
  double tolerance_;
  std::vector<PsiNode> nodes_;
  std::vector<double> ys_;
};

struct PsiSolveOptions {
  double max_step = 0.01;  // caps the dense-output interval
  // Per-step error bound used by the stepper relative to the requested
  // tolerance. Global error grows with the step count, and the node
  // invariants are stated as 10 * tol, so steps are held two decades tighter.
  double step_safety = 1e-2;
  double min_step = 1e-12;
  long max_steps = 1'000'000;
};

/**
 * @brief Solves the IVP on [-y_max, y_max] with an adaptive Dormand-Prince
 *        5(4) pair. tol is the per-step relative error bound.
 */
[[nodiscard]] inline PsiSolution solve_psi(double y_max = 8.0, double tol = 1e-10,
                                           const PsiSolveOptions& opt = {}) {
  if (!(y_max >= 1.0 && y_max <= 12.0))
    throw DomainError("solve_psi: y_max must lie in [1, 12], got " + std::to_string(y_max));
  if (!(tol > 1e-14 && tol < 1e-4))
    throw DomainError("solve_psi: tol must lie in (1e-14, 1e-4), got " + std::to_string(tol));

  // Dormand-Prince 5(4) tableau
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous system

  const double step_tol = std::max(tol * opt.step_safety, 2e-14);

  using State = std::array<double, 3>;
  const auto axpy = [](const State& s, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = s;
    for (const auto& [w, k] : terms)
      for (std::size_t i = 0; i < 3; ++i) out[i] += h * w * (*k)[i];
    return out;
  };
  const auto make_node = [](double y, const State& s) {
    const auto r = detail::psi_offsets(s[0], s[1], s[2]);
    PsiNode n;
    n.y = y;
    n.psi = s[0];
    for (std::size_t k = 0; k < n.r.size(); ++k) n.r[k] = r[k];
    return n;
  };

  std::vector<PsiNode> nodes;
  State s{0.0, 1.0, 0.0};
  double y = 0.0;
  double h = std::min(1e-3, opt.max_step);
  nodes.push_back(make_node(y, s));
  State k1 = detail::offset_rhs(s);
  long steps = 0;

  while (y < y_max) {
    if (++steps > opt.max_steps) throw SolverFailure("solve_psi: step budget exhausted");
    bool last = false;
    if (y + h >= y_max) {
      h = y_max - y;
      last = true;
    }
    const State k2 = detail::offset_rhs(axpy(s, h, {{a21, &k1}}));
    const State k3 = detail::offset_rhs(axpy(s, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = detail::offset_rhs(axpy(s, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 =
        detail::offset_rhs(axpy(s, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = detail::offset_rhs(
        axpy(s, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State next =
        axpy(s, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = detail::offset_rhs(next);

    double err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double scale = step_tol * std::max(std::abs(s[i]), std::abs(next[i])) + 1e-300;
      err = std::max(err, std::abs(e) / scale);
    }
    if (!std::isfinite(err)) throw SolverFailure("solve_psi: non-finite error estimate");

    if (err <= 1.0) {
      y = last ? y_max : y + h;
      s = next;
      k1 = k7;
      if (!(s[0] + s[1] > 0.0))
        throw SolverFailure("solve_psi: psi' <= 0 encountered at y = " + std::to_string(y));
      nodes.push_back(make_node(y, s));
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h = std::min(h * factor, opt.max_step);
    if (y < y_max && h < opt.min_step)
      throw SolverFailure("solve_psi: step size underflow at y = " + std::to_string(y));
  }
  return PsiSolution(y_max, tol, std::move(nodes));
}

/// (psi, psi', ..., psi^(order)) at y; order in [3, 6].
[[nodiscard]] inline std::vector<double> higher_derivs(const PsiSolution& sol, double y, int order) {
  if (order < 3 || order > kJetOrder)
    throw DomainError("higher_derivs: order must lie in [3, " + std::to_string(kJetOrder) + "]");
  const YJet j = sol.jet(y);
  return {j.d.begin(), j.d.begin() + order + 1};
}

/**
 * @brief y(psi) = integral_0^psi (1 + s^4)^(-1/4) ds.
 *
 * Inverse of psi_0 through the first integral psi'^4 = psi^4 + 1. Odd in psi.
 * Beyond |psi| = 1 the substitution s = e^u keeps the integrand bounded.
 */
[[nodiscard]] inline double closed_form_y(double psi_value) {
  const double a = std::abs(psi_value);
  const QuadratureOptions opt{1e-14, 1e-14, 20};
  const auto inner = [](double s) { return 1.0 / std::sqrt(std::sqrt(1.0 + s * s * s * s)); };
  double y = integrate(inner, 0.0, std::min(a, 1.0), opt, "closed_form_y");
  if (a > 1.0) {
    const auto outer = [](double u) { return 1.0 / std::sqrt(std::sqrt(1.0 + std::exp(-4.0 * u))); };
    y += integrate(outer, 0.0, std::log(a), opt, "closed_form_y");
  }
  return std::copysign(y, psi_value);
}

/**
 * Closed-form inverse in elementary functions (equal to closed_form_y up to
 * an additive constant):
 *   y = 1/4 log((R + psi)/(R - psi)) - 1/2 arctan(R/psi),  R = (psi^4 + 1)^(1/4).
 * R - psi is rewritten as 1/((R + psi)(R^2 + psi^2)) to survive large psi.
 * Defined for psi > 0.
 */
[[nodiscard]] inline double inverse_formula(double psi) {
  const double R = std::sqrt(std::sqrt(psi * psi * psi * psi + 1.0));
  const double plus = R + psi;
  const double ratio = plus * plus * (R * R + psi * psi);
  return 0.25 * std::log(ratio) - 0.5 * std::atan(R / psi);
}

struct InverseFormulaReport {
  double max_derivative_deviation = 0.0;  // |d/dpsi formula - (1+psi^4)^(-1/4)|
  double offset = 0.0;                    // mean of closed_form_y - formula
  double offset_spread = 0.0;             // max |closed_form_y - formula - offset|
  bool strictly_increasing = true;
  std::size_t samples = 0;
};

/// Checks the printed inverse against the quadrature inverse on `grid`.
[[nodiscard]] inline InverseFormulaReport hadeler_inverse_check(const PsiSolution& sol,
                                                                const std::vector<double>& grid) {
  const double top = sol.psi(sol.y_max());
  InverseFormulaReport rep;
  std::vector<double> gaps;
  double prev = -std::numeric_limits<double>::infinity();
  for (double v : grid) {
    if (!(v > 0.0 && v < top))
      throw DomainError("hadeler_inverse_check: grid point " + std::to_string(v) +
                        " outside (0, psi(y_max))");
    // 4th-order central difference
    const double step = 1e-3 * std::max(1.0, v) * std::min(1.0, v);
    const double d = (-inverse_formula(v + 2 * step) + 8 * inverse_formula(v + step) -
                      8 * inverse_formula(v - step) + inverse_formula(v - 2 * step)) /
                     (12 * step);
    const double exact = 1.0 / std::sqrt(std::sqrt(1.0 + v * v * v * v));
    rep.max_derivative_deviation = std::max(rep.max_derivative_deviation, std::abs(d - exact));
    const double f = inverse_formula(v);
    if (!(f > prev)) rep.strictly_increasing = false;
    prev = f;
    gaps.push_back(closed_form_y(v) - f);
  }
  rep.samples = gaps.size();
  if (!gaps.empty()) {
    double sum = 0.0;
    for (double g : gaps) sum += g;
    rep.offset = sum / static_cast<double>(gaps.size());
    for (double g : gaps) rep.offset_spread = std::max(rep.offset_spread, std::abs(g - rep.offset));
  }
  return rep;
}

namespace detail {

// Neville evaluation at t of the polynomial through (ts, vs).
[[nodiscard]] inline double neville(std::vector<double> ts, std::vector<double> vs, double t) {
  const std::size_t n = ts.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i)
      vs[i] = ((t - ts[i + m]) * vs[i] + (ts[i] - t) * vs[i + 1]) / (ts[i] - ts[i + m]);
  return vs[0];
}

inline constexpr int kTailSamples = 5;
inline constexpr double kTailSpacing = 0.5;

}  // namespace detail

struct NuMu {
  double nu = 0.0;
  double mu = 0.0;
};

/**
 * @brief nu(t) = psi'(y) e^{-y} and mu(t) = e^{y} psi'^2 (psi'' - psi) with
 *        y = -1/2 log t.
 *
 * For t below e^{-2 y_max} both are extended by polynomial extrapolation in t
 * through samples at y in [y_max - 2, y_max]; nu(0) is the Richardson limit.
 */
[[nodiscard]] inline NuMu nu_mu(const PsiSolution& sol, double t) {
  if (!(t >= 0.0)) throw DomainError("nu_mu: t must be nonnegative");
  const auto direct = [&](double y) {
    const YJet j = sol.jet(y);
    const double gap = sol.curvature_gap_jet(y)[0];
    const double ey = std::exp(y);
    return NuMu{j[1] / ey, ey * j[1] * j[1] * gap};
  };
  const double t_min = std::exp(-2.0 * sol.y_max());
  if (t >= t_min) return direct(std::min(-0.5 * std::log(t), sol.y_max()));

  std::vector<double> ts, nus, mus;
  for (int k = 0; k < detail::kTailSamples; ++k) {
    const double y = sol.y_max() - detail::kTailSpacing * k;
    const NuMu v = direct(y);
    ts.push_back(std::exp(-2.0 * y));
    nus.push_back(v.nu);
    mus.push_back(v.mu);
  }
  return {detail::neville(ts, nus, t), detail::neville(ts, mus, t)};
}

/// ln nu(0) cross-check through the quadrature inverse: -lim (y(psi) - ln psi).
[[nodiscard]] inline double log_nu0_from_inverse(double psi_large = 1e5) {
  return -(closed_form_y(psi_large) - std::log(psi_large));
}

/// Phi(t) = integral_t^1 mu(s)/nu(s) ds, adaptive quadrature.
[[nodiscard]] inline double phi(const PsiSolution& sol, double t, double abs_tol = 1e-10) {
  const auto ratio = [&](double s) {
    const NuMu v = nu_mu(sol, s);
    return v.mu / v.nu;
  };
  const QuadratureOptions opt{1e-10, abs_tol, 15};
  const double t_min = std::exp(-2.0 * sol.y_max());
  if (t >= t_min) return integrate(ratio, t, 1.0, opt, "phi");
  return integrate(ratio, t_min, 1.0, opt, "phi") + integrate(ratio, t, t_min, opt, "phi");
}

struct AsymptoticData {
  double nu0 = 0.0;
  double mu0 = 0.0;
  std::vector<std::pair<double, double>> phi_samples;  // (t, Phi(t))
  double M1 = 0.0;
  double M2 = 0.0;
  double p0 = 0.0;
};

/// Tabulates Phi on a uniform grid of [0, 1] and returns M1, M2 and p0.
[[nodiscard]] inline AsymptoticData compute_p0(const PsiSolution& sol, int grid_points = 65,
                                               double abs_tol = 1e-10) {
  if (sol.y_max() < 6.0) throw DomainError("compute_p0: requires y_max >= 6");
  if (grid_points < 2) throw DomainError("compute_p0: need at least two grid points");
  AsymptoticData a;
  const NuMu lim = nu_mu(sol, 0.0);
  a.nu0 = lim.nu;
  a.mu0 = lim.mu;
  const auto ratio = [&](double s) {
    const NuMu v = nu_mu(sol, s);
    return v.mu / v.nu;
  };
  const QuadratureOptions opt{1e-10, abs_tol / grid_points, 15};
  const double t_min = std::exp(-2.0 * sol.y_max());

  // accumulate from t = 1 downwards
  std::vector<std::pair<double, double>> rev;
  double acc = 0.0;
  const int n = grid_points - 1;
  rev.emplace_back(1.0, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    if (lo >= t_min) {
      acc += integrate(ratio, lo, hi, opt, "compute_p0");
    } else {
      acc += integrate(ratio, t_min, hi, opt, "compute_p0");
      acc += integrate(ratio, lo, t_min, opt, "compute_p0");
    }
    rev.emplace_back(lo, acc);
  }
  a.phi_samples.assign(rev.rbegin(), rev.rend());
  double mx = -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& [t, v] : a.phi_samples) {
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  a.M1 = mx;
  a.M2 = -mn;
  a.p0 = std::max(a.M1, a.M2) - 1.0;
  return a;
}

struct PhaseAnalysisReport {
  std::array<double, 2> eigenvalues{};   // of [[0,1],[-12,-7]]
  std::array<double, 4> linearization{}; // finite-difference Jacobian of the (q,p) system at (1,0)
  double g_residual_max = 0.0;           // g = s^3 in g'(1 - g s) + 3 g^2 - 3 s^2
  double orbit_residual_max = 0.0;       // |psi'' psi'^2 - psi^3| over nodes with y > 0.1
  double ode_residual_max = 0.0;        // |2 psi''^2 - 3 psi^2 + psi' psi'''| over nodes
  double ode_at_zero = 0.0;
};

/**
 * Phase-plane checks. With R = ln psi, q = R', p = q', the ODE becomes
 *   q' = p,  p' = (-3 q^4 - 7 q^2 p - 2 p^2 + 3)/q,
 * with the node (1, 0) and the orbit of psi_0 given by p = -q^2 + 1/q^2.
 */
[[nodiscard]] inline PhaseAnalysisReport verify_phase_analysis(const PsiSolution& sol) {
  PhaseAnalysisReport rep;
  // characteristic polynomial of [[0,1],[-12,-7]]: l^2 + 7 l + 12
  {
    const double tr = -7.0, det = 12.0;
    const double disc = std::sqrt(tr * tr - 4.0 * det);
    rep.eigenvalues = {(tr + disc) / 2.0, (tr - disc) / 2.0};
  }
  {
    const auto field = [](double q, double p) {
      return std::array<double, 2>{p, (-3 * q * q * q * q - 7 * q * q * p - 2 * p * p + 3) / q};
    };
    const double h = 1e-5;
    const auto fq1 = field(1 + h, 0), fq0 = field(1 - h, 0);
    const auto fp1 = field(1, h), fp0 = field(1, -h);
    rep.linearization = {(fq1[0] - fq0[0]) / (2 * h), (fp1[0] - fp0[0]) / (2 * h),
                         (fq1[1] - fq0[1]) / (2 * h), (fp1[1] - fp0[1]) / (2 * h)};
  }
  for (int i = 0; i <= 1000; ++i) {
    const double s = i / 1000.0;
    const double g = s * s * s, dg = 3 * s * s;
    rep.g_residual_max = std::max(rep.g_residual_max, std::abs(dg * (1 - g * s) + 3 * g * g - 3 * s * s));
  }
  for (const auto& n : sol.nodes()) {
    if (n.y > 0.1) rep.orbit_residual_max = std::max(rep.orbit_residual_max, std::abs(sol.orbit_residual(n.y)));
    rep.ode_residual_max = std::max(rep.ode_residual_max, std::abs(sol.ode_residual(n.y)));
  }
  const YJet j0 = sol.jet(0.0);
  rep.ode_at_zero = 2 * j0[2] * j0[2] - 3 * j0[0] * j0[0] + j0[1] * j0[3];
  return rep;
}

/// All roots of psi'' - psi on [-y_max, y_max] by sign-change bisection.
[[nodiscard]] inline std::vector<double> potential_root_scan(const PsiSolution& sol,
                                                             double spacing = 0.01) {
  const auto gap = [&](double y) { return sol.curvature_gap_jet(y)[0]; };
  const int half = static_cast<int>(std::ceil(sol.y_max() / spacing));
  std::vector<double> roots;
  double prev_y = -sol.y_max();
  double prev_v = gap(prev_y);
  if (prev_v == 0.0) roots.push_back(prev_y);
  for (int i = -half + 1; i <= half; ++i) {
    const double y = std::clamp(i * spacing, -sol.y_max(), sol.y_max());
    const double v = gap(y);
    if (v == 0.0) {
      roots.push_back(y);
    } else if (prev_v != 0.0 && (v > 0.0) != (prev_v > 0.0)) {
      double lo = prev_y, hi = y, flo = prev_v;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = gap(mid);
        if (fm == 0.0) { lo = hi = mid; break; }
        if ((fm > 0.0) == (flo > 0.0)) { lo = mid; flo = fm; } else { hi = mid; }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_y = y;
    prev_v = v;
  }
  return roots;
}

}  // namespace qfl
