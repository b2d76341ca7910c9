/**
 * @file quartic_integral.hpp
 * @brief Integrability criterion for the f-ansatz, construction of the
 *        quartic-in-momenta first integral of the geodesic flow, and the
 *        Poisson-bracket / Killing-recursion verification engines.
 *
 * Conventions: z = x + i y, d_z = (d_x - i d_y)/2, p_z = (p_x - i p_y)/2,
 * lambda = f_{z zbar} = Lambda/4, W = f_zz = A + i B. The integral is
 *   F = 2 Re(p_z^4 + a1 p_z^3 p_zbar) + a2 (p_z p_zbar)^2,
 *   a1 = -4 W / lambda,  a2 = -h / lambda^2,
 * where h is real with dh = 2 Re(conj(g) dz), i.e. h_x = 2 Re g, h_y = 2 Im g,
 *   g = -4 (W_z lambda + 2 W lambda_z).
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qfl/errors.hpp"
#include "qfl/metric_family.hpp"
#include "qfl/phase_state.hpp"
#include "qfl/quadrature.hpp"

namespace qfl {

using cplx = std::complex<double>;

/**
 * Real form of the criterion at (x, y):
 *   6 (A_y B_y + A_x B_x) + 2 (B Delta A + A Delta B) + (B_xx - B_yy - 2 A_xy) lambda.
 */
[[nodiscard]] inline double pde_residual(const FAnsatzData& a, double x, double y) {
  const YField A = a.a_field(y), B = a.b_field(y), L = a.lambda_field(y);
  const double cx = std::cos(x), sx = std::sin(x);
  const auto P = [&](const YField& h, int i, int j) { return h.partial(i, j, cx, sx); };
  const double lam = 0.25 * P(L, 0, 0);
  const double lapA = P(A, 2, 0) + P(A, 0, 2);
  const double lapB = P(B, 2, 0) + P(B, 0, 2);
  return 6.0 * (P(A, 0, 1) * P(B, 0, 1) + P(A, 1, 0) * P(B, 1, 0)) +
         2.0 * (P(B, 0, 0) * lapA + P(A, 0, 0) * lapB) +
         (P(B, 2, 0) - P(B, 0, 2) - 2.0 * P(A, 1, 1)) * lam;
}

/// max |pde_residual| over an n x n grid of [0, 2pi) x [-3, 3].
[[nodiscard]] inline double pde_residual_max(const FAnsatzData& a, int n = 16) {
  double m = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = -kProbeHalfHeight + 2.0 * kProbeHalfHeight * j / (n - 1);
    for (int i = 0; i < n; ++i)
      m = std::max(m, std::abs(pde_residual(a, 2.0 * std::numbers::pi * i / n, y)));
  }
  return m;
}

/**
 * Residual of psi' xi''' + 2 psi'' xi'' - 4d (psi'' - psi) - K, the once
 * integrated compatibility equation, with K = d1 (FAM1, CUSTOM) and
 * K = c d1 (FAM2).
 */
[[nodiscard]] inline double xi_consistency(const FAnsatzData& a, double y) {
  const YJet ps = a.psi_jet(0, y);
  const YJet xi2 = a.xi2_jet(y);
  const double gap = a.gap_jet(y)[0];
  const double K = a.family == Family::FAM2 ? a.c * a.d1 : a.d1;
  return ps[1] * xi2[1] + 2.0 * ps[2] * xi2[0] - 4.0 * a.d * gap - K;
}

/// A point of the (x, y) plane.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class PathOrder { X_THEN_Y, Y_THEN_X };

/**
 * h(to) - h(from) for the real h with h_zbar = g, integrating
 * dh = 2 Re(conj(g) dz) = 2 Re g dx + 2 Im g dy along the two-segment
 * axis-aligned path (corner (to.x, from.y) for X_THEN_Y).
 */
template <class G>
[[nodiscard]] double path_antiderivative(G&& g, Point from, Point to,
                                         PathOrder order = PathOrder::X_THEN_Y,
                                         const QuadratureOptions& opt = {1e-12, 1e-13, 18}) {
  const auto xleg = [&](double y, double x0, double x1) {
    return integrate([&](double s) { return 2.0 * std::real(cplx(g(s, y))); }, x0, x1, opt,
                     "path_antiderivative");
  };
  const auto yleg = [&](double x, double y0, double y1) {
    return integrate([&](double s) { return 2.0 * std::imag(cplx(g(x, s))); }, y0, y1, opt,
                     "path_antiderivative");
  };
  if (order == PathOrder::X_THEN_Y) return xleg(from.y, from.x, to.x) + yleg(to.x, from.y, to.y);
  return yleg(from.x, from.y, to.y) + xleg(to.y, from.x, to.x);
}

/**
 * @brief Quartic integral of the geodesic flow of a metric from the ansatz.
 *
 * Immutable after construction. The y-leg of h (from the base point along
 * x = base.x) is tabulated at build time and interpolated; the x-leg is a
 * degree-2 trigonometric polynomial in x and is integrated exactly from a
 * 5-point sample. h_path() evaluates the plain two-leg quadrature for
 * validation.
 */
class QuarticIntegral {
 public:
  struct Options {
    int probe_grid = 16;
    double refuse_threshold = 1e-6;
    double cache_step = 1.0 / 256.0;
    // |y| range of the tabulated y-leg (clipped to the psi solution).
    double cache_half_range = 8.0;
  };

  QuarticIntegral(ConformalMetric metric, Point base, const Options& opt)
      : metric_(std::move(metric)), base_(base) {
    if (!metric_.ansatz())
      throw NotIntegrable(metric_.name() + ": no f-ansatz attached; cannot construct the integral");
    ansatz_ = *metric_.ansatz();
    criterion_max_ = pde_residual_max(ansatz_, opt.probe_grid);
    if (!(criterion_max_ <= opt.refuse_threshold))
      throw NotIntegrable(metric_.name() + ": criterion residual " + std::to_string(criterion_max_) +
                          " exceeds " + std::to_string(opt.refuse_threshold));
    if (!metric_.positive_on_probe())
      throw SingularMetric(metric_.name() + ": lambda vanishes or changes sign on the probe grid");
    build_cache(opt.cache_step, opt.cache_half_range);
    loop_residual_ = compute_loop_residual();
  }

  [[nodiscard]] const ConformalMetric& metric() const noexcept { return metric_; }
  [[nodiscard]] const FAnsatzData& ansatz() const noexcept { return ansatz_; }
  [[nodiscard]] Point base_point() const noexcept { return base_; }
  /// max |criterion| on the build probe grid.
  [[nodiscard]] double criterion_max() const noexcept { return criterion_max_; }
  /// max |closed-loop integral of dh| over the unit squares of [0,6] x [-3,3].
  [[nodiscard]] double loop_residual() const noexcept { return loop_residual_; }
  /// Constant added to h (gauge); zero unless set by with_gauge().
  [[nodiscard]] double gauge() const noexcept { return gauge_; }

  /// Copy with h replaced by h + c0.
  [[nodiscard]] QuarticIntegral with_gauge(double c0) const {
    QuarticIntegral q = *this;
    q.gauge_ += c0;
    return q;
  }
  /// Copy with a2 replaced by a2 + delta (broken integral for controls).
  [[nodiscard]] QuarticIntegral with_a2_offset(double delta) const {
    QuarticIntegral q = *this;
    q.a2_offset_ += delta;
    return q;
  }

  [[nodiscard]] double lambda(double x, double y) const { return local(y).lambda(x); }
  [[nodiscard]] cplx fzz(double x, double y) const { return local(y).W(std::cos(x), std::sin(x)); }
  [[nodiscard]] cplx g(double x, double y) const { return local(y).g(std::cos(x), std::sin(x)); }

  [[nodiscard]] cplx a1(double x, double y) const {
    const Local l = local(y);
    const double lam = l.lambda(x);
    if (lam == 0.0) throw SingularMetric("a1: lambda = 0");
    return -4.0 * l.W(std::cos(x), std::sin(x)) / lam;
  }

  /// h with h(base) = gauge; cached y-leg, exact x-leg.
  [[nodiscard]] double h(double x, double y) const { return h_local(local(y), x, y); }

  /// h by plain two-leg quadrature from the base point.
  [[nodiscard]] double h_path(double x, double y, PathOrder order = PathOrder::Y_THEN_X) const {
    return gauge_ + path_antiderivative([this](double s, double t) { return g(s, t); }, base_,
                                        Point{x, y}, order);
  }

  [[nodiscard]] double a2(double x, double y) const {
    const Local l = local(y);
    const double lam = l.lambda(x);
    if (lam == 0.0) throw SingularMetric("a2: lambda = 0");
    return -h_local(l, x, y) / (lam * lam) + a2_offset_;
  }

  /// Coefficients (b0..b4) = (1, a1, a2, conj a1, 1) of the monomials p_z^{4-k} p_zbar^k.
  [[nodiscard]] std::array<cplx, 5> coefficients(double x, double y) const {
    const Local l = local(y);
    const double lam = l.lambda(x);
    if (lam == 0.0) throw SingularMetric("coefficients: lambda = 0");
    const cplx A1 = -4.0 * l.W(std::cos(x), std::sin(x)) / lam;
    const double A2 = -h_local(l, x, y) / (lam * lam) + a2_offset_;
    return {1.0, A1, A2, std::conj(A1), 1.0};
  }

  /// F at a state (south states are mapped to the north chart first).
  [[nodiscard]] double value(const PhaseState& s0) const {
    const PhaseState s = to_north(s0);
    const auto b = coefficients(s.x, s.y);
    const cplx P(0.5 * s.px, -0.5 * s.py);
    const cplx P2 = P * P;
    const double n = std::norm(P);
    return 2.0 * std::real(P2 * P2 + b[1] * P2 * P * std::conj(P)) + std::real(b[2]) * n * n;
  }

  /// (dF/dp_x, dF/dp_y) = (Re F_P, Im F_P), F_P = 4P^3 + 3 a1 P^2 Pbar + conj(a1) Pbar^3 + 2 a2 P Pbar^2.
  /// For SOUTH states the gradient is with respect to the south momenta.
  [[nodiscard]] std::array<double, 2> momentum_gradient(const PhaseState& s0) const {
    const PhaseState s = to_north(s0);
    const auto b = coefficients(s.x, s.y);
    const cplx P(0.5 * s.px, -0.5 * s.py);
    const cplx Q = std::conj(P);
    const cplx FP = 4.0 * P * P * P + 3.0 * b[1] * P * P * Q + b[3] * Q * Q * Q +
                    2.0 * std::real(b[2]) * P * Q * Q;
    const double sign = s0.chart == Chart::NORTH ? 1.0 : -1.0;
    return {sign * FP.real(), sign * FP.imag()};
  }

 private:
  // Harmonic data at a fixed y.
  struct Local {
    YField A, B, L;
    [[nodiscard]] double lambda(double x) const { return 0.25 * L.partial(0, 0, x); }
    [[nodiscard]] cplx W(double cx, double sx) const {
      return {A.partial(0, 0, cx, sx), B.partial(0, 0, cx, sx)};
    }
    [[nodiscard]] cplx Wd(int i, int j, double cx, double sx) const {
      return {A.partial(i, j, cx, sx), B.partial(i, j, cx, sx)};
    }
    [[nodiscard]] double ld(int i, int j, double cx, double sx) const {
      return 0.25 * L.partial(i, j, cx, sx);
    }
    [[nodiscard]] cplx g(double cx, double sx) const {
      const cplx I(0.0, 1.0);
      const cplx Wz = 0.5 * (Wd(1, 0, cx, sx) - I * Wd(0, 1, cx, sx));
      const cplx lz = 0.5 * (ld(1, 0, cx, sx) - I * ld(0, 1, cx, sx));
      return -4.0 * (Wz * ld(0, 0, cx, sx) + 2.0 * Wd(0, 0, cx, sx) * lz);
    }
    // d/dy of g
    [[nodiscard]] cplx gy(double cx, double sx) const {
      const cplx I(0.0, 1.0);
      const cplx Wz = 0.5 * (Wd(1, 0, cx, sx) - I * Wd(0, 1, cx, sx));
      const cplx Wzy = 0.5 * (Wd(1, 1, cx, sx) - I * Wd(0, 2, cx, sx));
      const cplx lz = 0.5 * (ld(1, 0, cx, sx) - I * ld(0, 1, cx, sx));
      const cplx lzy = 0.5 * (ld(1, 1, cx, sx) - I * ld(0, 2, cx, sx));
      return -4.0 * (Wzy * ld(0, 0, cx, sx) + Wz * ld(0, 1, cx, sx) + 2.0 * Wd(0, 1, cx, sx) * lz +
                     2.0 * Wd(0, 0, cx, sx) * lzy);
    }
  };

  [[nodiscard]] Local local(double y) const {
    return {ansatz_.a_field(y), ansatz_.b_field(y), metric_.field(y)};
  }

  // Exact integral over [x0, x1] of 2 Re g(., y): Re g is a trigonometric
  // polynomial of degree 2, recovered from 5 equispaced samples.
  [[nodiscard]] static double x_leg(const Local& l, double x0, double x1) {
    constexpr int n = 5;
    std::array<double, n> v{};
    for (int k = 0; k < n; ++k) {
      const double s = 2.0 * std::numbers::pi * k / n;
      v[static_cast<std::size_t>(k)] = l.g(std::cos(s), std::sin(s)).real();
    }
    double a0 = 0.0;
    std::array<double, 3> ac{}, bc{};
    for (int k = 0; k < n; ++k) {
      const double s = 2.0 * std::numbers::pi * k / n;
      a0 += v[static_cast<std::size_t>(k)] / n;
      for (int m = 1; m <= 2; ++m) {
        ac[static_cast<std::size_t>(m)] += 2.0 * v[static_cast<std::size_t>(k)] * std::cos(m * s) / n;
        bc[static_cast<std::size_t>(m)] += 2.0 * v[static_cast<std::size_t>(k)] * std::sin(m * s) / n;
      }
    }
    double r = a0 * (x1 - x0);
    for (int m = 1; m <= 2; ++m) {
      const auto mm = static_cast<std::size_t>(m);
      r += ac[mm] / m * (std::sin(m * x1) - std::sin(m * x0)) -
           bc[mm] / m * (std::cos(m * x1) - std::cos(m * x0));
    }
    return 2.0 * r;
  }

  [[nodiscard]] double h_local(const Local& l, double x, double y) const {
    return gauge_ + y_leg(y) + x_leg(l, base_.x, x);
  }

  // y-leg: H(y) = integral_{base.y}^{y} 2 Im g(base.x, s) ds
  void build_cache(double step, double half_range) {
    const double top =
        std::max(std::abs(base_.y), ansatz_.psi ? std::min(ansatz_.psi->y_max(), half_range) : half_range);
    const int n = static_cast<int>(std::ceil((top - base_.y) / step));
    const int m = static_cast<int>(std::ceil((top + base_.y) / step));
    cache_y0_ = base_.y - m * step;
    cache_step_ = step;
    const double cx = std::cos(base_.x), sx = std::sin(base_.x);
    const auto dH = [&](double t) { return 2.0 * local(t).g(cx, sx).imag(); };
    const QuadratureOptions opt{1e-13, 1e-12, 18};
    const std::size_t count = static_cast<std::size_t>(n + m + 1);
    cache_.assign(count, {});
    for (std::size_t k = 0; k < count; ++k) {
      const double t = cache_y0_ + static_cast<double>(k) * step;
      const Local l = local(t);
      cache_[k] = {0.0, 2.0 * l.g(cx, sx).imag(), 2.0 * l.gy(cx, sx).imag()};
    }
    const auto mk = static_cast<std::size_t>(m);
    for (std::size_t k = mk + 1; k < count; ++k) {
      const double t = cache_y0_ + static_cast<double>(k) * step;
      cache_[k][0] = cache_[k - 1][0] + integrate(dH, t - step, t, opt, "h cache");
    }
    for (std::size_t k = mk; k-- > 0;) {
      const double t = cache_y0_ + static_cast<double>(k) * step;
      cache_[k][0] = cache_[k + 1][0] - integrate(dH, t, t + step, opt, "h cache");
    }
  }

  [[nodiscard]] double y_leg(double y) const {
    const double u = (y - cache_y0_) / cache_step_;
    if (!(u >= 0.0 && u <= static_cast<double>(cache_.size() - 1)))
      throw DomainError("QuarticIntegral: y = " + std::to_string(y) + " outside the tabulated range");
    const auto i = std::min(static_cast<std::size_t>(u), cache_.size() - 2);
    const double t = u - static_cast<double>(i);
    const double hs = cache_step_;
    const auto& L = cache_[i];
    const auto& R = cache_[i + 1];
    return detail::two_point_taylor<3>({L[0], L[1] * hs, L[2] * hs * hs},
                                       {R[0], R[1] * hs, R[2] * hs * hs}, t);
  }

  [[nodiscard]] double compute_loop_residual() const {
    const auto G = [this](double s, double t) { return g(s, t); };
    double worst = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = -3; j < 3; ++j) {
        const Point a{static_cast<double>(i), static_cast<double>(j)};
        const Point b{a.x + 1.0, a.y + 1.0};
        const double loop = path_antiderivative(G, a, b, PathOrder::X_THEN_Y) -
                            path_antiderivative(G, a, b, PathOrder::Y_THEN_X);
        worst = std::max(worst, std::abs(loop));
      }
    return worst;
  }

  ConformalMetric metric_;
  FAnsatzData ansatz_;
  Point base_;
  double criterion_max_ = 0.0;
  double loop_residual_ = 0.0;
  double gauge_ = 0.0;
  double a2_offset_ = 0.0;
  double cache_y0_ = 0.0;
  double cache_step_ = 0.0;
  std::vector<std::array<double, 3>> cache_;  // (H, H', H'')
};

/// Builds the quartic integral; refuses when the criterion fails on the probe grid.
[[nodiscard]] inline QuarticIntegral build_quartic(const ConformalMetric& metric,
                                                   Point base = {0.0, 0.0},
                                                   const QuarticIntegral::Options& opt = {}) {
  return QuarticIntegral(metric, base, opt);
}

/// F = 2 Re(p_z^4 + a1 p_z^3 p_zbar) + a2 (p_z p_zbar)^2.
[[nodiscard]] inline double eval_quartic(const QuarticIntegral& F, const PhaseState& s) {
  return F.value(s);
}

/// A function on phase space with an optional analytic momentum gradient.
struct PhaseFunction {
  std::function<double(const PhaseState&)> value;
  std::function<std::array<double, 2>(const PhaseState&)> momentum_gradient;
};

/// H = (p_x^2 + p_y^2) / (2 Lambda) in the chart of the state.
[[nodiscard]] inline PhaseFunction geodesic_hamiltonian(const ConformalMetric& north,
                                                        const ConformalMetric& south) {
  const auto lam = [north, south](const PhaseState& s) {
    return s.chart == Chart::NORTH ? north.lambda(s.x, s.y) : south.lambda(s.x, s.y);
  };
  return {[lam](const PhaseState& s) { return 0.5 * (s.px * s.px + s.py * s.py) / lam(s); },
          [lam](const PhaseState& s) {
            const double L = lam(s);
            return std::array<double, 2>{s.px / L, s.py / L};
          }};
}

[[nodiscard]] inline PhaseFunction quartic_function(const QuarticIntegral& F) {
  auto shared = std::make_shared<const QuarticIntegral>(F);
  return {[shared](const PhaseState& s) { return shared->value(s); },
          [shared](const PhaseState& s) { return shared->momentum_gradient(s); }};
}

/**
 * {F, G} = sum_i dF/dq_i dG/dp_i - dF/dp_i dG/dq_i. Coordinate derivatives
 * use 4th-order central differences with the given step; momentum
 * derivatives are analytic when supplied, otherwise differenced as well.
 */
[[nodiscard]] inline double poisson_bracket(const PhaseFunction& F, const PhaseFunction& G,
                                            const PhaseState& s, double step = 1e-4) {
  if (!(step > 1e-8 && step < 1e-3)) throw DomainError("poisson_bracket: step must lie in (1e-8, 1e-3)");
  const auto d = [&](const PhaseFunction& f, int which) {
    const auto at = [&](double e) {
      PhaseState t = s;
      switch (which) {
        case 0: t.x += e; break;
        case 1: t.y += e; break;
        case 2: t.px += e; break;
        default: t.py += e; break;
      }
      return f.value(t);
    };
    return (-at(2 * step) + 8 * at(step) - 8 * at(-step) + at(-2 * step)) / (12 * step);
  };
  const auto pgrad = [&](const PhaseFunction& f) {
    if (f.momentum_gradient) return f.momentum_gradient(s);
    return std::array<double, 2>{d(f, 2), d(f, 3)};
  };
  const auto Fp = pgrad(F), Gp = pgrad(G);
  return d(F, 0) * Gp[0] + d(F, 1) * Gp[1] - Fp[0] * d(G, 0) - Fp[1] * d(G, 1);
}

using ComplexField = std::function<cplx(double, double)>;
using RealField = std::function<double(double, double)>;

/**
 * k-th equation of the recursion for coefficients b_0..b_n of an integral
 * sum_k b_k p_w^{n-k} p_wbar^k of H ~ p_w p_wbar / theta:
 *   theta d_w b_{k-1} + (n-k+1) b_{k-1} theta_w + theta d_wbar b_k + k b_k theta_wbar,
 * with b_{-1} = b_{n+1} = 0 and derivatives by 4th-order central differences.
 */
[[nodiscard]] inline cplx killing_residual(const std::vector<ComplexField>& b, const RealField& theta,
                                           int k, Point s, double step = 1e-4) {
  const int n = static_cast<int>(b.size()) - 1;
  if (k < 0 || k > n + 1) throw DomainError("killing_residual: k out of range");
  const cplx I(0.0, 1.0);
  const auto diff = [&](auto&& f, bool along_x) {
    const auto at = [&](double e) { return along_x ? f(s.x + e, s.y) : f(s.x, s.y + e); };
    return (-at(2 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2 * step)) / (12 * step);
  };
  const auto dw = [&](auto&& f) { return 0.5 * (cplx(diff(f, true)) - I * cplx(diff(f, false))); };
  const auto dwb = [&](auto&& f) { return 0.5 * (cplx(diff(f, true)) + I * cplx(diff(f, false))); };
  const double th = theta(s.x, s.y);
  const cplx thw = dw(theta), thwb = dwb(theta);
  cplx r = 0.0;
  if (k - 1 >= 0) {
    const auto& f = b[static_cast<std::size_t>(k - 1)];
    r += th * dw(f) + static_cast<double>(n - k + 1) * f(s.x, s.y) * thw;
  }
  if (k <= n) {
    const auto& f = b[static_cast<std::size_t>(k)];
    r += th * dwb(f) + static_cast<double>(k) * f(s.x, s.y) * thwb;
  }
  return r;
}

/// Coefficient fields (1, a1, a2, conj a1, 1) and theta = lambda of a quartic integral.
[[nodiscard]] inline std::pair<std::vector<ComplexField>, RealField> killing_data(
    const QuarticIntegral& F) {
  auto q = std::make_shared<const QuarticIntegral>(F);
  std::vector<ComplexField> b;
  for (std::size_t k = 0; k < 5; ++k)
    b.emplace_back([q, k](double x, double y) { return q->coefficients(x, y)[k]; });
  return {b, [q](double x, double y) { return q->lambda(x, y); }};
}

/// Seeded random state: x in [0, 2pi), y in [-2, 2], p uniform in |p| <= p_max.
[[nodiscard]] inline PhaseState random_state(std::mt19937_64& rng, double p_max = 2.0,
                                             double y_range = 2.0) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  PhaseState s;
  s.x = 2.0 * std::numbers::pi * U(rng);
  s.y = y_range * (2.0 * U(rng) - 1.0);
  const double r = p_max * std::sqrt(U(rng));
  const double a = 2.0 * std::numbers::pi * U(rng);
  s.px = r * std::cos(a);
  s.py = r * std::sin(a);
  return s;
}

struct BracketSample {
  PhaseState state;
  double bracket = 0.0;
};

/// {F, H_geo} at `count` seeded random states.
[[nodiscard]] inline std::vector<BracketSample> bracket_scan(const QuarticIntegral& F, int count = 100,
                                                             std::uint64_t seed = 42,
                                                             double step = 1e-4) {
  const PhaseFunction H = geodesic_hamiltonian(F.metric(), F.metric());
  const PhaseFunction Q = quartic_function(F);
  std::mt19937_64 rng(seed);
  std::vector<BracketSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const PhaseState s = random_state(rng);
    out.push_back({s, poisson_bracket(Q, H, s, step)});
  }
  return out;
}

}  // namespace qfl
