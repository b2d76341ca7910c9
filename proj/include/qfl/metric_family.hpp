/**
 * @file metric_family.hpp
 * @brief Conformal metrics Lambda(x,y)(dx^2 + dy^2) built from the
 *        f-ansatz f = psi(y) cos x + xi(y) + d(x^2 - y^2), the natural
 *        systems on S^2, their Jacobi metrics, plane charts at the poles,
 *        curvature and nontriviality witnesses.
 *
 * Coordinates are (x, y) = (phi, log r) throughout; the poles sit at
 * y = -inf (north) and y = +inf (south).
 */
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "json.hpp"
#include "qfl/errors.hpp"
#include "qfl/jet.hpp"
#include "qfl/psi_core.hpp"

namespace qfl {

using YField = Harmonic<kJetOrder>;

enum class Family { FAM1, FAM2, CUSTOM };

[[nodiscard]] inline const char* to_string(Family f) {
  switch (f) {
    case Family::FAM1: return "fam1";
    case Family::FAM2: return "fam2";
    default: return "custom";
  }
}

/**
 * @brief Parameters of f = sigma psi(y) cos x + xi(y) + d(x^2 - y^2), scaled by f_scale.
 *
 * xi'' is determined by the family:
 *   FAM1:   xi'' = (d1 psi + c) / psi'^2,                    d = 0
 *   FAM2:   xi'' = c (psi'^2 - psi^2 + d1 psi + p) / psi'^2,  d = c/2
 *   CUSTOM: xi'' = c (constant); psi may be absent (psi = 0).
 * sigma = psi_sign flips psi -> -psi (the same family seen from the other
 * pole); xi_scale multiplies xi'' (used for perturbation controls).
 */
struct FAnsatzData {
  const PsiSolution* psi = nullptr;
  Family family = Family::CUSTOM;
  double c = 0.0;
  double d1 = 0.0;
  double p = 0.0;
  double d = 0.0;
  double psi_sign = 1.0;
  double xi_scale = 1.0;
  double f_scale = 1.0;

  /// Jet of sigma psi^(m) at y (zero when psi is absent).
  [[nodiscard]] YJet psi_jet(int m, double y) const {
    if (psi == nullptr) return YJet{};
    return psi_sign * psi->derivative_jet(m, y);
  }

  /// Jet of sigma (psi'' - psi).
  [[nodiscard]] YJet gap_jet(double y) const {
    if (psi == nullptr) return YJet{};
    return psi_sign * psi->curvature_gap_jet(y);
  }

  /// Jet of xi''.
  [[nodiscard]] YJet xi2_jet(double y) const {
    YJet v;
    switch (family) {
      case Family::FAM1: {
        const YJet dp = psi_jet(1, y);
        v = (d1 * psi_jet(0, y) + c) / (dp * dp);
        break;
      }
      case Family::FAM2: {
        if (psi == nullptr) throw DomainError("FAM2 ansatz requires psi");
        const YJet dp = psi_jet(1, y);
        v = c * (psi->square_gap_jet(y) + d1 * psi_jet(0, y) + p) / (dp * dp);
        break;
      }
      default:
        v = YJet::constant(c);
        break;
    }
    return xi_scale * v;
  }

  /// Lambda = Delta f = (psi'' - psi) cos x + xi''  (= 4 f_{z zbar}).
  [[nodiscard]] YField lambda_field(double y) const {
    YField h;
    h.cos_part = f_scale * gap_jet(y);
    h.constant_part = f_scale * xi2_jet(y);
    return h;
  }

  /// A = Re f_zz = -1/4 ((psi'' + psi) cos x + xi'' - 4d).
  [[nodiscard]] YField a_field(double y) const {
    YField h;
    const YJet ps = psi_jet(0, y);
    h.cos_part = (-0.25 * f_scale) * (gap_jet(y) + 2.0 * ps);
    h.constant_part = (-0.25 * f_scale) * (xi2_jet(y) - 4.0 * d);
    return h;
  }

  /// B = Im f_zz = 1/2 psi' sin x.
  [[nodiscard]] YField b_field(double y) const {
    YField h;
    h.sin_part = (0.5 * f_scale) * psi_jet(1, y);
    return h;
  }
};

/// Lambda and its partial derivatives up to second order at a point.
struct MetricPartials {
  double v = 0.0, x = 0.0, y = 0.0, xx = 0.0, xy = 0.0, yy = 0.0;
};

[[nodiscard]] inline MetricPartials partials_of(const YField& h, double x) {
  const double cx = std::cos(x), sx = std::sin(x);
  return {h.partial(0, 0, cx, sx), h.partial(1, 0, cx, sx), h.partial(0, 1, cx, sx),
          h.partial(2, 0, cx, sx), h.partial(1, 1, cx, sx), h.partial(0, 2, cx, sx)};
}

/// Extent of the positivity / witness probe grid.
inline constexpr int kProbeGrid = 64;
inline constexpr double kProbeHalfHeight = 3.0;

/**
 * @brief Conformal metric Lambda (dx^2 + dy^2).
 *
 * Either x-harmonic (Lambda = C(y) cos x + S(y) sin x + K(y), all partials
 * analytic to order kJetOrder in y) or a generic evaluator returning
 * partials up to second order. Positivity is recorded, never enforced.
 */
class ConformalMetric {
 public:
  using FieldFn = std::function<YField(double)>;
  using PartialsFn = std::function<MetricPartials(double, double)>;

  ConformalMetric(std::string name, FieldFn field, std::optional<FAnsatzData> ansatz = {})
      : name_(std::move(name)), field_(std::move(field)), ansatz_(std::move(ansatz)) {
    probe();
  }
  ConformalMetric(std::string name, PartialsFn partials)
      : name_(std::move(name)), partials_(std::move(partials)) {
    probe();
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] bool is_harmonic() const noexcept { return static_cast<bool>(field_); }
  [[nodiscard]] const std::optional<FAnsatzData>& ansatz() const noexcept { return ansatz_; }

  /// Harmonic decomposition at y (harmonic metrics only).
  [[nodiscard]] YField field(double y) const {
    if (!field_) throw DomainError(name_ + ": metric has no harmonic decomposition");
    return field_(y);
  }

  [[nodiscard]] MetricPartials partials(double x, double y) const {
    return field_ ? partials_of(field_(y), x) : partials_(x, y);
  }
  [[nodiscard]] double lambda(double x, double y) const {
    return field_ ? field_(y).partial(0, 0, x) : partials_(x, y).v;
  }
  /// lambda = Lambda / 4 = f_{z zbar}.
  [[nodiscard]] double lambda_small(double x, double y) const { return 0.25 * lambda(x, y); }

  /// Minimum of Lambda on the probe grid [0, 2pi) x [-3, 3].
  [[nodiscard]] double probe_min() const noexcept { return probe_min_; }
  [[nodiscard]] bool positive_on_probe() const noexcept { return probe_min_ > 0.0; }

  /// Reproducibility descriptor {family, c, d1, p, d, psi_tolerance, y_max}.
  [[nodiscard]] nlohmann::ordered_json descriptor() const {
    nlohmann::ordered_json j;
    j["name"] = name_;
    if (ansatz_) {
      const auto& a = *ansatz_;
      j["family"] = to_string(a.family);
      j["c"] = a.c;
      j["d1"] = a.d1;
      j["p"] = a.p;
      j["d"] = a.d;
      j["psi_tolerance"] = a.psi ? nlohmann::ordered_json(a.psi->tolerance()) : nlohmann::ordered_json();
      j["y_max"] = a.psi ? nlohmann::ordered_json(a.psi->y_max()) : nlohmann::ordered_json();
    } else {
      j["family"] = "generic";
    }
    j["positive_on_probe"] = positive_on_probe();
    return j;
  }

 private:
  void probe() {
    probe_min_ = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kProbeGrid; ++j) {
      const double y = -kProbeHalfHeight + 2.0 * kProbeHalfHeight * j / (kProbeGrid - 1);
      if (field_) {
        const YField h = field_(y);
        for (int i = 0; i < kProbeGrid; ++i)
          probe_min_ = std::min(probe_min_, h.partial(0, 0, 2.0 * std::numbers::pi * i / kProbeGrid));
      } else {
        for (int i = 0; i < kProbeGrid; ++i)
          probe_min_ = std::min(probe_min_, partials_(2.0 * std::numbers::pi * i / kProbeGrid, y).v);
      }
    }
  }

  std::string name_;
  FieldFn field_;
  PartialsFn partials_;
  std::optional<FAnsatzData> ansatz_;
  double probe_min_ = 0.0;
};

/// Metric of an f-ansatz: Lambda = Delta f.
[[nodiscard]] inline ConformalMetric metric_from_ansatz(std::string name, const FAnsatzData& a) {
  return ConformalMetric(std::move(name), [a](double y) { return a.lambda_field(y); }, a);
}

/// Lambda = (psi'' - psi) cos x + (d1 psi + c)/psi'^2.
[[nodiscard]] inline ConformalMetric build_family1(const PsiSolution& psi, double c, double d1 = 0.0) {
  FAnsatzData a;
  a.psi = &psi;
  a.family = Family::FAM1;
  a.c = c;
  a.d1 = d1;
  a.d = 0.0;
  return metric_from_ansatz("fam1", a);
}

/// Lambda = (psi'' - psi) cos x + c (psi'^2 - psi^2 + d1 psi + p)/psi'^2.
[[nodiscard]] inline ConformalMetric build_family2(const PsiSolution& psi, double c, double d1,
                                                   double p) {
  FAnsatzData a;
  a.psi = &psi;
  a.family = Family::FAM2;
  a.c = c;
  a.d1 = d1;
  a.p = p;
  a.d = 0.5 * c;
  return metric_from_ansatz("fam2", a);
}

/// Rotationally symmetric round sphere in (x, y): Lambda = sech^2 y.
[[nodiscard]] inline ConformalMetric round_sphere() {
  return ConformalMetric("round_sphere", [](double y) {
    // tanh jet from t' = 1 - t^2, then sech^2 = 1 - t^2
    YJet t = YJet::constant(std::tanh(y));
    t[1] = 1.0 - t[0] * t[0];
    for (int k = 1; k < kJetOrder; ++k) t[k + 1] = -(t * t)[k];
    YField h;
    h.constant_part = 1.0 - t * t;
    return h;
  });
}

/// Unit sphere in stereographic coordinates (u, v): Lambda = 4/(1+u^2+v^2)^2.
[[nodiscard]] inline ConformalMetric plane_sphere() {
  return ConformalMetric("plane_sphere", [](double u, double v) {
    const double w = 1.0 + u * u + v * v;
    const double L = 4.0 / (w * w);
    // partials of 4 w^-2
    const double Lw = -8.0 / (w * w * w);
    const double Lww = 24.0 / (w * w * w * w);
    return MetricPartials{L,
                          Lw * 2 * u,
                          Lw * 2 * v,
                          Lww * 4 * u * u + Lw * 2,
                          Lww * 4 * u * v,
                          Lww * 4 * v * v + Lw * 2};
  });
}

/// K = -(Lambda_xx + Lambda_yy - (Lambda_x^2 + Lambda_y^2)/Lambda) / (2 Lambda^2).
[[nodiscard]] inline double gauss_curvature(const ConformalMetric& m, double x, double y) {
  const MetricPartials L = m.partials(x, y);
  if (!(L.v > 0.0)) throw DomainError("gauss_curvature: Lambda <= 0 at the evaluation point");
  return -(L.xx + L.yy - (L.x * L.x + L.y * L.y) / L.v) / (2.0 * L.v * L.v);
}

struct GridPoint {
  double x = 0.0;
  double y = 0.0;
};

struct NontrivialityWitness {
  GridPoint mixed;      // |Lambda_xy| > delta
  GridPoint anisotropy; // |Lambda_xx - Lambda_yy| > delta
};

/**
 * Searches [0, 2pi) x [-3, 3] (64 x 64) for points where Lambda_xy and
 * Lambda_xx - Lambda_yy are nonzero; both must be found.
 */
[[nodiscard]] inline std::optional<NontrivialityWitness> nontriviality_witness(
    const ConformalMetric& m, double delta = 1e-6) {
  std::optional<GridPoint> mixed, aniso;
  for (int j = 0; j < kProbeGrid && !(mixed && aniso); ++j) {
    const double y = -kProbeHalfHeight + 2.0 * kProbeHalfHeight * j / (kProbeGrid - 1);
    for (int i = 0; i < kProbeGrid; ++i) {
      const double x = 2.0 * std::numbers::pi * i / kProbeGrid;
      const MetricPartials L = m.partials(x, y);
      if (!mixed && std::abs(L.xy) > delta) mixed = GridPoint{x, y};
      if (!aniso && std::abs(L.xx - L.yy) > delta) aniso = GridPoint{x, y};
    }
  }
  if (mixed && aniso) return NontrivialityWitness{*mixed, *aniso};
  return std::nullopt;
}

enum class Variant { S1, S2 };

/**
 * @brief H = (p_x^2 + p_y^2) / (2 Lambda_K(y)) + V(x, y) on S^2.
 *
 *   S1: Lambda_K = 1/psi'^2,             V = -psi'^2 (psi'' - psi) cos x
 *   S2: Lambda_K = (q + p)/psi'^2,       V = -psi'^2 (psi'' - psi) cos x / (q + p)
 * with q = psi'^2 - psi^2. psi_sign = -1 gives the same system written in
 * the south chart (x, y) -> (-x, -y), where V changes sign.
 */
struct NaturalSystem {
  const PsiSolution* psi = nullptr;
  Variant variant = Variant::S1;
  double p = 0.0;
  double psi_sign = 1.0;

  [[nodiscard]] YJet kinetic_jet(double y) const {
    const YJet dp = psi->derivative_jet(1, y);
    const YJet sq = dp * dp;
    if (variant == Variant::S1) return 1.0 / sq;
    return (psi->square_gap_jet(y) + p) / sq;
  }

  [[nodiscard]] YField potential_field(double y) const {
    const YJet dp = psi->derivative_jet(1, y);
    YJet cp = -psi_sign * (dp * dp) * psi->curvature_gap_jet(y);
    if (variant == Variant::S2) cp = cp / (psi->square_gap_jet(y) + p);
    YField h;
    h.cos_part = cp;
    return h;
  }

  [[nodiscard]] double kinetic(double y) const { return kinetic_jet(y)[0]; }
  [[nodiscard]] double potential(double x, double y) const {
    return potential_field(y).partial(0, 0, x);
  }
  [[nodiscard]] double hamiltonian(double x, double y, double px, double py) const {
    return 0.5 * (px * px + py * py) / kinetic(y) + potential(x, y);
  }

  /// The same system written in the opposite pole's chart.
  [[nodiscard]] NaturalSystem flipped() const {
    NaturalSystem s = *this;
    s.psi_sign = -psi_sign;
    return s;
  }

  [[nodiscard]] nlohmann::ordered_json descriptor() const {
    nlohmann::ordered_json j;
    j["system"] = variant == Variant::S1 ? "s1" : "s2";
    j["p"] = variant == Variant::S2 ? nlohmann::ordered_json(p) : nlohmann::ordered_json();
    j["psi_tolerance"] = psi->tolerance();
    j["y_max"] = psi->y_max();
    return j;
  }
};

/**
 * Natural system S1 or S2(p). For S2, p <= p0 makes Lambda_K vanish
 * somewhere on S^2: rejected in strict mode, otherwise the caller is
 * expected to report the returned flag.
 */
[[nodiscard]] inline NaturalSystem build_natural(const PsiSolution& psi, Variant variant,
                                                 std::optional<double> p = std::nullopt,
                                                 double p0 = 0.0, bool strict = false,
                                                 bool* positivity_warning = nullptr) {
  NaturalSystem s;
  s.psi = &psi;
  s.variant = variant;
  if (positivity_warning) *positivity_warning = false;
  if (variant == Variant::S2) {
    if (!p) throw DomainError("build_natural: S2 requires p");
    s.p = *p;
    if (!(*p > p0)) {
      if (strict)
        throw PositivityError("build_natural: S2 requires p > p0 = " + std::to_string(p0) +
                              ", got p = " + std::to_string(*p));
      if (positivity_warning) *positivity_warning = true;
    }
  }
  return s;
}

struct PotentialMax {
  double value = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/**
 * Maximum of V over S^2 (the (x,y) cylinder plus the poles, where V = 0).
 * V = C(y) cos x, so the maximum is max_y |C(y)|: a grid scan locates the
 * bracket, Brent's method refines it.
 */
[[nodiscard]] inline PotentialMax max_potential(const NaturalSystem& s) {
  const auto amp = [&](double y) { return s.potential_field(y).cos_part[0]; };
  const double ym = s.psi->y_max();
  const int n = static_cast<int>(std::ceil(2.0 * ym / 0.01));
  double best = 0.0, best_y = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = -ym + 2.0 * ym * i / n;
    if (std::abs(amp(y)) > std::abs(best)) {
      best = amp(y);
      best_y = y;
    }
  }
  const double lo = std::max(-ym, best_y - 0.02), hi = std::min(ym, best_y + 0.02);
  const auto r = boost::math::tools::brent_find_minima(
      [&](double y) { return -std::abs(amp(y)); }, lo, hi, std::numeric_limits<double>::digits / 2 + 4);
  const double val = amp(r.first);
  return {std::abs(val), val >= 0.0 ? 0.0 : std::numbers::pi, r.first};
}

/**
 * Jacobi (Maupertuis) metric Lambda_J = (E - V) Lambda_K; with
 * H_J = |p|^2 / (2 Lambda_J) the level {H_nat = E} maps onto {H_J = 1}.
 * The attached ansatz is the family the metric belongs to (S1 -> fam1(c=E),
 * S2(p) -> fam2(c=E, p)), which is what the quartic construction consumes.
 */
[[nodiscard]] inline ConformalMetric jacobi_metric(const NaturalSystem& s, double E) {
  FAnsatzData a;
  a.psi = s.psi;
  a.c = E;
  a.psi_sign = s.psi_sign;
  if (s.variant == Variant::S1) {
    a.family = Family::FAM1;
  } else {
    a.family = Family::FAM2;
    a.p = s.p;
    a.d = 0.5 * E;
  }
  return ConformalMetric(
      s.variant == Variant::S1 ? "jacobi_s1" : "jacobi_s2",
      [s, E](double y) {
        const YJet K = s.kinetic_jet(y);
        const YField V = s.potential_field(y);
        YField h;
        h.cos_part = -1.0 * (V.cos_part * K);
        h.constant_part = E * K;
        return h;
      },
      a);
}

enum class Chart { NORTH, SOUTH };

[[nodiscard]] inline const char* to_string(Chart c) { return c == Chart::NORTH ? "N" : "S"; }

struct PlaneValues {
  double kinetic_factor = 0.0;  // Lambda_K / r^2: metric factor in (u, v)
  double potential = 0.0;
};

/**
 * Natural system in the plane chart of a pole: u = r cos x, v = r sin x with
 * r = e^y (north) or r = e^{-y}, x -> -x (south); t = r^2.
 *   S1: factor 1/nu(t)^2, potential +- mu(t) u
 *   S2: factor (Phi(t) + p + 1)/nu(t)^2, potential +- mu(t) u / (Phi(t) + p + 1)
 * The south potential carries the minus sign; the kinetic factor is the same
 * in both charts because Lambda_K is even in y.
 */
[[nodiscard]] inline PlaneValues to_plane_chart(const NaturalSystem& s, Chart chart, double u,
                                                double v) {
  const double t = u * u + v * v;
  if (t > 4.0) throw OutOfChart("to_plane_chart: r^2 = " + std::to_string(t) + " exceeds 4");
  const NuMu nm = nu_mu(*s.psi, t);
  const double sign = (chart == Chart::NORTH ? 1.0 : -1.0) * s.psi_sign;
  PlaneValues out;
  if (s.variant == Variant::S1) {
    out.kinetic_factor = 1.0 / (nm.nu * nm.nu);
    out.potential = sign * nm.mu * u;
  } else {
    const double w = phi(*s.psi, t) + s.p + 1.0;
    out.kinetic_factor = w / (nm.nu * nm.nu);
    out.potential = sign * nm.mu * u / w;
  }
  return out;
}

struct StencilProbe {
  double kinetic = 0.0;
  double potential = 0.0;
};

/**
 * C^2 probe at a pole. For each of the kinetic factor and the potential it
 * returns the larger of
 *   - |Laplacian from the u/v axis stencils - Laplacian from the diagonal
 *     stencils| (second-order jet is a quadratic form), and
 *   - |second derivative with step h - with step h/2| along both axes
 *     (stencils converge; a cone such as r itself diverges like 1/h).
 */
[[nodiscard]] inline StencilProbe plane_c2_probe(const NaturalSystem& s, Chart chart, double h = 0.01) {
  const auto eval = [&](double u, double v) { return to_plane_chart(s, chart, u, v); };
  const PlaneValues c = eval(0, 0);
  const auto probe = [&](auto pick) {
    const auto second = [&](double du, double dv) {
      // 5-point 4th-order second derivative along (du, dv)
      return (-pick(eval(2 * du, 2 * dv)) + 16 * pick(eval(du, dv)) - 30 * pick(c) +
              16 * pick(eval(-du, -dv)) - pick(eval(-2 * du, -2 * dv))) /
             (12 * (du * du + dv * dv));
    };
    const double r = h / std::numbers::sqrt2;
    const double uu = second(h, 0), vv = second(0, h);
    const double iso = std::abs(uu + vv - second(r, r) - second(r, -r));
    const double conv = std::max(std::abs(uu - second(h / 2, 0)), std::abs(vv - second(0, h / 2)));
    return std::max(iso, conv);
  };
  StencilProbe out;
  out.kinetic = probe([](const PlaneValues& p) { return p.kinetic_factor; });
  out.potential = probe([](const PlaneValues& p) { return p.potential; });
  return out;
}

/// Kovalevskaya-comparison value Psi_2(1) - Psi_0(1) = psi''(0) - psi(0).
[[nodiscard]] inline double kovalevskaya_comparison(const PsiSolution& psi) {
  return psi.curvature_gap_jet(0.0)[0];
}

/**
 * Inequivalence of S2(p1) and S2(p2): equivalence would require
 * psi'' - psi to vanish at some kappa != 0, which the root scan excludes,
 * and then forces p1 = p2. Returns true when the systems are distinct.
 */
[[nodiscard]] inline bool distinctness_check(const PsiSolution& psi, double p1, double p2,
                                             double p0 = 0.0) {
  if (!(p1 > p0 && p2 > p0)) throw DomainError("distinctness_check: requires p1, p2 > p0");
  const auto roots = potential_root_scan(psi);
  if (roots.size() != 1 || std::abs(roots.front()) > 1e-12)
    throw Inconclusive("distinctness_check: psi'' - psi has " + std::to_string(roots.size()) +
                       " roots; the obstruction needs exactly the root at 0");
  return p1 != p2;
}

}  // namespace qfl
