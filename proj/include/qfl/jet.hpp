/**
 * @file jet.hpp
 * @brief Truncated derivative arrays in one variable and x-harmonic fields.
 *
 * A Jet<N> holds (f, f', ..., f^(N)) at a single point. Arithmetic follows
 * the Leibniz rule, so products and quotients of jets give exact derivative
 * arrays of the product/quotient up to order N.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace qfl {

template <int N>
struct Jet {
  static_assert(N >= 0);
  static constexpr int order = N;
  std::array<double, N + 1> d{};

  constexpr double& operator[](int k) { return d[static_cast<std::size_t>(k)]; }
  constexpr double operator[](int k) const { return d[static_cast<std::size_t>(k)]; }

  [[nodiscard]] static constexpr Jet constant(double v) {
    Jet j;
    j.d[0] = v;
    return j;
  }

  /// Jet of f'. The top entry is not known at this order and is set to zero.
  [[nodiscard]] constexpr Jet derivative() const {
    Jet j;
    for (int k = 0; k < N; ++k) j[k] = (*this)[k + 1];
    return j;
  }

  /// Derivatives of f(-y) given derivatives of f at y.
  [[nodiscard]] constexpr Jet reflected() const {
    Jet j = *this;
    for (int k = 1; k <= N; k += 2) j[k] = -j[k];
    return j;
  }

  constexpr Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= N; ++k) (*this)[k] += o[k];
    return *this;
  }
  constexpr Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= N; ++k) (*this)[k] -= o[k];
    return *this;
  }
  constexpr Jet& operator*=(double s) {
    for (auto& v : d) v *= s;
    return *this;
  }
};

namespace detail {
// Binomial coefficients for the small orders used here.
[[nodiscard]] constexpr double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}
}  // namespace detail

template <int N>
[[nodiscard]] constexpr Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator-(Jet<N> a) { return a *= -1.0; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator*(Jet<N> a, double s) { return a *= s; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator*(double s, Jet<N> a) { return a *= s; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator+(Jet<N> a, double s) { a[0] += s; return a; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator+(double s, Jet<N> a) { a[0] += s; return a; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator-(Jet<N> a, double s) { a[0] -= s; return a; }
template <int N>
[[nodiscard]] constexpr Jet<N> operator-(double s, Jet<N> a) { a *= -1.0; a[0] += s; return a; }

template <int N>
[[nodiscard]] constexpr Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (int n = 0; n <= N; ++n) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) s += detail::binom(n, k) * a[k] * b[n - k];
    r[n] = s;
  }
  return r;
}

/// Quotient by the recurrence b*q = a, solved order by order.
template <int N>
[[nodiscard]] constexpr Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> q;
  for (int n = 0; n <= N; ++n) {
    double s = a[n];
    for (int k = 1; k <= n; ++k) s -= detail::binom(n, k) * b[k] * q[n - k];
    q[n] = s / b[0];
  }
  return q;
}

template <int N>
[[nodiscard]] constexpr Jet<N> operator/(double s, const Jet<N>& b) {
  return Jet<N>::constant(s) / b;
}

template <int N>
[[nodiscard]] constexpr Jet<N> operator/(Jet<N> a, double s) { return a *= 1.0 / s; }

/**
 * @brief Field of the form C(y) cos x + S(y) sin x + K(y).
 *
 * All ansatz-derived quantities (f_zz, lambda, the conformal factor, the
 * natural potentials) live in this class, which makes every mixed partial
 * derivative analytic.
 */
template <int N>
struct Harmonic {
  Jet<N> cos_part{};
  Jet<N> sin_part{};
  Jet<N> constant_part{};

  /// d^i/dx^i d^j/dy^j evaluated at x, with j <= N.
  [[nodiscard]] double partial(int i, int j, double cx, double sx) const {
    // derivatives of cos x and sin x cycle with period 4
    double dc = 0.0;
    double ds = 0.0;
    switch (i % 4) {
      case 0: dc = cx;  ds = sx;  break;
      case 1: dc = -sx; ds = cx;  break;
      case 2: dc = -cx; ds = -sx; break;
      default: dc = sx; ds = -cx; break;
    }
    double v = cos_part[j] * dc + sin_part[j] * ds;
    if (i == 0) v += constant_part[j];
    return v;
  }

  [[nodiscard]] double partial(int i, int j, double x) const {
    return partial(i, j, std::cos(x), std::sin(x));
  }
};

}  // namespace qfl
