#pragma once

// Second-order forward-mode jets over at most four real variables
// (x_1, y_1, x_2, y_2). Enough to differentiate metric weights and Kähler
// potentials on CP^1 and CP^2 without finite differences.

#include <array>
#include <cmath>
#include <complex>

namespace szlab {

struct Jet2 {
  static constexpr int kVars = 4;

  double v = 0.0;
  std::array<double, kVars> g{};
  std::array<double, kVars * kVars> h{};

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet2 variable(double value, int index) {
    Jet2 j(value);
    j.g[index] = 1.0;
    return j;
  }

  double hess(int a, int b) const { return h[a * kVars + b]; }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r(a.v + b.v);
  for (int i = 0; i < Jet2::kVars; ++i) r.g[i] = a.g[i] + b.g[i];
  for (int i = 0; i < Jet2::kVars * Jet2::kVars; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r(-a.v);
  for (int i = 0; i < Jet2::kVars; ++i) r.g[i] = -a.g[i];
  for (int i = 0; i < Jet2::kVars * Jet2::kVars; ++i) r.h[i] = -a.h[i];
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) { return a + (-b); }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r(a.v * b.v);
  constexpr int n = Jet2::kVars;
  for (int i = 0; i < n; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r.h[i * n + j] = a.h[i * n + j] * b.v + a.v * b.h[i * n + j] +
                       a.g[i] * b.g[j] + a.g[j] * b.g[i];
  return r;
}

/// Applies a scalar function with derivatives (f, f', f'') to a jet.
inline Jet2 chain(const Jet2& a, double f, double df, double d2f) {
  Jet2 r(f);
  constexpr int n = Jet2::kVars;
  for (int i = 0; i < n; ++i) r.g[i] = df * a.g[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r.h[i * n + j] = df * a.h[i * n + j] + d2f * a.g[i] * a.g[j];
  return r;
}

inline Jet2 reciprocal(const Jet2& a) {
  double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 log(const Jet2& a) {
  return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}

inline Jet2 exp(const Jet2& a) {
  double e = std::exp(a.v);
  return chain(a, e, e, e);
}

inline Jet2 ipow(const Jet2& a, int k) {
  if (k == 0) return Jet2(1.0);
  if (k < 0) return reciprocal(ipow(a, -k));
  double f = std::pow(a.v, k);
  double df = k * std::pow(a.v, k - 1);
  double d2f = k > 1 ? k * (k - 1) * std::pow(a.v, k - 2) : 0.0;
  return chain(a, f, df, d2f);
}

/// Complex-valued jet (real and imaginary parts carried separately).
struct CJet {
  Jet2 re;
  Jet2 im;

  CJet() = default;
  CJet(const Jet2& r, const Jet2& i) : re(r), im(i) {}
  CJet(std::complex<double> c) : re(c.real()), im(c.imag()) {}  // NOLINT
};

inline CJet operator+(const CJet& a, const CJet& b) { return {a.re + b.re, a.im + b.im}; }
inline CJet operator-(const CJet& a, const CJet& b) { return {a.re - b.re, a.im - b.im}; }
inline CJet operator*(const CJet& a, const CJet& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Jet2 norm2(const CJet& a) { return a.re * a.re + a.im * a.im; }
inline CJet operator/(const CJet& a, const CJet& b) {
  Jet2 inv = reciprocal(norm2(b));
  return {(a.re * b.re + a.im * b.im) * inv, (a.im * b.re - a.re * b.im) * inv};
}

/// Wirtinger derivative d/dz_q of a real jet, with (x_q, y_q) at indices (2q, 2q+1).
inline std::complex<double> wirtinger_dz(const Jet2& f, int q) {
  return {0.5 * f.g[2 * q], -0.5 * f.g[2 * q + 1]};
}

/// d^2 f / dz_q dzbar_r.
inline std::complex<double> wirtinger_dz_dzbar(const Jet2& f, int q, int r) {
  const int xq = 2 * q, yq = 2 * q + 1, xr = 2 * r, yr = 2 * r + 1;
  return 0.25 * std::complex<double>(f.hess(xq, xr) + f.hess(yq, yr),
                                     f.hess(xq, yr) - f.hess(yq, xr));
}

/// d^2 f / dz_q dz_r.
inline std::complex<double> wirtinger_dz_dz(const Jet2& f, int q, int r) {
  const int xq = 2 * q, yq = 2 * q + 1, xr = 2 * r, yr = 2 * r + 1;
  return 0.25 * std::complex<double>(f.hess(xq, xr) - f.hess(yq, yr),
                                     -(f.hess(xq, yr) + f.hess(yq, xr)));
}

}  // namespace szlab
