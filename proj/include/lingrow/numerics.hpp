#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>

namespace lingrow::detail {

inline double sq(double x) { return x * x; }

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Exponential integral Ei(x) for x > 0 via the convergent power series
// Ei(x) = gamma + ln x + sum_{n>=1} x^n / (n * n!).  Adequate for x up to
// a few hundred; arguments here stay below ~25.
inline double expint_ei(double x) {
  if (!(x > 0.0)) throw std::domain_error("expint_ei: requires x > 0");
  constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
  double sum = 0.0;
  double term = 1.0;
  for (int n = 1; n < 1000; ++n) {
    term *= x / n;
    const double add = term / n;
    sum += add;
    if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return kEulerGamma + std::log(x) + sum;
}

// li(x) = Ei(ln x), x > 1.
inline double logint(double x) { return expint_ei(std::log(x)); }

// Adaptive Simpson quadrature with absolute tolerance.
inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-10, int max_depth = 60) {
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre16 {
  static constexpr int n = 16;
  static constexpr double x[16] = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
      -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
      -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
      0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
      0.9894009349916499};
  static constexpr double w[16] = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
      0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
      0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
      0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
      0.0271524594117541};
};

// Composite 16-point Gauss-Legendre over [a, b] split into `panels` panels.
inline double gauss_legendre(const std::function<double(double)>& f, double a,
                             double b, int panels = 8) {
  using G = GaussLegendre16;
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    const double half = 0.5 * h;
    double acc = 0.0;
    for (int i = 0; i < G::n; ++i) acc += G::w[i] * f(mid + half * G::x[i]);
    total += acc * half;
  }
  return total;
}

// C^1 cubic ramp: 0 at u<=0, 1 at u>=1, slope 0 at both ends, max slope 1.5.
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

inline double smoothstep_deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 6.0 * u * (1.0 - u);
}

// Deterministic 64-bit mix, used to derive per-purpose RNG streams from a
// single run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace lingrow::detail
