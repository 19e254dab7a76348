#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lingrow/density2d.hpp"

namespace lingrow {

// Numerical recession slope f_inf(xi) = lim_{t->inf} f(t*xi)/t, evaluated at
// t in {1e3, 1e4, 1e5, 1e6} after subtracting f(0).  For convex f the
// sequence is monotone increasing, so `value` is a lower estimate of the
// true limit.  Non-convergence (relative change above 1e-3 between the last
// two scales) is flagged instead of silently reported.
struct RecessionEstimate {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  std::array<double, 4> samples{};
};

namespace detail {

inline RecessionEstimate recession_of(const std::function<double(double)>& f_along) {
  RecessionEstimate r;
  const double f0 = f_along(0.0);
  const std::array<double, 4> ts{1e3, 1e4, 1e5, 1e6};
  for (std::size_t i = 0; i < ts.size(); ++i)
    r.samples[i] = (f_along(ts[i]) - f0) / ts[i];
  const double d1 = r.samples[1] - r.samples[0];
  const double d2 = r.samples[2] - r.samples[1];
  const double d3 = r.samples[3] - r.samples[2];
  const double scale = std::max(std::abs(r.samples[3]), 1e-300);

  if (std::abs(d3) <= 1e-12 * scale) {
    // Already flat at these scales.
    r.value = r.samples[3];
    r.error_estimate = std::abs(d3);
    r.converged = true;
    return r;
  }
  const double ratio = d2 / d3;
  if (!(ratio > 1.02)) {
    // Corrections not shrinking: superlinear growth or no power-law tail.
    r.value = r.samples[3];
    r.error_estimate = std::abs(d3);
    r.converged = false;
    return r;
  }
  // Fit the correction order p from the last three samples (decade-spaced),
  // then extrapolate the two trailing pairs with the same p; their agreement
  // is the convergence criterion.
  const double p = std::log10(ratio);
  const double denom = std::pow(10.0, p) - 1.0;
  const double extrap_hi = r.samples[3] + d3 / denom;
  const double extrap_lo = r.samples[2] + d2 / denom;
  r.value = extrap_hi;
  r.error_estimate = std::abs(extrap_hi - extrap_lo);
  r.converged =
      r.error_estimate <= 1e-3 * std::max(std::abs(extrap_hi), 1e-300);
  (void)d1;
  return r;
}

} // namespace detail

inline RecessionEstimate recession(const ScalarDensity& f, double direction = 1.0) {
  return detail::recession_of([&](double t) { return f.value(t * direction); });
}

inline RecessionEstimate recession(const Density2D& f, const Vec2& direction) {
  return detail::recession_of([&](double t) {
    return f.value({t * direction[0], t * direction[1]});
  });
}

// Certified growth constants on a bounded range: the upper line uses the
// recession slope (for convex f with f' increasing toward it, f(t) <= f(0) +
// f_inf * |t| on t >= 0), the lower line a supporting line at the right end
// of the range.  Both are then verified against samples; a1 <= 0 means the
// density is not uniformly of linear growth on this range.
inline GrowthConstants growth_constants(const ScalarDensity& f, double lo,
                                        double hi, int samples = 1024) {
  if (!(hi > lo)) throw std::invalid_argument("growth_constants: empty range");
  GrowthConstants g;
  g.lo = lo;
  g.hi = hi;

  const RecessionEstimate rp = recession(f, 1.0);
  const double slope_hi = f.deriv(hi);
  const double slope_lo = f.deriv(lo);
  g.a3 = std::max({rp.value, std::abs(slope_hi), std::abs(slope_lo)});
  g.a1 = lo < 0.0 ? std::min(slope_hi, -slope_lo) : slope_hi;

  double a4 = 0.0;
  double a2 = 0.0;
  bool lower_ok = g.a1 > 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = lo + (hi - lo) * i / samples;
    const double v = f.value(t);
    a4 = std::max(a4, v - g.a3 * std::abs(t));
    a2 = std::max(a2, g.a1 * std::abs(t) - v);
  }
  g.a4 = a4;
  g.a2 = a2;
  g.uniform_linear = lower_ok && rp.converged;
  return g;
}

// Checks a candidate constant set against samples; used by callers probing
// specific published constants.
inline bool growth_bounds_hold(const ScalarDensity& f, double a1, double a2,
                               double a3, double a4, double lo, double hi,
                               int samples = 2048) {
  for (int i = 0; i <= samples; ++i) {
    const double t = lo + (hi - lo) * i / samples;
    const double v = f.value(t);
    if (v < a1 * std::abs(t) - a2 - 1e-12) return false;
    if (v > a3 * std::abs(t) + a4 + 1e-12) return false;
  }
  return true;
}

} // namespace lingrow
