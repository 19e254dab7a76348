#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lingrow/density2d.hpp"
#include "lingrow/growth.hpp"

namespace lingrow {

// Certified two-sided ellipticity exponents on a sample range:
//   c1 (1+|t|)^(-mu_fit) <= f''(t) <= c2 (1+|t|)^(-kappa_fit)
// at every sample; mu_fit >= kappa_fit.  The fit can only falsify an all-t
// statement, so the sample range is always recorded alongside.
struct EllipticityReport {
  double mu_fit = 0.0;
  double kappa_fit = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int samples = 0;
  // f'' bounded above by a constant on the range (upper bound exponent >= 0),
  // the upper-bound shape required by the splitting theorem.
  bool bounded_second = false;
  // No exponent up to 16 certifies a meaningful lower bound: f'' decays
  // faster than any tested power of (1+|t|).
  bool lower_bound_fails_all_mu = false;
  std::string note;

  nlohmann::json to_json() const {
    return {{"mu_fit", mu_fit},       {"kappa_fit", kappa_fit},
            {"c1", c1},               {"c2", c2},
            {"range", {lo, hi}},      {"samples", samples},
            {"bounded_second", bounded_second},
            {"lower_bound_fails_all_mu", lower_bound_fails_all_mu},
            {"note", note}};
  }
};

namespace detail {

// Extreme log-log chord slopes of a positive series y(x), x = log(1+t):
// max slope certifies the lower-envelope exponent, min slope the upper.
// Chords span at least `min_span` in x so local jitter cannot dominate.
struct ChordSlopes {
  double steepest = 0.0;
  double flattest = 0.0;
  bool any = false;
};

inline ChordSlopes chord_slopes(const std::vector<double>& x,
                                const std::vector<double>& logy,
                                double min_span) {
  ChordSlopes out;
  out.steepest = -1e300;
  out.flattest = 1e300;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double span = x[j] - x[i];
      if (span < min_span) continue;
      const double slope = (logy[i] - logy[j]) / span;
      out.steepest = std::max(out.steepest, slope);
      out.flattest = std::min(out.flattest, slope);
      out.any = true;
    }
  }
  if (!out.any && x.size() >= 2) {
    const double slope = (logy.front() - logy.back()) / (x.back() - x.front());
    out.steepest = out.flattest = slope;
    out.any = true;
  }
  return out;
}

inline std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(n) + 1);
  ts.push_back(0.0);
  const double start = std::max(lo, 1e-3);
  for (int i = 0; i < n; ++i)
    ts.push_back(start * std::pow(hi / start, static_cast<double>(i) / (n - 1)));
  return ts;
}

} // namespace detail

// Fits mu, kappa for a scalar density on [0, hi].  Densities failing the
// linear-growth gate (divergent recession) are rejected up front; non-convex
// samples abort with the offending location.
inline EllipticityReport fit_scalar_ellipticity(const ScalarDensity& f,
                                                double lo, double hi,
                                                int samples = 1000) {
  if (samples < 100)
    throw std::invalid_argument("fit_scalar_ellipticity: samples >= 100 required");
  if (hi < 100.0)
    throw std::invalid_argument("fit_scalar_ellipticity: range must cover [0, 100]");

  const GrowthConstants g = growth_constants(f, std::max(lo, 0.0), hi);
  if (!g.uniform_linear)
    throw std::domain_error(
        "fit_scalar_ellipticity: density fails the linear-growth check on this range");

  EllipticityReport rep;
  rep.lo = std::max(lo, 0.0);
  rep.hi = hi;
  rep.samples = samples;

  const auto ts = detail::log_spaced(rep.lo <= 0.0 ? 1e-3 : rep.lo, hi, samples);
  std::vector<double> xs, ys, f2s;
  xs.reserve(ts.size());
  for (double t : ts) {
    double d2 = f.second(t);
    if (d2 < 0.0 || std::isnan(d2))
      throw std::domain_error("fit_scalar_ellipticity: f'' <= 0 at t = " +
                              std::to_string(t));
    if (d2 == 0.0) {
      // Strictly convex densities can underflow at large t (exponential
      // decay); clamp so the fit reports the collapse instead of aborting.
      d2 = std::numeric_limits<double>::min();
      rep.note = "f'' underflowed at large t; exponents clamped";
    }
    xs.push_back(std::log1p(t));
    ys.push_back(std::log(d2));
    f2s.push_back(d2);
  }

  const auto chords = detail::chord_slopes(xs, ys, 0.8 * std::log(10.0));
  rep.mu_fit = chords.steepest;
  rep.kappa_fit = chords.flattest;

  double c1 = 1e300, c2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    c1 = std::min(c1, f2s[i] * std::exp(rep.mu_fit * xs[i]));
    c2 = std::max(c2, f2s[i] * std::exp(rep.kappa_fit * xs[i]));
  }
  rep.c1 = c1;
  rep.c2 = c2;
  rep.bounded_second = rep.kappa_fit >= -0.05;

  // Lower-bound probe: if f''(t)(1+t)^mu still collapses at the far end for
  // every mu up to 16, no polynomial rate certifies the lower bound here.
  bool fails_all = true;
  const double ref = f.second(0.0);
  for (int mu = 1; mu <= 16; ++mu) {
    const double tail = f2s.back() * std::exp(static_cast<double>(mu) * xs.back());
    if (tail > 1e-6 * ref) {
      fails_all = false;
      break;
    }
  }
  rep.lower_bound_fails_all_mu = fails_all;
  if (fails_all)
    rep.note = "lower bound of the two-sided ellipticity condition fails for "
               "every mu on this range";
  return rep;
}

// Fits exponents for a 2-D density from extreme Hessian eigenvalues sampled
// on an annulus grid of |xi| <= R: per-shell minimum eigenvalue drives mu,
// per-shell maximum drives kappa.
inline EllipticityReport fit_full_ellipticity(const Density2D& f, double radius,
                                              int shells = 48,
                                              int directions = 64) {
  if (!(radius > 1.0))
    throw std::invalid_argument("fit_full_ellipticity: radius > 1 required");
  EllipticityReport rep;
  rep.lo = 0.0;
  rep.hi = radius;
  rep.samples = shells * directions;

  std::vector<double> xs, log_min, log_max;
  const double r0 = 1e-2;
  for (int s = -1; s < shells; ++s) {
    const double r =
        s < 0 ? 0.0 : r0 * std::pow(radius / r0, static_cast<double>(s) / (shells - 1));
    double emin = 1e300, emax = -1e300;
    const int ndir = s < 0 ? 1 : directions;
    for (int d = 0; d < ndir; ++d) {
      const double th = 2.0 * M_PI * d / directions;
      const Vec2 xi{r * std::cos(th), r * std::sin(th)};
      const auto eig = f.hessian(xi).eigenvalues();
      if (!(eig[0] > 0.0))
        throw std::domain_error(
            "fit_full_ellipticity: Hessian not positive definite at |xi| = " +
            std::to_string(r));
      emin = std::min(emin, eig[0]);
      emax = std::max(emax, eig[1]);
    }
    xs.push_back(std::log1p(r));
    log_min.push_back(std::log(emin));
    log_max.push_back(std::log(emax));
  }

  const double span = 0.8 * std::log(10.0);
  rep.mu_fit = detail::chord_slopes(xs, log_min, span).steepest;
  rep.kappa_fit = detail::chord_slopes(xs, log_max, span).flattest;

  double c1 = 1e300, c2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    c1 = std::min(c1, std::exp(log_min[i] + rep.mu_fit * xs[i]));
    c2 = std::max(c2, std::exp(log_max[i] + rep.kappa_fit * xs[i]));
  }
  rep.c1 = c1;
  rep.c2 = c2;
  rep.bounded_second = rep.kappa_fit >= -0.05;
  return rep;
}

} // namespace lingrow
