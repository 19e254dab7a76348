#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lingrow/density2d.hpp"

namespace lingrow {

// One traced closed level curve [f = c] with the quantities entering the
// kappa-bound argument: the circumscribed-contact point p (the point of
// maximal |xi| on the curve), its radius r = |p|, the arc-length curvature
// |gamma''| there, and |Df| there.
struct LevelTrace {
  double level = 0.0;
  double radius = 0.0;          // r_k = |p_k|
  double curvature = 0.0;       // |gamma''(t_k)|
  double grad_norm = 0.0;       // |Df(p_k)|
  Vec2 contact{0.0, 0.0};
  double closure_gap = 0.0;     // endpoint mismatch, must be < arc step
  double max_level_error = 0.0; // max |f - c| / c along the curve
  bool convex = false;          // curvature kept one sign along the trace
  int points = 0;
  std::vector<Vec2> curve;      // arc-length samples when keep_points is set
  bool ok = false;
  std::string error;
};

struct TraceOptions {
  double corrector_tol = 1e-12;
  int max_steps = 2000000;
  double escape_radius = 1e7;
  bool keep_points = false;
};

namespace detail {

inline double signed_curvature(const Density2D& f, const Vec2& p) {
  const Vec2 g = f.gradient(p);
  const Sym2 H = f.hessian(p);
  const double gn = std::hypot(g[0], g[1]);
  // (fy^2 fxx - 2 fx fy fxy + fx^2 fyy) / |Df|^3
  const double num = g[1] * g[1] * H.h11 - 2.0 * g[0] * g[1] * H.h12 +
                     g[0] * g[0] * H.h22;
  return num / (gn * gn * gn);
}

// Newton correction back onto [f = c] along the gradient direction.
inline bool correct_to_level(const Density2D& f, double c, Vec2& p, double tol,
                             int iters = 12) {
  for (int i = 0; i < iters; ++i) {
    const double r = f.value(p) - c;
    if (std::abs(r) <= tol * std::max(1.0, std::abs(c))) return true;
    const Vec2 g = f.gradient(p);
    const double g2 = g[0] * g[0] + g[1] * g[1];
    if (g2 <= 0.0) return false;
    p[0] -= r * g[0] / g2;
    p[1] -= r * g[1] / g2;
  }
  return std::abs(f.value(p) - c) <= 10.0 * tol * std::max(1.0, std::abs(c));
}

} // namespace detail

// Predictor-corrector trace of the closed convex curve [f = c], arc-length
// stepped with step <= min(0.1/|gamma''|, 1e-2 * r), starting on the
// positive x-ray.  Unbounded or unreachable level sets are reported as
// errors rather than traced.
inline LevelTrace trace_level_set(const Density2D& f, double c,
                                  const TraceOptions& opt = {}) {
  LevelTrace out;
  out.level = c;
  if (!(c > f.value({0.0, 0.0}))) {
    out.error = "level below the density minimum";
    return out;
  }

  // Start point on the +x ray.
  double rlo = 0.0, rhi = 1.0;
  while (f.value({rhi, 0.0}) < c) {
    rlo = rhi;
    rhi *= 2.0;
    if (rhi > opt.escape_radius) {
      out.error = "level set unbounded along +x (no linear growth?)";
      return out;
    }
  }
  for (int i = 0; i < 200; ++i) {
    const double rm = 0.5 * (rlo + rhi);
    (f.value({rm, 0.0}) < c ? rlo : rhi) = rm;
  }
  Vec2 p{0.5 * (rlo + rhi), 0.0};
  if (!detail::correct_to_level(f, c, p, opt.corrector_tol)) {
    out.error = "corrector failed at start point";
    return out;
  }
  const Vec2 start = p;
  const double r_start = std::hypot(start[0], start[1]);

  double arc = 0.0;
  double min_kappa = 1e300, max_kappa = -1e300;
  double max_lvl_err = 0.0;
  double best_r2 = -1.0;
  Vec2 best_p = p;
  double step_last = 0.0;

  int n = 0;
  for (; n < opt.max_steps; ++n) {
    if (opt.keep_points) out.curve.push_back(p);
    const double kappa = detail::signed_curvature(f, p);
    min_kappa = std::min(min_kappa, kappa);
    max_kappa = std::max(max_kappa, kappa);
    const double r2 = p[0] * p[0] + p[1] * p[1];
    if (r2 > best_r2) {
      best_r2 = r2;
      best_p = p;
    }
    max_lvl_err = std::max(
        max_lvl_err, std::abs(f.value(p) - c) / std::max(1.0, std::abs(c)));

    const double step =
        std::min(0.1 / std::max(std::abs(kappa), 1e-12), 1e-2 * r_start);
    step_last = step;
    const Vec2 g = f.gradient(p);
    const double gn = std::hypot(g[0], g[1]);
    if (!(gn > 0.0)) {
      out.error = "vanishing gradient on the curve";
      return out;
    }
    // Counterclockwise tangent.
    const Vec2 tau{-g[1] / gn, g[0] / gn};
    Vec2 q{p[0] + step * tau[0], p[1] + step * tau[1]};
    if (!detail::correct_to_level(f, c, q, opt.corrector_tol)) {
      out.error = "corrector failed mid-trace";
      return out;
    }
    arc += std::hypot(q[0] - p[0], q[1] - p[1]);
    p = q;
    if (std::hypot(p[0] - start[0], p[1] - start[1]) < step &&
        arc > 10.0 * step)
      break;
    if (std::hypot(p[0], p[1]) > opt.escape_radius) {
      out.error = "trace escaped; level set appears unbounded";
      return out;
    }
  }
  if (n >= opt.max_steps) {
    out.error = "step budget exhausted before the curve closed";
    return out;
  }

  // Local refinement of the dense argmax of |xi| along the curve: shrinking
  // tangent moves, each re-corrected onto the level set.
  Vec2 contact = best_p;
  double s = step_last;
  for (int it = 0; it < 60 && s > 1e-14 * r_start; ++it) {
    const Vec2 g = f.gradient(contact);
    const double gn = std::hypot(g[0], g[1]);
    const Vec2 tau{-g[1] / gn, g[0] / gn};
    bool improved = false;
    for (double dir : {1.0, -1.0}) {
      Vec2 cand{contact[0] + dir * s * tau[0], contact[1] + dir * s * tau[1]};
      if (!detail::correct_to_level(f, c, cand, opt.corrector_tol)) continue;
      if (cand[0] * cand[0] + cand[1] * cand[1] > best_r2) {
        best_r2 = cand[0] * cand[0] + cand[1] * cand[1];
        contact = cand;
        improved = true;
        break;
      }
    }
    if (!improved) s *= 0.5;
  }

  out.contact = contact;
  out.radius = std::hypot(contact[0], contact[1]);
  out.curvature = std::abs(detail::signed_curvature(f, contact));
  const Vec2 gc = f.gradient(contact);
  out.grad_norm = std::hypot(gc[0], gc[1]);
  out.closure_gap = std::hypot(p[0] - start[0], p[1] - start[1]);
  out.max_level_error = max_lvl_err;
  out.convex = (min_kappa > 0.0) == (max_kappa > 0.0);
  out.points = n + 1;
  out.ok = true;
  return out;
}

// Per-level row of the kappa-bound probe.
struct Lemma1Row {
  double c_k = 0.0;
  double r_k = 0.0;
  double curvature = 0.0;
  double grad_norm = 0.0;
  double product = 0.0;   // |gamma''| |Df| (1+r)^kappa
  double ratio = 0.0;     // r (1+r)^(-kappa), the contradiction quantity
  bool curvature_floor = false;  // |gamma''| >= 1/r_k
  bool ok = false;
  std::string error;
};

struct Lemma1Report {
  double kappa = 0.0;
  std::vector<Lemma1Row> rows;
  // "violated": the ratio sequence trends to zero, so no constant c2 can
  // close the bound as k grows.  "consistent": ratio stays bounded below.
  std::string verdict;
  bool product_grows = false;

  nlohmann::json to_json() const {
    nlohmann::json rws = nlohmann::json::array();
    for (const auto& r : rows)
      rws.push_back({{"c_k", r.c_k},
                     {"r_k", r.r_k},
                     {"curvature", r.curvature},
                     {"grad_norm", r.grad_norm},
                     {"product", r.product},
                     {"ratio", r.ratio},
                     {"curvature_floor", r.curvature_floor},
                     {"ok", r.ok},
                     {"error", r.error}});
    return {{"kappa", kappa},
            {"verdict", verdict},
            {"product_grows", product_grows},
            {"levels", rws}};
  }
};

inline Lemma1Report lemma1_probe(const Density2D& f, double kappa,
                                 const std::vector<double>& levels,
                                 const TraceOptions& opt = {}) {
  if (levels.size() < 2)
    throw std::invalid_argument("lemma1_probe: need at least two levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i] > levels[i - 1]))
      throw std::invalid_argument("lemma1_probe: levels must increase");

  Lemma1Report rep;
  rep.kappa = kappa;
  for (double c : levels) {
    Lemma1Row row;
    row.c_k = c;
    const LevelTrace tr = trace_level_set(f, c, opt);
    if (!tr.ok) {
      row.error = tr.error;
      rep.rows.push_back(row);
      continue;
    }
    row.r_k = tr.radius;
    row.curvature = tr.curvature;
    row.grad_norm = tr.grad_norm;
    row.product = tr.curvature * tr.grad_norm * std::pow(1.0 + tr.radius, kappa);
    row.ratio = tr.radius * std::pow(1.0 + tr.radius, -kappa);
    row.curvature_floor = tr.curvature >= (1.0 - 1e-6) / tr.radius;
    row.ok = true;
    rep.rows.push_back(row);
  }

  std::vector<const Lemma1Row*> good;
  for (const auto& r : rep.rows)
    if (r.ok) good.push_back(&r);
  if (good.size() < 2) {
    rep.verdict = "inconclusive";
    return rep;
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < good.size(); ++i)
    if (!(good[i]->ratio < good[i - 1]->ratio)) decreasing = false;
  const double first = good.front()->ratio;
  const double last = good.back()->ratio;
  rep.product_grows = good.back()->product > 1.5 * good.front()->product;
  if (decreasing && last < 0.9 * first)
    rep.verdict = "violated";
  else
    rep.verdict = "consistent";
  return rep;
}

} // namespace lingrow
