#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "lingrow/derivatives.hpp"
#include "lingrow/growth.hpp"
#include "lingrow/solver.hpp"

namespace lingrow {

// Parameters shared by the path analyses.  mu1 is the lower ellipticity
// exponent of the first component; s, eps_hat, alpha follow the moment
// bookkeeping when a chi is given.
struct ExperimentParams {
  double mu1 = 1.5;
  int l = 3;
  std::vector<double> alpha_list{0.0, 1.0, 2.0};
  std::vector<double> chi_list{3.0, 4.0, 6.0, 8.0};
  double margin = 0.0;  // 0 = side/8
  // Negative-exponent Caccioppoli variant: alpha > -1/2 allowed and the
  // right-hand side gains the Gamma_1^((alpha+1)/(1-gamma)) term.
  bool variant_mode = false;
  double gamma = 0.0;
  double tau_s = 0.0;      // s = -1/2 + tau_s, reported with variant runs
  double tau_alpha = 0.0;  // alpha = -1/2 + tau_alpha

  double cutoff_margin(const Grid& g) const {
    if (margin > 0.0) return margin;
    return 0.125 * std::min(g.x1 - g.x0, g.y1 - g.y0);
  }
};

struct PathStep {
  double delta = 0.0;
  double viscosity = 0.0;     // delta * int |grad u_delta|^2
  double sup_norm = 0.0;
  double l1_increment = 0.0;  // int |u_delta - previous|
  SolveReport report;
};

struct RegularizationPath {
  Grid grid;
  Density2D base;
  RegScheme scheme = RegScheme::quadratic;
  double exponent = 0.0;
  std::vector<double> deltas;
  std::vector<DiscreteField> fields;
  std::vector<PathStep> steps;
  bool truncated = false;
  bool viscosity_monotone = true;

  RegularizationPath(const Grid& g, Density2D b, RegScheme s, double e)
      : grid(g), base(std::move(b)), scheme(s), exponent(e) {}

  RegularizedDensity density_at(std::size_t k) const {
    return RegularizedDensity(base, deltas.at(k), scheme, exponent);
  }
  const DiscreteField& final_field() const { return fields.back(); }
};

// Strictly decreasing geometric schedule from `start` by `factor`, with the
// last entry clamped to exactly `stop` so paths with different decay rates
// end at the same regularization.
inline std::vector<double> geometric_schedule(double start, double stop,
                                              double factor) {
  if (!(start > stop && stop > 0.0 && factor > 0.0 && factor < 1.0))
    throw std::invalid_argument("geometric_schedule: need start > stop > 0, factor in (0,1)");
  std::vector<double> out;
  for (double d = start; d > stop * (1.0 + 1e-12); d *= factor) out.push_back(d);
  out.push_back(stop);
  return out;
}

namespace detail {

inline double viscosity_energy(const DiscreteField& u, double delta) {
  const Grid& g = u.grid;
  double acc = 0.0;
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const Vec2 gr = cell_gradient(u, i, j);
      acc += gr[0] * gr[0] + gr[1] * gr[1];
    }
  return delta * acc * g.hx() * g.hy();
}

inline double l1_distance(const DiscreteField& a, const DiscreteField& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    acc += std::abs(a.values[k] - b.values[k]);
  return acc * a.grid.hx() * a.grid.hy();
}

// Gamma^p with log-domain evaluation and a saturation flag instead of inf.
inline double gamma_pow(double gamma_val, double p, bool& saturated) {
  const double e = p * std::log(gamma_val);
  if (e > 700.0) {
    saturated = true;
    return std::exp(700.0);
  }
  return std::exp(e);
}

} // namespace detail

// Warm-started solves along a decreasing delta schedule.  A solver failure
// truncates the path; everything solved so far is kept.
inline RegularizationPath run_path(
    const Density2D& base, RegScheme scheme, double scheme_exponent,
    const std::function<double(double, double)>& u0, const Grid& grid,
    const std::vector<double>& schedule, const SolveOptions& opt = {}) {
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k] < schedule[k - 1]))
      throw std::invalid_argument("run_path: schedule must decrease strictly");

  RegularizationPath path(grid, base, scheme, scheme_exponent);

  DiscreteField u = DiscreteField::sample(grid, u0);
  DiscreteField prev = u;
  double last_viscosity = -1.0;
  for (double delta : schedule) {
    RegularizedDensity f_delta(base, delta, scheme, scheme_exponent);
    SolveReport rep = minimize(f_delta, u, opt);
    if (rep.status != SolveStatus::converged) {
      path.truncated = true;
      break;
    }
    PathStep step;
    step.delta = delta;
    step.viscosity = detail::viscosity_energy(u, delta);
    step.sup_norm = std::max(std::abs(u.min_value()), std::abs(u.max_value()));
    step.l1_increment = path.steps.empty() ? 0.0 : detail::l1_distance(u, prev);
    step.report = rep;
    if (last_viscosity >= 0.0 && step.viscosity > last_viscosity)
      path.viscosity_monotone = false;
    last_viscosity = step.viscosity;
    path.deltas.push_back(delta);
    path.fields.push_back(u);
    path.steps.push_back(std::move(step));
    prev = u;
  }
  if (path.steps.empty())
    throw std::runtime_error("run_path: first solve failed, no path");
  return path;
}

// Max-principle excess of a solved field over its own boundary data range;
// nonpositive means the principle holds exactly.
inline double max_principle_excess(const DiscreteField& u) {
  double bd_min = 1e300, bd_max = -1e300;
  double in_min = 1e300, in_max = -1e300;
  const Grid& g = u.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = u.at(i, j);
      if (u.mask[static_cast<std::size_t>(g.index(i, j))]) {
        bd_min = std::min(bd_min, v);
        bd_max = std::max(bd_max, v);
      } else {
        in_min = std::min(in_min, v);
        in_max = std::max(in_max, v);
      }
    }
  return std::max(in_max - bd_max, bd_min - in_min);
}

// --- Caccioppoli inequality ---

struct CaccioppoliRow {
  double delta = 0.0;
  double alpha = 0.0;
  double lhs = 0.0;    // int eta^2l Gamma_1^(alpha - mu1/2) |d11 u|^2
  double rhs = 0.0;    // int |grad eta|^2 eta^(2l-2) Gamma_1^(alpha+1) (+ variant)
  double ratio = 0.0;
  bool saturated = false;
};

inline std::vector<CaccioppoliRow> caccioppoli_check(
    const RegularizationPath& path, const ExperimentParams& params) {
  for (double a : params.alpha_list) {
    if (params.variant_mode) {
      if (!(a > -0.5))
        throw std::invalid_argument("caccioppoli: variant mode needs alpha > -1/2");
    } else if (!(a >= 0.0)) {
      throw std::invalid_argument("caccioppoli: alpha >= 0 required");
    }
  }
  const CutoffField eta(path.grid, params.cutoff_margin(path.grid));
  const int l = params.l;
  std::vector<CaccioppoliRow> rows;
  for (std::size_t k = 0; k < path.fields.size(); ++k) {
    const DerivativeFields d = directional_derivatives(path.fields[k]);
    for (double alpha : params.alpha_list) {
      CaccioppoliRow row;
      row.delta = path.deltas[k];
      row.alpha = alpha;
      bool sat = false;
      const Grid& g = path.grid;
      row.lhs = integrate_nodes(g, [&](int i, int j) {
        const std::size_t kk = static_cast<std::size_t>(g.index(i, j));
        const double e = eta.at(i, j);
        if (e == 0.0 || !d.valid[kk]) return 0.0;
        return std::pow(e, 2.0 * l) *
               detail::gamma_pow(d.gamma1[kk], alpha - 0.5 * params.mu1, sat) *
               d.d11[kk] * d.d11[kk];
      });
      row.rhs = integrate_nodes(g, [&](int i, int j) {
        const std::size_t kk = static_cast<std::size_t>(g.index(i, j));
        const double e = eta.at(i, j);
        const auto ge = eta.grad(g.x(i), g.y(j));
        const double ge2 = ge[0] * ge[0] + ge[1] * ge[1];
        if (e == 0.0 || ge2 == 0.0 || !d.valid[kk]) return 0.0;
        double w = ge2 * std::pow(e, 2.0 * l - 2.0) *
                   detail::gamma_pow(d.gamma1[kk], alpha + 1.0, sat);
        if (params.variant_mode)
          w += ge2 * std::pow(e, 2.0 * l - 2.0) *
               detail::gamma_pow(d.gamma1[kk],
                                 (alpha + 1.0) / (1.0 - params.gamma), sat);
        return w;
      });
      if (params.variant_mode) row.rhs += 1.0;
      row.saturated = sat;
      row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs
                                : (row.lhs == 0.0 ? 0.0
                                                  : std::numeric_limits<double>::infinity());
      rows.push_back(row);
    }
  }
  return rows;
}

// --- chi-moments and the bootstrap inequality ---

struct MomentRow {
  double delta = 0.0;
  double chi = 0.0;
  double m_gamma1 = 0.0;  // int eta^2l Gamma_1^(chi/2)
  double m_gamma2 = 0.0;  // contrast scan
  double bootstrap_lhs = 0.0;   // int eta^2l Gamma_1^(s+1)
  double bootstrap_rhs = 0.0;   // 1 + int eta^2l Gamma_1^(s + (2+mu1)/4)
  double bootstrap_ratio = 0.0;
  bool saturated = false;
};

inline std::vector<MomentRow> integrability_scan(const RegularizationPath& path,
                                                 const ExperimentParams& params) {
  for (double chi : params.chi_list)
    if (!(chi > 2.0))
      throw std::invalid_argument("integrability_scan: chi > 2 required");
  const CutoffField eta(path.grid, params.cutoff_margin(path.grid));
  const int l = params.l;
  std::vector<MomentRow> rows;
  for (std::size_t k = 0; k < path.fields.size(); ++k) {
    const DerivativeFields d = directional_derivatives(path.fields[k]);
    const Grid& g = path.grid;
    for (double chi : params.chi_list) {
      MomentRow row;
      row.delta = path.deltas[k];
      row.chi = chi;
      bool sat = false;
      auto moment = [&](const std::vector<double>& gamma_field, double p) {
        return integrate_nodes(g, [&](int i, int j) {
          const std::size_t kk = static_cast<std::size_t>(g.index(i, j));
          const double e = eta.at(i, j);
          if (e == 0.0 || !d.valid[kk]) return 0.0;
          return std::pow(e, 2.0 * l) * detail::gamma_pow(gamma_field[kk], p, sat);
        });
      };
      row.m_gamma1 = moment(d.gamma1, 0.5 * chi);
      row.m_gamma2 = moment(d.gamma2, 0.5 * chi);
      const double s = 0.5 * chi - 1.0;
      row.bootstrap_lhs = moment(d.gamma1, s + 1.0);
      row.bootstrap_rhs = 1.0 + moment(d.gamma1, s + 0.25 * (2.0 + params.mu1));
      row.bootstrap_ratio = row.bootstrap_lhs / row.bootstrap_rhs;
      row.saturated = sat;
      rows.push_back(row);
    }
  }
  return rows;
}

// Largest ratio of successive-delta moments for one chi (>1 means growth as
// delta shrinks).
inline double moment_trend(const std::vector<MomentRow>& rows, double chi,
                           bool gamma2 = false) {
  std::vector<double> ms;
  for (const auto& r : rows)
    if (r.chi == chi) ms.push_back(gamma2 ? r.m_gamma2 : r.m_gamma1);
  double worst = 0.0;
  for (std::size_t k = 1; k < ms.size(); ++k)
    worst = std::max(worst, ms[k] / ms[k - 1]);
  return worst;
}

// --- weighted second-derivative energies ---

struct SecondDerivativeRow {
  double delta = 0.0;
  double weighted_i1 = 0.0;  // int D^2 f_delta(grad d1u, grad d1u) Gamma_1^a1 eta^2
  double weighted_i2 = 0.0;
  double hessian_l2_core = 0.0;
  double gradient_linf_core = 0.0;
};

inline std::vector<SecondDerivativeRow> second_derivative_bounds(
    const RegularizationPath& path, double alpha1, double alpha2,
    const ExperimentParams& params) {
  if (alpha1 < 0.0 || alpha2 < 0.0)
    throw std::invalid_argument("second_derivative_bounds: exponents >= 0");
  const CutoffField eta(path.grid, params.cutoff_margin(path.grid));
  std::vector<SecondDerivativeRow> rows;
  for (std::size_t k = 0; k < path.fields.size(); ++k) {
    const DerivativeFields d = directional_derivatives(path.fields[k]);
    const RegularizedDensity f = path.density_at(k);
    const Grid& g = path.grid;
    SecondDerivativeRow row;
    row.delta = path.deltas[k];
    bool sat = false;
    auto weighted = [&](int comp, double alpha) {
      return integrate_nodes(g, [&](int i, int j) {
        const std::size_t kk = static_cast<std::size_t>(g.index(i, j));
        const double e = eta.at(i, j);
        if (e == 0.0 || !d.valid[kk]) return 0.0;
        const Sym2 H = f.hessian({d.d1[kk], d.d2[kk]});
        const Vec2 grad_di = comp == 0 ? Vec2{d.d11[kk], d.d12[kk]}
                                       : Vec2{d.d12[kk], d.d22[kk]};
        const double gam = comp == 0 ? d.gamma1[kk] : d.gamma2[kk];
        return H.quad(grad_di) *
               detail::gamma_pow(gam, comp == 0 ? alpha : alpha2, sat) * e * e;
      });
    };
    row.weighted_i1 = weighted(0, alpha1);
    row.weighted_i2 = weighted(1, alpha2);
    double h2 = 0.0, ginf = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j)
      for (int i = 1; i + 1 < g.nx; ++i) {
        if (!eta.in_core(g.x(i), g.y(j))) continue;
        const std::size_t kk = static_cast<std::size_t>(g.index(i, j));
        h2 += (d.d11[kk] * d.d11[kk] + 2.0 * d.d12[kk] * d.d12[kk] +
               d.d22[kk] * d.d22[kk]);
        ginf = std::max(ginf, std::hypot(d.d1[kk], d.d2[kk]));
      }
    row.hessian_l2_core = std::sqrt(h2 * g.hx() * g.hy());
    row.gradient_linf_core = ginf;
    rows.push_back(row);
  }
  return rows;
}

// --- stress fields ---

// Per-cell dual variable sigma = Df_delta(grad u_delta).
struct StressField {
  Grid grid;
  std::vector<Vec2> sigma;       // full stress, (nx-1)*(ny-1) cells
  std::vector<Vec2> sigma_base;  // regularizer part removed

  int cells_x() const { return grid.nx - 1; }
  int cells_y() const { return grid.ny - 1; }
  int cell_index(int i, int j) const { return j * cells_x() + i; }
  Vec2 cell_center(int i, int j) const {
    return {grid.x0 + (i + 0.5) * grid.hx(), grid.y0 + (j + 0.5) * grid.hy()};
  }
};

inline StressField stress_field(const RegularizedDensity& f,
                                const DiscreteField& u) {
  StressField s;
  s.grid = u.grid;
  const Grid& g = u.grid;
  s.sigma.resize(static_cast<std::size_t>((g.nx - 1) * (g.ny - 1)));
  s.sigma_base.resize(s.sigma.size());
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const Vec2 xi = detail::cell_gradient(u, i, j);
      const Vec2 full = f.gradient(xi);
      const Vec2 reg = f.reg_gradient(xi);
      const std::size_t k = static_cast<std::size_t>(s.cell_index(i, j));
      s.sigma[k] = full;
      s.sigma_base[k] = {full[0] - reg[0], full[1] - reg[1]};
    }
  return s;
}

struct StressStep {
  double delta = 0.0;
  double containment_margin = 0.0;  // min_i (recession slope_i - |sigma_base,i|)
  int violation_cell = -1;
  double sup_dist_prev = 0.0;       // interior sup distance to previous sigma
};

struct StressReport {
  std::vector<StressStep> steps;
  StressField final_stress;
};

// Containment of the base stress in the open image of f': for splitting
// densities per component against each recession slope, for radial bases
// against the profile slope in norm.  The numerical recession estimate is a
// lower bound for convex densities, so a reported positive margin is safe.
inline StressReport stress_analysis(const RegularizationPath& path,
                                    const ExperimentParams& params) {
  StressReport rep;
  std::vector<double> slopes;
  bool split = path.base.splitting();
  if (split) {
    const auto& sd = path.base.as_splitting();
    slopes = {recession(sd.component(0), 1.0).value,
              recession(sd.component(1), 1.0).value};
  } else {
    slopes = {recession(path.base.as_radial().profile(), 1.0).value};
  }
  const CutoffField eta(path.grid, params.cutoff_margin(path.grid));
  StressField prev;
  for (std::size_t k = 0; k < path.fields.size(); ++k) {
    StressField s = stress_field(path.density_at(k), path.fields[k]);
    StressStep step;
    step.delta = path.deltas[k];
    step.containment_margin = 1e300;
    for (int j = 0; j < s.cells_y(); ++j)
      for (int i = 0; i < s.cells_x(); ++i) {
        const std::size_t kk = static_cast<std::size_t>(s.cell_index(i, j));
        double m;
        if (split) {
          m = std::min(slopes[0] - std::abs(s.sigma_base[kk][0]),
                       slopes[1] - std::abs(s.sigma_base[kk][1]));
        } else {
          m = slopes[0] - norm2(s.sigma_base[kk]);
        }
        if (m < step.containment_margin) {
          step.containment_margin = m;
          step.violation_cell = static_cast<int>(kk);
        }
      }
    if (step.containment_margin > 0.0) step.violation_cell = -1;
    if (k > 0) {
      double d = 0.0;
      for (int j = 0; j < s.cells_y(); ++j)
        for (int i = 0; i < s.cells_x(); ++i) {
          const Vec2 c = s.cell_center(i, j);
          if (!eta.in_core(c[0], c[1])) continue;
          const std::size_t kk = static_cast<std::size_t>(s.cell_index(i, j));
          d = std::max({d, std::abs(s.sigma[kk][0] - prev.sigma[kk][0]),
                        std::abs(s.sigma[kk][1] - prev.sigma[kk][1])});
        }
      step.sup_dist_prev = d;
    }
    rep.steps.push_back(step);
    prev = std::move(s);
  }
  rep.final_stress = std::move(prev);
  return rep;
}

// Sup distance between two final stress fields over core cells.
inline double stress_cross_distance(const StressField& a, const StressField& b,
                                    const ExperimentParams& params) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("stress_cross_distance: grids differ");
  const CutoffField eta(a.grid, params.cutoff_margin(a.grid));
  double d = 0.0;
  for (int j = 0; j < a.cells_y(); ++j)
    for (int i = 0; i < a.cells_x(); ++i) {
      const Vec2 c = a.cell_center(i, j);
      if (!eta.in_core(c[0], c[1])) continue;
      const std::size_t k = static_cast<std::size_t>(a.cell_index(i, j));
      d = std::max({d, std::abs(a.sigma[k][0] - b.sigma[k][0]),
                    std::abs(a.sigma[k][1] - b.sigma[k][1])});
    }
  return d;
}

// Mean-removed interior sup deviation between two fields on the same grid.
inline double uniqueness_deviation(const DiscreteField& a, const DiscreteField& b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("uniqueness_deviation: grids differ");
  const Grid& g = a.grid;
  double mean = 0.0;
  int n = 0;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      mean += a.at(i, j) - b.at(i, j);
      ++n;
    }
  mean /= n;
  double dev = 0.0;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i)
      dev = std::max(dev, std::abs(a.at(i, j) - b.at(i, j) - mean));
  return dev;
}

} // namespace lingrow
