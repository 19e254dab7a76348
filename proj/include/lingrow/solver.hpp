#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lingrow/grid.hpp"
#include "lingrow/regularize.hpp"

namespace lingrow {

enum class SolveStatus { converged, maxed, failed };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::maxed: return "maxed";
    case SolveStatus::failed: return "failed";
  }
  return "?";
}

struct SolveReport {
  int iterations = 0;
  double energy = 0.0;
  double residual = 0.0;   // sup-norm of the discrete Euler operator
  int backtracks = 0;
  SolveStatus status = SolveStatus::failed;
  std::string message;
  std::vector<double> energy_trace;  // energy after each accepted step
};

struct SolveOptions {
  double rtol = 1e-9;       // residual <= rtol * (1 + |initial residual|)
  int max_iterations = 100;
  int max_backtracks = 50;
  double armijo = 1e-4;
  bool keep_energy_trace = true;
};

namespace detail {

// Cell-centered gradient of the bilinear cell (i, j): the forward x- and
// y-differences averaged over the opposite pair.
inline Vec2 cell_gradient(const DiscreteField& u, int i, int j) {
  const double a = u.at(i, j), b = u.at(i + 1, j);
  const double c = u.at(i, j + 1), d = u.at(i + 1, j + 1);
  return {(b + d - a - c) / (2.0 * u.grid.hx()),
          (c + d - a - b) / (2.0 * u.grid.hy())};
}

} // namespace detail

// J[u] = sum over cells of f(grad u at the cell center) * |cell|.  Convex in
// the nodal values whenever f is convex.  Works for both the regularized
// density and a bare base density.
template <typename Density>
double discrete_energy(const Density& f, const DiscreteField& u) {
  const Grid& g = u.grid;
  const double area = g.hx() * g.hy();
  double acc = 0.0;
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double v = f.value(detail::cell_gradient(u, i, j));
      if (!std::isfinite(v))
        throw std::runtime_error("discrete_energy: non-finite density at cell (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
      acc += v;
    }
  return acc * area;
}

// Assembled energy gradient with respect to nodal values (zero rows on
// masked nodes).  The discrete Euler operator is this vector divided by the
// cell area, so the solver's convergence test and euler_residual agree
// exactly.
inline std::vector<double> energy_gradient(const RegularizedDensity& f,
                                           const DiscreteField& u) {
  const Grid& g = u.grid;
  const double area = g.hx() * g.hy();
  const double cx = area / (2.0 * g.hx());
  const double cy = area / (2.0 * g.hy());
  std::vector<double> grad(static_cast<std::size_t>(g.size()), 0.0);
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const Vec2 df = f.gradient(detail::cell_gradient(u, i, j));
      const double gx = cx * df[0], gy = cy * df[1];
      grad[static_cast<std::size_t>(g.index(i, j))] += -gx - gy;
      grad[static_cast<std::size_t>(g.index(i + 1, j))] += gx - gy;
      grad[static_cast<std::size_t>(g.index(i, j + 1))] += -gx + gy;
      grad[static_cast<std::size_t>(g.index(i + 1, j + 1))] += gx + gy;
    }
  for (std::size_t k = 0; k < grad.size(); ++k)
    if (u.mask[k]) grad[k] = 0.0;
  return grad;
}

// Sup-norm of the discrete divergence of Df_delta(grad u) over unmasked
// nodes; identical to the energy gradient up to the cell-area factor.
inline double euler_residual(const RegularizedDensity& f, const DiscreteField& u) {
  const auto grad = energy_gradient(f, u);
  const double area = u.grid.hx() * u.grid.hy();
  double m = 0.0;
  for (double v : grad) m = std::max(m, std::abs(v));
  return m / area;
}

// Damped Newton minimization of J_delta over the unmasked nodes.  Boundary
// nodes keep their values exactly.  The Hessian is assembled per cell from
// D^2 f_delta and factored with a sparse LDL^T; conjugate gradients with
// diagonal preconditioning is the fallback when the factorization breaks.
inline SolveReport minimize(const RegularizedDensity& f, DiscreteField& u,
                            const SolveOptions& opt = {}) {
  const Grid& g = u.grid;
  const double area = g.hx() * g.hy();

  std::vector<int> dof(static_cast<std::size_t>(g.size()), -1);
  int n_unknown = 0;
  for (int k = 0; k < g.size(); ++k)
    if (!u.mask[static_cast<std::size_t>(k)]) dof[static_cast<std::size_t>(k)] = n_unknown++;

  SolveReport rep;
  if (n_unknown == 0) {
    rep.status = SolveStatus::converged;
    rep.energy = discrete_energy(f, u);
    return rep;
  }

  auto residual_norm = [&](const std::vector<double>& grad) {
    double m = 0.0;
    for (double v : grad) m = std::max(m, std::abs(v));
    return m / area;
  };

  std::vector<double> grad = energy_gradient(f, u);
  double res = residual_norm(grad);
  const double tol = opt.rtol * (1.0 + res);
  double energy = discrete_energy(f, u);
  if (opt.keep_energy_trace) rep.energy_trace.push_back(energy);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(16 * (g.nx - 1) * (g.ny - 1)));

  while (res > tol && rep.iterations < opt.max_iterations) {
    // Assemble the interior Hessian.
    trips.clear();
    const double ax = 1.0 / (2.0 * g.hx());
    const double ay = 1.0 / (2.0 * g.hy());
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i) {
        const Sym2 H = f.hessian(detail::cell_gradient(u, i, j));
        const int nodes[4] = {g.index(i, j), g.index(i + 1, j),
                              g.index(i, j + 1), g.index(i + 1, j + 1)};
        const double sx[4] = {-ax, ax, -ax, ax};
        const double sy[4] = {-ay, -ay, ay, ay};
        for (int a = 0; a < 4; ++a) {
          const int ra = dof[static_cast<std::size_t>(nodes[a])];
          if (ra < 0) continue;
          for (int b = 0; b < 4; ++b) {
            const int rb = dof[static_cast<std::size_t>(nodes[b])];
            if (rb < 0) continue;
            const double v = area * (H.h11 * sx[a] * sx[b] + H.h22 * sy[a] * sy[b] +
                                     H.h12 * (sx[a] * sy[b] + sy[a] * sx[b]));
            trips.emplace_back(ra, rb, v);
          }
        }
      }
    Eigen::SparseMatrix<double> Hs(n_unknown, n_unknown);
    Hs.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd rhs(n_unknown);
    for (int k = 0; k < g.size(); ++k) {
      const int r = dof[static_cast<std::size_t>(k)];
      if (r >= 0) rhs[r] = -grad[static_cast<std::size_t>(k)];
    }

    Eigen::VectorXd step;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Hs);
    bool direct_ok = ldlt.info() == Eigen::Success;
    if (direct_ok) {
      step = ldlt.solve(rhs);
      direct_ok = step.size() == rhs.size() && step.allFinite();
    }
    if (!direct_ok) {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                               Eigen::Lower | Eigen::Upper>
          cg(Hs);
      cg.setTolerance(1e-10);
      step = cg.solve(rhs);
      if (cg.info() != Eigen::Success) {
        rep.status = SolveStatus::failed;
        rep.message = "Hessian solve breakdown (LDLT and CG both failed)";
        rep.energy = energy;
        rep.residual = res;
        return rep;
      }
    }

    // Backtracking line search (Armijo).  Once the predicted decrease falls
    // below the floating-point resolution of the energy the comparison is
    // meaningless; accept the bare Newton step, which is safe in the
    // quadratic endgame of a strictly convex functional.
    const double slope = -step.dot(rhs);  // grad . step, negative for descent
    const double fp_floor =
        64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(energy));
    double t = 1.0;
    DiscreteField trial = u;
    bool accepted = false;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
      for (int k = 0; k < g.size(); ++k) {
        const int r = dof[static_cast<std::size_t>(k)];
        if (r >= 0)
          trial.values[static_cast<std::size_t>(k)] =
              u.values[static_cast<std::size_t>(k)] + t * step[r];
      }
      const double trial_energy = discrete_energy(f, trial);
      if (trial_energy <= energy + opt.armijo * t * slope ||
          -t * slope <= fp_floor) {
        u.values = trial.values;
        energy = std::min(energy, trial_energy);
        accepted = true;
        break;
      }
      t *= 0.5;
      ++rep.backtracks;
    }
    if (!accepted) {
      rep.status = SolveStatus::failed;
      rep.message = "line search found no decrease after " +
                    std::to_string(opt.max_backtracks) + " halvings";
      rep.energy = energy;
      rep.residual = res;
      return rep;
    }

    ++rep.iterations;
    if (opt.keep_energy_trace) rep.energy_trace.push_back(energy);
    grad = energy_gradient(f, u);
    res = residual_norm(grad);
  }

  rep.energy = energy;
  rep.residual = res;
  rep.status = res <= tol ? SolveStatus::converged : SolveStatus::maxed;
  return rep;
}

} // namespace lingrow
