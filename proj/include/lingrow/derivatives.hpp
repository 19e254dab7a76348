#pragma once

#include <stdexcept>
#include <vector>

#include "lingrow/grid.hpp"

namespace lingrow {

// Centered first and second differences at interior nodes, plus the weights
// Gamma_i = 1 + |d_i u|^2.  Entries at boundary nodes are zero and flagged
// invalid; integrals against a cutoff that vanishes there never see them.
struct DerivativeFields {
  Grid grid;
  std::vector<double> d1, d2, d11, d12, d22, gamma1, gamma2;
  std::vector<std::uint8_t> valid;

  double at(const std::vector<double>& f, int i, int j) const {
    return f[static_cast<std::size_t>(grid.index(i, j))];
  }
};

inline DerivativeFields directional_derivatives(const DiscreteField& u) {
  const Grid& g = u.grid;
  if (g.nx < 5 || g.ny < 5)
    throw std::invalid_argument(
        "directional_derivatives: resolution >= 5 per axis required");
  DerivativeFields d;
  d.grid = g;
  const std::size_t n = static_cast<std::size_t>(g.size());
  d.d1.assign(n, 0.0);
  d.d2.assign(n, 0.0);
  d.d11.assign(n, 0.0);
  d.d12.assign(n, 0.0);
  d.d22.assign(n, 0.0);
  d.gamma1.assign(n, 1.0);
  d.gamma2.assign(n, 1.0);
  d.valid.assign(n, 0);
  const double hx = g.hx(), hy = g.hy();
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(g.index(i, j));
      const double c = u.at(i, j);
      d.d1[k] = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * hx);
      d.d2[k] = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * hy);
      d.d11[k] = (u.at(i + 1, j) - 2.0 * c + u.at(i - 1, j)) / (hx * hx);
      d.d22[k] = (u.at(i, j + 1) - 2.0 * c + u.at(i, j - 1)) / (hy * hy);
      d.d12[k] = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) +
                  u.at(i - 1, j - 1)) /
                 (4.0 * hx * hy);
      d.gamma1[k] = 1.0 + d.d1[k] * d.d1[k];
      d.gamma2[k] = 1.0 + d.d2[k] * d.d2[k];
      d.valid[k] = 1;
    }
  return d;
}

// Nodal quadrature sum(w) * hx * hy over valid interior nodes.
template <typename F>
double integrate_nodes(const Grid& g, F&& integrand) {
  double acc = 0.0;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) acc += integrand(i, j);
  return acc * g.hx() * g.hy();
}

} // namespace lingrow
