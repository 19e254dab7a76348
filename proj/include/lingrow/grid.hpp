#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lingrow/numerics.hpp"

namespace lingrow {

// Uniform rectangle grid.  Node (i, j) sits at (x0 + i*hx, y0 + j*hy) and is
// stored row-major with y-rows outer: index = j * nx + i.
struct Grid {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 0, ny = 0;

  Grid() = default;
  Grid(double x0_, double x1_, double y0_, double y1_, int nx_, int ny_)
      : x0(x0_), x1(x1_), y0(y0_), y1(y1_), nx(nx_), ny(ny_) {
    if (nx < 3 || ny < 3)
      throw std::invalid_argument("Grid: nx, ny >= 3 required");
    if (!(x1 > x0 && y1 > y0))
      throw std::invalid_argument("Grid: empty rectangle");
  }
  static Grid unit_square(int n) { return Grid(0.0, 1.0, 0.0, 1.0, n, n); }

  double hx() const { return (x1 - x0) / (nx - 1); }
  double hy() const { return (y1 - y0) / (ny - 1); }
  double x(int i) const { return x0 + i * hx(); }
  double y(int j) const { return y0 + j * hy(); }
  int index(int i, int j) const { return j * nx + i; }
  int size() const { return nx * ny; }
  bool boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  int interior_count() const { return (nx - 2) * (ny - 2); }

  bool operator==(const Grid& o) const {
    return x0 == o.x0 && x1 == o.x1 && y0 == o.y0 && y1 == o.y1 &&
           nx == o.nx && ny == o.ny;
  }
};

// Nodal grid function with a per-node boundary mask (rectangle boundary by
// default).  Masked nodes carry Dirichlet data and are never solver unknowns.
struct DiscreteField {
  Grid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  DiscreteField() = default;
  explicit DiscreteField(const Grid& g)
      : grid(g), values(static_cast<std::size_t>(g.size()), 0.0),
        mask(static_cast<std::size_t>(g.size()), 0) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        mask[static_cast<std::size_t>(g.index(i, j))] = g.boundary(i, j) ? 1 : 0;
  }

  static DiscreteField sample(const Grid& g,
                              const std::function<double(double, double)>& f) {
    DiscreteField u(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        u.values[static_cast<std::size_t>(g.index(i, j))] = f(g.x(i), g.y(j));
    return u;
  }

  double& at(int i, int j) { return values[static_cast<std::size_t>(grid.index(i, j))]; }
  double at(int i, int j) const {
    return values[static_cast<std::size_t>(grid.index(i, j))];
  }

  double max_abs_diff(const DiscreteField& o) const {
    double m = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k)
      m = std::max(m, std::abs(values[k] - o.values[k]));
    return m;
  }
  double min_value() const {
    double m = values[0];
    for (double v : values) m = std::min(m, v);
    return m;
  }
  double max_value() const {
    double m = values[0];
    for (double v : values) m = std::max(m, v);
    return m;
  }
};

// Smooth cutoff eta, 1 on the central half of the rectangle, 0 on a collar
// of width `margin` along the boundary, ramped with (rho(x) rho(y))^2 where
// rho is a cubic smoothstep.  The squared-product profile keeps the slope of
// eta below 2/margin for margins up to an eighth of the side length.
struct CutoffField {
  Grid grid;
  double margin = 0.0;
  std::vector<double> values;

  CutoffField(const Grid& g, double m) : grid(g), margin(m) {
    const double lx = g.x1 - g.x0, ly = g.y1 - g.y0;
    if (!(m > 0.0) || m > 0.125 * std::min(lx, ly) + 1e-12)
      throw std::invalid_argument(
          "CutoffField: margin must lie in (0, side/8] so the slope bound holds");
    values.resize(static_cast<std::size_t>(g.size()));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        values[static_cast<std::size_t>(g.index(i, j))] = eval(g.x(i), g.y(j));
  }

  double rho(double t, double lo, double hi) const {
    const double len = hi - lo;
    const double ramp = 0.25 * len - margin;
    const double a = detail::smoothstep((t - lo - margin) / ramp);
    const double b = detail::smoothstep((hi - margin - t) / ramp);
    return std::min(a, b);
  }
  double rho_deriv(double t, double lo, double hi) const {
    const double len = hi - lo;
    const double ramp = 0.25 * len - margin;
    const double ua = (t - lo - margin) / ramp;
    const double ub = (hi - margin - t) / ramp;
    if (ua < ub) return detail::smoothstep_deriv(ua) / ramp;
    return -detail::smoothstep_deriv(ub) / ramp;
  }

  double eval(double x, double y) const {
    return detail::sq(rho(x, grid.x0, grid.x1) * rho(y, grid.y0, grid.y1));
  }
  // Analytic gradient of eta.
  std::array<double, 2> grad(double x, double y) const {
    const double rx = rho(x, grid.x0, grid.x1);
    const double ry = rho(y, grid.y0, grid.y1);
    const double dx = rho_deriv(x, grid.x0, grid.x1);
    const double dy = rho_deriv(y, grid.y0, grid.y1);
    return {2.0 * rx * dx * ry * ry, 2.0 * ry * dy * rx * rx};
  }

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(grid.index(i, j))];
  }
  // Core sub-rectangle where eta == 1 (the central half).
  bool in_core(double x, double y) const {
    const double lx = grid.x1 - grid.x0, ly = grid.y1 - grid.y0;
    return x >= grid.x0 + 0.25 * lx && x <= grid.x1 - 0.25 * lx &&
           y >= grid.y0 + 0.25 * ly && y <= grid.y1 - 0.25 * ly;
  }
};

// --- serialization ---
//
// CSV: one line per y-row (j = 0 first), values comma-separated,
// printf %.17g so a read-back reproduces the doubles exactly.
//
// Binary layout (little-endian host doubles):
//   bytes 0..7   magic "LGFLD001"
//   uint32       nx, ny
//   double       x0, x1, y0, y1
//   double[nx*ny] values, row-major (j outer, i inner)

inline void write_field_csv(const DiscreteField& u, std::ostream& os) {
  char buf[40];
  for (int j = 0; j < u.grid.ny; ++j) {
    for (int i = 0; i < u.grid.nx; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", u.at(i, j));
      os << buf << (i + 1 == u.grid.nx ? "" : ",");
    }
    os << "\n";
  }
}

inline void write_field_csv(const DiscreteField& u, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_field_csv(u, os);
}

inline constexpr char kFieldMagic[8] = {'L', 'G', 'F', 'L', 'D', '0', '0', '1'};

inline void write_field_binary(const DiscreteField& u, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write(kFieldMagic, 8);
  const std::uint32_t nx = static_cast<std::uint32_t>(u.grid.nx);
  const std::uint32_t ny = static_cast<std::uint32_t>(u.grid.ny);
  os.write(reinterpret_cast<const char*>(&nx), 4);
  os.write(reinterpret_cast<const char*>(&ny), 4);
  const double bounds[4] = {u.grid.x0, u.grid.x1, u.grid.y0, u.grid.y1};
  os.write(reinterpret_cast<const char*>(bounds), sizeof bounds);
  os.write(reinterpret_cast<const char*>(u.values.data()),
           static_cast<std::streamsize>(u.values.size() * sizeof(double)));
}

inline DiscreteField read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kFieldMagic, 8) != 0)
    throw std::runtime_error("bad field magic in " + path);
  std::uint32_t nx = 0, ny = 0;
  is.read(reinterpret_cast<char*>(&nx), 4);
  is.read(reinterpret_cast<char*>(&ny), 4);
  double b[4];
  is.read(reinterpret_cast<char*>(b), sizeof b);
  Grid g(b[0], b[1], b[2], b[3], static_cast<int>(nx), static_cast<int>(ny));
  DiscreteField u(g);
  is.read(reinterpret_cast<char*>(u.values.data()),
          static_cast<std::streamsize>(u.values.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated field file " + path);
  return u;
}

} // namespace lingrow
