#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lingrow/scalar_density.hpp"

namespace lingrow {

using Vec2 = std::array<double, 2>;

// Symmetric 2x2 Hessian.
struct Sym2 {
  double h11 = 0.0;
  double h22 = 0.0;
  double h12 = 0.0;

  double quad(const Vec2& v) const {
    return h11 * v[0] * v[0] + 2.0 * h12 * v[0] * v[1] + h22 * v[1] * v[1];
  }
  // Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const {
    const double tr = h11 + h22;
    const double d = std::sqrt(detail::sq(0.5 * (h11 - h22)) + detail::sq(h12));
    return {0.5 * tr - d, 0.5 * tr + d};
  }
};

inline double norm2(const Vec2& v) { return std::hypot(v[0], v[1]); }

// f(xi) = sum_i f_i(xi_i).  Gradient is componentwise, Hessian diagonal.
class SplittingDensity {
public:
  explicit SplittingDensity(std::vector<ScalarDensity> components)
      : components_(std::move(components)) {
    if (components_.size() < 2)
      throw std::invalid_argument("SplittingDensity: needs n >= 2 components");
  }
  SplittingDensity(ScalarDensity f1, ScalarDensity f2)
      : SplittingDensity(std::vector<ScalarDensity>{std::move(f1), std::move(f2)}) {}

  std::size_t dimension() const { return components_.size(); }
  const ScalarDensity& component(std::size_t i) const { return components_.at(i); }

  double value(const std::vector<double>& xi) const {
    check_dim(xi.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i)
      acc += components_[i].value(xi[i]);
    return acc;
  }
  std::vector<double> gradient(const std::vector<double>& xi) const {
    check_dim(xi.size());
    std::vector<double> g(xi.size());
    for (std::size_t i = 0; i < components_.size(); ++i)
      g[i] = components_[i].deriv(xi[i]);
    return g;
  }
  std::vector<double> hessian_diagonal(const std::vector<double>& xi) const {
    check_dim(xi.size());
    std::vector<double> h(xi.size());
    for (std::size_t i = 0; i < components_.size(); ++i)
      h[i] = components_[i].second(xi[i]);
    return h;
  }

  // 2-D fast path used by the solver.
  double value(const Vec2& xi) const {
    return components_[0].value(xi[0]) + components_[1].value(xi[1]);
  }
  Vec2 gradient(const Vec2& xi) const {
    return {components_[0].deriv(xi[0]), components_[1].deriv(xi[1])};
  }
  Sym2 hessian(const Vec2& xi) const {
    return {components_[0].second(xi[0]), components_[1].second(xi[1]), 0.0};
  }

  nlohmann::json descriptor() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : components_) comps.push_back(c.descriptor());
    return {{"kind", "splitting"}, {"components", comps}};
  }

private:
  void check_dim(std::size_t n) const {
    if (n != components_.size())
      throw std::invalid_argument("SplittingDensity: dimension mismatch");
  }
  std::vector<ScalarDensity> components_;
};

// f(xi) = Phi(|xi|) with Phi'(0) = 0 so the density is C^2 at the origin.
// Hessian eigenvalues are Phi''(r) (radial) and Phi'(r)/r (tangential); both
// tend to Phi''(0) as r -> 0.
class RadialDensity {
public:
  explicit RadialDensity(ScalarDensity profile) : profile_(std::move(profile)) {
    if (std::abs(profile_.deriv(0.0)) > 1e-12)
      throw std::invalid_argument("RadialDensity: profile needs Phi'(0) = 0");
  }

  const ScalarDensity& profile() const { return profile_; }

  double value(const Vec2& xi) const { return profile_.value(norm2(xi)); }
  Vec2 gradient(const Vec2& xi) const {
    const double r = norm2(xi);
    if (r < 1e-14) return {0.0, 0.0};
    const double s = profile_.deriv(r) / r;
    return {s * xi[0], s * xi[1]};
  }
  Sym2 hessian(const Vec2& xi) const {
    const double r = norm2(xi);
    const double small = 1e-7;
    if (r < small) {
      const double p = profile_.second(0.0);
      return {p, p, 0.0};
    }
    const double pr = profile_.second(r);
    const double pt = profile_.deriv(r) / r;
    const double nx = xi[0] / r, ny = xi[1] / r;
    return {pt + (pr - pt) * nx * nx, pt + (pr - pt) * ny * ny,
            (pr - pt) * nx * ny};
  }

  nlohmann::json descriptor() const {
    return {{"kind", "radial"}, {"profile", profile_.descriptor()}};
  }

private:
  ScalarDensity profile_;
};

// Value-semantics wrapper over the two 2-D density families.
class Density2D {
public:
  Density2D(SplittingDensity d) : impl_(std::move(d)) {}
  Density2D(RadialDensity d) : impl_(std::move(d)) {}

  bool splitting() const {
    return std::holds_alternative<SplittingDensity>(impl_);
  }
  const SplittingDensity& as_splitting() const {
    return std::get<SplittingDensity>(impl_);
  }
  const RadialDensity& as_radial() const { return std::get<RadialDensity>(impl_); }

  double value(const Vec2& xi) const {
    return std::visit([&](const auto& d) { return d.value(xi); }, impl_);
  }
  Vec2 gradient(const Vec2& xi) const {
    return std::visit([&](const auto& d) { return d.gradient(xi); }, impl_);
  }
  Sym2 hessian(const Vec2& xi) const {
    return std::visit([&](const auto& d) { return d.hessian(xi); }, impl_);
  }
  nlohmann::json descriptor() const {
    return std::visit([](const auto& d) { return d.descriptor(); }, impl_);
  }

private:
  std::variant<SplittingDensity, RadialDensity> impl_;
};

} // namespace lingrow
