#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "lingrow/density2d.hpp"

namespace lingrow {

// Regularization schemes restoring uniform convexity for 0 < delta <= 1:
//   quadratic    f + (delta/2)|xi|^2            (per component when splitting)
//   qpower_full  f + (delta/q)|xi|^q            (radial q-power, q = 2 - kappa)
//   qpower_x1    f + (delta/q)|xi_1|^q + (delta/2)|xi|^2   (q = 2 + varkappa)
//   gamma_power  f1 + (delta/2)t^2  and  f2 + (delta/(gamma+2))|t|^(gamma+2)
enum class RegScheme { quadratic, qpower_full, qpower_x1, gamma_power };

inline const char* to_string(RegScheme s) {
  switch (s) {
    case RegScheme::quadratic: return "quadratic";
    case RegScheme::qpower_full: return "qpower_full";
    case RegScheme::qpower_x1: return "qpower_x1";
    case RegScheme::gamma_power: return "gamma_power";
  }
  return "?";
}

namespace detail {

// d/dt and d2/dt2 of |t|^q / q.
inline double qpow_d1(double t, double q) {
  const double a = std::abs(t);
  if (a == 0.0) return 0.0;
  const double d = std::pow(a, q - 1.0);
  return t < 0.0 ? -d : d;
}
inline double qpow_d2(double t, double q) {
  const double a = std::max(std::abs(t), q < 2.0 ? 1e-12 : 0.0);
  if (a == 0.0) return q == 2.0 ? 1.0 : 0.0;
  return (q - 1.0) * std::pow(a, q - 2.0);
}

class RegComponentImpl final : public ScalarImpl {
public:
  // f_i + (delta/2) t^2 * quad + (delta/q) |t|^q * qcoef
  RegComponentImpl(ScalarDensity base, double delta, bool quad,
                   std::optional<double> q)
      : base_(std::move(base)), delta_(delta), quad_(quad), q_(q) {}
  double value(double t) const override {
    double v = base_.value(t);
    if (quad_) v += 0.5 * delta_ * t * t;
    if (q_) v += delta_ / *q_ * std::pow(std::abs(t), *q_);
    return v;
  }
  double deriv(double t) const override {
    double v = base_.deriv(t);
    if (quad_) v += delta_ * t;
    if (q_) v += delta_ * qpow_d1(t, *q_);
    return v;
  }
  double second(double t) const override {
    double v = base_.second(t);
    if (quad_) v += delta_;
    if (q_) v += delta_ * qpow_d2(t, *q_);
    return v;
  }
  double fd_scale(double t) const override { return base_.fd_scale(t); }

private:
  ScalarDensity base_;
  double delta_;
  bool quad_;
  std::optional<double> q_;
};

} // namespace detail

// f_delta built from a base density and a scheme.  Value semantics; the
// scheme and its exponent are carried along for reporting.
class RegularizedDensity {
public:
  RegularizedDensity(Density2D base, double delta, RegScheme scheme,
                     double exponent = 0.0)
      : base_(std::move(base)), delta_(delta), scheme_(scheme),
        exponent_(exponent) {
    if (!(delta > 0.0 && delta <= 1.0))
      throw std::invalid_argument("regularize: delta in (0,1] required");
    switch (scheme) {
      case RegScheme::quadratic:
        break;
      case RegScheme::qpower_full:
      case RegScheme::qpower_x1:
        if (!(exponent > 1.0))
          throw std::invalid_argument("regularize: q > 1 required");
        break;
      case RegScheme::gamma_power:
        if (!(exponent >= 0.0))
          throw std::invalid_argument("regularize: gamma >= 0 required");
        if (!base_.splitting())
          throw std::invalid_argument(
              "regularize: gamma_power scheme needs a splitting base");
        break;
    }
    if (scheme == RegScheme::qpower_x1 && !base_.splitting())
      throw std::invalid_argument(
          "regularize: qpower_x1 scheme needs a splitting base");
  }

  const Density2D& base() const { return base_; }
  double delta() const { return delta_; }
  RegScheme scheme() const { return scheme_; }
  double exponent() const { return exponent_; }

  // True when f_delta is itself of splitting form (diagonal Hessian).
  bool splitting() const {
    return base_.splitting() && scheme_ != RegScheme::qpower_full;
  }

  double value(const Vec2& xi) const {
    double v = base_.value(xi);
    switch (scheme_) {
      case RegScheme::quadratic:
        v += 0.5 * delta_ * (xi[0] * xi[0] + xi[1] * xi[1]);
        break;
      case RegScheme::qpower_full:
        v += delta_ / exponent_ * std::pow(norm2(xi), exponent_);
        break;
      case RegScheme::qpower_x1:
        v += delta_ / exponent_ * std::pow(std::abs(xi[0]), exponent_) +
             0.5 * delta_ * (xi[0] * xi[0] + xi[1] * xi[1]);
        break;
      case RegScheme::gamma_power:
        v += 0.5 * delta_ * xi[0] * xi[0] +
             delta_ / (exponent_ + 2.0) *
                 std::pow(std::abs(xi[1]), exponent_ + 2.0);
        break;
    }
    return v;
  }

  Vec2 gradient(const Vec2& xi) const {
    Vec2 g = base_.gradient(xi);
    const Vec2 r = reg_gradient(xi);
    return {g[0] + r[0], g[1] + r[1]};
  }

  // Gradient of the regularizing part alone (needed to isolate the base
  // stress sigma - Dreg when checking containment in Im f').
  Vec2 reg_gradient(const Vec2& xi) const {
    switch (scheme_) {
      case RegScheme::quadratic:
        return {delta_ * xi[0], delta_ * xi[1]};
      case RegScheme::qpower_full: {
        const double r = norm2(xi);
        if (r == 0.0) return {0.0, 0.0};
        const double s = delta_ * std::pow(r, exponent_ - 2.0);
        return {s * xi[0], s * xi[1]};
      }
      case RegScheme::qpower_x1:
        return {delta_ * detail::qpow_d1(xi[0], exponent_) + delta_ * xi[0],
                delta_ * xi[1]};
      case RegScheme::gamma_power:
        return {delta_ * xi[0],
                delta_ * detail::qpow_d1(xi[1], exponent_ + 2.0)};
    }
    return {0.0, 0.0};
  }

  Sym2 hessian(const Vec2& xi) const {
    Sym2 h = base_.hessian(xi);
    switch (scheme_) {
      case RegScheme::quadratic:
        h.h11 += delta_;
        h.h22 += delta_;
        break;
      case RegScheme::qpower_full: {
        const double r = norm2(xi);
        if (r == 0.0) {
          if (exponent_ == 2.0) {
            h.h11 += delta_;
            h.h22 += delta_;
          }
          break;
        }
        const double rq2 = std::pow(r, exponent_ - 2.0);
        const double rq4 = (exponent_ - 2.0) * std::pow(r, exponent_ - 4.0);
        h.h11 += delta_ * (rq2 + rq4 * xi[0] * xi[0]);
        h.h22 += delta_ * (rq2 + rq4 * xi[1] * xi[1]);
        h.h12 += delta_ * rq4 * xi[0] * xi[1];
        break;
      }
      case RegScheme::qpower_x1:
        h.h11 += delta_ * detail::qpow_d2(xi[0], exponent_) + delta_;
        h.h22 += delta_;
        break;
      case RegScheme::gamma_power:
        h.h11 += delta_;
        h.h22 += delta_ * detail::qpow_d2(xi[1], exponent_ + 2.0);
        break;
    }
    return h;
  }

  // The i-th one-dimensional component f_{i,delta} when the regularized
  // density is of splitting form.
  ScalarDensity component(std::size_t i) const {
    if (!splitting())
      throw std::logic_error("RegularizedDensity::component: not splitting");
    const auto& comp = base_.as_splitting().component(i);
    bool quad = true;
    std::optional<double> q;
    if (scheme_ == RegScheme::qpower_x1 && i == 0) q = exponent_;
    if (scheme_ == RegScheme::gamma_power) {
      if (i == 0) {
        quad = true;
      } else {
        quad = false;
        q = exponent_ + 2.0;
      }
    }
    return ScalarDensity(
        comp.label() + "_delta", comp.params(),
        std::make_shared<detail::RegComponentImpl>(comp, delta_, quad, q),
        comp.closed_form_second());
  }

  nlohmann::json descriptor() const {
    nlohmann::json j{{"kind", "regularized"},
                     {"scheme", to_string(scheme_)},
                     {"delta", delta_},
                     {"base", base_.descriptor()}};
    if (scheme_ == RegScheme::qpower_full || scheme_ == RegScheme::qpower_x1)
      j["q"] = exponent_;
    if (scheme_ == RegScheme::gamma_power) j["gamma"] = exponent_;
    return j;
  }

private:
  Density2D base_;
  double delta_;
  RegScheme scheme_;
  double exponent_;
};

inline RegularizedDensity regularize(Density2D base, double delta,
                                     RegScheme scheme, double exponent = 0.0) {
  return RegularizedDensity(std::move(base), delta, scheme, exponent);
}

// Exponent choices from the proofs: q = 2 - kappa (kappa in (-1,0)) for the
// radial q-power route, q = 2 + varkappa for the first-component route.
inline double qpower_exponent_from_kappa(double kappa) {
  if (!(kappa > -1.0 && kappa < 0.0))
    throw std::invalid_argument("q-power scheme applies for -1 < kappa < 0");
  return 2.0 - kappa;
}

inline double qpower_exponent_from_varkappa(double varkappa) {
  if (!(varkappa >= 0.0))
    throw std::invalid_argument("varkappa >= 0 required");
  return 2.0 + varkappa;
}

} // namespace lingrow
