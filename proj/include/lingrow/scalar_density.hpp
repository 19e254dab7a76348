#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lingrow/numerics.hpp"

namespace lingrow {

// Growth bounds a1*|t| - a2 <= f(t) <= a3*|t| + a4 certified by sampling on
// [lo, hi].  `uniform_linear` additionally requires a positive lower slope
// and a convergent recession slope, i.e. genuine linear growth rather than a
// bound that merely holds on a bounded window.
struct GrowthConstants {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool uniform_linear = false;
};

namespace detail {

class ScalarImpl {
public:
  virtual ~ScalarImpl() = default;
  virtual double value(double t) const = 0;
  virtual double deriv(double t) const = 0;
  virtual double second(double t) const = 0;
  // Step hint for finite-difference consistency checks; densities with fine
  // internal scales (narrow Gaussian atoms) narrow it.
  virtual double fd_scale(double /*t*/) const { return 1.0; }
};

} // namespace detail

// A one-dimensional C^2 convex density with linear growth.  Value semantics:
// copies share an immutable implementation, so evaluation is re-entrant and
// safe to call from parallel workers.
class ScalarDensity {
public:
  ScalarDensity() = default;
  ScalarDensity(std::string label, std::map<std::string, double> params,
                std::shared_ptr<const detail::ScalarImpl> impl,
                bool closed_form_second = true)
      : label_(std::move(label)), params_(std::move(params)),
        impl_(std::move(impl)), closed_form_second_(closed_form_second) {}

  double value(double t) const { return impl_->value(t); }
  double deriv(double t) const { return impl_->deriv(t); }
  double second(double t) const { return impl_->second(t); }
  double operator()(double t) const { return value(t); }

  const std::string& label() const { return label_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& key, double fallback) const {
    auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }
  bool has_param(const std::string& key) const { return params_.count(key) > 0; }
  bool closed_form_second() const { return closed_form_second_; }
  double fd_scale(double t) const { return impl_->fd_scale(t); }
  bool valid() const { return impl_ != nullptr; }

  const GrowthConstants& growth() const { return growth_; }
  void set_growth(const GrowthConstants& g) { growth_ = g; }

  nlohmann::json descriptor() const {
    nlohmann::json j;
    j["label"] = label_;
    j["params"] = params_.empty() ? nlohmann::json::object() : nlohmann::json(params_);
    return j;
  }

  // --- catalog ---
  static ScalarDensity phi_mu(double mu);
  static ScalarDensity minimal_surface(double k);
  static ScalarDensity softplus();
  static ScalarDensity log_damped();
  static ScalarDensity gaussian_atoms(std::vector<double> sigmas);
  static ScalarDensity gaussian_atoms_geometric(int n, double ratio);
  static ScalarDensity quadratic();  // t^2/2 control; superlinear growth
  static ScalarDensity zero();       // f == 0 plumbing density
  static ScalarDensity scaled(const ScalarDensity& base, double factor);

private:
  std::string label_;
  std::map<std::string, double> params_;
  std::shared_ptr<const detail::ScalarImpl> impl_;
  bool closed_form_second_ = true;
  GrowthConstants growth_;
};

namespace detail {

// Phi_mu(t) = (mu-1) * int_0^t int_0^s (1+r)^(-mu) dr ds for t >= 0,
// extended evenly to t < 0.  Closed forms:
//   mu != 2:  t - ((1+t)^(2-mu) - 1) / (2-mu)
//   mu == 2:  t - log(1+t)
class PhiMuImpl final : public ScalarImpl {
public:
  explicit PhiMuImpl(double mu) : mu_(mu) {}
  double value(double t) const override {
    const double a = std::abs(t);
    if (mu_ == 2.0) return a - std::log1p(a);
    const double w = (2.0 - mu_) * std::log1p(a);
    return a - std::expm1(w) / (2.0 - mu_);
  }
  double deriv(double t) const override {
    const double a = std::abs(t);
    const double d = -std::expm1((1.0 - mu_) * std::log1p(a));
    return t < 0.0 ? -d : d;
  }
  double second(double t) const override {
    const double a = std::abs(t);
    return (mu_ - 1.0) * std::exp(-mu_ * std::log1p(a));
  }

private:
  double mu_;
};

// Minimal-surface profile (1 + t^k)^(1/k), t >= 0, evenly extended.
class MinimalSurfaceImpl final : public ScalarImpl {
public:
  explicit MinimalSurfaceImpl(double k) : k_(k) {}
  double value(double t) const override {
    const double a = std::abs(t);
    if (a == 0.0) return 1.0;
    // (1 + a^k)^(1/k), written to stay finite for large a
    const double ak = std::pow(a, k_);
    if (std::isinf(ak)) return a;
    return std::pow(1.0 + ak, 1.0 / k_);
  }
  double deriv(double t) const override {
    const double a = std::abs(t);
    if (a == 0.0) return 0.0;
    const double ak = std::pow(a, k_);
    const double d = std::pow(a, k_ - 1.0) * std::pow(1.0 + ak, 1.0 / k_ - 1.0);
    return t < 0.0 ? -d : d;
  }
  double second(double t) const override {
    const double a = std::abs(t);
    if (a == 0.0) {
      if (k_ == 2.0) return 1.0;
      return k_ > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const double ak = std::pow(a, k_);
    return (k_ - 1.0) * std::pow(a, k_ - 2.0) *
           std::pow(1.0 + ak, 1.0 / k_ - 2.0);
  }

private:
  double k_;
};

// h(t) = log(1 + e^t) on all of R; h''(t) = (1/4) / cosh^2(t/2).
class SoftplusImpl final : public ScalarImpl {
public:
  double value(double t) const override {
    if (t > 30.0) return t + std::exp(-t);
    return std::log1p(std::exp(t));
  }
  double deriv(double t) const override {
    if (t > 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
  }
  double second(double t) const override {
    const double e = std::exp(-std::abs(t));
    return e / sq(1.0 + e);
  }
};

// Density with h''(t) = 2 (1+t)^(-1 - 1/log(1+t)) / log(1+t) for t >= t0,
// t0 = e - 1, which simplifies to (2/e) / ((1+t) log(1+t)).  On [0, t0) the
// second derivative is a C^1 cubic blend pinned at the constant h''(t0),
// keeping h convex and C^2; h is extended evenly.
class LogDampedImpl final : public ScalarImpl {
public:
  LogDampedImpl() {
    t0_ = std::exp(1.0) - 1.0;
    c_ = 2.0 * std::exp(-2.0);                       // h''(t0)
    hp_slope_ = 2.0 * std::exp(-1.0);                // tail coefficient
    k_ = t0_ * (-4.0 * std::exp(-3.0));              // t0 * H'(t0)
    hp_t0_ = c_ * t0_ - k_ * t0_ / 12.0;             // h'(t0)
    // h(t0) from the polynomial blend: int_0^{t0} h'
    h_t0_ = 0.5 * c_ * t0_ * t0_ + k_ * t0_ * t0_ * (1.0 / 20.0 - 1.0 / 12.0);
    li_e_ = logint(std::exp(1.0));
  }
  double value(double t) const override {
    const double a = std::abs(t);
    if (a <= t0_) {
      const double u = a / t0_;
      // int_0^a h' with h' = c*s + k*t0*(u^4/4 - u^3/3)
      return 0.5 * c_ * a * a +
             k_ * t0_ * t0_ * (std::pow(u, 5) / 20.0 - std::pow(u, 4) / 12.0);
    }
    const double L = std::log1p(a);
    const double tail = (1.0 + a) * std::log(L) - (logint(1.0 + a) - li_e_);
    return h_t0_ + hp_t0_ * (a - t0_) + hp_slope_ * tail;
  }
  double deriv(double t) const override {
    const double a = std::abs(t);
    double d;
    if (a <= t0_) {
      const double u = a / t0_;
      d = c_ * a + k_ * t0_ * (std::pow(u, 4) / 4.0 - std::pow(u, 3) / 3.0);
    } else {
      d = hp_t0_ + hp_slope_ * std::log(std::log1p(a));
    }
    return t < 0.0 ? -d : d;
  }
  double second(double t) const override {
    const double a = std::abs(t);
    if (a <= t0_) {
      const double u = a / t0_;
      return c_ + k_ * (u * u * u - u * u);
    }
    return hp_slope_ / ((1.0 + a) * std::log1p(a));
  }

private:
  double t0_, c_, hp_slope_, k_, hp_t0_, h_t0_, li_e_;
};

// h''(t) = sum_i exp(-(|t|-i)^2 / sigma_i^2); h' and h by erf closed forms,
// evenly extended with h'(0) = 0.
class GaussianAtomsImpl final : public ScalarImpl {
public:
  explicit GaussianAtomsImpl(std::vector<double> sigmas)
      : sigmas_(std::move(sigmas)) {
    sigma_min_ = sigmas_.empty() ? 1.0 : sigmas_[0];
    for (double s : sigmas_) sigma_min_ = std::min(sigma_min_, s);
  }
  double value(double t) const override {
    const double a = std::abs(t);
    constexpr double kSqrtPiHalf = 0.88622692545275801;  // sqrt(pi)/2
    double acc = 0.0;
    for (std::size_t idx = 0; idx < sigmas_.size(); ++idx) {
      const double i = static_cast<double>(idx + 1);
      const double s = sigmas_[idx];
      const double F1 = antideriv_erf((a - i) / s);
      const double F0 = antideriv_erf(-i / s);
      acc += kSqrtPiHalf * s * (s * (F1 - F0) + std::erf(i / s) * a);
    }
    return acc;
  }
  double deriv(double t) const override {
    const double a = std::abs(t);
    constexpr double kSqrtPiHalf = 0.88622692545275801;
    double acc = 0.0;
    for (std::size_t idx = 0; idx < sigmas_.size(); ++idx) {
      const double i = static_cast<double>(idx + 1);
      const double s = sigmas_[idx];
      acc += kSqrtPiHalf * s * (std::erf((a - i) / s) + std::erf(i / s));
    }
    return t < 0.0 ? -acc : acc;
  }
  double second(double t) const override {
    const double a = std::abs(t);
    double acc = 0.0;
    for (std::size_t idx = 0; idx < sigmas_.size(); ++idx) {
      const double i = static_cast<double>(idx + 1);
      acc += std::exp(-sq((a - i) / sigmas_[idx]));
    }
    return acc;
  }
  double fd_scale(double /*t*/) const override {
    return std::min(1.0, sigma_min_);
  }

private:
  static double antideriv_erf(double x) {
    constexpr double kInvSqrtPi = 0.56418958354775628;
    return x * std::erf(x) + kInvSqrtPi * std::exp(-x * x);
  }
  std::vector<double> sigmas_;
  double sigma_min_;
};

class QuadraticImpl final : public ScalarImpl {
public:
  double value(double t) const override { return 0.5 * t * t; }
  double deriv(double t) const override { return t; }
  double second(double) const override { return 1.0; }
};

class ZeroImpl final : public ScalarImpl {
public:
  double value(double) const override { return 0.0; }
  double deriv(double) const override { return 0.0; }
  double second(double) const override { return 0.0; }
};

class ScaledImpl final : public ScalarImpl {
public:
  ScaledImpl(ScalarDensity base, double factor)
      : base_(std::move(base)), factor_(factor) {}
  double value(double t) const override { return factor_ * base_.value(t); }
  double deriv(double t) const override { return factor_ * base_.deriv(t); }
  double second(double t) const override { return factor_ * base_.second(t); }
  double fd_scale(double t) const override { return base_.fd_scale(t); }

private:
  ScalarDensity base_;
  double factor_;
};

} // namespace detail

inline ScalarDensity ScalarDensity::phi_mu(double mu) {
  if (!(mu > 1.0))
    throw std::invalid_argument("phi_mu: mu > 1 required (recession degenerates)");
  return ScalarDensity("phi_mu", {{"mu", mu}},
                       std::make_shared<detail::PhiMuImpl>(mu));
}

inline ScalarDensity ScalarDensity::minimal_surface(double k) {
  if (!(k > 1.0)) throw std::invalid_argument("minimal_surface: k > 1 required");
  return ScalarDensity("minimal_surface", {{"k", k}},
                       std::make_shared<detail::MinimalSurfaceImpl>(k));
}

inline ScalarDensity ScalarDensity::softplus() {
  return ScalarDensity("softplus", {}, std::make_shared<detail::SoftplusImpl>());
}

inline ScalarDensity ScalarDensity::log_damped() {
  return ScalarDensity("log_damped", {},
                       std::make_shared<detail::LogDampedImpl>());
}

inline ScalarDensity ScalarDensity::gaussian_atoms(std::vector<double> sigmas) {
  if (sigmas.empty())
    throw std::invalid_argument("gaussian_atoms: at least one atom required");
  for (double s : sigmas)
    if (!(s > 0.0))
      throw std::invalid_argument("gaussian_atoms: sigma_i > 0 required");
  std::map<std::string, double> params{
      {"count", static_cast<double>(sigmas.size())}};
  return ScalarDensity("gaussian_atoms", std::move(params),
                       std::make_shared<detail::GaussianAtomsImpl>(std::move(sigmas)));
}

inline ScalarDensity ScalarDensity::gaussian_atoms_geometric(int n, double ratio) {
  if (n < 1) throw std::invalid_argument("gaussian_atoms: n >= 1 required");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument(
        "gaussian_atoms: ratio in (0,1) required, otherwise sum sigma_i diverges");
  std::vector<double> sigmas(static_cast<std::size_t>(n));
  double s = ratio;
  for (int i = 0; i < n; ++i, s *= ratio) sigmas[static_cast<std::size_t>(i)] = s;
  std::map<std::string, double> params{{"count", static_cast<double>(n)},
                                       {"ratio", ratio}};
  return ScalarDensity("gaussian_atoms", std::move(params),
                       std::make_shared<detail::GaussianAtomsImpl>(std::move(sigmas)));
}

inline ScalarDensity ScalarDensity::quadratic() {
  return ScalarDensity("quadratic", {},
                       std::make_shared<detail::QuadraticImpl>());
}

inline ScalarDensity ScalarDensity::zero() {
  return ScalarDensity("zero", {}, std::make_shared<detail::ZeroImpl>());
}

inline ScalarDensity ScalarDensity::scaled(const ScalarDensity& base,
                                           double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scaled: factor > 0 required");
  auto params = base.params();
  params["scale"] = factor;
  return ScalarDensity("scaled_" + base.label(), std::move(params),
                       std::make_shared<detail::ScaledImpl>(base, factor),
                       base.closed_form_second());
}

// The three one-dimensional examples from the catalog of non-power-scale
// densities: log-damped decay, softplus, and the Gaussian-atom family
// (N = 20 atoms with sigma_i = 2^-i).
inline std::vector<ScalarDensity> appendix_examples() {
  return {ScalarDensity::log_damped(), ScalarDensity::softplus(),
          ScalarDensity::gaussian_atoms_geometric(20, 0.5)};
}

} // namespace lingrow
