#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lingrow/density2d.hpp"
#include "lingrow/exponents.hpp"
#include "lingrow/expression.hpp"
#include "lingrow/experiments.hpp"
#include "lingrow/regularize.hpp"

namespace lingrow {

// Run configuration: a flat key=value document with dotted keys for nested
// sections.  Every key has a registered default; unknown keys are rejected
// with a nearest-key suggestion instead of being silently ignored.
class RunConfig {
public:
  RunConfig() {
    for (const auto& [k, v] : schema()) values_[k] = v;
  }

  static const std::vector<std::pair<std::string, std::string>>& schema() {
    static const std::vector<std::pair<std::string, std::string>> s = {
        {"density", "phi_mu"},
        {"mu", "2"},
        {"mu1", ""},
        {"mu2", ""},
        {"k", "2"},
        {"f1", ""},
        {"f1.mu", "2"},
        {"f1.k", "2"},
        {"f1.scale", "1"},
        {"f1.n", "20"},
        {"f1.ratio", "0.5"},
        {"f2", ""},
        {"f2.mu", "2"},
        {"f2.k", "2"},
        {"f2.scale", "1"},
        {"f2.n", "20"},
        {"f2.ratio", "0.5"},
        {"profile", "phi_mu"},
        {"profile.mu", "2"},
        {"profile.k", "2"},
        {"profile.scale", "1"},
        {"profile.n", "20"},
        {"profile.ratio", "0.5"},
        {"reg.scheme", "quadratic"},
        {"reg.q", ""},
        {"reg.kappa", ""},
        {"reg.varkappa", ""},
        {"reg.gamma", ""},
        {"delta.start", "0.1"},
        {"delta.stop", "0.0001"},
        {"delta.factor", "0.1"},
        {"grid.n", "65"},
        {"grid.nx", ""},
        {"grid.ny", ""},
        {"grid.x0", "0"},
        {"grid.x1", "1"},
        {"grid.y0", "0"},
        {"grid.y1", "1"},
        {"u0", "affine"},
        {"u0.a", "0"},
        {"u0.b", "1"},
        {"u0.c", "1"},
        {"u0.eps", "0.1"},
        {"run.ellipticity", "false"},
        {"run.lemma1", "false"},
        {"run.caccioppoli", "false"},
        {"run.integrability", "false"},
        {"run.second_derivatives", "false"},
        {"run.stress", "false"},
        {"run.uniqueness", "false"},
        {"run.admissibility", "false"},
        {"params.mu1", ""},
        {"params.l", "3"},
        {"params.alpha_list", "0,1,2"},
        {"params.chi_list", "3,4,6,8"},
        {"params.kappa", "1"},
        {"params.levels", "5,10,20,50"},
        {"params.margin", ""},
        {"params.tau_s", ""},
        {"params.tau_alpha", ""},
        {"params.alpha1", "1"},
        {"params.alpha2", "1"},
        {"solve.tol", "1e-9"},
        {"solve.max_iter", "100"},
        {"baseline.viscosity_drop", "0.1"},
        {"baseline.caccioppoli_spread", "100"},
        {"baseline.moment_trend", "2"},
        {"baseline.uniqueness_dev", "0.001"},
        {"baseline.stress_agreement", "0.001"},
        {"baseline.max_principle", "1e-8"},
        {"out.dir", "runs"},
        {"run.id", ""},
        {"seed", "1"},
        {"allow_inadmissible", "false"},
    };
    return s;
  }

  static bool known_key(const std::string& key) {
    for (const auto& [k, v] : schema())
      if (k == key) return true;
    return false;
  }

  static std::string suggest(const std::string& key) {
    auto dist = [](const std::string& a, const std::string& b) {
      std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
      for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
      for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
          const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
          cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
      }
      return prev[b.size()];
    };
    std::string best;
    std::size_t best_d = static_cast<std::size_t>(-1);
    for (const auto& [k, v] : schema()) {
      const std::size_t d = dist(key, k);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  }

  void set(const std::string& key, const std::string& value) {
    if (!known_key(key))
      throw std::invalid_argument("unknown key '" + key + "' (did you mean '" +
                                  suggest(key) + "'?)");
    values_[key] = value;
  }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw std::invalid_argument("unknown key '" + key + "'");
    return it->second;
  }
  bool has(const std::string& key) const { return !raw(key).empty(); }

  double number(const std::string& key) const {
    const std::string& v = raw(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw std::invalid_argument("key '" + key + "': '" + v + "' is not a number");
    }
  }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  int integer(const std::string& key) const {
    const double d = number(key);
    return static_cast<int>(d);
  }
  bool flag(const std::string& key) const {
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("key '" + key + "': '" + v + "' is not a boolean");
  }
  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(raw(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      out.push_back(std::stod(item));
    }
    return out;
  }

  bool operator==(const RunConfig& o) const { return values_ == o.values_; }

  // Canonical text: every key in schema order, one per line.
  std::string emit() const {
    std::string out;
    for (const auto& [k, def] : schema()) {
      out += k;
      out += " = ";
      out += values_.at(k);
      out += "\n";
    }
    return out;
  }

  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      try {
        cfg.set(key, value);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": " + e.what());
      }
    }
    return cfg;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

private:
  std::map<std::string, std::string> values_;
};

// --- builders with the domain checks the spec names ---

namespace detail {

inline ScalarDensity build_scalar(const RunConfig& cfg, const std::string& kind,
                                  const std::string& prefix) {
  auto num = [&](const std::string& suffix) {
    return cfg.number(prefix.empty() ? suffix : prefix + "." + suffix);
  };
  ScalarDensity d = [&] {
    if (kind == "phi_mu") {
      const double mu = num("mu");
      if (!(mu > 1.0)) throw std::invalid_argument("mu > 1 required");
      return ScalarDensity::phi_mu(mu);
    }
    if (kind == "minimal_surface") {
      const double k = num("k");
      if (!(k > 1.0)) throw std::invalid_argument("k > 1 required");
      return ScalarDensity::minimal_surface(k);
    }
    if (kind == "softplus") return ScalarDensity::softplus();
    if (kind == "log_damped") return ScalarDensity::log_damped();
    if (kind == "atoms")
      return ScalarDensity::gaussian_atoms_geometric(
          static_cast<int>(num("n")), num("ratio"));
    if (kind == "quadratic") return ScalarDensity::quadratic();
    throw std::invalid_argument("unknown scalar density '" + kind + "'");
  }();
  if (!prefix.empty()) {
    const double scale = cfg.number(prefix + ".scale");
    if (scale != 1.0) d = ScalarDensity::scaled(d, scale);
  }
  return d;
}

} // namespace detail

// Builds the 2-D density named by the config.  `density = phi_mu` is the
// symmetric splitting Phi_mu + Phi_mu (or Phi_mu1 + Phi_mu2 when mu1/mu2 are
// given); `split` combines two scalar components; `radial` wraps a profile.
inline Density2D build_density(const RunConfig& cfg) {
  const std::string kind = cfg.raw("density");
  if (kind == "phi_mu") {
    const double mu1 = cfg.number_or("mu1", cfg.number("mu"));
    const double mu2 = cfg.number_or("mu2", cfg.number("mu"));
    if (!(mu1 > 1.0 && mu2 > 1.0))
      throw std::invalid_argument("mu > 1 required");
    return Density2D(SplittingDensity(ScalarDensity::phi_mu(mu1),
                                      ScalarDensity::phi_mu(mu2)));
  }
  if (kind == "split") {
    if (!cfg.has("f1") || !cfg.has("f2"))
      throw std::invalid_argument("density=split needs f1 and f2");
    return Density2D(SplittingDensity(
        detail::build_scalar(cfg, cfg.raw("f1"), "f1"),
        detail::build_scalar(cfg, cfg.raw("f2"), "f2")));
  }
  if (kind == "radial")
    return Density2D(
        RadialDensity(detail::build_scalar(cfg, cfg.raw("profile"), "profile")));
  if (kind == "minimal_surface")
    return Density2D(RadialDensity(detail::build_scalar(cfg, kind, "")));
  throw std::invalid_argument("density '" + kind + "' is not a 2-D density");
}

// Scalar density for check-density style commands.
inline ScalarDensity build_scalar_density(const RunConfig& cfg) {
  return detail::build_scalar(cfg, cfg.raw("density"), "");
}

inline RegScheme build_scheme(const RunConfig& cfg, double& exponent) {
  const std::string s = cfg.raw("reg.scheme");
  if (s == "quadratic") {
    exponent = 0.0;
    return RegScheme::quadratic;
  }
  if (s == "qpower_full") {
    exponent = cfg.has("reg.q") ? cfg.number("reg.q")
                                : qpower_exponent_from_kappa(cfg.number("reg.kappa"));
    if (!(exponent > 1.0)) throw std::invalid_argument("q > 1 required");
    return RegScheme::qpower_full;
  }
  if (s == "qpower_x1") {
    exponent = cfg.has("reg.q")
                   ? cfg.number("reg.q")
                   : qpower_exponent_from_varkappa(cfg.number("reg.varkappa"));
    if (!(exponent > 1.0)) throw std::invalid_argument("q > 1 required");
    return RegScheme::qpower_x1;
  }
  if (s == "gamma_power") {
    exponent = cfg.number("reg.gamma");
    if (!(exponent >= 0.0)) throw std::invalid_argument("gamma >= 0 required");
    return RegScheme::gamma_power;
  }
  throw std::invalid_argument("unknown reg.scheme '" + s + "'");
}

inline Grid build_grid(const RunConfig& cfg) {
  const int nx = cfg.has("grid.nx") ? cfg.integer("grid.nx") : cfg.integer("grid.n");
  const int ny = cfg.has("grid.ny") ? cfg.integer("grid.ny") : cfg.integer("grid.n");
  return Grid(cfg.number("grid.x0"), cfg.number("grid.x1"), cfg.number("grid.y0"),
              cfg.number("grid.y1"), nx, ny);
}

inline std::vector<double> build_schedule(const RunConfig& cfg) {
  const double start = cfg.number("delta.start");
  const double stop = cfg.number("delta.stop");
  const double factor = cfg.number("delta.factor");
  if (!(start > 0.0 && start <= 1.0))
    throw std::invalid_argument("delta in (0,1] required");
  return geometric_schedule(start, stop, factor);
}

// Boundary/initial data: named presets or an arbitrary expression in x, y.
inline std::function<double(double, double)> build_u0(const RunConfig& cfg) {
  const std::string kind = cfg.raw("u0");
  if (kind == "affine") {
    const double a = cfg.number("u0.a"), b = cfg.number("u0.b"), c = cfg.number("u0.c");
    return [a, b, c](double x, double y) { return a + b * x + c * y; };
  }
  if (kind == "sine")
    return [](double x, double y) { return std::sin(2.0 * M_PI * x) * y; };
  if (kind == "ridge") {
    const double eps = cfg.number("u0.eps");
    return [eps](double x, double) {
      const double t = 2.0 * x - 1.0;
      return std::sqrt(t * t + eps * eps) - eps;
    };
  }
  if (kind == "zero")
    return [](double, double) { return 0.0; };
  if (kind == "harmonic")
    return [](double x, double y) { return x * x - y * y; };
  Expression e = Expression::parse(kind);
  return [e](double x, double y) { return e(x, y); };
}

inline ExperimentParams build_params(const RunConfig& cfg, const Density2D& base) {
  ExperimentParams p;
  if (cfg.has("params.mu1")) {
    p.mu1 = cfg.number("params.mu1");
  } else if (base.splitting() && base.as_splitting().component(0).has_param("mu")) {
    p.mu1 = base.as_splitting().component(0).param("mu", p.mu1);
  }
  p.l = cfg.integer("params.l");
  if (p.l < 1) throw std::invalid_argument("params.l >= 1 required");
  p.alpha_list = cfg.list("params.alpha_list");
  p.chi_list = cfg.list("params.chi_list");
  if (cfg.has("params.margin")) p.margin = cfg.number("params.margin");
  if (cfg.raw("reg.scheme") == "gamma_power") {
    p.variant_mode = true;
    p.gamma = cfg.number("reg.gamma");
    // Negative-exponent mode: s = -1/2 + tau_s, alpha = -1/2 + tau_alpha.
    // The recipe witness supplies the taus unless the config pins them; the
    // corresponding alpha joins the Caccioppoli list.
    if (cfg.has("params.tau_s") && cfg.has("params.tau_alpha")) {
      p.tau_s = cfg.number("params.tau_s");
      p.tau_alpha = cfg.number("params.tau_alpha");
      if (!(p.tau_s > 0.0 && p.tau_alpha > 0.0))
        throw std::invalid_argument("tau_s, tau_alpha > 0 required");
      p.alpha_list.push_back(-0.5 + p.tau_alpha);
    } else {
      const TauWitness w = gamma_route_witness(p.mu1, p.gamma);
      // Inadmissible gammas (forced runs) get no recipe witness.
      if (w.all() && w.tau_alpha > 0.0) {
        p.tau_s = w.tau_s;
        p.tau_alpha = w.tau_alpha;
        p.alpha_list.push_back(-0.5 + p.tau_alpha);
      }
    }
  }
  return p;
}

inline SolveOptions build_solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.rtol = cfg.number("solve.tol");
  o.max_iterations = cfg.integer("solve.max_iter");
  return o;
}

} // namespace lingrow
