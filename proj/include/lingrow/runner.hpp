#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lingrow/config.hpp"
#include "lingrow/ellipticity.hpp"
#include "lingrow/exponents.hpp"
#include "lingrow/level_curve.hpp"
#include "lingrow/version.hpp"

namespace lingrow {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;

  nlohmann::json to_json() const {
    return {{"name", name},   {"pass", pass},     {"value", value},
            {"threshold", threshold}, {"detail", detail}};
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : os_(path, std::ios::binary) {
    if (!os_) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
      os_ << header[i] << (i + 1 == header.size() ? "" : ",");
    os_ << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      os_ << fmt(vals[i]) << (i + 1 == vals.size() ? "" : ",");
    os_ << "\n";
  }

private:
  std::ofstream os_;
};

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << j.dump(2) << "\n";
}

// Deterministic run id from the canonical config text.
inline std::string config_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace detail

// Executes a configured run end to end and writes artifacts under
// <out_root>/<run_id>/.  Each selected experiment is isolated: a failure is
// recorded as a failed check and the remaining experiments still run and
// keep their artifacts.  Returns the number of failed checks.
class Runner {
public:
  Runner(RunConfig cfg, std::string out_root)
      : cfg_(std::move(cfg)), out_root_(std::move(out_root)) {}

  const std::vector<CheckResult>& checks() const { return checks_; }
  const std::string& directory() const { return dir_; }

  int run() {
    namespace fs = std::filesystem;
    const std::string id = cfg_.has("run.id")
                               ? cfg_.raw("run.id")
                               : detail::config_hash(cfg_.emit());
    dir_ = (fs::path(out_root_) / id).string();
    fs::create_directories(dir_);

    write_manifest();

    if (cfg_.flag("run.admissibility")) guarded("admissibility", [&] { admissibility(); });
    if (cfg_.flag("run.ellipticity")) guarded("ellipticity", [&] { ellipticity(); });
    if (cfg_.flag("run.lemma1")) guarded("lemma1", [&] { lemma1(); });

    const bool wants_path = cfg_.flag("run.caccioppoli") ||
                            cfg_.flag("run.integrability") ||
                            cfg_.flag("run.second_derivatives") ||
                            cfg_.flag("run.stress") || cfg_.flag("run.uniqueness");
    if (wants_path && proceed_) guarded("path", [&] { path_experiments(); });

    nlohmann::json verdicts = nlohmann::json::array();
    int failures = 0;
    for (const auto& c : checks_) {
      verdicts.push_back(c.to_json());
      if (!c.pass) ++failures;
    }
    detail::write_json({{"checks", verdicts}, {"failures", failures}},
                       dir_ + "/verdicts.json");
    return failures;
  }

  // Single solve at delta.start; used by the `solve` subcommand.
  SolveReport solve_once() {
    namespace fs = std::filesystem;
    const std::string id = cfg_.has("run.id")
                               ? cfg_.raw("run.id")
                               : detail::config_hash(cfg_.emit());
    dir_ = (fs::path(out_root_) / id).string();
    fs::create_directories(dir_);
    write_manifest();

    const Grid grid = build_grid(cfg_);
    const Density2D base = build_density(cfg_);
    double exponent = 0.0;
    const RegScheme scheme = build_scheme(cfg_, exponent);
    const auto u0 = build_u0(cfg_);
    DiscreteField u = DiscreteField::sample(grid, u0);
    RegularizedDensity f_delta(base, cfg_.number("delta.start"), scheme, exponent);
    SolveReport rep = minimize(f_delta, u, build_solve_options(cfg_));

    write_field_csv(u, dir_ + "/field.csv");
    write_field_binary(u, dir_ + "/field.bin");
    detail::write_json({{"status", to_string(rep.status)},
                        {"iterations", rep.iterations},
                        {"energy", rep.energy},
                        {"residual", rep.residual},
                        {"backtracks", rep.backtracks},
                        {"max_principle_excess", max_principle_excess(u)}},
                       dir_ + "/solve.json");
    return rep;
  }

private:
  template <typename F>
  void guarded(const std::string& name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      checks_.push_back({name + ".completed", false, 0.0, 0.0, e.what()});
    }
  }

  void check(const std::string& name, bool pass, double value, double threshold,
             const std::string& detail = "") {
    checks_.push_back({name, pass, value, threshold, detail});
  }

  void write_manifest() {
    nlohmann::json manifest{{"version", kVersion},
                            {"seed", cfg_.integer("seed")},
                            {"config", cfg_.emit()}};
    try {
      manifest["density"] = build_density(cfg_).descriptor();
    } catch (const std::exception&) {
      manifest["density"] = build_scalar_density(cfg_).descriptor();
    }
    detail::write_json(manifest, dir_ + "/manifest.json");
    std::ofstream cfg_echo(dir_ + "/config.cfg", std::ios::binary);
    cfg_echo << cfg_.emit();
  }

  void admissibility() {
    ExponentSet e;
    const Density2D base = build_density(cfg_);
    if (base.splitting()) {
      const auto& sd = base.as_splitting();
      if (sd.component(0).has_param("mu")) e.mu1 = sd.component(0).param("mu", 0);
      if (sd.component(1).has_param("mu")) e.mu2 = sd.component(1).param("mu", 0);
    }
    if (cfg_.has("params.mu1")) e.mu1 = cfg_.number("params.mu1");
    if (cfg_.has("reg.kappa")) e.kappa = cfg_.number("reg.kappa");
    if (cfg_.has("reg.varkappa")) e.varkappa = cfg_.number("reg.varkappa");
    if (cfg_.has("reg.gamma")) e.gamma = cfg_.number("reg.gamma");
    if (!cfg_.list("params.chi_list").empty())
      e.chi = cfg_.list("params.chi_list").front();
    const AdmissibilityReport rep = exponent_admissibility(e);
    detail::write_json(rep.to_json(), dir_ + "/admissibility.json");

    if (cfg_.raw("reg.scheme") == "gamma_power" && rep.thm_gamma &&
        !*rep.thm_gamma) {
      const bool overridden = cfg_.flag("allow_inadmissible");
      check("admissibility.gamma", overridden, cfg_.number("reg.gamma"), 0.0,
            overridden ? "inadmissible gamma, run forced by allow_inadmissible"
                       : "gamma exceeds the admissible bound; set "
                         "allow_inadmissible=true to force the run");
      proceed_ = overridden;
    }
  }

  void ellipticity() {
    nlohmann::json out;
    const Density2D base = build_density(cfg_);
    out["full"] = fit_full_ellipticity(base, 1e3).to_json();
    if (base.splitting()) {
      const auto& sd = base.as_splitting();
      out["f1"] = fit_scalar_ellipticity(sd.component(0), 0.0, 1e3).to_json();
      out["f2"] = fit_scalar_ellipticity(sd.component(1), 0.0, 1e3).to_json();
    }
    detail::write_json(out, dir_ + "/ellipticity.json");
  }

  void lemma1() {
    const Density2D base = build_density(cfg_);
    const double kappa = cfg_.number("params.kappa");
    const Lemma1Report rep = lemma1_probe(base, kappa, cfg_.list("params.levels"));
    detail::write_json(rep.to_json(), dir_ + "/lemma1.json");
    detail::CsvWriter csv(dir_ + "/lemma1.csv",
                          {"c_k", "r_k", "curvature", "grad_norm", "product", "ratio"});
    for (const auto& r : rep.rows)
      csv.row({r.c_k, r.r_k, r.curvature, r.grad_norm, r.product, r.ratio});
  }

  // Constraints decidable from the config alone, checked before any solve.
  void validate_preconditions(const Grid& grid, const ExperimentParams& params) {
    for (double a : params.alpha_list) {
      if (params.variant_mode ? !(a > -0.5) : !(a >= 0.0))
        throw std::invalid_argument(
            params.variant_mode ? "alpha > -1/2 required in variant mode"
                                : "alpha >= 0 required");
    }
    if (cfg_.flag("run.integrability"))
      for (double chi : params.chi_list)
        if (!(chi > 2.0)) throw std::invalid_argument("chi > 2 required");
    const double side = std::min(grid.x1 - grid.x0, grid.y1 - grid.y0);
    const double margin = params.cutoff_margin(grid);
    if (!(margin > 0.0 && margin <= 0.125 * side + 1e-12))
      throw std::invalid_argument("cutoff margin must lie in (0, side/8]");
  }

  void path_experiments() {
    const Grid grid = build_grid(cfg_);
    const Density2D base = build_density(cfg_);
    double exponent = 0.0;
    const RegScheme scheme = build_scheme(cfg_, exponent);
    const auto u0 = build_u0(cfg_);
    const auto schedule = build_schedule(cfg_);
    const SolveOptions sopt = build_solve_options(cfg_);
    const ExperimentParams params = build_params(cfg_, base);
    validate_preconditions(grid, params);

    if (params.mu1 >= 2.0 && !params.variant_mode)
      check("path.hypotheses_warning", true, params.mu1, 2.0,
            "mu1 >= 2: outside the higher-integrability regime, quantities "
            "reported without verdicts");

    nlohmann::json report;
    report["provenance"] = {{"version", kVersion},
                            {"seed", cfg_.integer("seed")},
                            {"density", base.descriptor()},
                            {"scheme", to_string(scheme)},
                            {"grid", {{"nx", grid.nx}, {"ny", grid.ny},
                                      {"x0", grid.x0}, {"x1", grid.x1},
                                      {"y0", grid.y0}, {"y1", grid.y1}}},
                            {"mu1", params.mu1},
                            {"l", params.l},
                            {"alpha_list", params.alpha_list},
                            {"chi_list", params.chi_list},
                            {"margin", params.cutoff_margin(grid)}};
    if (params.variant_mode) {
      report["provenance"]["gamma"] = params.gamma;
      report["provenance"]["tau_s"] = params.tau_s;
      report["provenance"]["tau_alpha"] = params.tau_alpha;
    }

    RegularizationPath path = run_path(base, scheme, exponent, u0, grid, schedule, sopt);

    {
      detail::CsvWriter csv(dir_ + "/path.csv",
                            {"delta", "viscosity", "sup_norm", "l1_increment",
                             "iterations", "residual", "energy"});
      nlohmann::json steps = nlohmann::json::array();
      for (const auto& s : path.steps) {
        csv.row({s.delta, s.viscosity, s.sup_norm, s.l1_increment,
                 static_cast<double>(s.report.iterations), s.report.residual,
                 s.report.energy});
        steps.push_back({{"delta", s.delta},
                         {"viscosity", s.viscosity},
                         {"sup_norm", s.sup_norm},
                         {"l1_increment", s.l1_increment},
                         {"iterations", s.report.iterations},
                         {"residual", s.report.residual},
                         {"energy", s.report.energy}});
      }
      report["path"] = steps;
      report["viscosity_monotone"] = path.viscosity_monotone;
      report["truncated"] = path.truncated;
    }
    write_field_csv(path.final_field(), dir_ + "/field.csv");
    write_field_binary(path.final_field(), dir_ + "/field.bin");

    check("path.converged", !path.truncated,
          static_cast<double>(path.steps.size()),
          static_cast<double>(schedule.size()), "all scheduled solves converged");

    double mp_excess = -1e300;
    for (const auto& f : path.fields)
      mp_excess = std::max(mp_excess, max_principle_excess(f));
    const double mp_tol = cfg_.number("baseline.max_principle");
    check("path.max_principle", mp_excess <= mp_tol, mp_excess, mp_tol,
          "solutions stay within the boundary-data range");

    if (path.steps.size() >= 2) {
      const double drop =
          path.steps.back().viscosity / path.steps.front().viscosity;
      const double drop_tol = cfg_.number("baseline.viscosity_drop");
      check("path.viscosity_monotone", path.viscosity_monotone, 0.0, 0.0,
            "delta * int |grad u|^2 non-increasing along the schedule");
      check("path.viscosity_drop", drop <= drop_tol, drop, drop_tol,
            "vanishing-viscosity decay over the schedule");
    }

    if (cfg_.flag("run.caccioppoli")) guarded("caccioppoli", [&] {
      const auto rows = caccioppoli_check(path, params);
      detail::CsvWriter csv(dir_ + "/caccioppoli.csv",
                            {"delta", "alpha", "lhs", "rhs", "ratio"});
      nlohmann::json jrows = nlohmann::json::array();
      for (const auto& r : rows) {
        csv.row({r.delta, r.alpha, r.lhs, r.rhs, r.ratio});
        jrows.push_back({{"delta", r.delta},
                         {"alpha", r.alpha},
                         {"lhs", r.lhs},
                         {"rhs", r.rhs},
                         {"ratio", r.ratio}});
      }
      report["caccioppoli"] = jrows;
      const double spread_tol = cfg_.number("baseline.caccioppoli_spread");
      for (double alpha : params.alpha_list) {
        double lo = 1e300, hi = 0.0;
        for (const auto& r : rows)
          if (r.alpha == alpha && r.ratio > 0.0) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
          }
        const double spread = hi > 0.0 && lo < 1e300 ? hi / lo : 1.0;
        check("caccioppoli.spread.alpha=" + detail::fmt(alpha),
              spread < spread_tol, spread, spread_tol,
              "ratio max/min across the delta schedule");
      }
    });

    if (cfg_.flag("run.integrability")) guarded("integrability", [&] {
      const auto rows = integrability_scan(path, params);
      detail::CsvWriter csv(dir_ + "/moments.csv",
                            {"delta", "chi", "m_gamma1", "m_gamma2",
                             "bootstrap_lhs", "bootstrap_rhs", "bootstrap_ratio"});
      nlohmann::json jrows = nlohmann::json::array();
      for (const auto& r : rows) {
        csv.row({r.delta, r.chi, r.m_gamma1, r.m_gamma2, r.bootstrap_lhs,
                 r.bootstrap_rhs, r.bootstrap_ratio});
        jrows.push_back({{"delta", r.delta},
                         {"chi", r.chi},
                         {"m_gamma1", r.m_gamma1},
                         {"m_gamma2", r.m_gamma2},
                         {"bootstrap_lhs", r.bootstrap_lhs},
                         {"bootstrap_rhs", r.bootstrap_rhs},
                         {"bootstrap_ratio", r.bootstrap_ratio},
                         {"saturated", r.saturated}});
      }
      report["moments"] = jrows;
      const double trend_tol = cfg_.number("baseline.moment_trend");
      for (double chi : params.chi_list) {
        const double trend = moment_trend(rows, chi);
        check("integrability.trend.chi=" + detail::fmt(chi), trend <= trend_tol,
              trend, trend_tol, "successive-delta Gamma_1 moment ratio");
      }
    });

    if (cfg_.flag("run.second_derivatives")) guarded("second_derivatives", [&] {
      const auto rows = second_derivative_bounds(
          path, cfg_.number("params.alpha1"), cfg_.number("params.alpha2"), params);
      detail::CsvWriter csv(dir_ + "/second_derivatives.csv",
                            {"delta", "weighted_i1", "weighted_i2",
                             "hessian_l2_core", "gradient_linf_core"});
      nlohmann::json jrows = nlohmann::json::array();
      for (const auto& r : rows) {
        csv.row({r.delta, r.weighted_i1, r.weighted_i2, r.hessian_l2_core,
                 r.gradient_linf_core});
        jrows.push_back({{"delta", r.delta},
                         {"weighted_i1", r.weighted_i1},
                         {"weighted_i2", r.weighted_i2},
                         {"hessian_l2_core", r.hessian_l2_core},
                         {"gradient_linf_core", r.gradient_linf_core}});
      }
      report["second_derivatives"] = jrows;
    });

    const bool needs_second_path = cfg_.flag("run.stress") || cfg_.flag("run.uniqueness");
    if (needs_second_path) guarded("second_path", [&] {
      const auto schedule_b = geometric_schedule(
          cfg_.number("delta.start"), cfg_.number("delta.stop"), 1.0 / 3.0);
      // Second initialization: seeded interior noise on top of u0.
      std::mt19937_64 rng(detail::mix_seed(
          static_cast<std::uint64_t>(cfg_.integer("seed")), 7));
      std::uniform_real_distribution<double> noise(-1e-2, 1e-2);
      DiscreteField u0b = DiscreteField::sample(grid, u0);
      for (std::size_t k = 0; k < u0b.values.size(); ++k)
        if (!u0b.mask[k]) u0b.values[k] += noise(rng);
      auto u0b_fn = [&grid, &u0b](double x, double y) {
        const int i = static_cast<int>(std::lround((x - grid.x0) / grid.hx()));
        const int j = static_cast<int>(std::lround((y - grid.y0) / grid.hy()));
        return u0b.at(i, j);
      };
      RegularizationPath path_b =
          run_path(base, scheme, exponent, u0b_fn, grid, schedule_b, sopt);
      check("second_path.converged", !path_b.truncated,
            static_cast<double>(path_b.steps.size()),
            static_cast<double>(schedule_b.size()), "alternate schedule solved");

      if (cfg_.flag("run.stress")) guarded("stress", [&] {
        const StressReport sa = stress_analysis(path, params);
        const StressReport sb = stress_analysis(path_b, params);
        detail::CsvWriter csv(dir_ + "/stress.csv",
                              {"delta", "containment_margin", "sup_dist_prev"});
        nlohmann::json jrows = nlohmann::json::array();
        for (const auto& s : sa.steps) {
          csv.row({s.delta, s.containment_margin, s.sup_dist_prev});
          jrows.push_back({{"delta", s.delta},
                           {"containment_margin", s.containment_margin},
                           {"sup_dist_prev", s.sup_dist_prev}});
        }
        double min_margin = 1e300;
        for (const auto& s : sa.steps)
          min_margin = std::min(min_margin, s.containment_margin);
        check("stress.containment", min_margin > 0.0, min_margin, 0.0,
              "base stress strictly inside Im f'");
        const double agree =
            stress_cross_distance(sa.final_stress, sb.final_stress, params);
        const double agree_tol = cfg_.number("baseline.stress_agreement");
        check("stress.agreement", agree <= agree_tol, agree, agree_tol,
              "final stress fields of the two schedules");
        report["stress"] = {{"steps", jrows}, {"cross_agreement", agree}};
      });

      if (cfg_.flag("run.uniqueness")) guarded("uniqueness", [&] {
        const double dev =
            uniqueness_deviation(path.final_field(), path_b.final_field());
        const double dev_tol = cfg_.number("baseline.uniqueness_dev");
        // Uniqueness up to constants is claimed only when both exponents sit
        // below 2; elsewhere the deviation is recorded without a verdict.
        bool in_regime = params.mu1 < 2.0;
        if (base.splitting() && base.as_splitting().component(1).has_param("mu"))
          in_regime = in_regime &&
                      base.as_splitting().component(1).param("mu", 2.0) < 2.0;
        detail::write_json({{"deviation", dev},
                            {"threshold", dev_tol},
                            {"verdict_suppressed", !in_regime}},
                           dir_ + "/uniqueness.json");
        report["uniqueness"] = {{"deviation", dev},
                                {"verdict_suppressed", !in_regime}};
        if (in_regime)
          check("uniqueness.deviation", dev <= dev_tol, dev, dev_tol,
                "mean-removed interior sup deviation of the two final fields");
        else
          check("uniqueness.recorded", true, dev, dev_tol,
                "outside the sub-quadratic regime: deviation recorded, "
                "verdict suppressed");
      });
    });

    detail::write_json(report, dir_ + "/report.json");
  }

  RunConfig cfg_;
  std::string out_root_;
  std::string dir_;
  std::vector<CheckResult> checks_;
  bool proceed_ = true;
};

} // namespace lingrow
