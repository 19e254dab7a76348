// Batch front-end for the linear-growth splitting toolkit.
//
// Usage:
//   lingrow <subcommand> [--config FILE] [key=value ...]
//
// Subcommands:
//   check-density   density invariants, growth constants, recession,
//                   ellipticity fit; JSON verdict on stdout
//   lemma1          level-curve kappa probe; CSV table + JSON verdict
//   admissible      per-theorem exponent verdicts; JSON on stdout
//   solve           one regularized solve at delta.start; field artifacts
//   path            delta-schedule run with the selected experiments
//   full            admissibility + ellipticity + path with every experiment
//
// key=value pairs override config-file entries and use the same keys; the
// output root comes from --out, or $LINGROW_OUT, or "runs".  Exit status is
// the number of failed checks (0 = all selected baselines met).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lingrow/lingrow.hpp"

namespace {

void print_usage() {
  std::cout <<
      "usage: lingrow <check-density|lemma1|admissible|solve|path|full>\n"
      "               [--config FILE] [--out DIR] [key=value ...]\n"
      "keys and defaults (see README):\n";
  for (const auto& [k, v] : lingrow::RunConfig::schema())
    std::cout << "  " << k << " = " << (v.empty() ? "<unset>" : v) << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int check_density_cmd(const lingrow::RunConfig& cfg) {
  using namespace lingrow;
  nlohmann::json out;
  int failures = 0;
  auto check_scalar = [&](const ScalarDensity& f, nlohmann::json& j) {
    j["descriptor"] = f.descriptor();
    const auto g = growth_constants(f, 0.0, 1e3);
    j["growth"] = {{"a1", g.a1}, {"a2", g.a2}, {"a3", g.a3}, {"a4", g.a4},
                   {"uniform_linear", g.uniform_linear}};
    const auto r = recession(f, 1.0);
    j["recession"] = {{"value", r.value},
                      {"error_estimate", r.error_estimate},
                      {"converged", r.converged}};
    bool convex = true;
    double worst_fd = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double t = -1e3 + 2e3 * i / 200.0;
      if (!(f.second(t) > 0.0)) convex = false;
      const double h = 1e-5 * (1.0 + std::abs(t)) * f.fd_scale(t);
      const double fd2 = (f.deriv(t + h) - f.deriv(t - h)) / (2.0 * h);
      worst_fd = std::max(worst_fd, std::abs(fd2 - f.second(t)) /
                                        (1.0 + std::abs(f.second(t))));
    }
    j["strictly_convex"] = convex;
    j["fd_consistency"] = worst_fd;
    if (!convex || worst_fd > 1e-5) ++failures;
    if (g.uniform_linear) {
      try {
        j["ellipticity"] = fit_scalar_ellipticity(f, 0.0, 1e3).to_json();
      } catch (const std::exception& e) {
        j["ellipticity"] = {{"error", e.what()}};
      }
    }
  };

  try {
    const Density2D d = build_density(cfg);
    if (d.splitting()) {
      const auto& sd = d.as_splitting();
      check_scalar(sd.component(0), out["f1"]);
      check_scalar(sd.component(1), out["f2"]);
    } else {
      check_scalar(d.as_radial().profile(), out["profile"]);
    }
    out["full_ellipticity"] = fit_full_ellipticity(d, 1e3).to_json();
  } catch (const std::exception&) {
    check_scalar(build_scalar_density(cfg), out["density"]);
  }
  out["failures"] = failures;
  std::cout << out.dump(2) << "\n";
  return failures;
}

int admissible_cmd(const lingrow::RunConfig& cfg) {
  using namespace lingrow;
  ExponentSet e;
  if (cfg.has("params.mu1"))
    e.mu1 = cfg.number("params.mu1");
  else if (cfg.has("mu1"))
    e.mu1 = cfg.number("mu1");
  else
    e.mu1 = cfg.number("mu");
  if (cfg.has("mu2")) e.mu2 = cfg.number("mu2");
  if (cfg.has("reg.kappa")) e.kappa = cfg.number("reg.kappa");
  if (cfg.has("reg.varkappa")) e.varkappa = cfg.number("reg.varkappa");
  if (cfg.has("reg.gamma")) e.gamma = cfg.number("reg.gamma");
  const auto chis = cfg.list("params.chi_list");
  if (!chis.empty()) e.chi = chis.front();
  const auto rep = exponent_admissibility(e);
  std::cout << rep.to_json().dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  using namespace lingrow;
  if (argc < 2) {
    print_usage();
    return 2;
  }
  const std::string cmd = argv[1];
  if (cmd == "-h" || cmd == "--help" || cmd == "help") {
    print_usage();
    return 0;
  }

  std::string out_root;
  if (const char* env = std::getenv("LINGROW_OUT")) out_root = env;
  if (out_root.empty()) out_root = "runs";

  RunConfig cfg;
  try {
    for (int a = 2; a < argc; ++a) {
      const std::string arg = argv[a];
      if (arg == "--config") {
        if (a + 1 >= argc) throw std::invalid_argument("--config needs a file");
        cfg = RunConfig::parse(read_file(argv[++a]));
      } else if (arg == "--out") {
        if (a + 1 >= argc) throw std::invalid_argument("--out needs a directory");
        out_root = argv[++a];
      } else {
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("expected key=value, got '" + arg + "'");
        cfg.set(arg.substr(0, eq), arg.substr(eq + 1));
      }
    }

    if (cmd == "check-density") return check_density_cmd(cfg);
    if (cmd == "admissible") return admissible_cmd(cfg);
    if (cmd == "lemma1") {
      cfg.set("run.lemma1", "true");
      Runner r(cfg, out_root);
      const Density2D base = build_density(cfg);
      const auto rep =
          lemma1_probe(base, cfg.number("params.kappa"), cfg.list("params.levels"));
      std::cout << rep.to_json().dump(2) << "\n";
      int rc = r.run();
      std::cerr << "artifacts: " << r.directory() << "\n";
      return rc;
    }
    if (cmd == "solve") {
      Runner r(cfg, out_root);
      const SolveReport rep = r.solve_once();
      std::cerr << "artifacts: " << r.directory() << "\n";
      return rep.status == SolveStatus::converged ? 0 : 1;
    }
    if (cmd == "path" || cmd == "full") {
      if (cmd == "full") {
        for (const char* k :
             {"run.ellipticity", "run.lemma1", "run.caccioppoli",
              "run.integrability", "run.second_derivatives", "run.stress",
              "run.uniqueness", "run.admissibility"})
          cfg.set(k, "true");
      } else if (!cfg.flag("run.caccioppoli") && !cfg.flag("run.integrability") &&
                 !cfg.flag("run.second_derivatives") && !cfg.flag("run.stress") &&
                 !cfg.flag("run.uniqueness")) {
        cfg.set("run.caccioppoli", "true");
        cfg.set("run.integrability", "true");
      }
      Runner r(cfg, out_root);
      const int failures = r.run();
      for (const auto& c : r.checks())
        std::cerr << (c.pass ? "[pass] " : "[FAIL] ") << c.name << " value="
                  << c.value << " threshold=" << c.threshold
                  << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
      std::cerr << "artifacts: " << r.directory() << "\n";
      return std::min(failures, 100);
    }
    std::cerr << "unknown subcommand '" << cmd << "'\n";
    print_usage();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
