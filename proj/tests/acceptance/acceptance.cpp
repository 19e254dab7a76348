// End-to-end acceptance suite: one line per criterion, exit code = number of
// failed criteria.  Tolerances are fixed here, not configurable.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "lingrow/lingrow.hpp"

using namespace lingrow;

namespace {

struct SubCheck {
  std::string label;
  bool pass;
  double value;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<SubCheck> subs;

  bool pass() const {
    for (const auto& s : subs)
      if (!s.pass) return false;
    return true;
  }
};

std::vector<CriterionResult> g_results;

class Criterion {
public:
  Criterion(int id, std::string title, double budget) {
    res_.id = id;
    res_.title = std::move(title);
    res_.budget_seconds = budget;
    start_ = std::chrono::steady_clock::now();
  }
  void check(const std::string& label, bool pass, double value) {
    res_.subs.push_back({label, pass, value});
  }
  ~Criterion() {
    const auto stop = std::chrono::steady_clock::now();
    res_.seconds = std::chrono::duration<double>(stop - start_).count();
    res_.subs.push_back({"runtime budget (s)", res_.seconds < res_.budget_seconds,
                         res_.seconds});
    g_results.push_back(res_);
  }

private:
  CriterionResult res_;
  std::chrono::steady_clock::time_point start_;
};

Density2D phi_split(double mu1, double mu2) {
  return Density2D(
      SplittingDensity(ScalarDensity::phi_mu(mu1), ScalarDensity::phi_mu(mu2)));
}

double phi_mu_quadrature(double mu, double t) {
  auto inner = [&](double s) {
    return detail::gauss_legendre(
        [&](double r) { return std::pow(1.0 + r, -mu); }, 0.0, s,
        8 + static_cast<int>(s));
  };
  return (mu - 1.0) *
         detail::gauss_legendre(inner, 0.0, t, 8 + static_cast<int>(t));
}

DiscreteField flattened_interior(const DiscreteField& data) {
  DiscreteField u = data;
  for (std::size_t k = 0; k < u.values.size(); ++k)
    if (!u.mask[k]) u.values[k] = 0.0;
  return u;
}

double sine_data(double x, double y) { return std::sin(2.0 * M_PI * x) * y; }

// --- criteria ---

void criterion_1() {
  Criterion c(1, "density oracle: Phi_mu closed forms vs double-integral quadrature", 5.0);
  double worst = 0.0;
  for (double mu : {1.5, 2.0, 3.0}) {
    const ScalarDensity f = ScalarDensity::phi_mu(mu);
    for (int k = 0; k < 100; ++k) {
      const double t = 50.0 * k / 99.0;
      worst = std::max(worst, std::abs(f.value(t) - phi_mu_quadrature(mu, t)));
    }
  }
  c.check("max |closed form - quadrature| <= 1e-8", worst <= 1e-8, worst);
}

void criterion_2() {
  Criterion c(2, "ellipticity fits: scalar mu within 0.05, splitting mu = 3 +- 0.1", 10.0);
  for (double mu : {1.2, 1.5, 2.0, 3.0}) {
    const auto rep = fit_scalar_ellipticity(ScalarDensity::phi_mu(mu), 0.0, 1e3, 1000);
    c.check("scalar mu_fit for mu=" + std::to_string(mu),
            std::abs(rep.mu_fit - mu) <= 0.05, rep.mu_fit);
  }
  const auto full = fit_full_ellipticity(phi_split(1.5, 3.0), 1e3);
  c.check("splitting mu_fit = 3 +- 0.1", std::abs(full.mu_fit - 3.0) <= 0.1,
          full.mu_fit);
  c.check("splitting upper bound constant", full.bounded_second, full.kappa_fit);
}

void criterion_3() {
  Criterion c(3, "level-curve probe on radial Phi_2", 30.0);
  const Density2D f{RadialDensity(ScalarDensity::phi_mu(2.0))};
  const std::vector<double> levels{5.0, 10.0, 20.0, 50.0};

  const auto rep1 = lemma1_probe(f, 1.0, levels);
  double min_ratio = 1e300;
  double worst_curv = 0.0;
  for (const auto& r : rep1.rows) {
    min_ratio = std::min(min_ratio, r.ratio);
    worst_curv = std::max(worst_curv, std::abs(r.curvature * r.r_k - 1.0));
  }
  c.check("kappa=1 ratio bounded below by 0.5", min_ratio >= 0.5, min_ratio);

  const auto rep15 = lemma1_probe(f, 1.5, levels);
  bool monotone = true;
  for (std::size_t k = 1; k < rep15.rows.size(); ++k)
    if (!(rep15.rows[k].ratio < rep15.rows[k - 1].ratio)) monotone = false;
  const double decay = rep15.rows.front().ratio / rep15.rows.back().ratio;
  for (const auto& r : rep15.rows)
    worst_curv = std::max(worst_curv, std::abs(r.curvature * r.r_k - 1.0));
  c.check("kappa=1.5 ratio decays monotonically", monotone, decay);
  c.check("kappa=1.5 decay factor > 10 across levels", decay > 10.0, decay);
  c.check("curvature matches 1/r_k to relative 1e-3", worst_curv <= 1e-3,
          worst_curv);
}

void criterion_4() {
  Criterion c(4, "solver exactness: affine reproduction and harmonic oracle", 30.0);
  SolveOptions tight;
  tight.rtol = 1e-12;
  {
    const Grid g = Grid::unit_square(33);
    auto affine = [](double x, double y) { return 0.3 + 1.2 * x - 0.7 * y; };
    const DiscreteField exact = DiscreteField::sample(g, affine);
    RegularizedDensity f(phi_split(2.0, 2.0), 1e-2, RegScheme::quadratic);
    DiscreteField u = flattened_interior(exact);
    const SolveReport rep = minimize(f, u, tight);
    c.check("affine solve converged", rep.status == SolveStatus::converged,
            static_cast<double>(rep.iterations));
    c.check("affine max deviation <= 1e-6", u.max_abs_diff(exact) <= 1e-6,
            u.max_abs_diff(exact));
    const double res = euler_residual(f, u);
    c.check("affine Euler residual <= 1e-9", res <= 1e-9, res);
  }
  {
    const Grid g = Grid::unit_square(65);
    auto harmonic = [](double x, double y) { return x * x - y * y; };
    const DiscreteField exact = DiscreteField::sample(g, harmonic);
    Density2D zero_base(
        SplittingDensity(ScalarDensity::zero(), ScalarDensity::zero()));
    RegularizedDensity laplace(zero_base, 1.0, RegScheme::quadratic);
    DiscreteField u = flattened_interior(exact);
    const SolveReport rep = minimize(laplace, u, tight);
    c.check("harmonic solve converged", rep.status == SolveStatus::converged,
            static_cast<double>(rep.iterations));
    c.check("harmonic max error <= 1e-6", u.max_abs_diff(exact) <= 1e-6,
            u.max_abs_diff(exact));
  }
}

void criterion_5() {
  Criterion c(5, "gradient and Hessian finite-difference consistency", 10.0);
  const Grid g = Grid::unit_square(33);
  RegularizedDensity f(phi_split(1.5, 3.0), 1e-2, RegScheme::quadratic);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst_grad = 0.0, worst_hess = 0.0;
  for (int field = 0; field < 5; ++field) {
    DiscreteField u(g);
    for (auto& v : u.values) v = dist(rng);
    const auto grad = energy_gradient(f, u);
    for (int dir = 0; dir < 3; ++dir) {
      DiscreteField v(g);
      double vmax = 0.0;
      for (std::size_t k = 0; k < v.values.size(); ++k)
        if (!v.mask[k]) {
          v.values[k] = dist(rng);
          vmax = std::max(vmax, std::abs(v.values[k]));
        }
      auto shifted = [&](double t) {
        DiscreteField w = u;
        for (std::size_t k = 0; k < w.values.size(); ++k)
          w.values[k] += t * v.values[k];
        return w;
      };
      double gdotv = 0.0;
      for (std::size_t k = 0; k < v.values.size(); ++k)
        gdotv += grad[k] * v.values[k];
      const double eps = 1e-6 * (1.0 + u.max_value()) / vmax;
      const double fd =
          (discrete_energy(f, shifted(eps)) - discrete_energy(f, shifted(-eps))) /
          (2.0 * eps);
      worst_grad = std::max(worst_grad, std::abs(fd - gdotv) / std::abs(gdotv));

      const double heps = 1e-5 * (1.0 + u.max_value()) / vmax;
      const auto gp = energy_gradient(f, shifted(heps));
      const auto gm = energy_gradient(f, shifted(-heps));
      double hquad = 0.0;
      for (std::size_t k = 0; k < v.values.size(); ++k)
        hquad += (gp[k] - gm[k]) / (2.0 * heps) * v.values[k];
      const double e0 = discrete_energy(f, u);
      const double fd2 = (discrete_energy(f, shifted(heps)) - 2.0 * e0 +
                          discrete_energy(f, shifted(-heps))) /
                         (heps * heps);
      worst_hess = std::max(worst_hess, std::abs(hquad - fd2) / std::abs(fd2));
    }
  }
  c.check("gradient check relative error <= 1e-5", worst_grad <= 1e-5, worst_grad);
  c.check("Hessian check relative error <= 1e-3", worst_hess <= 1e-3, worst_hess);
}

// Shared by criteria 6-10: the smooth preset in the higher-integrability
// regime (mu1 = 1.5 < 2, mu2 = 3) on the 65^2 unit square.
RegularizationPath* g_path7 = nullptr;
std::vector<double> g_mp_excesses;

void criterion_7() {
  Criterion c(7, "vanishing viscosity along the delta path", 120.0);
  static RegularizationPath path = run_path(
      phi_split(1.5, 3.0), RegScheme::quadratic, 0.0, sine_data,
      Grid::unit_square(65), geometric_schedule(0.1, 1e-4, 0.1));
  g_path7 = &path;
  c.check("all four solves converged", !path.truncated && path.steps.size() == 4,
          static_cast<double>(path.steps.size()));
  c.check("viscosity energy non-increasing", path.viscosity_monotone,
          path.steps.back().viscosity);
  const double drop = path.steps.back().viscosity / path.steps.front().viscosity;
  c.check("final viscosity <= 0.1 x initial", drop <= 0.1, drop);
  for (const auto& f : path.fields)
    g_mp_excesses.push_back(max_principle_excess(f));
}

void criterion_8() {
  Criterion c(8, "Caccioppoli ratio stable across the schedule", 120.0);
  ExperimentParams params;
  params.mu1 = 1.5;
  params.l = 3;
  params.alpha_list = {0.0, 1.0, 2.0};
  const auto rows = caccioppoli_check(*g_path7, params);
  for (double alpha : params.alpha_list) {
    double lo = 1e300, hi = 0.0;
    for (const auto& r : rows)
      if (r.alpha == alpha) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
      }
    const double spread = hi / lo;
    c.check("alpha=" + std::to_string(alpha) + " ratio max/min < 1e2",
            spread < 1e2 && std::isfinite(spread), spread);
  }
}

void criterion_9() {
  Criterion c(9, "higher integrability: Gamma_1 moments bounded in delta", 120.0);
  ExperimentParams params;
  params.mu1 = 1.5;
  params.l = 3;
  params.chi_list = {3.0, 4.0, 6.0, 8.0};
  const auto rows = integrability_scan(*g_path7, params);
  for (double chi : params.chi_list) {
    const double trend = moment_trend(rows, chi);
    c.check("chi=" + std::to_string(chi) + " successive moment ratio <= 2",
            trend <= 2.0, trend);
  }
}

void criterion_10() {
  Criterion c(10, "stress uniqueness across two schedules", 180.0);
  ExperimentParams params;
  params.mu1 = 1.5;
  RegularizationPath path_b = run_path(
      phi_split(1.5, 3.0), RegScheme::quadratic, 0.0, sine_data,
      Grid::unit_square(65), geometric_schedule(0.1, 1e-4, 1.0 / 3.0));
  const StressReport sa = stress_analysis(*g_path7, params);
  const StressReport sb = stress_analysis(path_b, params);
  double min_margin = 1e300;
  for (const auto& s : sa.steps) min_margin = std::min(min_margin, s.containment_margin);
  for (const auto& s : sb.steps) min_margin = std::min(min_margin, s.containment_margin);
  c.check("containment margin positive at every cell", min_margin > 0.0, min_margin);
  const double agree = stress_cross_distance(sa.final_stress, sb.final_stress, params);
  c.check("final stress fields agree to 1e-3", agree <= 1e-3, agree);
  for (const auto& f : path_b.fields)
    g_mp_excesses.push_back(max_principle_excess(f));
}

double uniqueness_dev_on(int n) {
  const Grid g = Grid::unit_square(n);
  const Density2D base = phi_split(1.5, 1.5);
  RegularizationPath a = run_path(base, RegScheme::quadratic, 0.0, sine_data, g,
                                  geometric_schedule(0.1, 1e-4, 0.1));
  // Second path: one-third decay past the same floor, perturbed start.
  std::vector<double> sched_b;
  for (double d = 0.1; d > 3e-5; d /= 3.0) sched_b.push_back(d);
  DiscreteField ub = DiscreteField::sample(g, sine_data);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(-1e-2, 1e-2);
  for (std::size_t k = 0; k < ub.values.size(); ++k)
    if (!ub.mask[k]) ub.values[k] += noise(rng);
  auto u0b = [&g, &ub](double x, double y) {
    const int i = static_cast<int>(std::lround((x - g.x0) / g.hx()));
    const int j = static_cast<int>(std::lround((y - g.y0) / g.hy()));
    return ub.at(i, j);
  };
  RegularizationPath b =
      run_path(base, RegScheme::quadratic, 0.0, u0b, g, sched_b);
  for (const auto& f : a.fields) g_mp_excesses.push_back(max_principle_excess(f));
  return uniqueness_deviation(a.final_field(), b.final_field());
}

void criterion_11() {
  Criterion c(11, "uniqueness up to constants in the sub-quadratic regime", 240.0);
  const double dev65 = uniqueness_dev_on(65);
  const double dev129 = uniqueness_dev_on(129);
  c.check("mean-removed deviation <= 1e-3 on 65^2", dev65 <= 1e-3, dev65);
  c.check("deviation shrinks on 129^2", dev129 < dev65, dev129);
}

void criterion_6() {
  Criterion c(6, "maximum principle for every preset solve", 60.0);
  // dedicated ridge and affine solves on top of the path fields collected
  // by criteria 7, 10, and 11
  {
    const Grid g = Grid::unit_square(65);
    RegularizedDensity f(phi_split(1.5, 3.0), 1e-2, RegScheme::quadratic);
    DiscreteField u = DiscreteField::sample(g, [](double x, double) {
      const double t = 2.0 * x - 1.0;
      return std::sqrt(t * t + 0.01) - 0.1;
    });
    minimize(f, u);
    g_mp_excesses.push_back(max_principle_excess(u));
  }
  {
    const Grid g = Grid::unit_square(65);
    RegularizedDensity f(phi_split(2.0, 2.0), 1e-2, RegScheme::quadratic);
    DiscreteField u = DiscreteField::sample(
        g, [](double x, double y) { return 0.1 + x - 2.0 * y; });
    minimize(f, u);
    g_mp_excesses.push_back(max_principle_excess(u));
  }
  double worst = -1e300;
  for (double e : g_mp_excesses) worst = std::max(worst, e);
  c.check("max principle excess <= 1e-8 over " +
              std::to_string(g_mp_excesses.size()) + " solves",
          worst <= 1e-8, worst);
}

void criterion_12() {
  Criterion c(12, "exponent calculator vs direct inequality evaluation", 5.0);
  int mismatches = 0;
  int witness_failures = 0;
  int admissible_points = 0;

  // two-sided route: mu in (1, 4), kappa in (-1, 1]
  for (int i = 0; i < 100; ++i) {
    const double mu = 1.0 + 3.0 * (i + 1) / 101.0;
    for (int j = 0; j < 100; ++j) {
      const double kappa = -0.99 + 1.99 * j / 99.0;
      ExponentSet e;
      e.mu1 = mu;
      e.kappa = kappa;
      const auto rep = exponent_admissibility(e);
      const bool direct = mu < 2.0 + kappa;
      if (!rep.cor_two_sided || *rep.cor_two_sided != direct) ++mismatches;
    }
  }
  // unbounded-first route: varkappa >= 0 against 2 - mu1
  for (int i = 0; i < 100; ++i) {
    const double mu1 = 1.0 + 1.2 * (i + 1) / 101.0;
    for (int j = 0; j < 100; ++j) {
      const double vk = 1.2 * j / 99.0;
      ExponentSet e;
      e.mu1 = mu1;
      e.varkappa = vk;
      const auto rep = exponent_admissibility(e);
      const bool direct = vk >= 0.0 && vk < 2.0 - mu1;
      if (!rep.cor_unbounded_first || *rep.cor_unbounded_first != direct)
        ++mismatches;
    }
  }
  // gamma route with witness verification
  for (int i = 0; i < 100; ++i) {
    const double mu1 = 1.0 + 0.99 * (i + 1) / 100.0;
    for (int j = 0; j < 100; ++j) {
      const double gamma = 0.5 * j / 99.0;
      ExponentSet e;
      e.mu1 = mu1;
      e.gamma = gamma;
      const auto rep = exponent_admissibility(e);
      const double gap = 2.0 - mu1;
      const bool direct = mu1 < 2.0 && gamma < gap / (1.0 + gap);
      if (!rep.thm_gamma || *rep.thm_gamma != direct) ++mismatches;
      if (direct) {
        ++admissible_points;
        if (!rep.witness) {
          ++witness_failures;
        } else {
          // literal re-evaluation of the three inequalities
          const double ts = rep.witness->tau_s, ta = rep.witness->tau_alpha;
          const bool ok = (ta < ts) &&
                          (gamma < 2.0 * (ts - ta) / (1.0 + 2.0 * ts)) &&
                          (ts - ta < 1.0 - 0.5 * mu1) && ta > 0.0;
          if (!ok) ++witness_failures;
        }
      }
    }
  }
  c.check("verdicts match direct inequalities on the 3x10^4 lattice",
          mismatches == 0, static_cast<double>(mismatches));
  c.check("every admissible gamma point has a valid witness (" +
              std::to_string(admissible_points) + " points)",
          witness_failures == 0, static_cast<double>(witness_failures));
}

} // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_7();   // shared path computed here
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_6();   // aggregates max-principle checks from the runs above
  criterion_12();

  std::sort(g_results.begin(), g_results.end(),
            [](const CriterionResult& a, const CriterionResult& b) {
              return a.id < b.id;
            });
  int failures = 0;
  for (const auto& r : g_results) {
    const bool ok = r.pass();
    if (!ok) ++failures;
    std::printf("criterion %2d [%s] (%6.2f s) %s\n", r.id, ok ? "PASS" : "FAIL",
                r.seconds, r.title.c_str());
    for (const auto& s : r.subs)
      std::printf("    %-55s %s  (value %.6g)\n", s.label.c_str(),
                  s.pass ? "pass" : "FAIL", s.value);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(g_results.size()) - failures, g_results.size());
  return failures;
}
