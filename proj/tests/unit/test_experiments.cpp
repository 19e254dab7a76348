#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lingrow/experiments.hpp"

using namespace lingrow;

namespace {

Density2D phi_split(double mu1, double mu2) {
  return Density2D(
      SplittingDensity(ScalarDensity::phi_mu(mu1), ScalarDensity::phi_mu(mu2)));
}

} // namespace

TEST_CASE("geometric schedule shape") {
  const auto s = geometric_schedule(0.1, 1e-4, 0.1);
  REQUIRE(s.size() == 4);
  CHECK(s.front() == 0.1);
  CHECK(s.back() == 1e-4);
  const auto t = geometric_schedule(0.1, 1e-4, 1.0 / 3.0);
  CHECK(t.back() == 1e-4);
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] < t[k - 1]);
  CHECK_THROWS_AS(geometric_schedule(1e-4, 0.1, 0.1), std::invalid_argument);
}

TEST_CASE("affine path is stationary for every delta") {
  const Grid g = Grid::unit_square(33);
  auto affine = [](double x, double y) { return 0.1 + 2.0 * x - 1.0 * y; };
  const auto schedule = geometric_schedule(0.1, 1e-4, 0.1);
  RegularizationPath path = run_path(phi_split(2.0, 2.0), RegScheme::quadratic,
                                     0.0, affine, g, schedule);
  REQUIRE(path.steps.size() == 4);
  CHECK_FALSE(path.truncated);
  CHECK(path.viscosity_monotone);
  const double grad_sq = 2.0 * 2.0 + 1.0 * 1.0;
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    CHECK(path.steps[k].l1_increment <= 1e-12);
    CHECK_THAT(path.steps[k].viscosity,
               Catch::Matchers::WithinRel(path.deltas[k] * grad_sq, 1e-9));
    CHECK(max_principle_excess(path.fields[k]) <= 1e-12);
  }
  CHECK_THAT(path.steps.back().viscosity / path.steps.front().viscosity,
             Catch::Matchers::WithinRel(1e-3, 1e-9));

  SECTION("Caccioppoli left side vanishes on affine solutions") {
    ExperimentParams params;
    params.mu1 = 2.0;
    const auto rows = caccioppoli_check(path, params);
    REQUIRE(rows.size() == 4 * params.alpha_list.size());
    for (const auto& r : rows) {
      CHECK(r.lhs <= 1e-20);
      CHECK(r.rhs > 0.0);
    }
  }

  SECTION("zero data gives identically zero reports") {
    RegularizationPath zero_path =
        run_path(phi_split(2.0, 2.0), RegScheme::quadratic, 0.0,
                 [](double, double) { return 0.0; }, g, schedule);
    for (const auto& s : zero_path.steps) {
      CHECK(s.viscosity == 0.0);
      CHECK(s.sup_norm == 0.0);
      CHECK(s.l1_increment == 0.0);
    }
  }
}

TEST_CASE("moment scan on a manufactured constant-gradient field") {
  const Grid g = Grid::unit_square(33);
  const double slope = 2.0;
  auto u0 = [slope](double x, double) { return slope * x; };
  // one-step "path" so the scan sees a single solved-looking field
  RegularizationPath path(g, phi_split(2.0, 2.0), RegScheme::quadratic, 0.0);
  path.deltas = {1e-2};
  path.fields = {DiscreteField::sample(g, u0)};
  path.steps.resize(1);

  ExperimentParams params;
  params.mu1 = 2.0;
  const auto rows = integrability_scan(path, params);
  REQUIRE(rows.size() == params.chi_list.size());

  const CutoffField eta(g, params.cutoff_margin(g));
  double eta_mass = 0.0;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i)
      eta_mass += std::pow(eta.at(i, j), 2.0 * params.l);
  eta_mass *= g.hx() * g.hy();

  double prev = 0.0;
  for (const auto& r : rows) {
    const double expected = std::pow(1.0 + slope * slope, 0.5 * r.chi) * eta_mass;
    CHECK_THAT(r.m_gamma1, Catch::Matchers::WithinRel(expected, 1e-12));
    CHECK_THAT(r.m_gamma2, Catch::Matchers::WithinRel(eta_mass, 1e-12));
    CHECK(r.m_gamma1 >= prev);  // monotone in chi since Gamma_1 >= 1
    prev = r.m_gamma1;
    CHECK(r.bootstrap_lhs > 0.0);
    CHECK(r.bootstrap_rhs >= 1.0);
    CHECK(std::isfinite(r.bootstrap_ratio));
    CHECK_FALSE(r.saturated);
  }
}

TEST_CASE("moment overflow is flagged, not fatal") {
  const Grid g = Grid::unit_square(17);
  RegularizationPath path(g, phi_split(2.0, 2.0), RegScheme::quadratic, 0.0);
  path.deltas = {1e-2};
  path.fields = {DiscreteField::sample(g, [](double x, double) { return 1e9 * x; })};
  path.steps.resize(1);
  ExperimentParams params;
  params.chi_list = {400.0};
  const auto rows = integrability_scan(path, params);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].saturated);
  CHECK(std::isfinite(rows[0].m_gamma1));
}

TEST_CASE("second-derivative integrals vanish on affine paths") {
  const Grid g = Grid::unit_square(33);
  const auto schedule = geometric_schedule(0.1, 1e-2, 0.1);
  RegularizationPath path =
      run_path(phi_split(1.5, 1.5), RegScheme::quadratic, 0.0,
               [](double x, double y) { return x + y; }, g, schedule);
  ExperimentParams params;
  params.mu1 = 1.5;
  const auto rows = second_derivative_bounds(path, 1.0, 1.0, params);
  for (const auto& r : rows) {
    CHECK(r.weighted_i1 <= 1e-18);
    CHECK(r.weighted_i2 <= 1e-18);
    CHECK(r.hessian_l2_core <= 1e-9);
    CHECK(r.gradient_linf_core >= 1.0);
  }
}

TEST_CASE("stress fields") {
  const Grid g = Grid::unit_square(33);
  const Density2D base = phi_split(2.0, 2.0);

  SECTION("constant gradient (1,0): containment margin is one half") {
    RegularizationPath path(g, base, RegScheme::quadratic, 0.0);
    path.deltas = {1e-2};
    path.fields = {DiscreteField::sample(g, [](double x, double) { return x; })};
    path.steps.resize(1);
    ExperimentParams params;
    const auto rep = stress_analysis(path, params);
    REQUIRE(rep.steps.size() == 1);
    // sigma_1 base = phi_2'(1) = 1/2, recession slope 1
    CHECK_THAT(rep.steps[0].containment_margin,
               Catch::Matchers::WithinAbs(0.5, 2e-3));
    CHECK(rep.steps[0].violation_cell == -1);
    const auto& s = rep.final_stress;
    for (int j = 0; j < s.cells_y(); ++j)
      for (int i = 0; i < s.cells_x(); ++i) {
        const std::size_t k = static_cast<std::size_t>(s.cell_index(i, j));
        CHECK_THAT(s.sigma_base[k][0], Catch::Matchers::WithinAbs(0.5, 1e-12));
        CHECK_THAT(s.sigma[k][0], Catch::Matchers::WithinAbs(0.51, 1e-12));
        CHECK(std::abs(s.sigma[k][1]) <= 1e-15);
      }
  }

  SECTION("zero data: base stress is Df(0) = 0") {
    RegularizationPath path(g, base, RegScheme::quadratic, 0.0);
    path.deltas = {1e-2};
    path.fields = {DiscreteField(g)};
    path.steps.resize(1);
    const auto s = stress_field(path.density_at(0), path.fields[0]);
    for (const auto& v : s.sigma_base) {
      CHECK(v[0] == 0.0);
      CHECK(v[1] == 0.0);
    }
  }

  SECTION("constitutive locality: sigma_2 constant when d2 u is constant") {
    RegularizationPath path(g, phi_split(1.5, 3.0), RegScheme::quadratic, 0.0);
    path.deltas = {1e-2};
    path.fields = {DiscreteField::sample(
        g, [](double x, double y) { return std::sin(3.0 * x) + 0.7 * y; })};
    path.steps.resize(1);
    const auto s = stress_field(path.density_at(0), path.fields[0]);
    const double first = s.sigma[0][1];
    for (const auto& v : s.sigma) CHECK_THAT(v[1], Catch::Matchers::WithinAbs(first, 1e-12));
  }
}

TEST_CASE("uniqueness deviation") {
  const Grid g = Grid::unit_square(33);
  const Density2D base = phi_split(1.5, 1.5);
  auto u0 = [](double x, double y) { return std::sin(2.0 * M_PI * x) * y; };
  const auto schedule = geometric_schedule(0.1, 1e-3, 0.1);

  SolveOptions opt;
  RegularizationPath a = run_path(base, RegScheme::quadratic, 0.0, u0, g, schedule, opt);

  SECTION("identical runs deviate by zero") {
    RegularizationPath b = run_path(base, RegScheme::quadratic, 0.0, u0, g, schedule, opt);
    CHECK(uniqueness_deviation(a.final_field(), b.final_field()) == 0.0);
  }

  SECTION("a perturbed initial iterate lands on the same solution") {
    DiscreteField start = DiscreteField::sample(g, u0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1e-2, 1e-2);
    for (std::size_t k = 0; k < start.values.size(); ++k)
      if (!start.mask[k]) start.values[k] += d(rng);
    DiscreteField u = start;
    RegularizedDensity f(base, schedule.back(), RegScheme::quadratic);
    SolveOptions tight;
    tight.rtol = 1e-12;
    REQUIRE(minimize(f, u, tight).status == SolveStatus::converged);

    DiscreteField v = DiscreteField::sample(g, u0);
    REQUIRE(minimize(f, v, tight).status == SolveStatus::converged);
    CHECK(uniqueness_deviation(u, v) <= 1e-6);
  }
}

TEST_CASE("cutoff field invariants") {
  const Grid g = Grid::unit_square(65);
  const double margin = 0.125;
  const CutoffField eta(g, margin);

  double max_slope = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = eta.at(i, j);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      const double x = g.x(i), y = g.y(j);
      if (x <= margin || y <= margin || x >= 1.0 - margin || y >= 1.0 - margin)
        CHECK(v == 0.0);
      if (eta.in_core(x, y)) CHECK(v == 1.0);
      if (i + 1 < g.nx)
        max_slope = std::max(max_slope, std::abs(eta.at(i + 1, j) - v) / g.hx());
      if (j + 1 < g.ny)
        max_slope = std::max(max_slope, std::abs(eta.at(i, j + 1) - v) / g.hy());
    }
  CHECK(max_slope <= 2.0 / margin);

  CHECK_THROWS_AS(CutoffField(g, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(CutoffField(g, 0.0), std::invalid_argument);
}

TEST_CASE("variant-mode Caccioppoli accepts negative exponents") {
  const Grid g = Grid::unit_square(33);
  const auto schedule = geometric_schedule(0.1, 1e-2, 0.1);
  RegularizationPath path =
      run_path(phi_split(1.5, 1.5), RegScheme::gamma_power, 0.2,
               [](double x, double y) { return std::sin(2.0 * M_PI * x) * y; }, g,
               schedule);
  ExperimentParams params;
  params.mu1 = 1.5;
  params.variant_mode = true;
  params.gamma = 0.2;
  params.alpha_list = {-0.25, 0.0, 1.0};
  const auto rows = caccioppoli_check(path, params);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.ratio));
    CHECK(r.rhs >= 1.0);  // variant right side includes the +1 term
  }

  ExperimentParams bad = params;
  bad.alpha_list = {-0.6};
  CHECK_THROWS_AS(caccioppoli_check(path, bad), std::invalid_argument);
  ExperimentParams std_mode = params;
  std_mode.variant_mode = false;
  std_mode.alpha_list = {-0.25};
  CHECK_THROWS_AS(caccioppoli_check(path, std_mode), std::invalid_argument);
}
