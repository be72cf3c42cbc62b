#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/corrector.hpp"
#include "homog/fields.hpp"
#include "homog/runner.hpp"

using namespace homog;

namespace {

constexpr double kPi = std::numbers::pi;

/// Homogenized solve of a plain poisson problem used as corrector input.
HomSolution poisson_hom_solution(double h) {
  static const NonlinearPhase phase = NonlinearPhase::linear(1.0, 0.0);
  HomProblem hp;
  hp.area_q0 = 1.0;
  hp.surface = {0.0, 0.0};
  hp.phases = {&phase, &phase};
  hp.f0 = ScalarField::sine_product(2.0 * kPi * kPi);
  hp.g0 = {ScalarField::zero(), ScalarField::zero()};
  return solve_homogenized(hp, h);
}

}  // namespace

TEST_CASE("cutoff function: plateau, ramp and gradient bound") {
  const CutoffFunction cut{0.125};
  CHECK(cut({0.05, 0.5}) == 1.0);
  CHECK(cut({0.125, 0.5}) == 1.0);
  CHECK(cut({0.3, 0.5}) == 0.0);
  CHECK(cut({0.5, 0.25}) == 0.0);
  CHECK(cut({0.1875, 0.5}) == doctest::Approx(0.5));
  // 0 <= cut <= 1 and |grad| <= 1/eps sampled by finite differences.
  const double delta = 1e-7;
  for (double x = 0.01; x < 1.0; x += 0.043) {
    for (double y = 0.01; y < 1.0; y += 0.037) {
      const double c = cut({x, y});
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      const double gx = (cut({x + delta, y}) - cut({x - delta, y})) / (2.0 * delta);
      const double gy = (cut({x, y + delta}) - cut({x, y - delta})) / (2.0 * delta);
      CHECK(std::abs(gx) <= 1.0 / 0.125 + 1e-3);
      CHECK(std::abs(gy) <= 1.0 / 0.125 + 1e-3);
    }
  }
}

TEST_CASE("build_corrector: vanishing cell correctors reproduce interpolated v0") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({}), 1.0 / 8.0);
  const auto coeff = CoefficientField::identity();
  const auto cell = solve_cell(cell_mesh, coeff, 5);
  const auto perf = tile_mesh(cell_mesh, 4, 5);
  const auto hom = poisson_hom_solution(1.0 / 64.0);

  const auto corr = build_corrector(hom, cell, perf);
  for (std::size_t v = 0; v < perf.mesh.vertices.size(); ++v) {
    const Vec2 x = perf.mesh.vertices[v];
    // T = 0, so all variants agree with v0 at the node (up to the snapped
    // Dirichlet zeros on the outer boundary).
    CHECK(corr.u_bar.values[v] == corr.u_bar_pwc.values[v]);
    const bool outer = x.x == 0.0 || x.x == 1.0 || x.y == 0.0 || x.y == 1.0;
    if (!outer) CHECK(corr.u_bar.values[v] == corr.u_bar_cutoff.values[v]);
  }
}

TEST_CASE("build_corrector: constant v0 passes through unchanged") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({{{0.5, 0.5}, 0.25, 1}}), 1.0 / 16.0);
  const auto coeff = CoefficientField::identity();
  const auto cell = solve_cell(cell_mesh, coeff, 6);
  const auto perf = tile_mesh(cell_mesh, 2, 6);

  HomSolution hom;
  hom.mesh = std::make_shared<const TriMesh>(mesh_unit_cell(make_unit_cell({}), 1.0 / 16.0));
  hom.v0 = FemField(*hom.mesh, 3.25);
  hom.gradient = recover_gradient(hom.v0, *hom.mesh);

  const auto corr = build_corrector(hom, cell, perf);
  for (std::size_t v = 0; v < perf.mesh.vertices.size(); ++v) {
    CHECK(corr.u_bar.values[v] == doctest::Approx(3.25).epsilon(1e-14));
  }
}

TEST_CASE("build_corrector: layered corrector magnitude scales like eps T dv") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({}), 1.0 / 32.0);
  const auto coeff = CoefficientField::layered(1.0);
  const auto cell = solve_cell(cell_mesh, coeff, 7);
  const auto perf = tile_mesh(cell_mesh, 4, 7);

  HomSolution hom;
  hom.mesh = std::make_shared<const TriMesh>(mesh_unit_cell(make_unit_cell({}), 1.0 / 64.0));
  hom.v0 = FemField(*hom.mesh);
  for (std::size_t v = 0; v < hom.v0.values.size(); ++v) {
    const Vec2 p = hom.mesh->vertices[v];
    hom.v0.values[v] = p.x * (1.0 - p.x);
  }
  hom.gradient = recover_gradient(hom.v0, *hom.mesh);

  double t1_max = 0.0;
  for (double t : cell.corrector[0].values) t1_max = std::max(t1_max, std::abs(t));
  REQUIRE(t1_max > 0.01);

  const auto corr = build_corrector(hom, cell, perf);
  double sup = 0.0;
  for (std::size_t v = 0; v < perf.mesh.vertices.size(); ++v) {
    const Vec2 x = perf.mesh.vertices[v];
    sup = std::max(sup, std::abs(corr.u_bar.values[v] - x.x * (1.0 - x.x)));
  }
  // |u_bar - v0| <= eps max|T1| max|dv0/dx| with max|dv0/dx| = 1; nonzero.
  CHECK(sup <= perf.epsilon * t1_max * 1.05);
  CHECK(sup >= 0.1 * perf.epsilon * t1_max);
}

TEST_CASE("build_corrector: geometry hash mismatch is rejected") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({}), 1.0 / 8.0);
  const auto coeff = CoefficientField::identity();
  const auto cell = solve_cell(cell_mesh, coeff, 1);
  const auto perf = tile_mesh(cell_mesh, 2, 2);
  const auto hom = poisson_hom_solution(1.0 / 32.0);
  CHECK_THROWS_AS((void)build_corrector(hom, cell, perf), std::invalid_argument);
}

TEST_CASE("corrector difference vanishes on the outer boundary node-exactly") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({{{0.5, 0.5}, 0.2, 1}}), 1.0 / 8.0);
  const auto coeff = CoefficientField::identity();
  const auto cell = solve_cell(cell_mesh, coeff, 9);
  const auto perf = tile_mesh(cell_mesh, 4, 9);
  const auto hom = poisson_hom_solution(1.0 / 64.0);
  const auto corr = build_corrector(hom, cell, perf);
  for (const auto& [key, tag] : perf.mesh.edge_tags) {
    if (tag != EdgeTag::dirichlet_outer) continue;
    CHECK(corr.u_bar_cutoff.values[static_cast<std::size_t>(key.first)] == 0.0);
    CHECK(corr.u_bar_cutoff.values[static_cast<std::size_t>(key.second)] == 0.0);
  }
}

TEST_CASE("error_h1: identical fields give zero, scaled bump gives the analytic norm") {
  const auto mesh = mesh_unit_cell(make_unit_cell({}), 1.0 / 64.0);
  FemField u(mesh), v(mesh);
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const Vec2 p = mesh.vertices[i];
    u.values[i] = std::sin(p.x) * p.y;
    v.values[i] = u.values[i];
  }
  CHECK(error_h1(u, v) == 0.0);

  // u - v = eps * bump with bump = 16 x(1-x) y(1-y):
  // ||bump||_H1^2 = 256/900 + 512/90.
  const double eps = 1.0 / 8.0;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    const Vec2 p = mesh.vertices[i];
    v.values[i] += eps * 16.0 * p.x * (1.0 - p.x) * p.y * (1.0 - p.y);
  }
  const double analytic = eps * std::sqrt(256.0 / 900.0 + 512.0 / 90.0);
  CHECK(error_h1(u, v) == doctest::Approx(analytic).epsilon(5e-3));

  FemField other(mesh);
  other.values.pop_back();
  CHECK_THROWS_AS((void)error_h1(u, other), std::invalid_argument);
}

TEST_CASE("observed_rate: exact power laws are recovered") {
  std::vector<std::pair<double, double>> sqrt_law, linear_law;
  for (const double eps : {0.5, 0.25, 0.125, 0.0625}) {
    sqrt_law.emplace_back(eps, std::sqrt(eps));
    linear_law.emplace_back(eps, 3.0 * eps);
  }
  const auto f1 = observed_rate(sqrt_law);
  CHECK(f1.rate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f1.residual <= 1e-12);
  const auto f2 = observed_rate(linear_law);
  CHECK(f2.rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f2.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  CHECK_THROWS_AS((void)observed_rate({{0.5, 1.0}, {0.25, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS((void)observed_rate({{0.5, 1.0}, {0.25, 0.0}, {0.125, 0.1}}),
                  std::invalid_argument);
}

TEST_CASE("rate fitting: preasymptotic guard drops a polluting coarse point") {
  ConvergenceReport clean;
  for (const double eps : {0.5, 0.25, 0.125, 0.0625}) {
    SweepRecord r;
    r.epsilon = eps;
    r.err_h1 = std::sqrt(eps);
    r.energy_gap = eps;
    r.err_h1_cutoff = std::sqrt(eps);
    clean.records.push_back(r);
  }
  fit_report_rates(clean);
  REQUIRE(clean.h1_fit.has_value());
  CHECK_FALSE(clean.dropped_first_epsilon);
  CHECK(clean.h1_fit->rate == doctest::Approx(0.5).epsilon(1e-10));

  ConvergenceReport polluted = clean;
  polluted.records[0].err_h1 *= 3.0;  // preasymptotic outlier at eps = 1/2
  polluted.h1_fit.reset();
  polluted.energy_fit.reset();
  polluted.cutoff_fit.reset();
  fit_report_rates(polluted);
  REQUIRE(polluted.h1_fit.has_value());
  CHECK(polluted.dropped_first_epsilon);
  CHECK(polluted.h1_fit->rate == doctest::Approx(0.5).epsilon(1e-10));

  ConvergenceReport zero_data = clean;
  for (auto& r : zero_data.records) {
    r.err_h1 = 0.0;
    r.energy_gap = 0.0;
    r.err_h1_cutoff = 0.0;
  }
  zero_data.h1_fit.reset();
  zero_data.energy_fit.reset();
  zero_data.cutoff_fit.reset();
  fit_report_rates(zero_data);
  CHECK_FALSE(zero_data.h1_fit.has_value());  // undefined, not a failure
}

TEST_CASE("weak convergence gap: matched constants cancel exactly on aligned blocks") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({{{0.5, 0.5}, 0.25, 1}}), 1.0 / 8.0);
  const auto perf = tile_mesh(cell_mesh, 4, 3);
  const double area_q0 = mesh_measures(cell_mesh).area;

  HomSolution hom;
  hom.mesh = std::make_shared<const TriMesh>(mesh_unit_cell(make_unit_cell({}), 1.0 / 16.0));
  hom.v0 = FemField(*hom.mesh, 1.0);

  FemField ones(perf.mesh, 1.0);
  CHECK(weak_convergence_gap(ones, hom, area_q0, 4) <= 1e-13);  // exact up to round-off

  FemField zeros(perf.mesh, 0.0);
  hom.v0 = FemField(*hom.mesh, 0.0);
  CHECK(weak_convergence_gap(zeros, hom, area_q0, 4) == 0.0);  // identically zero
}
