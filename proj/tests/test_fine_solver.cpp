#include <doctest.h>

#include <cmath>
#include <random>

#include "homog/fields.hpp"
#include "homog/fine_solver.hpp"

using namespace homog;

namespace {

struct FineFixture {
  TriMesh cell_mesh;
  CoefficientField coeff;
  PerforatedDomainMesh perf;
  NonlinearPhase phase1;
  NonlinearPhase phase2;
  FineProblem problem;

  explicit FineFixture(int n_tiles = 4,
                       NonlinearPhase p1 = NonlinearPhase::soft_sine(0.7, 1.3),
                       NonlinearPhase p2 = NonlinearPhase::soft_sine(0.7, 1.3),
                       ScalarField f = ScalarField::constant(1.0),
                       ScalarField g1 = ScalarField::constant(1.0),
                       ScalarField g2 = ScalarField::constant(-1.0))
      : cell_mesh(mesh_unit_cell(
            make_unit_cell({{{0.29, 0.29}, 0.2, 1}, {{0.745, 0.745}, 0.15, 2}}, 64), 1.0 / 16.0)),
        coeff(CoefficientField::identity()),
        perf(tile_mesh(cell_mesh, n_tiles, 1)),
        phase1(std::move(p1)),
        phase2(std::move(p2)) {
    problem.mesh = &perf;
    problem.coeff = &coeff;
    problem.phases = {&phase1, &phase2};
    problem.f = std::move(f);
    problem.g = {std::move(g1), std::move(g2)};
  }
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("phase builtins satisfy the derivative pinch and primitive bracketing") {
  for (const auto& phase : {NonlinearPhase::linear(1.0, 0.0), NonlinearPhase::linear(2.0, 0.3),
                            NonlinearPhase::soft_sine(0.7, 1.3), NonlinearPhase::soft_sine(0.5, 2.0)}) {
    const auto check = check_phase(phase);
    CHECK(check.derivative_in_bounds);
    CHECK(check.primitive_bracketed);
    CHECK(check.derivative_consistent);
    CHECK(check.worst_fd_error <= 1e-6);
  }
}

TEST_CASE("solve_fine: zero data with kappa(0)=0 gives the zero solution") {
  FineFixture fx(2, NonlinearPhase::linear(1.0, 0.0), NonlinearPhase::linear(1.0, 0.0),
                 ScalarField::zero(), ScalarField::zero(), ScalarField::zero());
  const auto sol = solve_fine(fx.problem);
  for (double v : sol.u.values) CHECK(v == 0.0);
  CHECK(sol.trace.iterations <= 1);
  CHECK(sol.energy == 0.0);
  CHECK(functional_value(sol.u, fx.problem) == 0.0);
}

TEST_CASE("solve_fine: linear kappa converges in exactly one newton iteration") {
  FineFixture fx(2, NonlinearPhase::linear(1.0, 0.0), NonlinearPhase::linear(1.5, 0.0));
  const auto sol = solve_fine(fx.problem);
  CHECK(sol.trace.iterations == 1);
  CHECK(norm_h1(sol.u) > 0.0);
}

TEST_CASE("solve_fine: soft-sine newton contracts quadratically and matches picard") {
  FineFixture fx(4);
  const auto sol = solve_fine(fx.problem, 1e-10, 25, nullptr, 1e-12);
  CHECK(sol.trace.iterations <= 8);
  const auto& r = sol.trace.residual_norms;
  REQUIRE(r.size() >= 3);
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    CHECK(r[k + 1] < r[k]);  // strictly decreasing residuals
    if (r[k] > 1e-13 * r[0]) {
      CHECK(r[k + 1] <= 1.0 * r[k] * r[k] / r[0] + 1e-13 * r[0]);  // quadratic-type contraction
    }
  }

  // Damped-Picard oracle: fixed preconditioner A + eps c_bar M, relaxation 0.8.
  const TriMesh& mesh = fx.perf.mesh;
  const double eps = fx.perf.epsilon;
  const auto dofmap = DofMap::dirichlet(mesh, {EdgeTag::dirichlet_outer});
  const auto a = assemble_stiffness(mesh, fx.coeff, eps);
  auto load = assemble_volume_load(mesh, fx.problem.f.eval);
  {
    const auto b1 = assemble_boundary_linear(mesh, EdgeTag::hole_phase_1, fx.problem.g[0].eval);
    const auto b2 = assemble_boundary_linear(mesh, EdgeTag::hole_phase_2, fx.problem.g[1].eval);
    for (std::size_t i = 0; i < load.size(); ++i) load[i] += eps * (b1[i] + b2[i]);
  }
  SparseMatrix pc = SparseMatrix::add(1.0, a, eps, assemble_boundary_mass(mesh, EdgeTag::hole_phase_1));
  pc = SparseMatrix::add(1.0, pc, eps, assemble_boundary_mass(mesh, EdgeTag::hole_phase_2));

  FemField u(mesh, 0.0);
  double r0 = -1.0;
  bool converged = false;
  for (int it = 0; it < 300 && !converged; ++it) {
    auto f = a.multiply(u.values);
    const auto bn1 = assemble_boundary_nonlinear(mesh, EdgeTag::hole_phase_1, u, fx.phase1);
    const auto bn2 = assemble_boundary_nonlinear(mesh, EdgeTag::hole_phase_2, u, fx.phase2);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] += eps * (bn1.residual[i] + bn2.residual[i]) - load[i];
    }
    const auto sys = apply_constraints(pc, f, dofmap);
    double rn = 0.0;
    for (double v : sys.rhs) rn += v * v;
    rn = std::sqrt(rn);
    if (r0 < 0.0) r0 = rn;
    if (rn <= 1e-12 * r0) {
      converged = true;
      break;
    }
    const auto delta = sys.expand(solve_cg_checked(sys.matrix, sys.rhs, 1e-12));
    for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] -= 0.8 * delta[i];
  }
  REQUIRE(converged);
  CHECK(max_abs_diff(u.values, sol.u.values) <= 1e-6);
}

TEST_CASE("solve_fine: three initial guesses reach the same solution") {
  FineFixture fx(4);
  const double tol = 1e-12;
  const auto from_zero = solve_fine(fx.problem, tol, 30, nullptr, 1e-12);

  std::vector<double> ones(fx.perf.mesh.vertices.size(), 1.0);
  const auto from_ones = solve_fine(fx.problem, tol, 30, &ones, 1e-12);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> noise(fx.perf.mesh.vertices.size());
  for (auto& v : noise) v = unif(rng);
  const auto from_noise = solve_fine(fx.problem, tol, 30, &noise, 1e-12);

  double scale = 0.0;
  for (double v : from_zero.u.values) scale = std::max(scale, std::abs(v));
  // Agreement to 10x the default newton tolerance, relative to the solution.
  CHECK(max_abs_diff(from_ones.u.values, from_zero.u.values) <= 10.0 * 1e-10 * std::max(1.0, scale));
  CHECK(max_abs_diff(from_noise.u.values, from_zero.u.values) <= 10.0 * 1e-10 * std::max(1.0, scale));
}

TEST_CASE("energy integral equals the load functional at the solution") {
  FineFixture fx(4, NonlinearPhase::linear(1.0, 0.0), NonlinearPhase::linear(1.0, 0.0));
  const auto sol = solve_fine(fx.problem, 1e-12, 25, nullptr, 1e-12);

  const TriMesh& mesh = fx.perf.mesh;
  const double eps = fx.perf.epsilon;
  auto load = assemble_volume_load(mesh, fx.problem.f.eval);
  const auto b1 = assemble_boundary_linear(mesh, EdgeTag::hole_phase_1, fx.problem.g[0].eval);
  const auto b2 = assemble_boundary_linear(mesh, EdgeTag::hole_phase_2, fx.problem.g[1].eval);
  double rhs_u = 0.0;
  for (std::size_t i = 0; i < load.size(); ++i) {
    rhs_u += (load[i] + eps * (b1[i] + b2[i])) * sol.u.values[i];
  }
  CHECK(sol.energy == doctest::Approx(rhs_u).epsilon(1e-9));
  CHECK(sol.energy >= 0.0);  // coercivity with kappa(0) = 0
}

TEST_CASE("functional: solution minimizes against perturbations") {
  FineFixture fx(2);
  const auto sol = solve_fine(fx.problem, 1e-12, 25, nullptr, 1e-12);
  const double at_solution = functional_value(sol.u, fx.problem);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto dofmap = DofMap::dirichlet(fx.perf.mesh, {EdgeTag::dirichlet_outer});
  for (int trial = 0; trial < 5; ++trial) {
    FemField perturbed = sol.u;
    for (int v = 0; v < dofmap.vertex_count(); ++v) {
      if (dofmap.kind(v) == DofMap::Kind::free_dof) {
        perturbed.values[static_cast<std::size_t>(v)] += 0.05 * unif(rng);
      }
    }
    CHECK(functional_value(perturbed, fx.problem) >= at_solution - 1e-12);
  }
}

TEST_CASE("functional: coercivity against sampled fields") {
  // I[u] >= C1 ||u||_H1^2 - C2 with empirical constants frozen below.
  FineFixture fx(2);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto dofmap = DofMap::dirichlet(fx.perf.mesh, {EdgeTag::dirichlet_outer});
  const double c1 = 0.05, c2 = 1.0;
  for (int trial = 0; trial < 8; ++trial) {
    FemField u(fx.perf.mesh, 0.0);
    const double amplitude = trial < 4 ? 1.0 : 5.0;
    for (int v = 0; v < dofmap.vertex_count(); ++v) {
      if (dofmap.kind(v) == DofMap::Kind::free_dof) {
        u.values[static_cast<std::size_t>(v)] = amplitude * unif(rng);
      }
    }
    const double h1 = norm_h1(u);
    CHECK(functional_value(u, fx.problem) >= c1 * h1 * h1 - c2);
  }
}

TEST_CASE("uniform bound report flags growth and accepts bounded sweeps") {
  const auto flat = uniform_bound_check({1.0, 1.1, 0.95});
  CHECK(flat.bounded);
  CHECK(flat.max_over_min <= 1.5);
  const auto growing = uniform_bound_check({1.0, 1.2, 1.9});
  CHECK_FALSE(growing.bounded);
  const auto zeros = uniform_bound_check({0.0, 0.0, 0.0});
  CHECK(zeros.max_over_min == 1.0);
}

TEST_CASE("cell averages: constants reproduce the area fraction") {
  FineFixture fx(4);
  FineSolution ones;
  ones.u = FemField(fx.perf.mesh, 1.0);
  const auto avgs = cell_averages(ones, fx.perf);
  const double fraction = mesh_measures(fx.cell_mesh).area;
  REQUIRE(avgs.size() == 16);
  for (double a : avgs) CHECK(a == doctest::Approx(fraction).epsilon(1e-12));

  FineSolution zeros;
  zeros.u = FemField(fx.perf.mesh, 0.0);
  for (double a : cell_averages(zeros, fx.perf)) CHECK(a == 0.0);

  const auto blocks = block_averages_2x2(avgs, 4);
  REQUIRE(blocks.size() == 4);
  for (double b : blocks) CHECK(b == doctest::Approx(fraction).epsilon(1e-12));
}
