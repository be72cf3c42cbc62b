#include "homog/fine_solver.hpp"

#include <cmath>
#include <string>

namespace homog {

namespace {

struct PhaseTags {
  EdgeTag tag;
  bool present;
};

std::array<PhaseTags, 2> phase_tags(const TriMesh& mesh) {
  std::array<PhaseTags, 2> out = {{{EdgeTag::hole_phase_1, false}, {EdgeTag::hole_phase_2, false}}};
  for (const auto& [key, tag] : mesh.edge_tags) {
    if (tag == EdgeTag::hole_phase_1) out[0].present = true;
    if (tag == EdgeTag::hole_phase_2) out[1].present = true;
  }
  return out;
}

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FineSolution solve_fine(const FineProblem& problem, double newton_tol, int max_newton,
                        const std::vector<double>* initial_guess, double cg_tol) {
  const TriMesh& mesh = problem.mesh->mesh;
  const double eps = problem.mesh->epsilon;
  const DofMap dofmap = DofMap::dirichlet(mesh, {EdgeTag::dirichlet_outer});
  const auto tags = phase_tags(mesh);

  const SparseMatrix stiffness = assemble_stiffness(mesh, *problem.coeff, eps);
  std::vector<double> load = assemble_volume_load(mesh, problem.f.eval);
  for (int m = 0; m < 2; ++m) {
    if (!tags[static_cast<std::size_t>(m)].present) continue;
    const auto bload = assemble_boundary_linear(mesh, tags[static_cast<std::size_t>(m)].tag,
                                                problem.g[static_cast<std::size_t>(m)].eval);
    for (std::size_t i = 0; i < load.size(); ++i) load[i] += eps * bload[i];
  }

  FineSolution sol;
  sol.u = FemField(mesh, 0.0);
  if (initial_guess) {
    sol.u.values = *initial_guess;
    // The Dirichlet boundary is part of the ansatz space; clamp the guess.
    for (int v = 0; v < dofmap.vertex_count(); ++v) {
      if (dofmap.kind(v) == DofMap::Kind::dirichlet) sol.u.values[static_cast<std::size_t>(v)] = 0.0;
    }
  }

  auto residual_full = [&](const FemField& u, SparseMatrix* jacobian) {
    std::vector<double> f = stiffness.multiply(u.values);
    SparseMatrix jac = stiffness;
    for (int m = 0; m < 2; ++m) {
      if (!tags[static_cast<std::size_t>(m)].present) continue;
      const auto bn = assemble_boundary_nonlinear(mesh, tags[static_cast<std::size_t>(m)].tag, u,
                                                  *problem.phases[static_cast<std::size_t>(m)]);
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += eps * bn.residual[i];
      if (jacobian) jac = SparseMatrix::add(1.0, jac, eps, bn.jacobian);
    }
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= load[i];
    if (jacobian) *jacobian = std::move(jac);
    return f;
  };

  double ref_norm = 0.0;
  for (int it = 0; it <= max_newton; ++it) {
    SparseMatrix jac;
    const std::vector<double> f_full = residual_full(sol.u, &jac);
    const ReducedSystem sys = apply_constraints(jac, f_full, dofmap);
    const double rnorm = vec_norm(sys.rhs);
    sol.trace.residual_norms.push_back(rnorm);
    if (it == 0) ref_norm = std::max(rnorm, 1e-300);
    if (rnorm <= newton_tol * ref_norm) {
      sol.trace.iterations = it;
      sol.energy = energy_integral_fine(sol, problem);
      return sol;
    }
    if (it == max_newton) break;
    // Tighten the linear tolerance near convergence so the last correction
    // does not pollute error-rate measurements.
    const double inner_tol = rnorm <= std::sqrt(newton_tol) * ref_norm ? cg_tol : std::max(cg_tol, 1e-10);
    CgResult cg = solve_cg(sys.matrix, sys.rhs, inner_tol);
    if (!cg.converged) {
      throw SolverError("fine newton step: cg failed, relative residual " +
                        std::to_string(cg.relative_residual));
    }
    sol.trace.total_cg_iterations += cg.iterations;
    sol.trace.work_units += 4ll * cg.iterations * static_cast<long long>(sys.matrix.nonzeros()) +
                            600ll * static_cast<long long>(mesh.triangles.size());
    const std::vector<double> delta_full = sys.expand(cg.x);
    for (std::size_t i = 0; i < sol.u.values.size(); ++i) sol.u.values[i] -= delta_full[i];
  }
  std::string trace = "fine newton failed to converge; residuals:";
  for (double r : sol.trace.residual_norms) trace += " " + std::to_string(r);
  throw SolverError(trace);
}

double energy_integral_fine(const FineSolution& solution, const FineProblem& problem) {
  const TriMesh& mesh = problem.mesh->mesh;
  const double eps = problem.mesh->epsilon;
  double energy = stiffness_energy(mesh, *problem.coeff, eps, solution.u, solution.u);
  const auto rule = edge_gauss2_rule();
  for (const auto& [key, tag] : mesh.edge_tags) {
    int m;
    if (tag == EdgeTag::hole_phase_1) m = 0;
    else if (tag == EdgeTag::hole_phase_2) m = 1;
    else continue;
    const NonlinearPhase& phase = *problem.phases[static_cast<std::size_t>(m)];
    const Vec2 a = mesh.vertex(key.first), b = mesh.vertex(key.second);
    const double len = norm(b - a);
    const double ua = solution.u.values[static_cast<std::size_t>(key.first)];
    const double ub = solution.u.values[static_cast<std::size_t>(key.second)];
    for (const auto& q : rule) {
      const double uq = (1.0 - q.t) * ua + q.t * ub;
      energy += eps * len * q.w * phase.kappa(uq) * uq;
    }
  }
  return energy;
}

double functional_value(const FemField& u, const FineProblem& problem) {
  const TriMesh& mesh = problem.mesh->mesh;
  const double eps = problem.mesh->epsilon;
  double value = 0.5 * stiffness_energy(mesh, *problem.coeff, eps, u, u);

  const auto rule = edge_gauss2_rule();
  for (const auto& [key, tag] : mesh.edge_tags) {
    int m;
    if (tag == EdgeTag::hole_phase_1) m = 0;
    else if (tag == EdgeTag::hole_phase_2) m = 1;
    else continue;
    const NonlinearPhase& phase = *problem.phases[static_cast<std::size_t>(m)];
    const ScalarField& g = problem.g[static_cast<std::size_t>(m)];
    const Vec2 a = mesh.vertex(key.first), b = mesh.vertex(key.second);
    const double len = norm(b - a);
    const double ua = u.values[static_cast<std::size_t>(key.first)];
    const double ub = u.values[static_cast<std::size_t>(key.second)];
    for (const auto& q : rule) {
      const Vec2 x = a + q.t * (b - a);
      const double uq = (1.0 - q.t) * ua + q.t * ub;
      value += eps * len * q.w * (phase.primitive(uq) - g(x) * uq);
    }
  }

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Vec2 p0 = mesh.vertex(tri[0]), p1 = mesh.vertex(tri[1]), p2 = mesh.vertex(tri[2]);
    const double area = mesh.triangle_area(t);
    for (const auto& q : kTriMidpoint3) {
      const Vec2 x = q.l1 * p0 + q.l2 * p1 + q.l3 * p2;
      const double uq = q.l1 * u.values[static_cast<std::size_t>(tri[0])] +
                        q.l2 * u.values[static_cast<std::size_t>(tri[1])] +
                        q.l3 * u.values[static_cast<std::size_t>(tri[2])];
      value -= area * q.w * problem.f(x) * uq;
    }
  }
  return value;
}

UniformBoundReport uniform_bound_check(const std::vector<double>& h1_norms) {
  UniformBoundReport report;
  report.h1_norms = h1_norms;
  if (h1_norms.size() < 2) return report;
  double lo = h1_norms[0], hi = h1_norms[0];
  for (double v : h1_norms) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  report.max_over_min = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : 1e300);
  report.bounded = report.max_over_min <= 1.5;
  return report;
}

std::vector<double> cell_averages(const FineSolution& solution, const PerforatedDomainMesh& mesh) {
  const int n = mesh.tiles_per_side;
  std::vector<double> sums(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  const TriMesh& tm = mesh.mesh;
  for (int t = 0; t < static_cast<int>(tm.triangles.size()); ++t) {
    const auto& tri = tm.triangles[static_cast<std::size_t>(t)];
    const double contrib = tm.triangle_area(t) / 3.0 *
                           (solution.u.values[static_cast<std::size_t>(tri[0])] +
                            solution.u.values[static_cast<std::size_t>(tri[1])] +
                            solution.u.values[static_cast<std::size_t>(tri[2])]);
    sums[static_cast<std::size_t>(mesh.cell_of_triangle[static_cast<std::size_t>(t)])] += contrib;
  }
  const double cell_area = mesh.epsilon * mesh.epsilon;
  for (auto& s : sums) s /= cell_area;
  return sums;
}

std::vector<double> block_averages_2x2(const std::vector<double>& cell_avgs, int tiles_per_side) {
  const int nb = (tiles_per_side + 1) / 2;
  std::vector<double> out(static_cast<std::size_t>(nb) * static_cast<std::size_t>(nb), 0.0);
  std::vector<int> counts(out.size(), 0);
  for (int j = 0; j < tiles_per_side; ++j) {
    for (int i = 0; i < tiles_per_side; ++i) {
      const std::size_t b = static_cast<std::size_t>((j / 2) * nb + (i / 2));
      out[b] += cell_avgs[static_cast<std::size_t>(j * tiles_per_side + i)];
      ++counts[b];
    }
  }
  for (std::size_t b = 0; b < out.size(); ++b) out[b] /= counts[b];
  return out;
}

}  // namespace homog
