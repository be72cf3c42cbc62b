#include "homog/hom_solver.hpp"

#include <cmath>
#include <string>

namespace homog {

namespace {

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

const std::set<EdgeTag> kOuterSides = {EdgeTag::side_left, EdgeTag::side_right,
                                       EdgeTag::side_bottom, EdgeTag::side_top};

}  // namespace

HomSolution solve_homogenized(const HomProblem& problem, double mesh_h, double newton_tol,
                              int max_newton, const std::vector<double>* initial_guess,
                              double cg_tol) {
  const auto eig = problem.tensor.eigenvalues();
  if (!(eig[0] > 0.0)) throw SolverError("homogenized tensor is not positive definite");

  HomSolution sol;
  sol.mesh = std::make_shared<const TriMesh>(mesh_unit_cell(make_unit_cell({}, 64), mesh_h));
  const TriMesh& mesh = *sol.mesh;
  const DofMap dofmap = DofMap::dirichlet(mesh, kOuterSides);
  const CoefficientField tensor_coeff = CoefficientField::constant(problem.tensor.as_sym());

  const SparseMatrix stiffness = assemble_stiffness(mesh, tensor_coeff, 1.0);
  std::vector<double> load = assemble_volume_load(mesh, problem.f0.eval);
  for (auto& v : load) v *= problem.area_q0;
  for (int m = 0; m < 2; ++m) {
    if (problem.surface[static_cast<std::size_t>(m)] == 0.0) continue;
    const auto gm = assemble_volume_load(mesh, problem.g0[static_cast<std::size_t>(m)].eval);
    for (std::size_t i = 0; i < load.size(); ++i) {
      load[i] += problem.surface[static_cast<std::size_t>(m)] * gm[i];
    }
  }

  sol.v0 = FemField(mesh, 0.0);
  if (initial_guess) {
    sol.v0.values = *initial_guess;
    for (int v = 0; v < dofmap.vertex_count(); ++v) {
      if (dofmap.kind(v) == DofMap::Kind::dirichlet) sol.v0.values[static_cast<std::size_t>(v)] = 0.0;
    }
  }

  double ref_norm = 0.0;
  for (int it = 0; it <= max_newton; ++it) {
    std::vector<double> f = stiffness.multiply(sol.v0.values);
    SparseMatrix jac = stiffness;
    for (int m = 0; m < 2; ++m) {
      const double sm = problem.surface[static_cast<std::size_t>(m)];
      if (sm == 0.0) continue;
      const auto vn = assemble_volume_nonlinear(mesh, sol.v0, *problem.phases[static_cast<std::size_t>(m)]);
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += sm * vn.residual[i];
      jac = SparseMatrix::add(1.0, jac, sm, vn.jacobian);
    }
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= load[i];

    const ReducedSystem sys = apply_constraints(jac, f, dofmap);
    const double rnorm = vec_norm(sys.rhs);
    sol.trace.residual_norms.push_back(rnorm);
    if (it == 0) ref_norm = std::max(rnorm, 1e-300);
    if (rnorm <= newton_tol * ref_norm) {
      sol.trace.iterations = it;
      sol.gradient = recover_gradient(sol.v0, mesh);
      sol.energy = energy_integral_hom(sol, problem);
      return sol;
    }
    if (it == max_newton) break;
    const double inner_tol = rnorm <= std::sqrt(newton_tol) * ref_norm ? cg_tol : std::max(cg_tol, 1e-10);
    CgResult cg = solve_cg(sys.matrix, sys.rhs, inner_tol);
    if (!cg.converged) {
      throw SolverError("hom newton step: cg failed, relative residual " +
                        std::to_string(cg.relative_residual));
    }
    sol.trace.total_cg_iterations += cg.iterations;
    sol.trace.work_units += 4ll * cg.iterations * static_cast<long long>(sys.matrix.nonzeros()) +
                            600ll * static_cast<long long>(mesh.triangles.size());
    const std::vector<double> delta_full = sys.expand(cg.x);
    for (std::size_t i = 0; i < sol.v0.values.size(); ++i) sol.v0.values[i] -= delta_full[i];
  }
  std::string trace = "homogenized newton failed to converge; residuals:";
  for (double r : sol.trace.residual_norms) trace += " " + std::to_string(r);
  throw SolverError(trace);
}

double energy_integral_hom(const HomSolution& solution, const HomProblem& problem) {
  const TriMesh& mesh = *solution.mesh;
  const CoefficientField tensor_coeff = CoefficientField::constant(problem.tensor.as_sym());
  double energy = stiffness_energy(mesh, tensor_coeff, 1.0, solution.v0, solution.v0);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double area = mesh.triangle_area(t);
    const double uv[3] = {solution.v0.values[static_cast<std::size_t>(tri[0])],
                          solution.v0.values[static_cast<std::size_t>(tri[1])],
                          solution.v0.values[static_cast<std::size_t>(tri[2])]};
    for (const auto& q : kTriMidpoint3) {
      const double vq = q.l1 * uv[0] + q.l2 * uv[1] + q.l3 * uv[2];
      for (int m = 0; m < 2; ++m) {
        const double sm = problem.surface[static_cast<std::size_t>(m)];
        if (sm == 0.0) continue;
        energy += sm * area * q.w * problem.phases[static_cast<std::size_t>(m)]->kappa(vq) * vq;
      }
    }
  }
  return energy;
}

std::array<FemField, 2> recover_gradient(const FemField& v, const TriMesh& mesh) {
  std::array<FemField, 2> out = {FemField(mesh, 0.0), FemField(mesh, 0.0)};
  std::vector<double> weight(mesh.vertices.size(), 0.0);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Vec2 g = v.gradient_on(t);
    const double area = mesh.triangle_area(t);
    for (int i : mesh.triangles[static_cast<std::size_t>(t)]) {
      out[0].values[static_cast<std::size_t>(i)] += area * g.x;
      out[1].values[static_cast<std::size_t>(i)] += area * g.y;
      weight[static_cast<std::size_t>(i)] += area;
    }
  }
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out[0].values[i] /= weight[i];
    out[1].values[i] /= weight[i];
  }
  return out;
}

}  // namespace homog
