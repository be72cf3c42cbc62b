#include "homog/cell.hpp"

#include <cmath>
#include <future>

namespace homog {

namespace {

/// Solves the singular-consistent periodic system and removes the mean.
FemField solve_periodic_zero_mean(const TriMesh& mesh, const DofMap& dofmap,
                                  const SparseMatrix& stiffness,
                                  const std::vector<double>& rhs_full, double cg_tol,
                                  const std::string& context) {
  ReducedSystem sys = apply_constraints(stiffness, rhs_full, dofmap);
  if (!rhs_consistent_with_constants(sys.rhs)) {
    throw SolverError(context + ": right-hand side inconsistent with the constant nullspace"
                      " (zero-mean constraint violated by the assembly)");
  }
  double rhs_norm = 0.0;
  for (double v : sys.rhs) rhs_norm += v * v;
  if (std::sqrt(rhs_norm) <= 1e-13 * std::sqrt(static_cast<double>(sys.rhs.size()))) {
    return FemField(mesh, 0.0);  // data vanished to round-off
  }
  const std::vector<double> reduced = solve_cg_checked(sys.matrix, sys.rhs, cg_tol, 0, context);
  FemField field(mesh);
  field.values = sys.expand(reduced);
  const double mean = mesh_mean(field);
  for (auto& v : field.values) v -= mean;
  return field;
}

}  // namespace

std::array<FemField, 2> solve_corrector_cells(const TriMesh& cell_mesh,
                                              const CoefficientField& coeff, double cg_tol) {
  const DofMap dofmap = DofMap::periodic(cell_mesh);
  const SparseMatrix k = assemble_stiffness(cell_mesh, coeff, 1.0);
  std::array<FemField, 2> out;
  for (int l = 0; l < 2; ++l) {
    const auto rhs = assemble_cell_corrector_rhs(cell_mesh, coeff, l);
    out[static_cast<std::size_t>(l)] = solve_periodic_zero_mean(
        cell_mesh, dofmap, k, rhs, cg_tol, "corrector cell problem " + std::to_string(l + 1));
  }
  return out;
}

std::array<FemField, 2> solve_auxiliary_cells(const TriMesh& cell_mesh,
                                              const CoefficientField& coeff, double cg_tol) {
  const DofMap dofmap = DofMap::periodic(cell_mesh);
  const SparseMatrix k = assemble_stiffness(cell_mesh, coeff, 1.0);
  const MeshMeasures mm = mesh_measures(cell_mesh);
  const auto ones = assemble_volume_load(cell_mesh, [](Vec2) { return 1.0; });

  std::array<FemField, 2> out;
  for (int m = 0; m < 2; ++m) {
    const EdgeTag tag = m == 0 ? EdgeTag::hole_phase_1 : EdgeTag::hole_phase_2;
    const double perim = m == 0 ? mm.perimeter_s1 : mm.perimeter_s2;
    if (perim == 0.0) {
      out[static_cast<std::size_t>(m)] = FemField(cell_mesh, 0.0);  // empty phase
      continue;
    }
    const double qm = perim / mm.area;
    std::vector<double> rhs = assemble_boundary_linear(cell_mesh, tag, [](Vec2) { return 1.0; });
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= qm * ones[i];
    out[static_cast<std::size_t>(m)] = solve_periodic_zero_mean(
        cell_mesh, dofmap, k, rhs, cg_tol, "auxiliary cell problem " + std::to_string(m + 1));
  }
  return out;
}

CellSolution solve_cell(const TriMesh& cell_mesh, const CoefficientField& coeff,
                        std::uint64_t geometry_hash, double cg_tol) {
  CellSolution sol;
  sol.mesh = &cell_mesh;
  sol.coeff = &coeff;
  sol.measures = mesh_measures(cell_mesh);
  sol.geometry_hash = geometry_hash;

  auto correctors = std::async(std::launch::async, [&] {
    return solve_corrector_cells(cell_mesh, coeff, cg_tol);
  });
  sol.auxiliary = solve_auxiliary_cells(cell_mesh, coeff, cg_tol);
  sol.corrector = correctors.get();
  return sol;
}

TensorPair homogenized_tensor(const CellSolution& cell) {
  const TriMesh& mesh = *cell.mesh;
  const CoefficientField& coeff = *cell.coeff;
  TensorPair pair;
  double flux[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double energy[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  const Vec2 unit[2] = {{1.0, 0.0}, {0.0, 1.0}};

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Vec2 p0 = mesh.vertex(tri[0]), p1 = mesh.vertex(tri[1]), p2 = mesh.vertex(tri[2]);
    const double area = mesh.triangle_area(t);
    Vec2 grad_t[2];
    for (int l = 0; l < 2; ++l) grad_t[l] = cell.corrector[static_cast<std::size_t>(l)].gradient_on(t);
    for (const auto& q : kTriMidpoint3) {
      const Vec2 x = q.l1 * p0 + q.l2 * p1 + q.l3 * p2;
      const SymMat2 a = coeff(x);
      const double w = area * q.w;
      for (int j = 0; j < 2; ++j) {
        const Vec2 agt = a.apply(grad_t[j]);
        const Vec2 corrected_j = a.apply(unit[j] + grad_t[j]);
        for (int i = 0; i < 2; ++i) {
          // <a_ij + a_ik d_k T_j>: the a e_j column plus the corrector flux.
          flux[i][j] += w * (dot(unit[static_cast<std::size_t>(i)], a.apply(unit[j])) +
                             dot(unit[static_cast<std::size_t>(i)], agt));
          energy[i][j] += w * dot(unit[static_cast<std::size_t>(i)] + grad_t[i], corrected_j);
        }
      }
    }
  }

  const double scale = std::max({std::abs(flux[0][0]), std::abs(flux[1][1]), 1e-300});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      pair.flux_average.a[i][j] = flux[i][j];
      pair.energy_form.a[i][j] = energy[i][j];
      pair.max_form_disagreement =
          std::max(pair.max_form_disagreement, std::abs(flux[i][j] - energy[i][j]) / scale);
    }
  }
  pair.flux_average.mesh_h = mesh.mesh_size_h;
  pair.energy_form.mesh_h = mesh.mesh_size_h;
  pair.flux_average.formula = "flux-average";
  pair.energy_form.formula = "energy-form";
  return pair;
}

std::array<double, 2> HomogenizedTensor::eigenvalues() const {
  const double tr = a[0][0] + a[1][1];
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

double HomogenizedTensor::frobenius() const {
  return std::sqrt(a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1]);
}

TensorReport verify_tensor(const TensorPair& pair, double form_tol, double symmetry_tol) {
  TensorReport report;
  report.symmetry_defect = pair.flux_average.symmetry_defect();
  report.form_disagreement = pair.max_form_disagreement;
  report.eigenvalues = pair.flux_average.eigenvalues();
  report.symmetric = report.symmetry_defect <= symmetry_tol * pair.flux_average.frobenius();
  report.elliptic = report.eigenvalues[0] > 0.0;
  report.forms_agree = report.form_disagreement <= form_tol;
  return report;
}

std::array<double, 2> compatibility_defect(const MeshMeasures& measures) {
  return {std::abs(-measures.q1 * measures.area + measures.perimeter_s1),
          std::abs(-measures.q2 * measures.area + measures.perimeter_s2)};
}

IdentityResidual surface_identity_residual(const PerforatedDomainMesh& perf,
                                           const CellSolution& cell, int phase_m,
                                           const std::function<double(Vec2)>& phi_fn) {
  const TriMesh& mesh = perf.mesh;
  const double eps = perf.epsilon;
  const EdgeTag tag = phase_m == 0 ? EdgeTag::hole_phase_1 : EdgeTag::hole_phase_2;
  const FemField& psi = cell.auxiliary[static_cast<std::size_t>(phase_m)];
  const double qm = phase_m == 0 ? cell.measures.q1 : cell.measures.q2;

  FemField phi(mesh, 0.0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) phi.values[v] = phi_fn(mesh.vertices[v]);

  IdentityResidual out;
  const auto rule = edge_gauss2_rule();
  for (const auto& [key, t] : mesh.edge_tags) {
    if (t != tag) continue;
    const Vec2 a = mesh.vertex(key.first), b = mesh.vertex(key.second);
    const double len = norm(b - a);
    for (const auto& q : rule) {
      out.lhs += eps * len * q.w *
                 ((1.0 - q.t) * phi.values[static_cast<std::size_t>(key.first)] +
                  q.t * phi.values[static_cast<std::size_t>(key.second)]);
    }
  }

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Vec2 p0 = mesh.vertex(tri[0]), p1 = mesh.vertex(tri[1]), p2 = mesh.vertex(tri[2]);
    const double area = mesh.triangle_area(t);
    const Vec2 grad_psi = psi.gradient_on(perf.cell_triangle_of(t));  // gradient in xi
    const Vec2 grad_phi = phi.gradient_on(t);
    double acc = 0.0;
    for (const auto& q : kTriMidpoint3) {
      const Vec2 x = q.l1 * p0 + q.l2 * p1 + q.l3 * p2;
      const Vec2 xi{x.x / eps - std::floor(x.x / eps), x.y / eps - std::floor(x.y / eps)};
      acc += q.w * dot((*cell.coeff)(xi).apply(grad_psi), grad_phi);
    }
    out.rhs += eps * area * acc;
  }
  out.rhs += qm * phi.integral();
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace homog
