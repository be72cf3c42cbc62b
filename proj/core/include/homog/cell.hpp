#pragma once

#include <array>
#include <string>

#include "homog/coefficient.hpp"
#include "homog/fem.hpp"
#include "homog/geometry.hpp"

namespace homog {

/// Solutions of the periodic cell problems on Q0: the two correctors driven
/// by the coordinate directions and the two auxiliary surface potentials,
/// all normalized to zero mesh-weighted mean.
struct CellSolution {
  const TriMesh* mesh = nullptr;
  const CoefficientField* coeff = nullptr;
  std::array<FemField, 2> corrector;  // T_1, T_2
  std::array<FemField, 2> auxiliary;  // psi(1), psi(2)
  MeshMeasures measures;              // polygonal, from the same mesh
  std::uint64_t geometry_hash = 0;
};

/// 2x2 effective conductivity with provenance.
struct HomogenizedTensor {
  double a[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  double mesh_h = 0.0;
  int hole_segments = 0;
  std::string formula = "flux-average";

  std::array<double, 2> eigenvalues() const;
  double symmetry_defect() const { return std::abs(a[0][1] - a[1][0]); }
  double frobenius() const;
  SymMat2 as_sym() const { return {a[0][0], 0.5 * (a[0][1] + a[1][0]), a[1][1]}; }
};

/// Weak corrector problems: int a grad T_l . grad phi = -int (a e_l) . grad phi
/// over periodic phi, zero mean. Throws SolverError on CG failure or an
/// inconsistent right-hand side.
std::array<FemField, 2> solve_corrector_cells(const TriMesh& cell_mesh,
                                              const CoefficientField& coeff,
                                              double cg_tol = 1e-12);

/// Auxiliary problems: int a grad psi . grad phi = -q_m int phi + int_{S(m)} phi
/// with q_m recomputed from the polygonal mesh so the discrete compatibility
/// condition holds to rounding. A phase without holes yields the zero field.
std::array<FemField, 2> solve_auxiliary_cells(const TriMesh& cell_mesh,
                                              const CoefficientField& coeff,
                                              double cg_tol = 1e-12);

/// All four cell solves (run concurrently) plus mesh measures.
CellSolution solve_cell(const TriMesh& cell_mesh, const CoefficientField& coeff,
                        std::uint64_t geometry_hash = 0, double cg_tol = 1e-12);

struct TensorPair {
  HomogenizedTensor flux_average;     // integral of a_ij + a_ik d_k T_j
  HomogenizedTensor energy_form;      // integral of a (e_i + grad T_i).(e_j + grad T_j)
  double max_form_disagreement = 0.0; // entrywise |difference| / scale
};

/// Both algebraically equal tensor formulas; their discrete agreement is an
/// assembly consistency check.
TensorPair homogenized_tensor(const CellSolution& cell);

struct TensorReport {
  bool symmetric = false;
  bool elliptic = false;
  bool forms_agree = false;
  double symmetry_defect = 0.0;
  double form_disagreement = 0.0;
  std::array<double, 2> eigenvalues{};
};

TensorReport verify_tensor(const TensorPair& pair, double form_tol = 1e-8,
                           double symmetry_tol = 1e-10);

/// Discrete compatibility of the auxiliary problems (Lemma-style condition):
/// | -q_m |Q0| + |S(m)| | with mesh-consistent measures, per phase.
std::array<double, 2> compatibility_defect(const MeshMeasures& measures);

/// Residual of the surface-to-volume integral identity on a tiled mesh:
///   eps int_{Xi(m)} phi ds  vs
///   eps int a(x/eps) grad_xi psi(m)|_{x/eps} . grad phi dx + q_m int phi dx
/// with phi the P1 interpolant of phi_fn on the perforated mesh.
struct IdentityResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

IdentityResidual surface_identity_residual(const PerforatedDomainMesh& perf,
                                           const CellSolution& cell, int phase_m,
                                           const std::function<double(Vec2)>& phi_fn);

}  // namespace homog
