#pragma once

#include <array>
#include <memory>

#include "homog/cell.hpp"
#include "homog/fem.hpp"
#include "homog/fields.hpp"
#include "homog/fine_solver.hpp"
#include "homog/geometry.hpp"
#include "homog/phase.hpp"

namespace homog {

/// The nonlinear limit problem on the unperforated unit square with the
/// constant effective tensor and volume-weighted phase nonlinearities.
struct HomProblem {
  HomogenizedTensor tensor;
  double area_q0 = 1.0;                       // |Q0|
  std::array<double, 2> surface{0.0, 0.0};    // |S(1)|, |S(2)|
  std::array<const NonlinearPhase*, 2> phases{};
  ScalarField f0;
  std::array<ScalarField, 2> g0;
};

struct HomSolution {
  // Owned behind a stable address: the nodal fields point into this mesh and
  // must survive moves of the solution object.
  std::shared_ptr<const TriMesh> mesh;
  FemField v0;
  std::array<FemField, 2> gradient;  // recovered nodal gradient components
  NewtonTrace trace;
  double energy = 0.0;               // E_0(v0)
};

/// Newton solve of: int a_hat grad v . grad phi + sum_m |S(m)| int kappa_m(v) phi
///   = |Q0| int f0 phi + sum_m |S(m)| int g0(m) phi, with v = 0 on the boundary.
HomSolution solve_homogenized(const HomProblem& problem, double mesh_h,
                              double newton_tol = 1e-10, int max_newton = 25,
                              const std::vector<double>* initial_guess = nullptr,
                              double cg_tol = 1e-12);

double energy_integral_hom(const HomSolution& solution, const HomProblem& problem);

/// Area-weighted average of adjacent element gradients at each node;
/// second-order accurate at interior nodes of the structured mesh.
std::array<FemField, 2> recover_gradient(const FemField& v, const TriMesh& mesh);

}  // namespace homog
