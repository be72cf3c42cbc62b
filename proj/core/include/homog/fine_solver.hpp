#pragma once

#include <array>
#include <vector>

#include "homog/cell.hpp"
#include "homog/coefficient.hpp"
#include "homog/fem.hpp"
#include "homog/fields.hpp"
#include "homog/geometry.hpp"
#include "homog/phase.hpp"

namespace homog {

/// The epsilon-level nonlinear problem on the perforated mesh: oscillating
/// stiffness, two-phase nonlinear Robin data on the hole boundaries and a
/// homogeneous Dirichlet outer boundary.
struct FineProblem {
  const PerforatedDomainMesh* mesh = nullptr;
  const CoefficientField* coeff = nullptr;
  std::array<const NonlinearPhase*, 2> phases{};
  ScalarField f;
  std::array<ScalarField, 2> g;
};

struct NewtonTrace {
  std::vector<double> residual_norms;  // ||F(u_k)||, k = 0..final
  int iterations = 0;
  int total_cg_iterations = 0;
  long long work_units = 0;  // deterministic cost model (flop-scale)
};

struct FineSolution {
  FemField u;
  NewtonTrace trace;
  double energy = 0.0;  // E_eps(u): stiffness energy + eps sum int kappa(u) u ds
};

/// Undamped Newton on the discrete weak form; the linearized systems are SPD
/// (stiffness plus eps-scaled kappa'-weighted boundary mass). Throws
/// SolverError on non-convergence, reporting the residual trace. An optional
/// initial guess supports the uniqueness probes.
FineSolution solve_fine(const FineProblem& problem, double newton_tol = 1e-10,
                        int max_newton = 25, const std::vector<double>* initial_guess = nullptr,
                        double cg_tol = 1e-12);

/// E_eps(u) = int a(x/eps) grad u . grad u + eps sum_m int kappa_m(u) u ds.
double energy_integral_fine(const FineSolution& solution, const FineProblem& problem);

/// The variational energy I_eps[u] with the primitives K(m).
double functional_value(const FemField& u, const FineProblem& problem);

struct UniformBoundReport {
  std::vector<double> h1_norms;  // per sweep member, epsilon descending
  double max_over_min = 1.0;
  bool bounded = false;  // max <= 1.5 x min
};

UniformBoundReport uniform_bound_check(const std::vector<double>& h1_norms);

/// Per-lattice-cell averages of the zero-extension of u (zero on holes):
/// integral over the cell divided by eps^2. Optionally coarsened to 2x2
/// blocks of cells.
std::vector<double> cell_averages(const FineSolution& solution, const PerforatedDomainMesh& mesh);
std::vector<double> block_averages_2x2(const std::vector<double>& cell_avgs, int tiles_per_side);

}  // namespace homog
