#pragma once

#include <optional>
#include <vector>

#include "homog/cell.hpp"
#include "homog/fine_solver.hpp"
#include "homog/geometry.hpp"
#include "homog/hom_solver.hpp"

namespace homog {

/// Boundary-layer cutoff: 1 within distance eps of the outer boundary, 0
/// beyond 2 eps, linear ramp in between, |grad| <= 1/eps.
struct CutoffFunction {
  double epsilon = 1.0;
  double operator()(Vec2 x) const;
};

/// First-order two-scale approximation on the perforated mesh, evaluated
/// nodally: v0(x) + eps T_k(x/eps) d_k v0(x). The cell factor is looked up
/// at the exact cell node matching each perforated node, the gradient comes
/// from the recovered nodal gradient of v0 (with a piecewise-constant
/// sensitivity variant kept alongside).
struct CorrectorField {
  FemField u_bar;         // recovered-gradient evaluation
  FemField u_bar_cutoff;  // with the boundary cutoff folded in; vanishes on the outer boundary
  FemField u_bar_pwc;     // piecewise-constant-gradient variant
  double epsilon = 1.0;
};

CorrectorField build_corrector(const HomSolution& hom, const CellSolution& cell,
                               const PerforatedDomainMesh& perf_mesh);

/// Full H1(Omega_eps) norm of (u - v) for fields on the same mesh.
double error_h1(const FemField& u, const FemField& v);
/// L2(Omega_eps) norm of (u - interpolated v0).
double error_l2_against_hom(const FemField& u, const HomSolution& hom);

double energy_gap(double energy_fine, double energy_hom);

struct RateFit {
  double rate = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of log-residuals
};

/// Least-squares fit of log e = rate log eps + intercept; requires >= 3
/// strictly positive samples.
RateFit observed_rate(const std::vector<std::pair<double, double>>& errors);

/// Max over an nb x nb block partition of |avg_block(zero-extended u) -
/// |Q0| avg_block(v0)|. Triangles are binned by centroid.
double weak_convergence_gap(const FemField& u, const HomSolution& hom, double area_q0,
                            int blocks = 4);

struct SweepRecord {
  double epsilon = 0.0;
  double h = 0.0;
  double err_h1 = 0.0;
  double err_l2 = 0.0;
  double err_h1_cutoff = 0.0;
  double err_h1_pwc = 0.0;
  double energy_fine = 0.0;
  double energy_hom = 0.0;
  double energy_gap = 0.0;
  double weak_gap = 0.0;
  int newton_iters = 0;
  double seconds_estimate = 0.0;  // deterministic cost model, CSV column
  double seconds_wall = 0.0;      // measured, summary only
  double u_h1_norm = 0.0;
};

struct ConvergenceReport {
  std::vector<SweepRecord> records;  // epsilon descending
  std::optional<RateFit> h1_fit;
  std::optional<RateFit> energy_fit;
  std::optional<RateFit> cutoff_fit;
  bool dropped_first_epsilon = false;  // preasymptotic guard applied
};

/// Fits the H1-error and energy-gap rates over the sweep records. The
/// coarsest epsilon is dropped when keeping it degrades the fit residual by
/// more than 2x; the flag records that transparently.
void fit_report_rates(ConvergenceReport& report);

}  // namespace homog
