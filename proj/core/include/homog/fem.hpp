#pragma once

#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "homog/coefficient.hpp"
#include "homog/geometry.hpp"
#include "homog/phase.hpp"
#include "homog/quadrature.hpp"
#include "homog/sparse.hpp"

namespace homog {

/// Per-vertex constraint record: a free dof index, a Dirichlet value, or a
/// periodic slave pointing directly at its master vertex.
class DofMap {
 public:
  enum class Kind : std::uint8_t { free_dof, dirichlet, periodic_slave };

  static DofMap unconstrained(const TriMesh& mesh);
  static DofMap dirichlet(const TriMesh& mesh, const std::set<EdgeTag>& tags,
                          double value = 0.0);
  /// Identifies right->left and top->bottom side vertices; corner chain
  /// collapses onto the origin vertex. Requires matched periodic sides.
  static DofMap periodic(const TriMesh& mesh);

  const TriMesh& mesh() const { return *mesh_; }
  int vertex_count() const { return static_cast<int>(kinds_.size()); }
  int free_count() const { return free_count_; }

  Kind kind(int v) const { return kinds_[static_cast<std::size_t>(v)]; }
  /// Free dof index for free vertices, master vertex for slaves.
  int index(int v) const { return index_[static_cast<std::size_t>(v)]; }
  double dirichlet_value(int v) const { return values_[static_cast<std::size_t>(v)]; }

  /// Free dof carried by a vertex after chasing one slave link; -1 for
  /// Dirichlet vertices.
  int dof_of_vertex(int v) const;

 private:
  const TriMesh* mesh_ = nullptr;
  std::vector<Kind> kinds_;
  std::vector<int> index_;
  std::vector<double> values_;
  int free_count_ = 0;
};

/// Nodal P1 field over a mesh, with point evaluation via barycentric
/// interpolation and per-triangle constant gradients.
struct FemField {
  const TriMesh* mesh = nullptr;
  std::vector<double> values;

  FemField() = default;
  FemField(const TriMesh& m, double fill = 0.0)
      : mesh(&m), values(m.vertices.size(), fill) {}

  double value_on(int tri, Vec2 p) const;
  Vec2 gradient_on(int tri) const;
  /// Exact integral over the mesh (P1).
  double integral() const;
};

/// Point locator with a uniform bin grid; returns the triangle containing a
/// point (barycentric tolerance) or -1.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);
  int locate(Vec2 p) const;

 private:
  const TriMesh* mesh_;
  int bins_;
  std::vector<std::vector<int>> cells_;
};

/// Reduced SPD system produced by folding constraints into an assembled
/// vertex-indexed matrix: Dirichlet rows/columns are eliminated with a
/// right-hand-side correction and periodic slaves fold into their masters.
struct ReducedSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  const DofMap* dofmap = nullptr;

  std::vector<double> expand(const std::vector<double>& reduced) const;
  std::vector<double> restrict_vector(const std::vector<double>& full) const;
};

ReducedSystem apply_constraints(const SparseMatrix& matrix, const std::vector<double>& rhs,
                                const DofMap& dofmap);

/// |sum of reduced rhs| <= tol * ||rhs||: consistency of a singular periodic
/// system against the constant nullspace.
bool rhs_consistent_with_constants(const std::vector<double>& reduced_rhs, double tol = 1e-9);

/// Number of worker threads used by element-loop assembly. Results are
/// independent of this setting: element contributions are computed in
/// parallel but scattered in fixed element order.
void set_assembly_threads(int threads);
int assembly_threads();

/// Stiffness of (x -> a(x / coefficient_scale)) grad u . grad v with the
/// 3-point triangle rule (or the degree-8 rule on request).
SparseMatrix assemble_stiffness(const TriMesh& mesh, const CoefficientField& coeff,
                                double coefficient_scale = 1.0,
                                TriRule rule = TriRule::midpoint3);

/// Volume load vector of f phi.
std::vector<double> assemble_volume_load(const TriMesh& mesh,
                                         const std::function<double(Vec2)>& f,
                                         TriRule rule = TriRule::midpoint3);

/// Volume vector of -(a(x/scale) e_dir) . grad phi; the combined right-hand
/// side of the corrector cell problems.
std::vector<double> assemble_cell_corrector_rhs(const TriMesh& mesh,
                                                const CoefficientField& coeff, int dir,
                                                TriRule rule = TriRule::midpoint3);

/// Boundary load over edges with the given tag, 2-point Gauss per edge.
/// Throws when the tag is absent from the mesh.
std::vector<double> assemble_boundary_linear(const TriMesh& mesh, EdgeTag tag,
                                             const std::function<double(Vec2)>& density);

struct BoundaryNonlinear {
  std::vector<double> residual;  // int kappa(u) phi ds over tagged edges
  SparseMatrix jacobian;         // int kappa'(u) phi_j phi_i ds
};

BoundaryNonlinear assemble_boundary_nonlinear(const TriMesh& mesh, EdgeTag tag,
                                              const FemField& u, const NonlinearPhase& phase);

/// Volume analogue used by the homogenized problem: residual int kappa(u) phi,
/// jacobian int kappa'(u) phi_j phi_i, both with the 3-point rule.
BoundaryNonlinear assemble_volume_nonlinear(const TriMesh& mesh, const FemField& u,
                                            const NonlinearPhase& phase);

/// Mass-type boundary matrix int phi_i phi_j ds over tagged edges.
SparseMatrix assemble_boundary_mass(const TriMesh& mesh, EdgeTag tag);

double norm_l2(const FemField& field);
double seminorm_h1_sq(const FemField& field);
double norm_h1(const FemField& field);
/// eps int_{tagged} u^2 ds summed over the given tags.
double trace_norm_sq(const FemField& field, const std::set<EdgeTag>& tags, double eps);

/// Quadrature errors against an analytic reference, degree-8 rule.
double error_l2_vs(const FemField& field, const std::function<double(Vec2)>& exact);
double error_h1_vs(const FemField& field, const std::function<double(Vec2)>& exact,
                   const std::function<Vec2(Vec2)>& exact_grad);

/// Energy quadrature int a(x/scale) grad u . grad v dx.
double stiffness_energy(const TriMesh& mesh, const CoefficientField& coeff,
                        double coefficient_scale, const FemField& u, const FemField& v,
                        TriRule rule = TriRule::midpoint3);

/// Mesh-weighted mean: integral of the field divided by the mesh area.
double mesh_mean(const FemField& field);

}  // namespace homog
