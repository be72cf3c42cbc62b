#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace homog {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Absolute tolerance for vertex matching; cell coordinates are exact
/// rationals, so matching at this tolerance is robust.
inline constexpr double kGeomTol = 1e-12;

/// Minimum gap between holes and from a hole to the cell sides.
inline constexpr double kHoleMargin = 0.02;

/// A circular hole in the unit cell, tagged with its interaction phase.
struct HoleSpec {
  Vec2 center;
  double radius = 0.0;
  int phase = 1;  // 1 or 2
};

struct CellValidation {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks that holes are disjoint, nontangent (with margin), strictly inside
/// the unit square, and carry valid phases. Report-returning, never throws.
CellValidation validate_cell(const std::vector<HoleSpec>& holes);

/// The punctured unit cell together with its closed-form disk measures.
struct UnitCellGeometry {
  std::vector<HoleSpec> holes;
  int boundary_segments_per_hole = 64;
  double area_q0 = 1.0;       // 1 - sum of pi r^2
  double perimeter_s1 = 0.0;  // sum of 2 pi r over phase-1 holes
  double perimeter_s2 = 0.0;
  double q1 = 0.0;            // perimeter_s1 / area_q0
  double q2 = 0.0;
};

/// Builds a UnitCellGeometry with analytic measures. Throws std::invalid_argument
/// if validation fails or segments < 8.
UnitCellGeometry make_unit_cell(std::vector<HoleSpec> holes, int segments = 64);

enum class EdgeTag : std::uint8_t {
  side_left,
  side_right,
  side_bottom,
  side_top,
  hole_phase_1,
  hole_phase_2,
  dirichlet_outer,
};

const char* edge_tag_name(EdgeTag tag);

using EdgeKey = std::pair<int, int>;  // (min vertex, max vertex)

inline EdgeKey make_edge_key(int a, int b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Conforming P1 triangulation with tagged boundary edges.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::map<EdgeKey, EdgeTag> edge_tags;       // boundary edges only
  double mesh_size_h = 0.0;                   // max edge length

  Vec2 vertex(int v) const { return vertices[static_cast<std::size_t>(v)]; }
  double triangle_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    return 0.5 * cross(vertex(tri[1]) - vertex(tri[0]), vertex(tri[2]) - vertex(tri[0]));
  }
  double total_area() const;
};

/// Polygonal measures recomputed from a cell mesh: area, per-phase hole
/// perimeters and the surface-to-volume ratios q_m = |S(m)|/|Q0|.
struct MeshMeasures {
  double area = 0.0;
  double perimeter_s1 = 0.0;
  double perimeter_s2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
};

MeshMeasures mesh_measures(const TriMesh& mesh);

/// Triangulates the unit cell minus its polygonal holes on a structured
/// background grid with a crater/zipper fit around each hole. Periodic
/// side-vertex matching holds by construction. Throws MeshError when the
/// target size cannot resolve a hole or its clearances.
TriMesh mesh_unit_cell(const UnitCellGeometry& cell, double target_h);

/// The epsilon-periodic perforated mesh of the unit square, obtained by
/// tiling a cell mesh N x N and scaling by eps = 1/N.
struct PerforatedDomainMesh {
  TriMesh mesh;
  double epsilon = 1.0;
  int tiles_per_side = 1;
  int cell_triangle_count = 0;
  int cell_vertex_count = 0;
  std::vector<int> cell_of_triangle;   // lattice cell index j*N+i
  std::vector<int> cell_vertex_of;     // tiled vertex -> cell vertex id
  std::uint64_t cell_geometry_hash = 0;

  int cell_triangle_of(int t) const { return t % cell_triangle_count; }
};

PerforatedDomainMesh tile_mesh(const TriMesh& cell_mesh, int n_tiles,
                               std::uint64_t cell_geometry_hash = 0);

/// Structural validation used by tests and by the mesher itself: positive
/// areas, conformity and periodic side matching (for unit-cell meshes).
void check_mesh_conforming(const TriMesh& mesh);
void check_periodic_matching(const TriMesh& mesh);

/// Plain-text export: header "V vertices T triangles E tagged-edges", then
/// vertex lines "x y", triangle lines "i j k", edge lines "i j tag-name".
void write_mesh(std::ostream& os, const TriMesh& mesh);

/// Plain-text field export, one "vertex-index value" line per vertex.
void write_field(std::ostream& os, const std::vector<double>& values);

}  // namespace homog
