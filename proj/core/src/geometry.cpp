#include "homog/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <numbers>
#include <ostream>
#include <sstream>

namespace homog {

namespace {

std::string fmt(double v) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

}  // namespace

CellValidation validate_cell(const std::vector<HoleSpec>& holes) {
  CellValidation report;
  auto fail = [&](std::string msg) {
    report.ok = false;
    report.violations.push_back(std::move(msg));
  };

  for (std::size_t k = 0; k < holes.size(); ++k) {
    const auto& h = holes[k];
    const std::string id = "hole " + std::to_string(k);
    if (!(h.radius > 0.0)) fail(id + ": nonpositive radius");
    if (h.phase != 1 && h.phase != 2) fail(id + ": phase must be 1 or 2");
    const double side_dist = std::min(std::min(h.center.x, 1.0 - h.center.x),
                                      std::min(h.center.y, 1.0 - h.center.y));
    if (side_dist - h.radius < 0.0) {
      fail(id + ": boundary contact (disk leaves the unit square, clearance " +
           fmt(side_dist - h.radius) + ")");
    } else if (side_dist - h.radius < kHoleMargin) {
      fail(id + ": boundary margin below " + fmt(kHoleMargin) + " (clearance " +
           fmt(side_dist - h.radius) + ")");
    }
  }
  for (std::size_t a = 0; a < holes.size(); ++a) {
    for (std::size_t b = a + 1; b < holes.size(); ++b) {
      const double d = norm(holes[a].center - holes[b].center);
      const double rsum = holes[a].radius + holes[b].radius;
      const std::string pair_id =
          "holes " + std::to_string(a) + "," + std::to_string(b);
      if (d < rsum - kGeomTol) {
        fail(pair_id + ": overlap (center distance " + fmt(d) + " < " + fmt(rsum) + ")");
      } else if (d <= rsum + kGeomTol) {
        fail(pair_id + ": tangent (center distance " + fmt(d) + " = " + fmt(rsum) + ")");
      } else if (d - rsum < kHoleMargin) {
        fail(pair_id + ": gap below " + fmt(kHoleMargin) + " (gap " + fmt(d - rsum) + ")");
      }
    }
  }
  return report;
}

UnitCellGeometry make_unit_cell(std::vector<HoleSpec> holes, int segments) {
  if (segments < 8) {
    throw std::invalid_argument("boundary_segments_per_hole must be at least 8");
  }
  const auto report = validate_cell(holes);
  if (!report.ok) {
    std::string msg = "invalid cell geometry:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }
  UnitCellGeometry cell;
  cell.holes = std::move(holes);
  cell.boundary_segments_per_hole = segments;
  double hole_area = 0.0;
  for (const auto& h : cell.holes) {
    hole_area += std::numbers::pi * h.radius * h.radius;
    const double perim = 2.0 * std::numbers::pi * h.radius;
    (h.phase == 1 ? cell.perimeter_s1 : cell.perimeter_s2) += perim;
  }
  cell.area_q0 = 1.0 - hole_area;
  cell.q1 = cell.perimeter_s1 / cell.area_q0;
  cell.q2 = cell.perimeter_s2 / cell.area_q0;
  return cell;
}

const char* edge_tag_name(EdgeTag tag) {
  switch (tag) {
    case EdgeTag::side_left: return "side_left";
    case EdgeTag::side_right: return "side_right";
    case EdgeTag::side_bottom: return "side_bottom";
    case EdgeTag::side_top: return "side_top";
    case EdgeTag::hole_phase_1: return "hole_phase_1";
    case EdgeTag::hole_phase_2: return "hole_phase_2";
    case EdgeTag::dirichlet_outer: return "dirichlet_outer";
  }
  return "unknown";
}

double TriMesh::total_area() const {
  double area = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) area += triangle_area(t);
  return area;
}

MeshMeasures mesh_measures(const TriMesh& mesh) {
  MeshMeasures m;
  m.area = mesh.total_area();
  for (const auto& [key, tag] : mesh.edge_tags) {
    if (tag != EdgeTag::hole_phase_1 && tag != EdgeTag::hole_phase_2) continue;
    const double len = norm(mesh.vertex(key.second) - mesh.vertex(key.first));
    (tag == EdgeTag::hole_phase_1 ? m.perimeter_s1 : m.perimeter_s2) += len;
  }
  m.q1 = m.perimeter_s1 / m.area;
  m.q2 = m.perimeter_s2 / m.area;
  return m;
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os << mesh.vertices.size() << " vertices " << mesh.triangles.size()
     << " triangles " << mesh.edge_tags.size() << " tagged-edges\n";
  for (const auto& v : mesh.vertices) os << fmt(v.x) << ' ' << fmt(v.y) << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& [key, tag] : mesh.edge_tags) {
    os << key.first << ' ' << key.second << ' ' << edge_tag_name(tag) << '\n';
  }
}

void write_field(std::ostream& os, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << i << ' ' << fmt(values[i]) << '\n';
  }
}

}  // namespace homog
