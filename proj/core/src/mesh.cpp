#include "homog/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <unordered_map>

namespace homog {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_hash_key(int a, int b) {
  const auto [lo, hi] = make_edge_key(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 32) |
         static_cast<std::uint32_t>(hi);
}

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

bool on_line(double v, double target) { return std::abs(v - target) <= kGeomTol; }

struct MeshSizeExceeded : MeshError {
  using MeshError::MeshError;
};

/// Stitches the annulus between two closed rings that are star-shaped with
/// respect to `center`. Both rings are oriented counterclockwise; the outer
/// ring is the crater boundary, the inner ring the hole polygon. Advances
/// two angular pointers, always taking the ring whose next vertex comes
/// first; near-degenerate triangles force the other advance.
struct ZipResult {
  std::vector<std::array<int, 3>> triangles;
};

ZipResult zip_rings(const std::vector<Vec2>& points, const std::vector<int>& outer,
                    const std::vector<int>& inner, Vec2 center, double area_floor) {
  const int np = static_cast<int>(outer.size());
  const int ns = static_cast<int>(inner.size());
  if (np < 3 || ns < 3) throw MeshError("crater ring degenerated");

  auto unwrap = [&](const std::vector<int>& ring, double base) {
    std::vector<double> theta(ring.size() + 1);
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Vec2 d = points[static_cast<std::size_t>(ring[i])] - center;
      double t = std::atan2(d.y, d.x);
      if (i == 0) {
        while (t < base) t += 2.0 * kPi;
        while (t >= base + 2.0 * kPi) t -= 2.0 * kPi;
      } else {
        while (t < theta[i - 1] - 1e-14) t += 2.0 * kPi;
        if (t - theta[i - 1] > kPi) {
          throw MeshError("crater boundary is not star-shaped around the hole");
        }
      }
      theta[i] = t;
    }
    theta[ring.size()] = theta[0] + 2.0 * kPi;
    if (std::abs(theta[ring.size() - 1] - theta[0] - 2.0 * kPi) > kPi) {
      throw MeshError("crater boundary winds incorrectly around the hole");
    }
    return theta;
  };

  const std::vector<double> th_o = unwrap(outer, -kPi);

  // Rotate the inner ring so it starts at the first angle >= th_o[0].
  std::vector<double> raw(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const Vec2 d = points[static_cast<std::size_t>(inner[i])] - center;
    double t = std::atan2(d.y, d.x);
    while (t < th_o[0]) t += 2.0 * kPi;
    raw[i] = t;
  }
  const int j0 = static_cast<int>(std::min_element(raw.begin(), raw.end()) - raw.begin());
  std::vector<int> inner_rot(inner.size());
  for (int i = 0; i < ns; ++i) inner_rot[static_cast<std::size_t>(i)] = inner[static_cast<std::size_t>((j0 + i) % ns)];
  const std::vector<double> th_i = unwrap(inner_rot, th_o[0]);

  ZipResult out;
  out.triangles.reserve(static_cast<std::size_t>(np + ns));
  int i = 0, j = 0;
  auto ov = [&](int k) { return outer[static_cast<std::size_t>(k % np)]; };
  auto iv = [&](int k) { return inner_rot[static_cast<std::size_t>(k % ns)]; };

  while (i < np || j < ns) {
    const bool can_outer = i < np;
    const bool can_inner = j < ns;
    // Advance the ring yielding the shorter new diagonal; this keeps the
    // stitched triangles short when the two rings have mismatched spacing.
    bool advance_outer;
    if (!can_outer) {
      advance_outer = false;
    } else if (!can_inner) {
      advance_outer = true;
    } else {
      const Vec2 d_outer = points[static_cast<std::size_t>(ov(i + 1))] -
                           points[static_cast<std::size_t>(iv(j))];
      const Vec2 d_inner = points[static_cast<std::size_t>(ov(i))] -
                           points[static_cast<std::size_t>(iv(j + 1))];
      advance_outer = dot(d_outer, d_outer) <= dot(d_inner, d_inner);
    }
    std::array<int, 3> tri{};
    auto outer_tri = [&] { return std::array<int, 3>{ov(i), ov(i + 1), iv(j)}; };
    auto inner_tri = [&] { return std::array<int, 3>{iv(j), ov(i), iv(j + 1)}; };
    tri = advance_outer ? outer_tri() : inner_tri();
    double area = signed_area(points[static_cast<std::size_t>(tri[0])],
                              points[static_cast<std::size_t>(tri[1])],
                              points[static_cast<std::size_t>(tri[2])]);
    if (area <= area_floor) {
      // Collinear seam (e.g. a radial staircase step aligned with a polygon
      // vertex); take the other ring if it yields a proper triangle.
      const bool other_ok = advance_outer ? can_inner : can_outer;
      if (other_ok) {
        const auto alt = advance_outer ? inner_tri() : outer_tri();
        const double alt_area = signed_area(points[static_cast<std::size_t>(alt[0])],
                                            points[static_cast<std::size_t>(alt[1])],
                                            points[static_cast<std::size_t>(alt[2])]);
        if (alt_area > area_floor) {
          tri = alt;
          area = alt_area;
          advance_outer = !advance_outer;
        }
      }
      if (area <= area_floor) throw MeshError("degenerate triangle while stitching a hole");
    }
    out.triangles.push_back(tri);
    if (advance_outer) ++i; else ++j;
  }
  return out;
}

}  // namespace

void check_mesh_conforming(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> edge_count;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (mesh.triangle_area(static_cast<int>(t)) <= 0.0) {
      throw MeshError("triangle " + std::to_string(t) + " has nonpositive area");
    }
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      ++edge_count[edge_hash_key(tri[static_cast<std::size_t>(e)], tri[static_cast<std::size_t>((e + 1) % 3)])];
    }
  }
  for (const auto& [key, count] : edge_count) {
    if (count > 2) throw MeshError("nonconforming edge shared by more than two triangles");
  }
  for (const auto& [key, tag] : mesh.edge_tags) {
    auto it = edge_count.find(edge_hash_key(key.first, key.second));
    if (it == edge_count.end() || it->second != 1) {
      throw MeshError("tagged edge is not a boundary edge");
    }
  }
}

void check_periodic_matching(const TriMesh& mesh) {
  auto collect = [&](bool vertical, double line) {
    std::vector<double> coords;
    for (const auto& v : mesh.vertices) {
      if (vertical ? on_line(v.x, line) : on_line(v.y, line)) {
        coords.push_back(vertical ? v.y : v.x);
      }
    }
    std::sort(coords.begin(), coords.end());
    return coords;
  };
  const auto pair_check = [&](std::vector<double> a, std::vector<double> b, const char* what) {
    if (a.size() != b.size()) {
      throw MeshError(std::string("periodic sides unmatched (") + what + "): vertex counts differ");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > kGeomTol) {
        throw MeshError(std::string("periodic sides unmatched (") + what + ")");
      }
    }
  };
  pair_check(collect(true, 0.0), collect(true, 1.0), "left/right");
  pair_check(collect(false, 0.0), collect(false, 1.0), "bottom/top");
}

namespace {

TriMesh build_cell_mesh(const UnitCellGeometry& cell, double target_h, int n) {
  const int s = cell.boundary_segments_per_hole;
  const double hs = 1.0 / n;

  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.push_back(
          {static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }
  auto gid = [n](int i, int j) { return j * (n + 1) + i; };

  std::vector<std::array<int, 3>> grid_tris;
  grid_tris.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = gid(i, j), v10 = gid(i + 1, j);
      const int v01 = gid(i, j + 1), v11 = gid(i + 1, j + 1);
      grid_tris.push_back({v00, v10, v11});
      grid_tris.push_back({v00, v11, v01});
    }
  }

  const int nholes = static_cast<int>(cell.holes.size());
  const double del_band = 0.3 * hs;
  std::vector<int> hole_of_vertex(mesh.vertices.size(), -1);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    for (int k = 0; k < nholes; ++k) {
      const auto& h = cell.holes[static_cast<std::size_t>(k)];
      if (norm(mesh.vertices[v] - h.center) < h.radius + del_band) {
        if (hole_of_vertex[v] >= 0) {
          throw MeshError("holes too close together at this target_h (craters merge)");
        }
        hole_of_vertex[v] = k;
      }
    }
  }

  std::vector<int> hole_of_tri(grid_tris.size(), -1);  // -1 live, else dead
  for (std::size_t t = 0; t < grid_tris.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int hv = hole_of_vertex[static_cast<std::size_t>(grid_tris[t][static_cast<std::size_t>(e)])];
      if (hv < 0) continue;
      if (hole_of_tri[t] >= 0 && hole_of_tri[t] != hv) {
        throw MeshError("holes too close together at this target_h (craters merge)");
      }
      hole_of_tri[t] = hv;
    }
  }

  // Crater rings: edges with exactly one live incident triangle among the
  // grid triangles, owned by the dead side's hole.
  std::unordered_map<std::uint64_t, std::array<int, 2>> edge_tris;
  edge_tris.reserve(grid_tris.size() * 2);
  for (std::size_t t = 0; t < grid_tris.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const std::uint64_t key = edge_hash_key(grid_tris[t][static_cast<std::size_t>(e)],
                                              grid_tris[t][static_cast<std::size_t>((e + 1) % 3)]);
      auto [it, inserted] = edge_tris.try_emplace(key, std::array<int, 2>{-1, -1});
      it->second[inserted ? 0 : 1] = static_cast<int>(t);
    }
  }

  std::vector<std::vector<std::pair<int, int>>> ring_edges(static_cast<std::size_t>(nholes));
  for (const auto& [key, tris] : edge_tris) {
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    const int h0 = tris[0] >= 0 ? hole_of_tri[static_cast<std::size_t>(tris[0])] : -2;
    const int h1 = tris[1] >= 0 ? hole_of_tri[static_cast<std::size_t>(tris[1])] : -2;
    int owner = -1;
    if (h0 >= 0 && h1 == -1) owner = h0;           // dead | live
    else if (h1 >= 0 && h0 == -1) owner = h1;      // live | dead
    else if (h0 >= 0 && h1 == -2) owner = h0;      // dead on the domain boundary
    if (owner >= 0) ring_edges[static_cast<std::size_t>(owner)].push_back({a, b});
  }

  std::vector<std::array<int, 3>> final_tris;
  for (std::size_t t = 0; t < grid_tris.size(); ++t) {
    if (hole_of_tri[t] < 0) final_tris.push_back(grid_tris[t]);
  }

  std::vector<std::pair<EdgeKey, EdgeTag>> hole_edge_tags;
  for (int k = 0; k < nholes; ++k) {
    const auto& h = cell.holes[static_cast<std::size_t>(k)];
    auto& edges = ring_edges[static_cast<std::size_t>(k)];
    if (edges.empty()) throw MeshError("hole " + std::to_string(k) + " removed no grid vertices");
    std::sort(edges.begin(), edges.end());

    // Trace the crater loop.
    std::map<int, std::vector<int>> adj;
    for (const auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (const auto& [v, nb] : adj) {
      if (nb.size() != 2) throw MeshError("crater boundary is not a simple loop");
    }
    std::vector<int> ring;
    ring.reserve(adj.size());
    const int start = adj.begin()->first;
    int prev = -1, cur = start;
    do {
      ring.push_back(cur);
      const auto& nb = adj[cur];
      const int next = (nb[0] != prev) ? nb[0] : nb[1];
      prev = cur;
      cur = next;
    } while (cur != start && ring.size() <= adj.size());
    if (ring.size() != adj.size()) throw MeshError("crater boundary splits into several loops");

    double ring_area2 = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Vec2 a = mesh.vertices[static_cast<std::size_t>(ring[i])];
      const Vec2 b = mesh.vertices[static_cast<std::size_t>(ring[(i + 1) % ring.size()])];
      ring_area2 += cross(a, b);
    }
    if (ring_area2 < 0.0) std::reverse(ring.begin(), ring.end());

    // Hole polygon, half-segment offset so vertices avoid the grid axes.
    std::vector<int> polygon(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) {
      const double th = 2.0 * kPi * (i + 0.5) / s;
      polygon[static_cast<std::size_t>(i)] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back({h.center.x + h.radius * std::cos(th),
                               h.center.y + h.radius * std::sin(th)});
    }

    const auto zipped = zip_rings(mesh.vertices, ring, polygon, h.center, 1e-8 * hs * hs);
    for (const auto& tri : zipped.triangles) final_tris.push_back(tri);
    const EdgeTag tag = h.phase == 1 ? EdgeTag::hole_phase_1 : EdgeTag::hole_phase_2;
    for (int i = 0; i < s; ++i) {
      hole_edge_tags.emplace_back(
          make_edge_key(polygon[static_cast<std::size_t>(i)], polygon[static_cast<std::size_t>((i + 1) % s)]), tag);
    }
  }

  // Compact away the deleted grid vertices.
  std::vector<int> remap(mesh.vertices.size(), -1);
  {
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const auto& tri : final_tris) {
      for (int v : tri) used[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<Vec2> packed;
    packed.reserve(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      if (hole_of_vertex.size() > v && hole_of_vertex[v] >= 0) {
        if (used[v]) throw MeshError("deleted vertex still referenced");
        continue;
      }
      if (!used[v]) continue;  // isolated vertex (should not happen)
      remap[v] = static_cast<int>(packed.size());
      packed.push_back(mesh.vertices[v]);
    }
    mesh.vertices = std::move(packed);
  }
  mesh.triangles.clear();
  mesh.triangles.reserve(final_tris.size());
  for (const auto& tri : final_tris) {
    mesh.triangles.push_back({remap[static_cast<std::size_t>(tri[0])],
                              remap[static_cast<std::size_t>(tri[1])],
                              remap[static_cast<std::size_t>(tri[2])]});
  }

  // Boundary tags: hole edges were recorded during stitching; side edges are
  // classified geometrically. Every boundary edge must end up tagged.
  std::unordered_map<std::uint64_t, int> boundary_count;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      ++boundary_count[edge_hash_key(tri[static_cast<std::size_t>(e)], tri[static_cast<std::size_t>((e + 1) % 3)])];
    }
  }
  mesh.edge_tags.clear();
  for (const auto& [key, tag] : hole_edge_tags) {
    mesh.edge_tags.emplace(EdgeKey{remap[static_cast<std::size_t>(key.first)],
                                   remap[static_cast<std::size_t>(key.second)]},
                           tag);
  }
  for (const auto& [key, count] : boundary_count) {
    if (count != 1) continue;
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    const EdgeKey ek = make_edge_key(a, b);
    if (mesh.edge_tags.count(ek)) continue;
    const Vec2 pa = mesh.vertex(a), pb = mesh.vertex(b);
    EdgeTag tag;
    if (on_line(pa.x, 0.0) && on_line(pb.x, 0.0)) tag = EdgeTag::side_left;
    else if (on_line(pa.x, 1.0) && on_line(pb.x, 1.0)) tag = EdgeTag::side_right;
    else if (on_line(pa.y, 0.0) && on_line(pb.y, 0.0)) tag = EdgeTag::side_bottom;
    else if (on_line(pa.y, 1.0) && on_line(pb.y, 1.0)) tag = EdgeTag::side_top;
    else throw MeshError("untagged boundary edge off the cell sides");
    mesh.edge_tags.emplace(ek, tag);
  }

  double hmax = 0.0;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      hmax = std::max(hmax, norm(mesh.vertex(tri[static_cast<std::size_t>(e)]) -
                                 mesh.vertex(tri[static_cast<std::size_t>((e + 1) % 3)])));
    }
  }
  mesh.mesh_size_h = hmax;
  if (hmax > 2.0 * target_h + kGeomTol) {
    throw MeshSizeExceeded("mesh size exceeds 2 x target_h after hole stitching");
  }

  check_mesh_conforming(mesh);
  check_periodic_matching(mesh);

  // Integral sanity: the mesh must cover exactly the square minus the
  // polygonal holes.
  double expected = 1.0;
  for (const auto& h : cell.holes) {
    expected -= 0.5 * s * h.radius * h.radius * std::sin(2.0 * kPi / s);
  }
  if (std::abs(mesh.total_area() - expected) > 1e-10) {
    throw MeshError("mesh area mismatch after hole stitching");
  }
  return mesh;
}

}  // namespace

TriMesh mesh_unit_cell(const UnitCellGeometry& cell, double target_h) {
  if (!(target_h > 0.0)) throw MeshError("target_h must be positive");
  {
    const auto report = validate_cell(cell.holes);
    if (!report.ok) {
      std::string msg = "cannot mesh invalid cell:";
      for (const auto& v : report.violations) msg += "\n  " + v;
      throw MeshError(msg);
    }
  }
  for (std::size_t k = 0; k < cell.holes.size(); ++k) {
    const auto& h = cell.holes[k];
    if (2.0 * kPi * h.radius / target_h < 8.0) {
      throw MeshError("target_h too coarse to resolve hole " + std::to_string(k) +
                      " (fewer than 8 boundary segments would result)");
    }
    const double side_clearance = std::min(std::min(h.center.x, 1.0 - h.center.x),
                                           std::min(h.center.y, 1.0 - h.center.y)) - h.radius;
    if (side_clearance < target_h) {
      throw MeshError("insufficient resolution between hole " + std::to_string(k) +
                      " and the cell sides");
    }
    for (std::size_t l = k + 1; l < cell.holes.size(); ++l) {
      const double gap = norm(h.center - cell.holes[l].center) - h.radius - cell.holes[l].radius;
      if (gap < target_h) {
        throw MeshError("insufficient resolution between holes " + std::to_string(k) +
                        " and " + std::to_string(l));
      }
    }
  }

  // A crater stitched against a fine polygon can exceed the size bound on the
  // first grid; densify deterministically and retry.
  const int n0 = std::max(1, static_cast<int>(std::ceil(1.0 / target_h - 1e-12)));
  for (const double factor : {1.0, 1.3, 1.6}) {
    const int n = std::max(n0, static_cast<int>(std::ceil(factor / target_h - 1e-12)));
    try {
      return build_cell_mesh(cell, target_h, n);
    } catch (const MeshSizeExceeded&) {
      if (factor >= 1.6) throw;
    }
  }
  throw MeshError("unreachable");
}

PerforatedDomainMesh tile_mesh(const TriMesh& cell_mesh, int n_tiles,
                               std::uint64_t cell_geometry_hash) {
  if (n_tiles < 1) throw MeshError("tile count must be at least 1");
  check_periodic_matching(cell_mesh);

  PerforatedDomainMesh out;
  out.epsilon = 1.0 / n_tiles;
  out.tiles_per_side = n_tiles;
  out.cell_triangle_count = static_cast<int>(cell_mesh.triangles.size());
  out.cell_vertex_count = static_cast<int>(cell_mesh.vertices.size());
  out.cell_geometry_hash = cell_geometry_hash;

  struct PointKey {
    double x, y;
    bool operator==(const PointKey&) const = default;
  };
  struct PointHash {
    std::size_t operator()(const PointKey& p) const {
      std::uint64_t hx, hy;
      std::memcpy(&hx, &p.x, 8);
      std::memcpy(&hy, &p.y, 8);
      std::uint64_t h = hx * 0x9e3779b97f4a7c15ull ^ (hy + 0x7f4a7c15u);
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };
  // Shared tile-interface vertices merge by exact coordinate equality: side
  // coordinates are identical doubles in the two adjacent tiles because
  // (I + 1.0)/N and ((I+1) + 0.0)/N round identically.
  std::unordered_map<PointKey, int, PointHash> vertex_id;
  vertex_id.reserve(cell_mesh.vertices.size() * static_cast<std::size_t>(n_tiles) *
                    static_cast<std::size_t>(n_tiles));

  TriMesh& mesh = out.mesh;
  const double inv_n = 1.0 / n_tiles;
  std::vector<int> local(cell_mesh.vertices.size());

  for (int tj = 0; tj < n_tiles; ++tj) {
    for (int ti = 0; ti < n_tiles; ++ti) {
      for (std::size_t v = 0; v < cell_mesh.vertices.size(); ++v) {
        const Vec2 p{(ti + cell_mesh.vertices[v].x) * inv_n,
                     (tj + cell_mesh.vertices[v].y) * inv_n};
        auto [it, inserted] = vertex_id.try_emplace(PointKey{p.x, p.y},
                                                    static_cast<int>(mesh.vertices.size()));
        if (inserted) {
          mesh.vertices.push_back(p);
          out.cell_vertex_of.push_back(static_cast<int>(v));
        }
        local[v] = it->second;
      }
      const int cell_index = tj * n_tiles + ti;
      for (const auto& tri : cell_mesh.triangles) {
        mesh.triangles.push_back({local[static_cast<std::size_t>(tri[0])],
                                  local[static_cast<std::size_t>(tri[1])],
                                  local[static_cast<std::size_t>(tri[2])]});
        out.cell_of_triangle.push_back(cell_index);
      }
      for (const auto& [key, tag] : cell_mesh.edge_tags) {
        if (tag != EdgeTag::hole_phase_1 && tag != EdgeTag::hole_phase_2) continue;
        mesh.edge_tags.emplace(make_edge_key(local[static_cast<std::size_t>(key.first)],
                                             local[static_cast<std::size_t>(key.second)]),
                               tag);
      }
    }
  }

  // Outer boundary edges become the Dirichlet boundary; interior tile
  // interfaces merged away above.
  std::unordered_map<std::uint64_t, int> edge_count;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      ++edge_count[edge_hash_key(tri[static_cast<std::size_t>(e)], tri[static_cast<std::size_t>((e + 1) % 3)])];
    }
  }
  for (const auto& [key, count] : edge_count) {
    if (count != 1) continue;
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    const EdgeKey ek = make_edge_key(a, b);
    if (mesh.edge_tags.count(ek)) continue;
    const Vec2 pa = mesh.vertex(a), pb = mesh.vertex(b);
    const bool outer =
        (on_line(pa.x, 0.0) && on_line(pb.x, 0.0)) || (on_line(pa.x, 1.0) && on_line(pb.x, 1.0)) ||
        (on_line(pa.y, 0.0) && on_line(pb.y, 0.0)) || (on_line(pa.y, 1.0) && on_line(pb.y, 1.0));
    if (!outer) throw MeshError("tiling left an interior boundary edge unmerged");
    mesh.edge_tags.emplace(ek, EdgeTag::dirichlet_outer);
  }

  mesh.mesh_size_h = cell_mesh.mesh_size_h * inv_n;
  check_mesh_conforming(mesh);
  return out;
}

}  // namespace homog
