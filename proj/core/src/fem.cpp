#include "homog/fem.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

namespace homog {

namespace {

std::atomic<int> g_assembly_threads{1};

/// Runs fn(begin, end) over [0, n) in contiguous chunks, one per worker.
/// Workers write to disjoint preallocated slots, so the result does not
/// depend on the thread count.
void parallel_ranges(int n, const std::function<void(int, int)>& fn) {
  const int threads = std::min(g_assembly_threads.load(), n);
  if (threads <= 1 || n < 256) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int b = t * chunk;
    const int e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back(fn, b, e);
  }
  for (auto& th : pool) th.join();
}

struct ElementGeometry {
  double area;
  std::array<Vec2, 3> grad;  // P1 basis gradients
  std::array<Vec2, 3> p;
};

ElementGeometry element_geometry(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  ElementGeometry g;
  for (int i = 0; i < 3; ++i) g.p[static_cast<std::size_t>(i)] = mesh.vertex(tri[static_cast<std::size_t>(i)]);
  const double twice_area = cross(g.p[1] - g.p[0], g.p[2] - g.p[0]);
  if (!(twice_area > 0.0)) {
    throw MeshError("degenerate triangle " + std::to_string(t) + " in assembly");
  }
  g.area = 0.5 * twice_area;
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = g.p[static_cast<std::size_t>((i + 1) % 3)];
    const Vec2 b = g.p[static_cast<std::size_t>((i + 2) % 3)];
    g.grad[static_cast<std::size_t>(i)] = {(a.y - b.y) / twice_area, (b.x - a.x) / twice_area};
  }
  return g;
}

Vec2 quad_point(const ElementGeometry& g, const TriQuadPoint& q) {
  return q.l1 * g.p[0] + q.l2 * g.p[1] + q.l3 * g.p[2];
}

template <typename Fn>
void for_each_tri_quad(const ElementGeometry&, TriRule rule, Fn&& fn) {
  if (rule == TriRule::midpoint3) {
    for (const auto& q : kTriMidpoint3) fn(q);
  } else {
    static const auto rule8 = tri_degree8_rule();
    for (const auto& q : rule8) fn(q);
  }
}

Vec2 wrap_unit(Vec2 v) {
  return {v.x - std::floor(v.x), v.y - std::floor(v.y)};
}

std::vector<std::pair<EdgeKey, EdgeTag>> tagged_edges(const TriMesh& mesh, EdgeTag tag) {
  std::vector<std::pair<EdgeKey, EdgeTag>> out;
  for (const auto& [key, t] : mesh.edge_tags) {
    if (t == tag) out.emplace_back(key, t);
  }
  return out;
}

}  // namespace

std::array<TriQuadPoint, 25> tri_degree8_rule() {
  // Duffy-collapsed 5x5 Gauss-Legendre product; exact for total degree 8.
  constexpr std::array<double, 5> node = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                          0.5384693101056831, 0.9061798459386640};
  constexpr std::array<double, 5> weight = {0.2369268850561891, 0.4786286704993665,
                                            0.5688888888888889, 0.4786286704993665,
                                            0.2369268850561891};
  std::array<TriQuadPoint, 25> rule{};
  int k = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double u = 0.5 * (node[static_cast<std::size_t>(i)] + 1.0);
      const double v = 0.5 * (node[static_cast<std::size_t>(j)] + 1.0);
      const double x = u;
      const double y = v * (1.0 - u);
      const double w = 0.25 * weight[static_cast<std::size_t>(i)] * weight[static_cast<std::size_t>(j)] * (1.0 - u);
      rule[static_cast<std::size_t>(k++)] = TriQuadPoint{1.0 - x - y, x, y, 2.0 * w};
    }
  }
  return rule;
}

std::array<EdgeQuadPoint, 2> edge_gauss2_rule() {
  const double d = 0.5 / std::sqrt(3.0);
  return {{{0.5 - d, 0.5}, {0.5 + d, 0.5}}};
}

// ---------------------------------------------------------------------------
// DofMap

DofMap DofMap::unconstrained(const TriMesh& mesh) {
  DofMap dm;
  dm.mesh_ = &mesh;
  const int n = static_cast<int>(mesh.vertices.size());
  dm.kinds_.assign(static_cast<std::size_t>(n), Kind::free_dof);
  dm.index_.resize(static_cast<std::size_t>(n));
  dm.values_.assign(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) dm.index_[static_cast<std::size_t>(v)] = v;
  dm.free_count_ = n;
  return dm;
}

DofMap DofMap::dirichlet(const TriMesh& mesh, const std::set<EdgeTag>& tags, double value) {
  DofMap dm;
  dm.mesh_ = &mesh;
  const int n = static_cast<int>(mesh.vertices.size());
  dm.kinds_.assign(static_cast<std::size_t>(n), Kind::free_dof);
  dm.index_.assign(static_cast<std::size_t>(n), -1);
  dm.values_.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& [key, tag] : mesh.edge_tags) {
    if (!tags.count(tag)) continue;
    for (int v : {key.first, key.second}) {
      dm.kinds_[static_cast<std::size_t>(v)] = Kind::dirichlet;
      dm.values_[static_cast<std::size_t>(v)] = value;
    }
  }
  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (dm.kinds_[static_cast<std::size_t>(v)] == Kind::free_dof) dm.index_[static_cast<std::size_t>(v)] = next++;
  }
  dm.free_count_ = next;
  return dm;
}

DofMap DofMap::periodic(const TriMesh& mesh) {
  check_periodic_matching(mesh);
  const int n = static_cast<int>(mesh.vertices.size());
  std::vector<int> parent(static_cast<std::size_t>(n), -1);

  auto match_sides = [&](bool vertical) {
    std::vector<std::pair<double, int>> lo, hi;
    for (int v = 0; v < n; ++v) {
      const Vec2 p = mesh.vertex(v);
      const double line = vertical ? p.x : p.y;
      const double along = vertical ? p.y : p.x;
      if (std::abs(line) <= kGeomTol) lo.emplace_back(along, v);
      else if (std::abs(line - 1.0) <= kGeomTol) hi.emplace_back(along, v);
    }
    std::sort(lo.begin(), lo.end());
    std::sort(hi.begin(), hi.end());
    if (lo.size() != hi.size()) throw MeshError("periodic side vertex counts differ");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (std::abs(lo[i].first - hi[i].first) > kGeomTol) {
        throw MeshError("periodic side vertices do not match pairwise");
      }
      parent[static_cast<std::size_t>(hi[i].second)] = lo[i].second;
    }
  };
  match_sides(true);   // right -> left
  match_sides(false);  // top -> bottom, corners overwrite onto the bottom row

  DofMap dm;
  dm.mesh_ = &mesh;
  dm.kinds_.assign(static_cast<std::size_t>(n), Kind::free_dof);
  dm.index_.assign(static_cast<std::size_t>(n), -1);
  dm.values_.assign(static_cast<std::size_t>(n), 0.0);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (parent[static_cast<std::size_t>(v)] < 0) dm.index_[static_cast<std::size_t>(v)] = next++;
  }
  dm.free_count_ = next;
  for (int v = 0; v < n; ++v) {
    int root = parent[static_cast<std::size_t>(v)];
    if (root < 0) continue;
    while (parent[static_cast<std::size_t>(root)] >= 0) root = parent[static_cast<std::size_t>(root)];
    dm.kinds_[static_cast<std::size_t>(v)] = Kind::periodic_slave;
    dm.index_[static_cast<std::size_t>(v)] = root;  // master vertex, itself free
  }
  return dm;
}

int DofMap::dof_of_vertex(int v) const {
  switch (kind(v)) {
    case Kind::free_dof: return index(v);
    case Kind::periodic_slave: return index_[static_cast<std::size_t>(index(v))];
    case Kind::dirichlet: return -1;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// FemField and point location

double FemField::value_on(int tri, Vec2 p) const {
  const auto& t = mesh->triangles[static_cast<std::size_t>(tri)];
  const Vec2 a = mesh->vertex(t[0]), b = mesh->vertex(t[1]), c = mesh->vertex(t[2]);
  const double twice_area = cross(b - a, c - a);
  const double l2 = cross(p - a, c - a) / twice_area;
  const double l3 = cross(b - a, p - a) / twice_area;
  const double l1 = 1.0 - l2 - l3;
  return l1 * values[static_cast<std::size_t>(t[0])] + l2 * values[static_cast<std::size_t>(t[1])] +
         l3 * values[static_cast<std::size_t>(t[2])];
}

Vec2 FemField::gradient_on(int tri) const {
  const auto& t = mesh->triangles[static_cast<std::size_t>(tri)];
  const Vec2 a = mesh->vertex(t[0]), b = mesh->vertex(t[1]), c = mesh->vertex(t[2]);
  const double twice_area = cross(b - a, c - a);
  const Vec2 g0{(b.y - c.y) / twice_area, (c.x - b.x) / twice_area};
  const Vec2 g1{(c.y - a.y) / twice_area, (a.x - c.x) / twice_area};
  const Vec2 g2{(a.y - b.y) / twice_area, (b.x - a.x) / twice_area};
  return values[static_cast<std::size_t>(t[0])] * g0 + values[static_cast<std::size_t>(t[1])] * g1 +
         values[static_cast<std::size_t>(t[2])] * g2;
}

double FemField::integral() const {
  double acc = 0.0;
  for (int t = 0; t < static_cast<int>(mesh->triangles.size()); ++t) {
    const auto& tri = mesh->triangles[static_cast<std::size_t>(t)];
    acc += mesh->triangle_area(t) / 3.0 *
           (values[static_cast<std::size_t>(tri[0])] + values[static_cast<std::size_t>(tri[1])] +
            values[static_cast<std::size_t>(tri[2])]);
  }
  return acc;
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  bins_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(mesh.triangles.size()))), 1, 512);
  cells_.assign(static_cast<std::size_t>(bins_) * static_cast<std::size_t>(bins_), {});
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (int v : tri) {
      const Vec2 p = mesh.vertex(v);
      x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    const int i0 = std::clamp(static_cast<int>(x0 * bins_), 0, bins_ - 1);
    const int i1 = std::clamp(static_cast<int>(x1 * bins_), 0, bins_ - 1);
    const int j0 = std::clamp(static_cast<int>(y0 * bins_), 0, bins_ - 1);
    const int j1 = std::clamp(static_cast<int>(y1 * bins_), 0, bins_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        cells_[static_cast<std::size_t>(j * bins_ + i)].push_back(t);
      }
    }
  }
}

int PointLocator::locate(Vec2 p) const {
  const int i = std::clamp(static_cast<int>(p.x * bins_), 0, bins_ - 1);
  const int j = std::clamp(static_cast<int>(p.y * bins_), 0, bins_ - 1);
  const double tol = -1e-10;
  for (int t : cells_[static_cast<std::size_t>(j * bins_ + i)]) {
    const auto& tri = mesh_->triangles[static_cast<std::size_t>(t)];
    const Vec2 a = mesh_->vertex(tri[0]), b = mesh_->vertex(tri[1]), c = mesh_->vertex(tri[2]);
    const double twice_area = cross(b - a, c - a);
    const double l2 = cross(p - a, c - a) / twice_area;
    const double l3 = cross(b - a, p - a) / twice_area;
    const double l1 = 1.0 - l2 - l3;
    if (l1 >= tol && l2 >= tol && l3 >= tol) return t;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Constraints

ReducedSystem apply_constraints(const SparseMatrix& matrix, const std::vector<double>& rhs,
                                const DofMap& dofmap) {
  const int nv = dofmap.vertex_count();
  ReducedSystem sys;
  sys.dofmap = &dofmap;
  sys.rhs.assign(static_cast<std::size_t>(dofmap.free_count()), 0.0);

  std::vector<int> dof(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) dof[static_cast<std::size_t>(v)] = dofmap.dof_of_vertex(v);

  std::vector<int> ti, tj;
  std::vector<double> tv;
  ti.reserve(matrix.nonzeros());
  tj.reserve(matrix.nonzeros());
  tv.reserve(matrix.nonzeros());
  const auto& offs = matrix.row_offsets();
  const auto& cols = matrix.col_indices();
  const auto& vals = matrix.values();
  for (int i = 0; i < nv; ++i) {
    const int di = dof[static_cast<std::size_t>(i)];
    if (di < 0) continue;
    sys.rhs[static_cast<std::size_t>(di)] += rhs[static_cast<std::size_t>(i)];
    for (int k = offs[static_cast<std::size_t>(i)]; k < offs[static_cast<std::size_t>(i) + 1]; ++k) {
      const int j = cols[static_cast<std::size_t>(k)];
      const int dj = dof[static_cast<std::size_t>(j)];
      if (dj >= 0) {
        ti.push_back(di);
        tj.push_back(dj);
        tv.push_back(vals[static_cast<std::size_t>(k)]);
      } else {
        sys.rhs[static_cast<std::size_t>(di)] -= vals[static_cast<std::size_t>(k)] * dofmap.dirichlet_value(j);
      }
    }
  }
  sys.matrix = SparseMatrix::from_triplets(dofmap.free_count(), dofmap.free_count(), ti, tj, tv);
  return sys;
}

std::vector<double> ReducedSystem::expand(const std::vector<double>& reduced) const {
  const int nv = dofmap->vertex_count();
  std::vector<double> full(static_cast<std::size_t>(nv), 0.0);
  for (int v = 0; v < nv; ++v) {
    const int d = dofmap->dof_of_vertex(v);
    full[static_cast<std::size_t>(v)] =
        d >= 0 ? reduced[static_cast<std::size_t>(d)] : dofmap->dirichlet_value(v);
  }
  return full;
}

std::vector<double> ReducedSystem::restrict_vector(const std::vector<double>& full) const {
  std::vector<double> out(static_cast<std::size_t>(dofmap->free_count()), 0.0);
  for (int v = 0; v < dofmap->vertex_count(); ++v) {
    const int d = dofmap->dof_of_vertex(v);
    if (d >= 0) out[static_cast<std::size_t>(d)] += full[static_cast<std::size_t>(v)];
  }
  return out;
}

bool rhs_consistent_with_constants(const std::vector<double>& reduced_rhs, double tol) {
  double sum = 0.0, sq = 0.0;
  for (double v : reduced_rhs) {
    sum += v;
    sq += v * v;
  }
  // Relative projection onto the constant direction, with an absolute floor
  // so a right-hand side that is zero to round-off counts as consistent.
  const double root_n = std::sqrt(static_cast<double>(reduced_rhs.size()));
  return std::abs(sum) <= tol * std::sqrt(sq) * root_n + 1e-13 * root_n;
}

// ---------------------------------------------------------------------------
// Assembly

void set_assembly_threads(int threads) { g_assembly_threads.store(std::max(1, threads)); }
int assembly_threads() { return g_assembly_threads.load(); }

SparseMatrix assemble_stiffness(const TriMesh& mesh, const CoefficientField& coeff,
                                double coefficient_scale, TriRule rule) {
  const int ntri = static_cast<int>(mesh.triangles.size());
  std::vector<std::array<double, 9>> local(static_cast<std::size_t>(ntri));
  const double inv_scale = 1.0 / coefficient_scale;

  parallel_ranges(ntri, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const ElementGeometry g = element_geometry(mesh, t);
      std::array<double, 9> k{};
      for_each_tri_quad(g, rule, [&](const TriQuadPoint& q) {
        const SymMat2 a = coeff(wrap_unit(inv_scale * quad_point(g, q)));
        const double w = g.area * q.w;
        for (int i = 0; i < 3; ++i) {
          const Vec2 agi = a.apply(g.grad[static_cast<std::size_t>(i)]);
          for (int j = i; j < 3; ++j) {
            k[static_cast<std::size_t>(3 * i + j)] += w * dot(agi, g.grad[static_cast<std::size_t>(j)]);
          }
        }
      });
      // Mirror the upper triangle so the assembled matrix is exactly
      // symmetric, bitwise.
      k[3] = k[1];
      k[6] = k[2];
      k[7] = k[5];
      local[static_cast<std::size_t>(t)] = k;
    }
  });

  const int nv = static_cast<int>(mesh.vertices.size());
  std::vector<int> ti, tj;
  std::vector<double> tv;
  ti.reserve(static_cast<std::size_t>(ntri) * 9);
  tj.reserve(static_cast<std::size_t>(ntri) * 9);
  tv.reserve(static_cast<std::size_t>(ntri) * 9);
  for (int t = 0; t < ntri; ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        ti.push_back(tri[static_cast<std::size_t>(i)]);
        tj.push_back(tri[static_cast<std::size_t>(j)]);
        tv.push_back(local[static_cast<std::size_t>(t)][static_cast<std::size_t>(3 * i + j)]);
      }
    }
  }
  return SparseMatrix::from_triplets(nv, nv, ti, tj, tv);
}

std::vector<double> assemble_volume_load(const TriMesh& mesh,
                                         const std::function<double(Vec2)>& f, TriRule rule) {
  const int ntri = static_cast<int>(mesh.triangles.size());
  std::vector<std::array<double, 3>> local(static_cast<std::size_t>(ntri));
  parallel_ranges(ntri, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const ElementGeometry g = element_geometry(mesh, t);
      std::array<double, 3> r{};
      for_each_tri_quad(g, rule, [&](const TriQuadPoint& q) {
        const double fw = g.area * q.w * f(quad_point(g, q));
        r[0] += fw * q.l1;
        r[1] += fw * q.l2;
        r[2] += fw * q.l3;
      });
      local[static_cast<std::size_t>(t)] = r;
    }
  });
  std::vector<double> rhs(mesh.vertices.size(), 0.0);
  for (int t = 0; t < ntri; ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      rhs[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])] += local[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    }
  }
  return rhs;
}

std::vector<double> assemble_cell_corrector_rhs(const TriMesh& mesh,
                                                const CoefficientField& coeff, int dir,
                                                TriRule rule) {
  const Vec2 e = dir == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  const int ntri = static_cast<int>(mesh.triangles.size());
  std::vector<std::array<double, 3>> local(static_cast<std::size_t>(ntri));
  parallel_ranges(ntri, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const ElementGeometry g = element_geometry(mesh, t);
      std::array<double, 3> r{};
      for_each_tri_quad(g, rule, [&](const TriQuadPoint& q) {
        const Vec2 ae = coeff(wrap_unit(quad_point(g, q))).apply(e);
        const double w = g.area * q.w;
        for (int i = 0; i < 3; ++i) {
          r[static_cast<std::size_t>(i)] -= w * dot(ae, g.grad[static_cast<std::size_t>(i)]);
        }
      });
      local[static_cast<std::size_t>(t)] = r;
    }
  });
  std::vector<double> rhs(mesh.vertices.size(), 0.0);
  for (int t = 0; t < ntri; ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      rhs[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])] += local[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    }
  }
  return rhs;
}

std::vector<double> assemble_boundary_linear(const TriMesh& mesh, EdgeTag tag,
                                             const std::function<double(Vec2)>& density) {
  const auto edges = tagged_edges(mesh, tag);
  if (edges.empty()) {
    throw MeshError(std::string("unknown boundary tag '") + edge_tag_name(tag) + "' on this mesh");
  }
  const auto rule = edge_gauss2_rule();
  std::vector<double> rhs(mesh.vertices.size(), 0.0);
  for (const auto& [key, t] : edges) {
    const Vec2 a = mesh.vertex(key.first), b = mesh.vertex(key.second);
    const double len = norm(b - a);
    for (const auto& q : rule) {
      const Vec2 x = a + q.t * (b - a);
      const double w = len * q.w * density(x);
      rhs[static_cast<std::size_t>(key.first)] += w * (1.0 - q.t);
      rhs[static_cast<std::size_t>(key.second)] += w * q.t;
    }
  }
  return rhs;
}

BoundaryNonlinear assemble_boundary_nonlinear(const TriMesh& mesh, EdgeTag tag,
                                              const FemField& u, const NonlinearPhase& phase) {
  const auto edges = tagged_edges(mesh, tag);
  if (edges.empty()) {
    throw MeshError(std::string("unknown boundary tag '") + edge_tag_name(tag) + "' on this mesh");
  }
  const auto rule = edge_gauss2_rule();
  BoundaryNonlinear out;
  out.residual.assign(mesh.vertices.size(), 0.0);
  std::vector<int> ti, tj;
  std::vector<double> tv;
  for (const auto& [key, t] : edges) {
    const Vec2 a = mesh.vertex(key.first), b = mesh.vertex(key.second);
    const double len = norm(b - a);
    const double ua = u.values[static_cast<std::size_t>(key.first)];
    const double ub = u.values[static_cast<std::size_t>(key.second)];
    double r[2] = {0.0, 0.0};
    double j[3] = {0.0, 0.0, 0.0};  // (aa, ab, bb)
    for (const auto& q : rule) {
      const double phi_a = 1.0 - q.t;
      const double phi_b = q.t;
      const double uq = phi_a * ua + phi_b * ub;
      const double w = len * q.w;
      const double k = phase.kappa(uq);
      const double kp = phase.kappa_prime(uq);
      r[0] += w * k * phi_a;
      r[1] += w * k * phi_b;
      j[0] += w * kp * phi_a * phi_a;
      j[1] += w * kp * phi_a * phi_b;
      j[2] += w * kp * phi_b * phi_b;
    }
    out.residual[static_cast<std::size_t>(key.first)] += r[0];
    out.residual[static_cast<std::size_t>(key.second)] += r[1];
    const int va = key.first, vb = key.second;
    ti.insert(ti.end(), {va, va, vb, vb});
    tj.insert(tj.end(), {va, vb, va, vb});
    tv.insert(tv.end(), {j[0], j[1], j[1], j[2]});
  }
  const int nv = static_cast<int>(mesh.vertices.size());
  out.jacobian = SparseMatrix::from_triplets(nv, nv, ti, tj, tv);
  return out;
}

BoundaryNonlinear assemble_volume_nonlinear(const TriMesh& mesh, const FemField& u,
                                            const NonlinearPhase& phase) {
  const int ntri = static_cast<int>(mesh.triangles.size());
  BoundaryNonlinear out;
  out.residual.assign(mesh.vertices.size(), 0.0);
  std::vector<int> ti, tj;
  std::vector<double> tv;
  ti.reserve(static_cast<std::size_t>(ntri) * 9);
  tj.reserve(static_cast<std::size_t>(ntri) * 9);
  tv.reserve(static_cast<std::size_t>(ntri) * 9);
  for (int t = 0; t < ntri; ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double uv[3] = {u.values[static_cast<std::size_t>(tri[0])], u.values[static_cast<std::size_t>(tri[1])],
                          u.values[static_cast<std::size_t>(tri[2])]};
    double r[3] = {0.0, 0.0, 0.0};
    double jm[9] = {0};
    for (const auto& q : kTriMidpoint3) {
      const double lam[3] = {q.l1, q.l2, q.l3};
      const double uq = q.l1 * uv[0] + q.l2 * uv[1] + q.l3 * uv[2];
      const double w = g.area * q.w;
      const double k = phase.kappa(uq);
      const double kp = phase.kappa_prime(uq);
      for (int i = 0; i < 3; ++i) {
        r[i] += w * k * lam[i];
        for (int jj = 0; jj < 3; ++jj) jm[3 * i + jj] += w * kp * lam[i] * lam[jj];
      }
    }
    for (int i = 0; i < 3; ++i) {
      out.residual[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])] += r[i];
      for (int jj = 0; jj < 3; ++jj) {
        ti.push_back(tri[static_cast<std::size_t>(i)]);
        tj.push_back(tri[static_cast<std::size_t>(jj)]);
        tv.push_back(jm[3 * i + jj]);
      }
    }
  }
  const int nv = static_cast<int>(mesh.vertices.size());
  out.jacobian = SparseMatrix::from_triplets(nv, nv, ti, tj, tv);
  return out;
}

SparseMatrix assemble_boundary_mass(const TriMesh& mesh, EdgeTag tag) {
  FemField zero_field(mesh, 0.0);
  return assemble_boundary_nonlinear(mesh, tag, zero_field, NonlinearPhase::linear(1.0, 0.0)).jacobian;
}

// ---------------------------------------------------------------------------
// Norms and integrals

double norm_l2(const FemField& field) {
  const TriMesh& mesh = *field.mesh;
  double acc = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double a = mesh.triangle_area(t);
    const double u0 = field.values[static_cast<std::size_t>(tri[0])];
    const double u1 = field.values[static_cast<std::size_t>(tri[1])];
    const double u2 = field.values[static_cast<std::size_t>(tri[2])];
    acc += a / 6.0 * (u0 * u0 + u1 * u1 + u2 * u2 + u0 * u1 + u0 * u2 + u1 * u2);
  }
  return std::sqrt(std::max(0.0, acc));
}

double seminorm_h1_sq(const FemField& field) {
  const TriMesh& mesh = *field.mesh;
  double acc = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Vec2 g = field.gradient_on(t);
    acc += mesh.triangle_area(t) * dot(g, g);
  }
  return acc;
}

double norm_h1(const FemField& field) {
  const double l2 = norm_l2(field);
  return std::sqrt(l2 * l2 + seminorm_h1_sq(field));
}

double trace_norm_sq(const FemField& field, const std::set<EdgeTag>& tags, double eps) {
  const TriMesh& mesh = *field.mesh;
  const auto rule = edge_gauss2_rule();
  double acc = 0.0;
  for (const auto& [key, tag] : mesh.edge_tags) {
    if (!tags.count(tag)) continue;
    const Vec2 a = mesh.vertex(key.first), b = mesh.vertex(key.second);
    const double len = norm(b - a);
    const double ua = field.values[static_cast<std::size_t>(key.first)];
    const double ub = field.values[static_cast<std::size_t>(key.second)];
    for (const auto& q : rule) {
      const double uq = (1.0 - q.t) * ua + q.t * ub;
      acc += len * q.w * uq * uq;
    }
  }
  return eps * acc;
}

double error_l2_vs(const FemField& field, const std::function<double(Vec2)>& exact) {
  const TriMesh& mesh = *field.mesh;
  static const auto rule = tri_degree8_rule();
  double acc = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    for (const auto& q : rule) {
      const Vec2 x = quad_point(g, q);
      const double d = field.value_on(t, x) - exact(x);
      acc += g.area * q.w * d * d;
    }
  }
  return std::sqrt(acc);
}

double error_h1_vs(const FemField& field, const std::function<double(Vec2)>& exact,
                   const std::function<Vec2(Vec2)>& exact_grad) {
  const TriMesh& mesh = *field.mesh;
  static const auto rule = tri_degree8_rule();
  double acc = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const Vec2 gh = field.gradient_on(t);
    for (const auto& q : rule) {
      const Vec2 x = quad_point(g, q);
      const double d = field.value_on(t, x) - exact(x);
      const Vec2 dg = gh - exact_grad(x);
      acc += g.area * q.w * (d * d + dot(dg, dg));
    }
  }
  return std::sqrt(acc);
}

double stiffness_energy(const TriMesh& mesh, const CoefficientField& coeff,
                        double coefficient_scale, const FemField& u, const FemField& v,
                        TriRule rule) {
  const double inv_scale = 1.0 / coefficient_scale;
  double acc = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const Vec2 gu = u.gradient_on(t);
    const Vec2 gv = v.gradient_on(t);
    for_each_tri_quad(g, rule, [&](const TriQuadPoint& q) {
      const SymMat2 a = coeff(wrap_unit(inv_scale * quad_point(g, q)));
      acc += g.area * q.w * dot(a.apply(gu), gv);
    });
  }
  return acc;
}

double mesh_mean(const FemField& field) {
  return field.integral() / field.mesh->total_area();
}

}  // namespace homog
