#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "homog/coefficient.hpp"
#include "homog/corrector.hpp"
#include "homog/fem.hpp"
#include "homog/geometry.hpp"
#include "test_util.hpp"

using namespace homog;

namespace {

constexpr double kPi = std::numbers::pi;

const TriMesh& unit_square_mesh(double h) {
  static std::map<double, TriMesh> cache;
  auto it = cache.find(h);
  if (it == cache.end()) it = cache.emplace(h, mesh_unit_cell(make_unit_cell({}), h)).first;
  return it->second;
}

int interior_vertex(const TriMesh& mesh) {
  for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
    const Vec2 p = mesh.vertex(v);
    if (p.x > 0.1 && p.x < 0.9 && p.y > 0.1 && p.y < 0.9) return v;
  }
  return -1;
}

}  // namespace

TEST_CASE("stiffness: identity coefficient gives the five-point stencil") {
  const TriMesh& mesh = unit_square_mesh(1.0 / 8.0);
  const auto k = assemble_stiffness(mesh, CoefficientField::identity());
  const int v = interior_vertex(mesh);
  REQUIRE(v >= 0);
  CHECK(k.at(v, v) == doctest::Approx(4.0).epsilon(1e-14));
  // Off-diagonals to the four axis neighbours are -1, diagonal neighbours 0.
  double row_sum = 0.0;
  const auto& offs = k.row_offsets();
  for (int e = offs[static_cast<std::size_t>(v)]; e < offs[static_cast<std::size_t>(v) + 1]; ++e) {
    row_sum += k.values()[static_cast<std::size_t>(e)];
  }
  CHECK(row_sum == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("stiffness: constant diagonal coefficients factor into directional parts") {
  const TriMesh& mesh = unit_square_mesh(1.0 / 8.0);
  const auto kx = assemble_stiffness(mesh, CoefficientField::constant({1.0, 0.0, 0.0}));
  const auto ky = assemble_stiffness(mesh, CoefficientField::constant({0.0, 0.0, 1.0}));
  const auto k = assemble_stiffness(mesh, CoefficientField::constant({2.0, 0.0, 3.0}));
  const auto combo = SparseMatrix::add(2.0, kx, 3.0, ky);
  for (int i = 0; i < k.rows(); ++i) {
    const auto& offs = k.row_offsets();
    for (int e = offs[static_cast<std::size_t>(i)]; e < offs[static_cast<std::size_t>(i) + 1]; ++e) {
      const int j = k.col_indices()[static_cast<std::size_t>(e)];
      CHECK(k.at(i, j) == doctest::Approx(combo.at(i, j)).epsilon(1e-13));
    }
  }
}

TEST_CASE("stiffness: assembled matrix is bitwise symmetric") {
  const TriMesh& mesh = unit_square_mesh(1.0 / 8.0);
  const auto k = assemble_stiffness(mesh, CoefficientField::layered(1.0), 0.5);
  for (int i = 0; i < k.rows(); ++i) {
    const auto& offs = k.row_offsets();
    for (int e = offs[static_cast<std::size_t>(i)]; e < offs[static_cast<std::size_t>(i) + 1]; ++e) {
      const int j = k.col_indices()[static_cast<std::size_t>(e)];
      CHECK(k.at(i, j) == k.at(j, i));  // exact
    }
  }
}

TEST_CASE("stiffness: oscillating coefficient vs an independent quadrature oracle") {
  const TriMesh& mesh = unit_square_mesh(1.0 / 8.0);
  const auto coeff = CoefficientField::layered(1.0);
  const double eps = 0.5;

  // Oracle A: the degree-8 rule re-derived independently (Duffy collapse of
  // a 5x5 Gauss product written out here), scattered through a plain map.
  // Matches the degree-8 assembly path to 1e-10.
  const double gauss_nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
  const double gauss_weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};
  std::map<std::pair<int, int>, double> oracle8;
  std::map<std::pair<int, int>, double> oracle_fine;
  const auto rule = tri_degree8_rule();
  for (const auto& tri : mesh.triangles) {
    const Vec2 p0 = mesh.vertex(tri[0]), p1 = mesh.vertex(tri[1]), p2 = mesh.vertex(tri[2]);
    const double twice_area = cross(p1 - p0, p2 - p0);
    const Vec2 grads[3] = {{(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area},
                           {(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area},
                           {(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area}};
    auto eval = [&](Vec2 x) {
      return coeff({x.x / eps - std::floor(x.x / eps), x.y / eps - std::floor(x.y / eps)});
    };
    for (int gi = 0; gi < 5; ++gi) {
      for (int gj = 0; gj < 5; ++gj) {
        const double u = 0.5 * (gauss_nodes[gi] + 1.0);
        const double v = 0.5 * (gauss_nodes[gj] + 1.0);
        const double r = u, s = v * (1.0 - u);
        const Vec2 x = (1.0 - r - s) * p0 + r * p1 + s * p2;
        const double w = 0.25 * gauss_weights[gi] * gauss_weights[gj] * (1.0 - u) * twice_area;
        const SymMat2 a = eval(x);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            oracle8[{tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>(j)]}] +=
                w * dot(a.apply(grads[i]), grads[j]);
          }
        }
      }
    }
    // Oracle B: the same rule on a 4-way uniform split; its quadrature error
    // is ~500x smaller, so the gap to either single-level rule is the true
    // quadrature error of that rule.
    const Vec2 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m20 = 0.5 * (p2 + p0);
    const Vec2 sub[4][3] = {{p0, m01, m20}, {m01, p1, m12}, {m20, m12, p2}, {m01, m12, m20}};
    for (const auto& sv : sub) {
      const double sub_area = 0.5 * cross(sv[1] - sv[0], sv[2] - sv[0]);
      for (const auto& q : rule) {
        const Vec2 x = q.l1 * sv[0] + q.l2 * sv[1] + q.l3 * sv[2];
        const SymMat2 a = eval(x);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            oracle_fine[{tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>(j)]}] +=
                sub_area * q.w * dot(a.apply(grads[i]), grads[j]);
          }
        }
      }
    }
  }

  const auto k8 = assemble_stiffness(mesh, coeff, eps, TriRule::degree8);
  double worst8 = 0.0, quad_err8 = 0.0;
  for (const auto& [ij, v] : oracle8) {
    worst8 = std::max(worst8, std::abs(k8.at(ij.first, ij.second) - v));
    quad_err8 = std::max(quad_err8, std::abs(oracle_fine[ij] - v));
  }
  CHECK(worst8 <= 1e-10);
  CHECK(quad_err8 <= 1e-4);  // genuine degree-8 truncation error for the sine

  // The default 3-point rule carries the documented O(h^2) quadrature gap for
  // an oscillating coefficient: well above round-off, still small.
  const auto k3 = assemble_stiffness(mesh, coeff, eps, TriRule::midpoint3);
  double worst3 = 0.0;
  for (const auto& [ij, v] : oracle_fine) {
    worst3 = std::max(worst3, std::abs(k3.at(ij.first, ij.second) - v));
  }
  CHECK(worst3 > 1e-10);
  CHECK(worst3 <= 0.05);
}

TEST_CASE("boundary load: partition of unity sums to the perimeter") {
  const auto cell = make_unit_cell({{{0.5, 0.5}, 0.25, 1}});
  const auto mesh = mesh_unit_cell(cell, 1.0 / 16.0);
  const auto rhs = assemble_boundary_linear(mesh, EdgeTag::hole_phase_1, [](Vec2) { return 1.0; });
  double sum = 0.0;
  for (double v : rhs) sum += v;
  CHECK(sum == doctest::Approx(mesh_measures(mesh).perimeter_s1).epsilon(1e-13));

  const auto zero = assemble_boundary_linear(mesh, EdgeTag::hole_phase_1, [](Vec2) { return 0.0; });
  for (double v : zero) CHECK(v == 0.0);

  // density x1 on a circle centered at (0.5, 0.5): mean value 0.5 by symmetry.
  const auto x1 = assemble_boundary_linear(mesh, EdgeTag::hole_phase_1, [](Vec2 x) { return x.x; });
  double sum_x1 = 0.0;
  for (double v : x1) sum_x1 += v;
  CHECK(sum_x1 == doctest::Approx(0.5 * mesh_measures(mesh).perimeter_s1).epsilon(1e-12));

  CHECK_THROWS_AS((void)assemble_boundary_linear(mesh, EdgeTag::hole_phase_2, [](Vec2) { return 1.0; }),
                  MeshError);
}

TEST_CASE("boundary nonlinear: linear kappa reduces to the boundary mass matrix") {
  const auto cell = make_unit_cell({{{0.5, 0.5}, 0.25, 1}});
  const auto mesh = mesh_unit_cell(cell, 1.0 / 16.0);
  const auto mass = assemble_boundary_mass(mesh, EdgeTag::hole_phase_1);

  FemField u(mesh);
  for (std::size_t v = 0; v < u.values.size(); ++v) {
    const Vec2 p = mesh.vertices[v];
    u.values[v] = std::sin(3.0 * p.x) + p.y;
  }
  const auto bn = assemble_boundary_nonlinear(mesh, EdgeTag::hole_phase_1, u,
                                              NonlinearPhase::linear(1.0, 0.0));
  const auto mu = mass.multiply(u.values);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(bn.residual[i] == doctest::Approx(mu[i]).epsilon(1e-12));
  }

  FemField zero(mesh, 0.0);
  const auto bz = assemble_boundary_nonlinear(mesh, EdgeTag::hole_phase_1, zero,
                                              NonlinearPhase::soft_sine(0.7, 1.3));
  for (double v : bz.residual) CHECK(v == 0.0);  // kappa(0) = 0
}

TEST_CASE("boundary nonlinear: jacobian matches central finite differences") {
  const auto cell = make_unit_cell({{{0.5, 0.5}, 0.25, 1}});
  const auto mesh = mesh_unit_cell(cell, 1.0 / 8.0);
  NonlinearPhase phase;
  phase.kappa = [](double t) { return t + 0.1 * std::sin(t); };
  phase.kappa_prime = [](double t) { return 1.0 + 0.1 * std::cos(t); };
  phase.primitive = [](double z) { return 0.5 * z * z + 0.1 * (1.0 - std::cos(z)); };
  phase.c1 = 0.9;
  phase.c2 = 1.1;

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  FemField u(mesh);
  for (auto& v : u.values) v = unif(rng);

  const auto bn = assemble_boundary_nonlinear(mesh, EdgeTag::hole_phase_1, u, phase);
  const double delta = 1e-6;
  // Probe a handful of hole-boundary vertices.
  int probed = 0;
  for (const auto& [key, tag] : mesh.edge_tags) {
    if (tag != EdgeTag::hole_phase_1 || probed >= 5) continue;
    const int j = key.first;
    FemField up = u, dn = u;
    up.values[static_cast<std::size_t>(j)] += delta;
    dn.values[static_cast<std::size_t>(j)] -= delta;
    const auto rp = assemble_boundary_nonlinear(mesh, EdgeTag::hole_phase_1, up, phase).residual;
    const auto rn = assemble_boundary_nonlinear(mesh, EdgeTag::hole_phase_1, dn, phase).residual;
    for (int i = 0; i < static_cast<int>(u.values.size()); ++i) {
      const double fd = (rp[static_cast<std::size_t>(i)] - rn[static_cast<std::size_t>(i)]) / (2.0 * delta);
      CHECK(bn.jacobian.at(i, j) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
    ++probed;
  }
  CHECK(probed == 5);
}

TEST_CASE("apply_constraints: poisson solution matches the series oracle") {
  const TriMesh& mesh = unit_square_mesh(1.0 / 32.0);
  const auto k = assemble_stiffness(mesh, CoefficientField::identity());
  const auto load = assemble_volume_load(mesh, [](Vec2) { return 1.0; });
  const auto dofmap = DofMap::dirichlet(
      mesh, {EdgeTag::side_left, EdgeTag::side_right, EdgeTag::side_bottom, EdgeTag::side_top});
  const auto sys = apply_constraints(k, load, dofmap);
  FemField u(mesh);
  u.values = sys.expand(solve_cg_checked(sys.matrix, sys.rhs, 1e-12));

  double umax = 0.0;
  for (double v : u.values) umax = std::max(umax, v);
  const double center_series = testutil::poisson_unit_square_series(0.5, 0.5);
  CHECK(center_series == doctest::Approx(0.0736713).epsilon(2e-5));
  CHECK(umax == doctest::Approx(center_series).epsilon(3e-3));
}

TEST_CASE("apply_constraints: no constraints leaves the system unchanged") {
  const TriMesh& mesh = unit_square_mesh(0.25);
  const auto k = assemble_stiffness(mesh, CoefficientField::identity());
  const auto load = assemble_volume_load(mesh, [](Vec2 x) { return x.x; });
  const auto dofmap = DofMap::unconstrained(mesh);
  const auto sys = apply_constraints(k, load, dofmap);
  CHECK(sys.matrix.rows() == k.rows());
  CHECK(sys.matrix.nonzeros() == k.nonzeros());
  for (int i = 0; i < k.rows(); ++i) {
    CHECK(sys.rhs[static_cast<std::size_t>(i)] == load[static_cast<std::size_t>(i)]);
    CHECK(sys.matrix.at(i, i) == k.at(i, i));
  }
}

TEST_CASE("apply_constraints: pure periodic system detects an inconsistent rhs") {
  const TriMesh& mesh = unit_square_mesh(0.25);
  const auto k = assemble_stiffness(mesh, CoefficientField::identity());
  const auto load = assemble_volume_load(mesh, [](Vec2) { return 1.0; });  // constant source
  const auto dofmap = DofMap::periodic(mesh);
  const auto sys = apply_constraints(k, load, dofmap);
  CHECK_FALSE(rhs_consistent_with_constants(sys.rhs));
}

TEST_CASE("periodic dofmap: slaves point directly at free masters") {
  const TriMesh& mesh = unit_square_mesh(0.25);  // 5 x 5 grid
  const auto dofmap = DofMap::periodic(mesh);
  CHECK(dofmap.free_count() == 16);
  int slaves = 0;
  for (int v = 0; v < dofmap.vertex_count(); ++v) {
    if (dofmap.kind(v) == DofMap::Kind::periodic_slave) {
      ++slaves;
      const int master = dofmap.index(v);
      CHECK(dofmap.kind(master) == DofMap::Kind::free_dof);  // chain length 1
    }
  }
  CHECK(slaves == 9);
}

TEST_CASE("norms: constants and linear fields") {
  const TriMesh& mesh = unit_square_mesh(1.0 / 8.0);
  FemField c(mesh, 3.0);
  CHECK(norm_l2(c) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(seminorm_h1_sq(c) == doctest::Approx(0.0).epsilon(1e-20));

  FemField x1(mesh);
  for (std::size_t v = 0; v < x1.values.size(); ++v) x1.values[v] = mesh.vertices[v].x;
  CHECK(norm_l2(x1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(seminorm_h1_sq(x1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("manufactured poisson rates: H1 first order, L2 second order") {
  const auto exact = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  const auto exact_grad = [](Vec2 x) {
    return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
  };
  const auto source = [](Vec2 x) {
    return 2.0 * kPi * kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y);
  };

  std::vector<std::pair<double, double>> h1_pts, l2_pts;
  for (const double h : {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0}) {
    const TriMesh& mesh = unit_square_mesh(h);
    const auto k = assemble_stiffness(mesh, CoefficientField::identity());
    const auto load = assemble_volume_load(mesh, source);
    const auto dofmap = DofMap::dirichlet(
        mesh, {EdgeTag::side_left, EdgeTag::side_right, EdgeTag::side_bottom, EdgeTag::side_top});
    const auto sys = apply_constraints(k, load, dofmap);
    FemField u(mesh);
    u.values = sys.expand(solve_cg_checked(sys.matrix, sys.rhs, 1e-12));
    h1_pts.emplace_back(h, error_h1_vs(u, exact, exact_grad));
    l2_pts.emplace_back(h, error_l2_vs(u, exact));
  }
  const RateFit h1_fit = observed_rate(h1_pts);
  const RateFit l2_fit = observed_rate(l2_pts);
  CHECK(h1_fit.rate >= 0.9);
  CHECK(h1_fit.rate <= 1.1);
  CHECK(l2_fit.rate >= 1.9);
  CHECK(l2_fit.rate <= 2.1);
}

TEST_CASE("trace norm: eps-scaled boundary integral") {
  const auto cell = make_unit_cell({{{0.5, 0.5}, 0.25, 1}});
  const auto cell_mesh = mesh_unit_cell(cell, 1.0 / 8.0);
  const auto perf = tile_mesh(cell_mesh, 2);
  FemField one(perf.mesh, 1.0);
  const double tr = trace_norm_sq(one, {EdgeTag::hole_phase_1}, perf.epsilon);
  // eps * total hole perimeter; N^2 holes of perimeter eps * cell perimeter.
  const double cell_perim = mesh_measures(cell_mesh).perimeter_s1;
  CHECK(tr == doctest::Approx(perf.epsilon * 4.0 * perf.epsilon * cell_perim).epsilon(1e-12));
}
