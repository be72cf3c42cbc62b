#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "homog/geometry.hpp"

using namespace homog;

namespace {
constexpr double kPi = std::numbers::pi;

int count_tag(const TriMesh& mesh, EdgeTag tag) {
  int n = 0;
  for (const auto& [key, t] : mesh.edge_tags) n += (t == tag);
  return n;
}
}  // namespace

TEST_CASE("validate_cell: single interior disk passes") {
  const auto report = validate_cell({{{0.5, 0.5}, 0.25, 1}});
  CHECK(report.ok);
  CHECK(report.violations.empty());
}

TEST_CASE("validate_cell: tangency is rejected") {
  const auto report = validate_cell({{{0.3, 0.5}, 0.2, 1}, {{0.7, 0.5}, 0.2, 2}});
  CHECK_FALSE(report.ok);
  bool mentions_tangent = false;
  for (const auto& v : report.violations) mentions_tangent |= v.find("tangent") != std::string::npos;
  CHECK(mentions_tangent);
}

TEST_CASE("validate_cell: boundary contact is rejected") {
  const auto report = validate_cell({{{0.5, 0.9}, 0.15, 1}});
  CHECK_FALSE(report.ok);
  bool mentions_boundary = false;
  for (const auto& v : report.violations) {
    mentions_boundary |= v.find("boundary") != std::string::npos;
  }
  CHECK(mentions_boundary);
}

TEST_CASE("measures: closed-form disk values") {
  SUBCASE("one phase-1 hole r = 0.25") {
    const auto cell = make_unit_cell({{{0.5, 0.5}, 0.25, 1}});
    CHECK(cell.area_q0 == doctest::Approx(1.0 - kPi / 16.0).epsilon(1e-14));
    CHECK(cell.perimeter_s1 == doctest::Approx(kPi / 2.0).epsilon(1e-14));
    CHECK(cell.q1 == doctest::Approx((kPi / 2.0) / (1.0 - kPi / 16.0)).epsilon(1e-14));
    CHECK(cell.q1 == doctest::Approx(1.9545765).epsilon(1e-6));
    CHECK(cell.q2 == 0.0);
  }
  SUBCASE("no holes") {
    const auto cell = make_unit_cell({});
    CHECK(cell.area_q0 == 1.0);
    CHECK(cell.perimeter_s1 == 0.0);
    CHECK(cell.perimeter_s2 == 0.0);
    CHECK(cell.q1 == 0.0);
    CHECK(cell.q2 == 0.0);
  }
  SUBCASE("two holes, one per phase") {
    const auto cell = make_unit_cell({{{0.3, 0.3}, 0.15, 1}, {{0.7, 0.7}, 0.2, 2}});
    const double area = 1.0 - kPi * (0.0225 + 0.04);
    CHECK(cell.area_q0 == doctest::Approx(area).epsilon(1e-14));
    CHECK(cell.q1 == doctest::Approx(2.0 * kPi * 0.15 / area).epsilon(1e-14));
    CHECK(cell.q2 == doctest::Approx(2.0 * kPi * 0.2 / area).epsilon(1e-14));
  }
}

TEST_CASE("mesh_unit_cell: empty cell gives the structured grid") {
  const auto mesh = mesh_unit_cell(make_unit_cell({}), 0.25);
  CHECK(mesh.triangles.size() == 32);
  CHECK(mesh.vertices.size() == 25);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(count_tag(mesh, EdgeTag::side_left) == 4);
  CHECK(count_tag(mesh, EdgeTag::side_right) == 4);
  CHECK(count_tag(mesh, EdgeTag::side_bottom) == 4);
  CHECK(count_tag(mesh, EdgeTag::side_top) == 4);
  CHECK_NOTHROW(check_periodic_matching(mesh));
}

TEST_CASE("mesh_unit_cell: hole boundary edge count equals the polygon segments") {
  const auto cell = make_unit_cell({{{0.5, 0.5}, 0.25, 1}}, 64);
  const auto mesh = mesh_unit_cell(cell, 1.0 / 16.0);
  CHECK(count_tag(mesh, EdgeTag::hole_phase_1) == 64);
  CHECK(count_tag(mesh, EdgeTag::hole_phase_2) == 0);
  CHECK(mesh.mesh_size_h <= 2.0 / 16.0 + 1e-12);
  CHECK_NOTHROW(check_mesh_conforming(mesh));
  CHECK_NOTHROW(check_periodic_matching(mesh));
}

TEST_CASE("mesh_unit_cell: insufficient clearance fails") {
  // Near-maximal disk: the validation margin is violated and meshing refuses.
  UnitCellGeometry cell;
  cell.holes = {{{0.5, 0.5}, 0.49, 1}};
  cell.boundary_segments_per_hole = 64;
  CHECK_THROWS_AS((void)mesh_unit_cell(cell, 1.0 / 8.0), MeshError);

  // Valid margin but target_h coarser than the side clearance also fails.
  UnitCellGeometry tight;
  tight.holes = {{{0.5, 0.5}, 0.45, 1}};
  tight.boundary_segments_per_hole = 64;
  CHECK_THROWS_WITH_AS((void)mesh_unit_cell(tight, 1.0 / 8.0),
                       doctest::Contains("insufficient resolution"), MeshError);
}

TEST_CASE("mesh_unit_cell: tiny hole is rejected for coarse target_h") {
  UnitCellGeometry cell;
  cell.holes = {{{0.5, 0.5}, 0.05, 1}};
  cell.boundary_segments_per_hole = 64;
  CHECK_THROWS_WITH_AS((void)mesh_unit_cell(cell, 0.25),
                       doctest::Contains("fewer than 8"), MeshError);
}

TEST_CASE("mesh area converges to the analytic measure at O(s^-2)") {
  const HoleSpec hole{{0.5, 0.5}, 0.25, 1};
  const double exact = 1.0 - kPi * 0.25 * 0.25;
  double prev_err = 0.0;
  for (const int s : {16, 32, 64}) {
    const auto mesh = mesh_unit_cell(make_unit_cell({hole}, s), 1.0 / 16.0);
    const double err = std::abs(mesh.total_area() - exact);
    if (prev_err > 0.0) CHECK(err < prev_err / 3.0);  // rate 2 gives a factor 4
    prev_err = err;
  }
  // Perimeter converges at the same rate.
  double prev_perr = 0.0;
  for (const int s : {16, 32, 64}) {
    const auto mesh = mesh_unit_cell(make_unit_cell({hole}, s), 1.0 / 16.0);
    const double perr = std::abs(mesh_measures(mesh).perimeter_s1 - kPi / 2.0);
    if (prev_perr > 0.0) CHECK(perr < prev_perr / 3.0);
    prev_perr = perr;
  }
}

TEST_CASE("tile_mesh: N = 1 retags the sides as the outer boundary") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({{{0.5, 0.5}, 0.25, 1}}), 1.0 / 16.0);
  const auto perf = tile_mesh(cell_mesh, 1);
  CHECK(perf.mesh.vertices.size() == cell_mesh.vertices.size());
  CHECK(perf.mesh.triangles.size() == cell_mesh.triangles.size());
  CHECK(count_tag(perf.mesh, EdgeTag::side_left) == 0);
  CHECK(count_tag(perf.mesh, EdgeTag::dirichlet_outer) ==
        count_tag(cell_mesh, EdgeTag::side_left) + count_tag(cell_mesh, EdgeTag::side_right) +
            count_tag(cell_mesh, EdgeTag::side_bottom) + count_tag(cell_mesh, EdgeTag::side_top));
  CHECK(count_tag(perf.mesh, EdgeTag::hole_phase_1) == 64);
}

TEST_CASE("tile_mesh: merged vertex count matches the set union of translated clouds") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({{{0.5, 0.5}, 0.25, 1}}), 1.0 / 8.0);
  const int n = 2;
  const auto perf = tile_mesh(cell_mesh, n);

  // Independent count: quantized union of all translated vertex positions.
  std::set<std::pair<long long, long long>> cloud;
  for (int tj = 0; tj < n; ++tj) {
    for (int ti = 0; ti < n; ++ti) {
      for (const auto& v : cell_mesh.vertices) {
        const double x = (ti + v.x) / n;
        const double y = (tj + v.y) / n;
        cloud.insert({std::llround(x * 1e9), std::llround(y * 1e9)});
      }
    }
  }
  CHECK(perf.mesh.vertices.size() == cloud.size());
  CHECK(perf.mesh.triangles.size() == 4 * cell_mesh.triangles.size());
  CHECK(perf.epsilon == 0.5);
}

TEST_CASE("tile_mesh: empty cell tiles to the refined structured grid") {
  const auto cell_mesh = mesh_unit_cell(make_unit_cell({}), 0.25);
  const auto perf = tile_mesh(cell_mesh, 4);
  CHECK(perf.mesh.triangles.size() == 16 * cell_mesh.triangles.size());
  CHECK(perf.mesh.mesh_size_h == doctest::Approx(cell_mesh.mesh_size_h / 4.0).epsilon(1e-14));
  CHECK(perf.mesh.total_area() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tile_mesh: per-phase boundary edges scale with N^2 and holes stay put") {
  const auto cell_mesh =
      mesh_unit_cell(make_unit_cell({{{0.29, 0.29}, 0.2, 1}, {{0.745, 0.745}, 0.15, 2}}), 1.0 / 16.0);
  const int cell_h1 = count_tag(cell_mesh, EdgeTag::hole_phase_1);
  const int cell_h2 = count_tag(cell_mesh, EdgeTag::hole_phase_2);
  for (const int n : {2, 3}) {
    const auto perf = tile_mesh(cell_mesh, n);
    CHECK(count_tag(perf.mesh, EdgeTag::hole_phase_1) == n * n * cell_h1);
    CHECK(count_tag(perf.mesh, EdgeTag::hole_phase_2) == n * n * cell_h2);
    CHECK(perf.mesh.total_area() == doctest::Approx(cell_mesh.total_area()).epsilon(1e-13));
    CHECK_NOTHROW(check_mesh_conforming(perf.mesh));
  }
}

TEST_CASE("periodic matching: left vertices pair exactly with right vertices") {
  const auto mesh = mesh_unit_cell(make_unit_cell({{{0.5, 0.5}, 0.25, 1}}), 1.0 / 16.0);
  std::vector<double> left, right;
  for (const auto& v : mesh.vertices) {
    if (std::abs(v.x) <= kGeomTol) left.push_back(v.y);
    if (std::abs(v.x - 1.0) <= kGeomTol) right.push_back(v.y);
  }
  REQUIRE(left.size() == right.size());
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  for (std::size_t i = 0; i < left.size(); ++i) {
    CHECK(std::abs(left[i] - right[i]) <= kGeomTol);
  }
}

TEST_CASE("mesh export format") {
  const auto mesh = mesh_unit_cell(make_unit_cell({}), 0.5);
  std::ostringstream os;
  write_mesh(os, mesh);
  std::istringstream in(os.str());
  std::size_t nv, nt, ne;
  std::string w1, w2, w3;
  in >> nv >> w1 >> nt >> w2 >> ne >> w3;
  CHECK(nv == mesh.vertices.size());
  CHECK(nt == mesh.triangles.size());
  CHECK(ne == mesh.edge_tags.size());
  CHECK(w1 == "vertices");
  CHECK(w2 == "triangles");
  CHECK(w3 == "tagged-edges");
}
