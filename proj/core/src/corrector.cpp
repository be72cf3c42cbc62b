#include "homog/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace homog {

namespace {

/// O(1) evaluation on the structured unperforated mesh produced by
/// mesh_unit_cell on an empty cell: squares split along the (i,j)->(i+1,j+1)
/// diagonal, two triangles per square in row-major order.
struct StructuredEval {
  const TriMesh* mesh;
  int n;

  explicit StructuredEval(const TriMesh& m) : mesh(&m) {
    n = static_cast<int>(std::lround(std::sqrt(m.triangles.size() / 2.0)));
    if (2 * n * n != static_cast<int>(m.triangles.size())) {
      throw std::invalid_argument("mesh is not a structured unperforated grid");
    }
  }

  int locate(Vec2 p) const {
    const int i = std::clamp(static_cast<int>(p.x * n), 0, n - 1);
    const int j = std::clamp(static_cast<int>(p.y * n), 0, n - 1);
    const double fx = p.x * n - i;
    const double fy = p.y * n - j;
    return 2 * (j * n + i) + (fx >= fy ? 0 : 1);
  }

  double value(const FemField& f, Vec2 p) const { return f.value_on(locate(p), p); }
};

}  // namespace

double CutoffFunction::operator()(Vec2 x) const {
  const double d = std::min(std::min(x.x, 1.0 - x.x), std::min(x.y, 1.0 - x.y));
  if (d <= epsilon) return 1.0;
  if (d >= 2.0 * epsilon) return 0.0;
  return (2.0 * epsilon - d) / epsilon;
}

CorrectorField build_corrector(const HomSolution& hom, const CellSolution& cell,
                               const PerforatedDomainMesh& perf_mesh) {
  if (cell.geometry_hash != perf_mesh.cell_geometry_hash) {
    throw std::invalid_argument(
        "cell solution and perforated mesh were built from different cell geometries");
  }
  const TriMesh& mesh = perf_mesh.mesh;
  const double eps = perf_mesh.epsilon;
  const StructuredEval hom_eval(*hom.mesh);
  const CutoffFunction cutoff{eps};

  CorrectorField out;
  out.epsilon = eps;
  out.u_bar = FemField(mesh, 0.0);
  out.u_bar_cutoff = FemField(mesh, 0.0);
  out.u_bar_pwc = FemField(mesh, 0.0);

  for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
    const Vec2 x = mesh.vertex(v);
    const int cv = perf_mesh.cell_vertex_of[static_cast<std::size_t>(v)];
    const int hom_tri = hom_eval.locate(x);
    const double v0x = hom.v0.value_on(hom_tri, x);
    const Vec2 grad_rec{hom.gradient[0].value_on(hom_tri, x), hom.gradient[1].value_on(hom_tri, x)};
    const Vec2 grad_pwc = hom.v0.gradient_on(hom_tri);
    const double t1 = cell.corrector[0].values[static_cast<std::size_t>(cv)];
    const double t2 = cell.corrector[1].values[static_cast<std::size_t>(cv)];
    const double corr = eps * (t1 * grad_rec.x + t2 * grad_rec.y);
    out.u_bar.values[static_cast<std::size_t>(v)] = v0x + corr;
    out.u_bar_pwc.values[static_cast<std::size_t>(v)] =
        v0x + eps * (t1 * grad_pwc.x + t2 * grad_pwc.y);
    // Outer-boundary nodes carry the exact Dirichlet zero of the cut-off
    // variant; interpolating v0 there would leave round-off residue.
    const bool on_outer = x.x == 0.0 || x.x == 1.0 || x.y == 0.0 || x.y == 1.0;
    out.u_bar_cutoff.values[static_cast<std::size_t>(v)] =
        on_outer ? 0.0 : v0x + (1.0 - cutoff(x)) * corr;
  }
  return out;
}

double error_h1(const FemField& u, const FemField& v) {
  if (u.mesh != v.mesh || u.values.size() != v.values.size()) {
    throw std::invalid_argument("error_h1 requires fields on the same mesh");
  }
  FemField diff(*u.mesh, 0.0);
  for (std::size_t i = 0; i < u.values.size(); ++i) diff.values[i] = u.values[i] - v.values[i];
  return norm_h1(diff);
}

double error_l2_against_hom(const FemField& u, const HomSolution& hom) {
  const StructuredEval hom_eval(*hom.mesh);
  FemField diff(*u.mesh, 0.0);
  for (std::size_t v = 0; v < u.values.size(); ++v) {
    const Vec2 x = u.mesh->vertices[v];
    diff.values[v] = u.values[v] - hom_eval.value(hom.v0, x);
  }
  return norm_l2(diff);
}

double energy_gap(double energy_fine, double energy_hom) {
  return std::abs(energy_fine - energy_hom);
}

RateFit observed_rate(const std::vector<std::pair<double, double>>& errors) {
  if (errors.size() < 3) throw std::invalid_argument("rate fit needs at least 3 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [eps, e] : errors) {
    if (!(e > 0.0)) throw std::invalid_argument("rate fit needs positive error values");
    const double x = std::log(eps);
    const double y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(errors.size());
  RateFit fit;
  fit.rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.rate * sx) / n;
  double ss = 0.0;
  for (const auto& [eps, e] : errors) {
    const double r = std::log(e) - (fit.rate * std::log(eps) + fit.intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double weak_convergence_gap(const FemField& u, const HomSolution& hom, double area_q0,
                            int blocks) {
  const double block_area = 1.0 / (blocks * blocks);
  std::vector<double> u_int(static_cast<std::size_t>(blocks) * static_cast<std::size_t>(blocks), 0.0);
  std::vector<double> v_int(u_int.size(), 0.0);

  auto block_of = [&](Vec2 c) {
    const int i = std::clamp(static_cast<int>(c.x * blocks), 0, blocks - 1);
    const int j = std::clamp(static_cast<int>(c.y * blocks), 0, blocks - 1);
    return static_cast<std::size_t>(j * blocks + i);
  };
  auto accumulate = [&](const FemField& f, std::vector<double>& target) {
    const TriMesh& mesh = *f.mesh;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
      const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
      const Vec2 c = (1.0 / 3.0) * (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2]));
      const double contrib = mesh.triangle_area(t) / 3.0 *
                             (f.values[static_cast<std::size_t>(tri[0])] +
                              f.values[static_cast<std::size_t>(tri[1])] +
                              f.values[static_cast<std::size_t>(tri[2])]);
      target[block_of(c)] += contrib;
    }
  };
  accumulate(u, u_int);
  accumulate(hom.v0, v_int);

  double gap = 0.0;
  for (std::size_t b = 0; b < u_int.size(); ++b) {
    gap = std::max(gap, std::abs(u_int[b] - area_q0 * v_int[b]) / block_area);
  }
  return gap;
}

void fit_report_rates(ConvergenceReport& report) {
  if (report.records.size() < 3) return;

  auto collect = [&](auto field, bool skip_first) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = skip_first ? 1 : 0; i < report.records.size(); ++i) {
      pts.emplace_back(report.records[i].epsilon, field(report.records[i]));
    }
    return pts;
  };
  auto fit_with_guard = [&](auto field) -> std::optional<RateFit> {
    for (const auto& rec : report.records) {
      if (!(field(rec) > 0.0)) return std::nullopt;  // degenerate (zero-data) sweep
    }
    const RateFit full = observed_rate(collect(field, false));
    if (report.records.size() >= 4) {
      const RateFit tail = observed_rate(collect(field, true));
      // Drop the coarsest point only when it degrades the fit residual by
      // more than 2x and the misfit is above log-scale noise.
      if (full.residual > std::max(2.0 * tail.residual, 1e-3)) {
        report.dropped_first_epsilon = true;
        return tail;
      }
    }
    return full;
  };

  report.h1_fit = fit_with_guard([](const SweepRecord& r) { return r.err_h1; });
  report.energy_fit = fit_with_guard([](const SweepRecord& r) { return r.energy_gap; });
  report.cutoff_fit = fit_with_guard([](const SweepRecord& r) { return r.err_h1_cutoff; });
}

}  // namespace homog
