#include "homog/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "homog/report.hpp"

namespace homog {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

RunConfig load_with_overrides(const CliOptions& opt) {
  RunConfig cfg = opt.config_path.empty() ? default_config() : load_config_file(opt.config_path);
  if (!opt.out_override.empty()) cfg.out_dir = opt.out_override;
  if (!opt.cache_override.empty()) cfg.cache_dir = opt.cache_override;
  return cfg;
}

json tensor_to_json(const HomogenizedTensor& t) {
  return json{{"a11", t.a[0][0]}, {"a12", t.a[0][1]}, {"a21", t.a[1][0]}, {"a22", t.a[1][1]}};
}

json cell_stage_json(const CellStage& st) {
  const auto eig = st.tensor.flux_average.eigenvalues();
  const auto compat = compatibility_defect(st.solution.measures);
  return json{
      {"tensor", tensor_to_json(st.tensor.flux_average)},
      {"tensor_energy_form", tensor_to_json(st.tensor.energy_form)},
      {"eigenvalues", {eig[0], eig[1]}},
      {"symmetry_defect", st.tensor.flux_average.symmetry_defect()},
      {"form_disagreement", st.tensor.max_form_disagreement},
      {"measures",
       {{"area_q0", st.solution.measures.area},
        {"perimeter_s1", st.solution.measures.perimeter_s1},
        {"perimeter_s2", st.solution.measures.perimeter_s2},
        {"q1", st.solution.measures.q1},
        {"q2", st.solution.measures.q2}}},
      {"compatibility_defect", {compat[0], compat[1]}},
      {"cache", st.cache_hit ? "hit" : "cold"},
      {"cache_key", st.key.hex()},
      {"mesh_h", st.mesh->mesh_size_h},
      {"vertices", st.mesh->vertices.size()},
      {"triangles", st.mesh->triangles.size()},
  };
}

json fit_to_json(const std::optional<RateFit>& fit) {
  if (!fit) return nullptr;
  return json{{"rate", fit->rate}, {"intercept", fit->intercept}, {"residual", fit->residual}};
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);  // LF line endings everywhere
  os << text;
}

int run_guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const MeshError& e) {
    log << "geometry/mesh error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::invalid_argument& e) {
    log << "invalid input: " << e.what() << "\n";
    return exit_config_error;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << "\n";
    return exit_solver_failure;
  }
}

}  // namespace

CellStage run_cell_stage(const RunConfig& config, const std::string& cache_dir) {
  CellStage st;
  st.geometry = config.cell();
  st.mesh = std::make_unique<TriMesh>(mesh_unit_cell(st.geometry, config.cell_target_h));
  st.coeff = std::make_unique<CoefficientField>(config.coefficient());
  st.key = cell_cache_key(config);

  const auto cached = load_cell_cache(cache_dir, st.key, st.mesh->vertices.size());
  if (cached) {
    st.cache_hit = true;
    st.solution.mesh = st.mesh.get();
    st.solution.coeff = st.coeff.get();
    st.solution.measures = cached->measures;
    st.solution.geometry_hash = st.key.hash;
    for (int m = 0; m < 2; ++m) {
      st.solution.corrector[static_cast<std::size_t>(m)] = FemField(*st.mesh);
      st.solution.corrector[static_cast<std::size_t>(m)].values = cached->corrector[static_cast<std::size_t>(m)];
      st.solution.auxiliary[static_cast<std::size_t>(m)] = FemField(*st.mesh);
      st.solution.auxiliary[static_cast<std::size_t>(m)].values = cached->auxiliary[static_cast<std::size_t>(m)];
    }
    st.tensor = cached->tensor;
  } else {
    st.solution = solve_cell(*st.mesh, *st.coeff, st.key.hash, 1e-12);
    st.tensor = homogenized_tensor(st.solution);
    store_cell_cache(cache_dir, st.key, st.solution, st.tensor);
  }
  st.tensor_report = verify_tensor(st.tensor);
  return st;
}

SweepStage run_sweep_stage(const RunConfig& config, const std::string& cache_dir,
                           std::ostream* log) {
  SweepStage st;
  st.cell = run_cell_stage(config, cache_dir);
  if (log) {
    *log << "cell stage (" << (st.cell.cache_hit ? "cache hit" : "cold") << "): a_hat = ["
         << fmt_double(st.cell.tensor.flux_average.a[0][0]) << ", "
         << fmt_double(st.cell.tensor.flux_average.a[0][1]) << "; "
         << fmt_double(st.cell.tensor.flux_average.a[1][0]) << ", "
         << fmt_double(st.cell.tensor.flux_average.a[1][1]) << "]\n";
  }

  for (int m = 0; m < 2; ++m) {
    st.phases[static_cast<std::size_t>(m)] = std::make_unique<NonlinearPhase>(config.phase(m));
  }
  st.f0 = config.data_f0();
  st.g0 = {config.data_g(0), config.data_g(1)};

  st.hom_problem.tensor = st.cell.tensor.flux_average;
  st.hom_problem.area_q0 = st.cell.solution.measures.area;
  st.hom_problem.surface = {st.cell.solution.measures.perimeter_s1,
                            st.cell.solution.measures.perimeter_s2};
  st.hom_problem.phases = {st.phases[0].get(), st.phases[1].get()};
  st.hom_problem.f0 = st.f0;
  st.hom_problem.g0 = st.g0;

  st.hom = std::make_unique<HomSolution>(solve_homogenized(
      st.hom_problem, config.hom_h, config.newton_tol, 25, nullptr, config.cg_tol));
  if (log) {
    *log << "hom solve: " << st.hom->trace.iterations << " newton iterations, E0 = "
         << fmt_double(st.hom->energy) << "\n";
  }

  std::vector<int> sweep = config.sweep_n;
  std::sort(sweep.begin(), sweep.end());  // epsilon descending
  std::vector<double> h1_norms;
  for (int n : sweep) {
    const auto t0 = clock_type::now();
    const PerforatedDomainMesh perf = tile_mesh(*st.cell.mesh, n, st.cell.key.hash);

    FineProblem fp;
    fp.mesh = &perf;
    fp.coeff = st.cell.coeff.get();
    fp.phases = {st.phases[0].get(), st.phases[1].get()};
    fp.f = st.f0;
    fp.g = st.g0;
    FineSolution fine = solve_fine(fp, config.newton_tol, 25, nullptr, config.cg_tol);

    const CorrectorField corr = build_corrector(*st.hom, st.cell.solution, perf);

    SweepRecord r;
    r.epsilon = perf.epsilon;
    r.h = perf.mesh.mesh_size_h;
    r.err_h1 = error_h1(fine.u, corr.u_bar);
    r.err_h1_cutoff = error_h1(fine.u, corr.u_bar_cutoff);
    r.err_h1_pwc = error_h1(fine.u, corr.u_bar_pwc);
    r.err_l2 = error_l2_against_hom(fine.u, *st.hom);
    r.energy_fine = fine.energy;
    r.energy_hom = st.hom->energy;
    r.energy_gap = energy_gap(fine.energy, st.hom->energy);
    r.weak_gap = weak_convergence_gap(fine.u, *st.hom, st.cell.solution.measures.area, 4);
    r.newton_iters = fine.trace.iterations;
    r.seconds_estimate = static_cast<double>(fine.trace.work_units) / 1e9;
    r.seconds_wall = seconds_since(t0);
    r.u_h1_norm = norm_h1(fine.u);
    h1_norms.push_back(r.u_h1_norm);
    st.report.records.push_back(r);
    if (log) {
      *log << "eps = 1/" << n << ": err_h1 = " << fmt_double(r.err_h1)
           << ", energy gap = " << fmt_double(r.energy_gap) << ", weak gap = "
           << fmt_double(r.weak_gap) << ", newton = " << r.newton_iters << " ("
           << fmt_double(r.seconds_wall) << " s)\n";
    }
  }

  fit_report_rates(st.report);
  st.bound = uniform_bound_check(h1_norms);
  return st;
}

bool rates_in_windows(const ConvergenceReport& report) {
  bool ok = true;
  if (report.h1_fit) {
    ok = ok && report.h1_fit->rate >= kH1RateMin && report.h1_fit->rate <= kH1RateMax;
  }
  if (report.cutoff_fit) {
    ok = ok && report.cutoff_fit->rate >= kH1RateMin && report.cutoff_fit->rate <= kH1RateMax;
  }
  if (report.energy_fit) {
    ok = ok && report.energy_fit->rate >= kEnergyRateMin && report.energy_fit->rate <= kEnergyRateMax;
  }
  return ok;
}

int cmd_cell(const CliOptions& opt, std::ostream& log) {
  return run_guarded(log, [&] {
    const RunConfig cfg = load_with_overrides(opt);
    set_assembly_threads(opt.threads);
    const CellStage st = run_cell_stage(cfg, cfg.cache_dir);
    const auto eig = st.tensor.flux_average.eigenvalues();
    log << "cell tensor (" << (st.cache_hit ? "cache hit" : "cold run") << ")\n";
    log << "a_hat = [" << fmt_double(st.tensor.flux_average.a[0][0]) << ", "
        << fmt_double(st.tensor.flux_average.a[0][1]) << "; "
        << fmt_double(st.tensor.flux_average.a[1][0]) << ", "
        << fmt_double(st.tensor.flux_average.a[1][1]) << "]\n";
    log << "eigenvalues = " << fmt_double(eig[0]) << ", " << fmt_double(eig[1]) << "\n";
    log << "form agreement defect = " << fmt_double(st.tensor.max_form_disagreement) << "\n";
    fs::create_directories(cfg.out_dir);
    write_text_file(fs::path(cfg.out_dir) / "tensor.json", cell_stage_json(st).dump(2) + "\n");
    return st.tensor_report.symmetric && st.tensor_report.elliptic && st.tensor_report.forms_agree
               ? exit_ok
               : exit_window_violation;
  });
}

int cmd_fine(const CliOptions& opt, const std::string& eps_text, std::ostream& log) {
  return run_guarded(log, [&] {
    int n = 0;
    if (eps_text.rfind("1/", 0) == 0) n = std::atoi(eps_text.c_str() + 2);
    else n = std::atoi(eps_text.c_str());
    if (n < 1) throw ConfigError("--eps expects '1/N' with integer N >= 1, got '" + eps_text + "'");

    const RunConfig cfg = load_with_overrides(opt);
    set_assembly_threads(opt.threads);
    const UnitCellGeometry geometry = cfg.cell();
    const TriMesh cell_mesh = mesh_unit_cell(geometry, cfg.cell_target_h);
    const CoefficientField coeff = cfg.coefficient();
    const PerforatedDomainMesh perf = tile_mesh(cell_mesh, n, cell_cache_key(cfg).hash);
    const NonlinearPhase phase1 = cfg.phase(0), phase2 = cfg.phase(1);

    FineProblem fp;
    fp.mesh = &perf;
    fp.coeff = &coeff;
    fp.phases = {&phase1, &phase2};
    fp.f = cfg.data_f0();
    fp.g = {cfg.data_g(0), cfg.data_g(1)};
    const auto t0 = clock_type::now();
    const FineSolution fine = solve_fine(fp, cfg.newton_tol, 25, nullptr, cfg.cg_tol);
    const double wall = seconds_since(t0);

    fs::create_directories(cfg.out_dir);
    {
      std::ofstream os(fs::path(cfg.out_dir) / ("u_eps_" + std::to_string(n) + ".field"),
                       std::ios::binary);
      write_field(os, fine.u.values);
    }
    json meta{
        {"epsilon", perf.epsilon},
        {"n", n},
        {"mesh_h", perf.mesh.mesh_size_h},
        {"newton_iterations", fine.trace.iterations},
        {"residual_norms", fine.trace.residual_norms},
        {"energy", fine.energy},
        {"functional", functional_value(fine.u, fp)},
        {"h1_norm", norm_h1(fine.u)},
        {"seconds_wall", wall},
    };
    write_text_file(fs::path(cfg.out_dir) / ("fine_eps_" + std::to_string(n) + ".json"),
                    meta.dump(2) + "\n");
    log << "fine solve at eps = 1/" << n << ": " << fine.trace.iterations
        << " newton iterations, E_eps = " << fmt_double(fine.energy) << "\n";
    return static_cast<int>(exit_ok);
  });
}

int cmd_hom(const CliOptions& opt, std::ostream& log) {
  return run_guarded(log, [&] {
    const RunConfig cfg = load_with_overrides(opt);
    set_assembly_threads(opt.threads);
    const CellStage cell = run_cell_stage(cfg, cfg.cache_dir);
    const NonlinearPhase phase1 = cfg.phase(0), phase2 = cfg.phase(1);
    HomProblem hp;
    hp.tensor = cell.tensor.flux_average;
    hp.area_q0 = cell.solution.measures.area;
    hp.surface = {cell.solution.measures.perimeter_s1, cell.solution.measures.perimeter_s2};
    hp.phases = {&phase1, &phase2};
    hp.f0 = cfg.data_f0();
    hp.g0 = {cfg.data_g(0), cfg.data_g(1)};
    const HomSolution hom = solve_homogenized(hp, cfg.hom_h, cfg.newton_tol, 25, nullptr, cfg.cg_tol);

    fs::create_directories(cfg.out_dir);
    {
      std::ofstream os(fs::path(cfg.out_dir) / "v0.field", std::ios::binary);
      write_field(os, hom.v0.values);
    }
    json meta{
        {"mesh_h", cfg.hom_h},
        {"newton_iterations", hom.trace.iterations},
        {"residual_norms", hom.trace.residual_norms},
        {"energy", hom.energy},
        {"cell", cell_stage_json(cell)},
    };
    write_text_file(fs::path(cfg.out_dir) / "hom.json", meta.dump(2) + "\n");
    log << "hom solve: " << hom.trace.iterations << " newton iterations, E0 = "
        << fmt_double(hom.energy) << "\n";
    return static_cast<int>(exit_ok);
  });
}

int cmd_sweep(const CliOptions& opt, std::ostream& log) {
  return run_guarded(log, [&] {
    const RunConfig cfg = load_with_overrides(opt);
    if (cfg.sweep_n.size() < 1) throw ConfigError("sweep needs at least one N value");
    set_assembly_threads(opt.threads);
    SweepStage st = run_sweep_stage(cfg, cfg.cache_dir, &log);

    fs::create_directories(cfg.out_dir);
    {
      std::ostringstream csv;
      write_report_csv(csv, st.report);
      write_text_file(fs::path(cfg.out_dir) / "report.csv", csv.str());
    }
    {
      std::ostringstream svg;
      write_report_svg(svg, st.report);
      write_text_file(fs::path(cfg.out_dir) / "convergence.svg", svg.str());
    }

    const bool windows_ok = rates_in_windows(st.report);
    json summary{
        {"config", cfg.canonical()},
        {"cell", cell_stage_json(st.cell)},
        {"hom",
         {{"mesh_h", cfg.hom_h},
          {"newton_iterations", st.hom->trace.iterations},
          {"energy", st.hom->energy}}},
        {"fits",
         {{"h1", fit_to_json(st.report.h1_fit)},
          {"energy", fit_to_json(st.report.energy_fit)},
          {"cutoff", fit_to_json(st.report.cutoff_fit)},
          {"dropped_first_epsilon", st.report.dropped_first_epsilon}}},
        {"uniform_bound",
         {{"h1_norms", st.bound.h1_norms},
          {"max_over_min", st.bound.max_over_min},
          {"bounded", st.bound.bounded}}},
        {"windows_ok", windows_ok},
    };
    json records = json::array();
    for (const auto& r : st.report.records) {
      records.push_back(json{
          {"epsilon", r.epsilon},
          {"h", r.h},
          {"err_h1", r.err_h1},
          {"err_h1_cutoff", r.err_h1_cutoff},
          {"err_h1_pwc", r.err_h1_pwc},
          {"err_l2", r.err_l2},
          {"energy_fine", r.energy_fine},
          {"energy_hom", r.energy_hom},
          {"energy_gap", r.energy_gap},
          {"weak_gap", r.weak_gap},
          {"newton_iters", r.newton_iters},
          {"seconds_wall", r.seconds_wall},
          {"seconds_estimate", r.seconds_estimate},
          {"u_h1_norm", r.u_h1_norm},
      });
    }
    summary["records"] = std::move(records);
    write_text_file(fs::path(cfg.out_dir) / "summary.json", summary.dump(2) + "\n");

    if (st.report.h1_fit) {
      log << "h1 rate = " << fmt_double(st.report.h1_fit->rate) << ", energy rate = "
          << (st.report.energy_fit ? fmt_double(st.report.energy_fit->rate) : "n/a") << "\n";
    } else {
      log << "rates undefined (fewer than 3 points or zero errors)\n";
    }
    return windows_ok ? exit_ok : exit_window_violation;
  });
}

int cmd_verify(const CliOptions& opt, std::ostream& log) {
  return run_guarded(log, [&] {
    const RunConfig cfg = load_with_overrides(opt);
    set_assembly_threads(opt.threads);
    bool any_fail = false;
    auto item = [&](const std::string& name, int state, const std::string& detail) {
      // state: 0 pass, 1 fail, 2 skipped
      const char* text = state == 0 ? "PASS" : state == 1 ? "FAIL" : "SKIP";
      if (state == 1) any_fail = true;
      log << text << "  " << name << (detail.empty() ? "" : "  (" + detail + ")") << "\n";
    };

    const CellStage cell = run_cell_stage(cfg, cfg.cache_dir);
    const bool has_phase[2] = {cell.solution.measures.perimeter_s1 > 0.0,
                               cell.solution.measures.perimeter_s2 > 0.0};

    // Compatibility of the auxiliary problems.
    const auto compat = compatibility_defect(cell.solution.measures);
    for (int m = 0; m < 2; ++m) {
      if (!has_phase[m]) {
        item("compatibility phase " + std::to_string(m + 1), 2, "no holes in this phase");
      } else {
        item("compatibility phase " + std::to_string(m + 1), compat[static_cast<std::size_t>(m)] <= 1e-12 ? 0 : 1,
             "defect " + fmt_double(compat[static_cast<std::size_t>(m)]));
      }
    }

    // Surface integral identity on the eps = 1/4 tiled mesh at two cell sizes.
    if (!has_phase[0] && !has_phase[1]) {
      item("surface identity", 2, "no holes");
    } else {
      const auto phi = [](Vec2 x) { return x.x * x.y; };
      RunConfig fine_cfg = cfg;
      fine_cfg.cell_target_h = cfg.cell_target_h / 2.0;
      const CellStage cell_half = run_cell_stage(fine_cfg, cfg.cache_dir);
      const PerforatedDomainMesh perf = tile_mesh(*cell.mesh, 4, cell.key.hash);
      const PerforatedDomainMesh perf_half = tile_mesh(*cell_half.mesh, 4, cell_half.key.hash);
      for (int m = 0; m < 2; ++m) {
        if (!has_phase[m]) {
          item("surface identity phase " + std::to_string(m + 1), 2, "no holes in this phase");
          continue;
        }
        const auto res = surface_identity_residual(perf, cell.solution, m, phi);
        const auto res_half = surface_identity_residual(perf_half, cell_half.solution, m, phi);
        const double c = res.residual / cell.mesh->mesh_size_h;
        const double c_half = res_half.residual / cell_half.mesh->mesh_size_h;
        const bool ok = c_half <= 2.05 * c + 1e-12 && res_half.residual <= res.residual + 1e-12;
        item("surface identity phase " + std::to_string(m + 1), ok ? 0 : 1,
             "residuals " + fmt_double(res.residual) + " -> " + fmt_double(res_half.residual));
      }
    }

    // Norm equivalence constants of ||.||_eps against H1, sampled fields.
    {
      std::vector<double> ratios;
      std::mt19937 rng(opt.seed == 0 ? 12345u : opt.seed);
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      for (int n : cfg.sweep_n) {
        const PerforatedDomainMesh perf = tile_mesh(*cell.mesh, n, cell.key.hash);
        const DofMap dofmap = DofMap::dirichlet(perf.mesh, {EdgeTag::dirichlet_outer});
        auto ratio_of = [&](const FemField& u) {
          const double h1sq = norm_l2(u) * norm_l2(u) + seminorm_h1_sq(u);
          const double eps_sq = seminorm_h1_sq(u) +
                                trace_norm_sq(u, {EdgeTag::hole_phase_1, EdgeTag::hole_phase_2},
                                              perf.epsilon);
          return eps_sq / h1sq;
        };
        FemField smooth(perf.mesh);
        const ScalarField bump = ScalarField::bump(1.0);
        for (std::size_t v = 0; v < smooth.values.size(); ++v) {
          smooth.values[v] = bump(perf.mesh.vertices[v]);
        }
        FemField noisy(perf.mesh);
        for (std::size_t v = 0; v < noisy.values.size(); ++v) noisy.values[v] = unif(rng);
        for (int v = 0; v < dofmap.vertex_count(); ++v) {
          if (dofmap.kind(v) == DofMap::Kind::dirichlet) noisy.values[static_cast<std::size_t>(v)] = 0.0;
        }
        ratios.push_back(ratio_of(smooth));
        ratios.push_back(ratio_of(noisy));
      }
      const auto [lo_it, hi_it] = std::minmax_element(ratios.begin(), ratios.end());
      const bool ok = *lo_it > 0.02 && *hi_it < 50.0 && *hi_it / *lo_it < 25.0;
      item("norm equivalence", ok ? 0 : 1,
           "ratio range [" + fmt_double(*lo_it) + ", " + fmt_double(*hi_it) + "]");
    }

    // Boundedness of sqrt(eps) ||g||_{L2(Xi_eps)}.
    if (has_phase[0] || has_phase[1]) {
      const std::array<ScalarField, 2> g = {cfg.data_g(0), cfg.data_g(1)};
      std::vector<double> values;
      const auto rule = edge_gauss2_rule();
      for (int n : cfg.sweep_n) {
        const PerforatedDomainMesh perf = tile_mesh(*cell.mesh, n, cell.key.hash);
        double total = 0.0;
        for (int m = 0; m < 2; ++m) {
          if (!has_phase[m]) continue;
          const EdgeTag tag = m == 0 ? EdgeTag::hole_phase_1 : EdgeTag::hole_phase_2;
          double tr = 0.0;
          for (const auto& [key, t] : perf.mesh.edge_tags) {
            if (t != tag) continue;
            const Vec2 a = perf.mesh.vertex(key.first), b = perf.mesh.vertex(key.second);
            for (const auto& q : rule) {
              const Vec2 x = a + q.t * (b - a);
              tr += norm(b - a) * q.w * g[static_cast<std::size_t>(m)](x) * g[static_cast<std::size_t>(m)](x);
            }
          }
          total += std::sqrt(std::max(0.0, perf.epsilon * tr));
        }
        values.push_back(total);
      }
      const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
      const bool all_zero = *hi_it == 0.0;
      const bool ok = all_zero || *hi_it <= 1.5 * std::max(*lo_it, 1e-300);
      item("boundary data trace bound", ok ? 0 : 1,
           all_zero ? "zero data" : "range [" + fmt_double(*lo_it) + ", " + fmt_double(*hi_it) + "]");
    } else {
      item("boundary data trace bound", 2, "no holes");
    }

    // Uniform H1 bound over the sweep (requires the fine solves).
    {
      const NonlinearPhase phase1 = cfg.phase(0), phase2 = cfg.phase(1);
      std::vector<double> norms;
      for (int n : cfg.sweep_n) {
        const PerforatedDomainMesh perf = tile_mesh(*cell.mesh, n, cell.key.hash);
        FineProblem fp;
        fp.mesh = &perf;
        fp.coeff = cell.coeff.get();
        fp.phases = {&phase1, &phase2};
        fp.f = cfg.data_f0();
        fp.g = {cfg.data_g(0), cfg.data_g(1)};
        norms.push_back(norm_h1(solve_fine(fp, cfg.newton_tol, 25, nullptr, cfg.cg_tol).u));
      }
      const auto bound = uniform_bound_check(norms);
      item("uniform h1 bound", bound.bounded ? 0 : 1,
           "max/min = " + fmt_double(bound.max_over_min));
    }

    return any_fail ? exit_window_violation : exit_ok;
  });
}

int cmd_report(const CliOptions& opt, std::ostream& log) {
  return run_guarded(log, [&] {
    const RunConfig cfg = load_with_overrides(opt);
    const fs::path csv_path = fs::path(cfg.out_dir) / "report.csv";
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("no report.csv under '" + cfg.out_dir + "' (run sweep first)");
    ConvergenceReport report = read_report_csv(in);
    if (report.records.size() >= 3) fit_report_rates(report);

    {
      std::ostringstream svg;
      write_report_svg(svg, report);
      write_text_file(fs::path(cfg.out_dir) / "convergence.svg", svg.str());
    }
    json summary{
        {"fits",
         {{"h1", fit_to_json(report.h1_fit)},
          {"energy", fit_to_json(report.energy_fit)},
          {"dropped_first_epsilon", report.dropped_first_epsilon}}},
        {"rows", report.records.size()},
    };
    write_text_file(fs::path(cfg.out_dir) / "report_refit.json", summary.dump(2) + "\n");
    if (report.h1_fit) {
      log << "h1 rate = " << fmt_double(report.h1_fit->rate) << "\n";
    }
    log << "report regenerated from " << report.records.size() << " rows\n";
    return static_cast<int>(exit_ok);
  });
}

}  // namespace homog
