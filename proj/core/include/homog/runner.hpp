#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "homog/cache.hpp"
#include "homog/cell.hpp"
#include "homog/config.hpp"
#include "homog/corrector.hpp"
#include "homog/fine_solver.hpp"
#include "homog/hom_solver.hpp"

namespace homog {

enum ExitCode : int {
  exit_ok = 0,
  exit_solver_failure = 2,
  exit_config_error = 3,
  exit_window_violation = 4,
};

/// Rate acceptance windows, pinned.
inline constexpr double kH1RateMin = 0.4;
inline constexpr double kH1RateMax = 1.1;
inline constexpr double kEnergyRateMin = 0.4;
inline constexpr double kEnergyRateMax = 1.2;

/// Cell mesh + solves + tensor, owning the objects the solution refers to.
struct CellStage {
  std::unique_ptr<TriMesh> mesh;
  std::unique_ptr<CoefficientField> coeff;
  UnitCellGeometry geometry;
  CellSolution solution;
  TensorPair tensor;
  TensorReport tensor_report;
  CacheKey key;
  bool cache_hit = false;
};

CellStage run_cell_stage(const RunConfig& config, const std::string& cache_dir);

struct SweepStage {
  CellStage cell;
  std::array<std::unique_ptr<NonlinearPhase>, 2> phases;
  ScalarField f0;
  std::array<ScalarField, 2> g0;
  HomProblem hom_problem;
  std::unique_ptr<HomSolution> hom;
  ConvergenceReport report;
  UniformBoundReport bound;
};

/// The full pipeline: cell solves (cached), one homogenized solve, a fine
/// solve per sweep epsilon, corrector errors and fitted rates.
SweepStage run_sweep_stage(const RunConfig& config, const std::string& cache_dir,
                           std::ostream* log = nullptr);

/// true when every available fitted rate falls inside its pinned window.
bool rates_in_windows(const ConvergenceReport& report);

struct CliOptions {
  std::string config_path;
  std::string out_override;
  std::string cache_override;
  int threads = 1;
  unsigned seed = 0;
};

int cmd_cell(const CliOptions& opt, std::ostream& log);
int cmd_fine(const CliOptions& opt, const std::string& eps_text, std::ostream& log);
int cmd_hom(const CliOptions& opt, std::ostream& log);
int cmd_sweep(const CliOptions& opt, std::ostream& log);
int cmd_verify(const CliOptions& opt, std::ostream& log);
int cmd_report(const CliOptions& opt, std::ostream& log);

}  // namespace homog
