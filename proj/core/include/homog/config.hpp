#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "homog/coefficient.hpp"
#include "homog/fields.hpp"
#include "homog/geometry.hpp"
#include "homog/phase.hpp"

namespace homog {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Declarative run description: cell geometry, builtin coefficient/phase/data
/// selectors with numeric parameters, sweep sizes, mesh sizes and tolerances.
/// The on-disk format is flat "key = value" lines under [section] headers.
struct RunConfig {
  std::vector<HoleSpec> holes;
  int segments = 64;
  double cell_target_h = 1.0 / 16.0;

  std::string coeff_name = "identity";
  std::vector<double> coeff_params;

  std::array<std::string, 2> phase_names = {"soft-sine", "soft-sine"};
  std::array<std::vector<double>, 2> phase_params;

  std::string f0_name = "constant";
  std::vector<double> f0_params = {1.0};
  std::array<std::string, 2> g_names = {"zero", "zero"};
  std::array<std::vector<double>, 2> g_params;

  std::vector<int> sweep_n = {2, 4, 8, 16};
  double hom_h = 1.0 / 128.0;

  double newton_tol = 1e-10;
  double cg_tol = 1e-10;

  std::string out_dir = "out";
  std::string cache_dir;

  UnitCellGeometry cell() const { return make_unit_cell(holes, segments); }
  CoefficientField coefficient() const { return CoefficientField::by_name(coeff_name, coeff_params); }
  NonlinearPhase phase(int m) const {
    return NonlinearPhase::by_name(phase_names[static_cast<std::size_t>(m)],
                                   phase_params[static_cast<std::size_t>(m)]);
  }
  ScalarField data_f0() const { return ScalarField::by_name(f0_name, f0_params); }
  ScalarField data_g(int m) const {
    return ScalarField::by_name(g_names[static_cast<std::size_t>(m)],
                                g_params[static_cast<std::size_t>(m)]);
  }

  /// Deterministic serialization used for content hashing.
  std::string canonical() const;
};

/// Parses and validates; throws ConfigError with a line diagnostic.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// The default production setup: one hole per phase, identity coefficient,
/// soft-sine phases, smooth fixed data, sweep over N = 2, 4, 8, 16.
RunConfig default_config();

}  // namespace homog
