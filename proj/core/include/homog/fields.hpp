#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homog/geometry.hpp"

namespace homog {

/// Named analytic scalar field on the unit square, used for the volume
/// source f0 and the boundary data g0. Configs refer to these by name.
struct ScalarField {
  std::function<double(Vec2)> eval;
  std::string name = "zero";
  std::vector<double> params;

  double operator()(Vec2 x) const { return eval(x); }

  static ScalarField zero();
  static ScalarField constant(double value);
  /// amplitude sin(pi x) sin(pi y)
  static ScalarField sine_product(double amplitude = 1.0);
  /// 16 amplitude x(1-x) y(1-y); vanishes on the boundary, peak = amplitude.
  static ScalarField bump(double amplitude = 1.0);

  static ScalarField by_name(const std::string& name, const std::vector<double>& params);
};

}  // namespace homog
