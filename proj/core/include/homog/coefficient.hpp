#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homog/geometry.hpp"

namespace homog {

/// Symmetric 2x2 matrix value of the coefficient field.
struct SymMat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;

  Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
};

/// 1-periodic symmetric elliptic matrix field a(xi) with declared spectral
/// bounds. Builtins cover the configurations the toolkit ships with; the
/// evaluator is an arbitrary callable for tests.
struct CoefficientField {
  std::function<SymMat2(Vec2)> eval;
  double ellipticity_lower = 1.0;  // kappa_1
  double ellipticity_upper = 1.0;  // kappa_2
  std::string name = "custom";
  std::vector<double> params;

  SymMat2 operator()(Vec2 xi) const { return eval(xi); }

  static CoefficientField identity();
  /// (2 + amplitude sin 2 pi xi_1) I ; requires |amplitude| < 2.
  static CoefficientField layered(double amplitude = 1.0);
  /// (2 + amplitude sin 2 pi xi_1 sin 2 pi xi_2) I ; requires |amplitude| < 2.
  static CoefficientField checker_smooth(double amplitude = 1.0);
  static CoefficientField constant(SymMat2 value);

  static CoefficientField by_name(const std::string& name, const std::vector<double>& params);
};

struct CoefficientCheck {
  bool symmetric = true;
  bool elliptic = true;
  bool periodic = true;
  double worst_symmetry_defect = 0.0;
  double min_rayleigh = 0.0;
  double max_rayleigh = 0.0;
};

/// Samples symmetry, the declared ellipticity bounds and 1-periodicity on a
/// grid of points and probe directions.
CoefficientCheck check_coefficient(const CoefficientField& coeff, int grid = 17);

}  // namespace homog
