#pragma once

#include <functional>
#include <string>
#include <vector>

namespace homog {

/// Monotone boundary nonlinearity kappa_m with its derivative, its primitive
/// K(z) = int_0^z kappa(t) dt and the declared derivative pinch c1, c2.
struct NonlinearPhase {
  std::function<double(double)> kappa;
  std::function<double(double)> kappa_prime;
  std::function<double(double)> primitive;
  double c1 = 1.0;
  double c2 = 1.0;
  std::string name = "custom";
  std::vector<double> params;

  /// kappa(t) = a t + b; derivative pinch degenerates to c1 = c2 = a.
  static NonlinearPhase linear(double a = 1.0, double b = 0.0);

  /// kappa(t) = (c1+c2)/2 t + (c2-c1)/2 sin t, so kappa' ranges over [c1, c2]
  /// and kappa(0) = 0.
  static NonlinearPhase soft_sine(double c1 = 0.7, double c2 = 1.3);

  static NonlinearPhase by_name(const std::string& name, const std::vector<double>& params);
};

struct PhaseCheck {
  bool derivative_in_bounds = true;
  bool primitive_bracketed = true;
  bool derivative_consistent = true;
  double worst_fd_error = 0.0;
};

/// Samples the Lipschitz pinch c1 <= kappa' <= c2, the quadratic bracketing
/// of the primitive and finite-difference consistency of kappa'.
PhaseCheck check_phase(const NonlinearPhase& phase, double range = 5.0, int samples = 201);

}  // namespace homog
