#include "homog/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

NonlinearPhase NonlinearPhase::linear(double a, double b) {
  if (!(a > 0.0)) throw std::invalid_argument("linear phase slope must be positive");
  NonlinearPhase p;
  p.kappa = [a, b](double t) { return a * t + b; };
  p.kappa_prime = [a](double) { return a; };
  p.primitive = [a, b](double z) { return 0.5 * a * z * z + b * z; };
  p.c1 = a;
  p.c2 = a;
  p.name = "linear";
  p.params = {a, b};
  return p;
}

NonlinearPhase NonlinearPhase::soft_sine(double c1, double c2) {
  if (!(c1 > 0.0) || !(c2 >= c1)) throw std::invalid_argument("soft-sine needs 0 < c1 <= c2");
  const double mean = 0.5 * (c1 + c2);
  const double amp = 0.5 * (c2 - c1);
  NonlinearPhase p;
  p.kappa = [mean, amp](double t) { return mean * t + amp * std::sin(t); };
  p.kappa_prime = [mean, amp](double t) { return mean + amp * std::cos(t); };
  p.primitive = [mean, amp](double z) { return 0.5 * mean * z * z + amp * (1.0 - std::cos(z)); };
  p.c1 = c1;
  p.c2 = c2;
  p.name = "soft-sine";
  p.params = {c1, c2};
  return p;
}

NonlinearPhase NonlinearPhase::by_name(const std::string& name,
                                       const std::vector<double>& params) {
  auto param = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  if (name == "linear") return linear(param(0, 1.0), param(1, 0.0));
  if (name == "soft-sine") return soft_sine(param(0, 0.7), param(1, 1.3));
  throw std::invalid_argument("unknown phase nonlinearity '" + name + "'");
}

PhaseCheck check_phase(const NonlinearPhase& phase, double range, int samples) {
  PhaseCheck out;
  const double delta = 1e-6;
  const double kappa0 = phase.kappa(0.0);
  for (int i = 0; i < samples; ++i) {
    const double t = -range + 2.0 * range * i / (samples - 1);
    const double d = phase.kappa_prime(t);
    if (d < phase.c1 - 1e-9 || d > phase.c2 + 1e-9) out.derivative_in_bounds = false;

    const double k = phase.primitive(t);
    const double lo = 0.5 * phase.c1 * t * t + kappa0 * t;
    const double hi = 0.5 * phase.c2 * t * t + kappa0 * t;
    if (k < lo - 1e-9 || k > hi + 1e-9) out.primitive_bracketed = false;

    const double fd = (phase.kappa(t + delta) - phase.kappa(t - delta)) / (2.0 * delta);
    out.worst_fd_error = std::max(out.worst_fd_error, std::abs(fd - d));
  }
  if (out.worst_fd_error > 1e-4) out.derivative_consistent = false;
  return out;
}

}  // namespace homog
