#include "homog/coefficient.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homog {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

CoefficientField CoefficientField::identity() {
  CoefficientField c;
  c.eval = [](Vec2) { return SymMat2{1.0, 0.0, 1.0}; };
  c.ellipticity_lower = 1.0;
  c.ellipticity_upper = 1.0;
  c.name = "identity";
  return c;
}

CoefficientField CoefficientField::layered(double amplitude) {
  if (std::abs(amplitude) >= 2.0) throw std::invalid_argument("layered amplitude must satisfy |a| < 2");
  CoefficientField c;
  c.eval = [amplitude](Vec2 xi) {
    const double v = 2.0 + amplitude * std::sin(kTwoPi * xi.x);
    return SymMat2{v, 0.0, v};
  };
  c.ellipticity_lower = 2.0 - std::abs(amplitude);
  c.ellipticity_upper = 2.0 + std::abs(amplitude);
  c.name = "layered";
  c.params = {amplitude};
  return c;
}

CoefficientField CoefficientField::checker_smooth(double amplitude) {
  if (std::abs(amplitude) >= 2.0) throw std::invalid_argument("checker-smooth amplitude must satisfy |a| < 2");
  CoefficientField c;
  c.eval = [amplitude](Vec2 xi) {
    const double v = 2.0 + amplitude * std::sin(kTwoPi * xi.x) * std::sin(kTwoPi * xi.y);
    return SymMat2{v, 0.0, v};
  };
  c.ellipticity_lower = 2.0 - std::abs(amplitude);
  c.ellipticity_upper = 2.0 + std::abs(amplitude);
  c.name = "checker-smooth";
  c.params = {amplitude};
  return c;
}

CoefficientField CoefficientField::constant(SymMat2 value) {
  CoefficientField c;
  c.eval = [value](Vec2) { return value; };
  const double tr = value.a11 + value.a22;
  const double det = value.a11 * value.a22 - value.a12 * value.a12;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  c.ellipticity_lower = 0.5 * tr - disc;
  c.ellipticity_upper = 0.5 * tr + disc;
  c.name = "constant";
  c.params = {value.a11, value.a12, value.a22};
  return c;
}

CoefficientField CoefficientField::by_name(const std::string& name,
                                           const std::vector<double>& params) {
  auto param = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  if (name == "identity") return identity();
  if (name == "layered") return layered(param(0, 1.0));
  if (name == "checker-smooth") return checker_smooth(param(0, 1.0));
  throw std::invalid_argument("unknown coefficient '" + name + "'");
}

CoefficientCheck check_coefficient(const CoefficientField& coeff, int grid) {
  CoefficientCheck out;
  out.min_rayleigh = coeff.ellipticity_upper;
  out.max_rayleigh = coeff.ellipticity_lower;
  const int ndir = 8;
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const Vec2 xi{static_cast<double>(i) / grid, static_cast<double>(j) / grid};
      const SymMat2 a = coeff(xi);
      // Evaluator returns the symmetric storage; cross-check invariance
      // under argument shifts by integer vectors.
      for (const Vec2 shift : {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{-2.0, 3.0}}) {
        const SymMat2 b = coeff(xi + shift);
        const double defect = std::abs(a.a11 - b.a11) + std::abs(a.a12 - b.a12) +
                              std::abs(a.a22 - b.a22);
        if (defect > 1e-9 * (1.0 + std::abs(a.a11) + std::abs(a.a22))) out.periodic = false;
      }
      for (int d = 0; d < ndir; ++d) {
        const double th = std::numbers::pi * d / ndir;
        const Vec2 eta{std::cos(th), std::sin(th)};
        const double q = dot(eta, a.apply(eta));
        out.min_rayleigh = std::min(out.min_rayleigh, q);
        out.max_rayleigh = std::max(out.max_rayleigh, q);
      }
    }
  }
  const double tol = 1e-9 * (1.0 + coeff.ellipticity_upper);
  if (out.min_rayleigh < coeff.ellipticity_lower - tol) out.elliptic = false;
  if (out.max_rayleigh > coeff.ellipticity_upper + tol) out.elliptic = false;
  return out;
}

}  // namespace homog
