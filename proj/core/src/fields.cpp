#include "homog/fields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homog {

ScalarField ScalarField::zero() {
  ScalarField f;
  f.eval = [](Vec2) { return 0.0; };
  f.name = "zero";
  return f;
}

ScalarField ScalarField::constant(double value) {
  ScalarField f;
  f.eval = [value](Vec2) { return value; };
  f.name = "constant";
  f.params = {value};
  return f;
}

ScalarField ScalarField::sine_product(double amplitude) {
  ScalarField f;
  f.eval = [amplitude](Vec2 x) {
    return amplitude * std::sin(std::numbers::pi * x.x) * std::sin(std::numbers::pi * x.y);
  };
  f.name = "sine-product";
  f.params = {amplitude};
  return f;
}

ScalarField ScalarField::bump(double amplitude) {
  ScalarField f;
  f.eval = [amplitude](Vec2 x) {
    return 16.0 * amplitude * x.x * (1.0 - x.x) * x.y * (1.0 - x.y);
  };
  f.name = "bump";
  f.params = {amplitude};
  return f;
}

ScalarField ScalarField::by_name(const std::string& name, const std::vector<double>& params) {
  auto param = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  if (name == "zero") return zero();
  if (name == "constant") return constant(param(0, 1.0));
  if (name == "sine-product") return sine_product(param(0, 1.0));
  if (name == "bump") return bump(param(0, 1.0));
  throw std::invalid_argument("unknown scalar field '" + name + "'");
}

}  // namespace homog
