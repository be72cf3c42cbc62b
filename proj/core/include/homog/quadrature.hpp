#pragma once

#include <array>
#include <cstddef>

namespace homog {

/// Barycentric quadrature point with weight normalized so weights sum to 1
/// (multiply by the triangle area to integrate).
struct TriQuadPoint {
  double l1, l2, l3;
  double w;
};

/// Edge-midpoint rule, exact for quadratics. The default assembly rule.
inline constexpr std::array<TriQuadPoint, 3> kTriMidpoint3 = {{
    {0.5, 0.5, 0.0, 1.0 / 3.0},
    {0.0, 0.5, 0.5, 1.0 / 3.0},
    {0.5, 0.0, 0.5, 1.0 / 3.0},
}};

/// 25-point rule exact beyond degree 8, built as a Duffy-collapsed 5x5
/// Gauss product. Used by quadrature cross-checks and available as a
/// high-order assembly option.
std::array<TriQuadPoint, 25> tri_degree8_rule();

/// 2-point Gauss rule on an edge, abscissae in (0,1) along the edge.
struct EdgeQuadPoint {
  double t;
  double w;
};
std::array<EdgeQuadPoint, 2> edge_gauss2_rule();

enum class TriRule { midpoint3, degree8 };

}  // namespace homog
