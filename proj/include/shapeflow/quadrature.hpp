#pragma once

#include <array>
#include <vector>

namespace shapeflow::quad {

/// Barycentric point with weight; weights sum to 1 (multiply by element area).
struct TriPoint {
  std::array<double, 3> bary;
  double weight;
};

/// Point on [0,1] with weight; weights sum to 1 (multiply by segment length).
struct LinePoint {
  double s;
  double weight;
};

/// Symmetric triangle rules exact for polynomials of the given degree (1, 2 or 4).
const std::vector<TriPoint>& triangle_rule(int degree);
/// Gauss-Legendre rules with 1, 2 or 3 points.
const std::vector<LinePoint>& gauss_line(int points);

}  // namespace shapeflow::quad
