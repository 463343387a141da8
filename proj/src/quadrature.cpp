#include "shapeflow/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace shapeflow::quad {

namespace {

std::vector<TriPoint> make_degree4() {
  // 6-point Dunavant rule
  const double a1 = 0.445948490915965, w1 = 0.223381589678011;
  const double a2 = 0.091576213509771, w2 = 0.109951743655322;
  std::vector<TriPoint> r;
  for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
    const double b = 1.0 - 2.0 * a;
    r.push_back({{b, a, a}, w});
    r.push_back({{a, b, a}, w});
    r.push_back({{a, a, b}, w});
  }
  return r;
}

}  // namespace

const std::vector<TriPoint>& triangle_rule(int degree) {
  static const std::vector<TriPoint> d1{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0}};
  static const std::vector<TriPoint> d2{{{2.0 / 3, 1.0 / 6, 1.0 / 6}, 1.0 / 3},
                                        {{1.0 / 6, 2.0 / 3, 1.0 / 6}, 1.0 / 3},
                                        {{1.0 / 6, 1.0 / 6, 2.0 / 3}, 1.0 / 3}};
  static const std::vector<TriPoint> d4 = make_degree4();
  if (degree <= 1) return d1;
  if (degree == 2) return d2;
  if (degree <= 4) return d4;
  throw std::invalid_argument("triangle_rule: degree above 4 not available");
}

const std::vector<LinePoint>& gauss_line(int points) {
  static const std::vector<LinePoint> g1{{0.5, 1.0}};
  static const std::vector<LinePoint> g2{{0.5 - 0.5 / std::sqrt(3.0), 0.5}, {0.5 + 0.5 / std::sqrt(3.0), 0.5}};
  static const std::vector<LinePoint> g3{{0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18}, {0.5, 8.0 / 18},
                                         {0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18}};
  switch (points) {
    case 1: return g1;
    case 2: return g2;
    case 3: return g3;
    default: throw std::invalid_argument("gauss_line: 1 to 3 points");
  }
}

}  // namespace shapeflow::quad
