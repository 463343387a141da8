#include "shapeflow/generators.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "shapeflow/error.hpp"

namespace shapeflow::mesh {

namespace {

constexpr double kPi = std::numbers::pi;

// Grid of (nx+1)*(ny+1) nodes; cells for which keep(i,j) is false are skipped
// and unused nodes dropped.
struct GridBuilder {
  double x0, y0, hx, hy;
  int nx, ny;

  template <class Keep>
  SimplicialMesh2D build(Keep keep) const {
    std::vector<int> id((nx + 1) * (ny + 1), -1);
    std::vector<Vec2> x;
    auto node = [&](int i, int j) {
      int& k = id[j * (nx + 1) + i];
      if (k < 0) {
        k = static_cast<int>(x.size());
        x.emplace_back(x0 + i * hx, y0 + j * hy);
      }
      return k;
    };
    std::vector<Triangle> tris;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (!keep(i, j)) continue;
        const int a = node(i, j), b = node(i + 1, j), c = node(i + 1, j + 1), d = node(i, j + 1);
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      }
    }
    return SimplicialMesh2D(std::move(x), std::move(tris));
  }
};

struct PolarTemplate {
  std::vector<Vec2> x;  // unit disk
  std::vector<Triangle> tris;
};

int ring_count(int k, double density) { return std::max(3, static_cast<int>(std::lround(density * k))); }

PolarTemplate polar_template(int rings, double density) {
  if (rings < 1 || density <= 0.0) throw GeometryError("disk: need rings >= 1 and density > 0");
  PolarTemplate t;
  t.x.emplace_back(0.0, 0.0);
  std::vector<int> start{0}, count{1};
  for (int k = 1; k <= rings; ++k) {
    const int n = ring_count(k, density);
    const double r = static_cast<double>(k) / rings;
    start.push_back(static_cast<int>(t.x.size()));
    count.push_back(n);
    for (int j = 0; j < n; ++j) {
      const double phi = 2.0 * kPi * j / n;
      t.x.emplace_back(r * std::cos(phi), r * std::sin(phi));
    }
  }
  for (int j = 0; j < count[1]; ++j) t.tris.push_back({0, start[1] + j, start[1] + (j + 1) % count[1]});
  for (int k = 2; k <= rings; ++k) {
    const int ni = count[k - 1], no = count[k];
    int i = 0, j = 0;
    auto in = [&](int a) { return start[k - 1] + a % ni; };
    auto out = [&](int a) { return start[k] + a % no; };
    while (i < ni || j < no) {
      // advance whichever ring has the smaller next angle
      const double ti = static_cast<double>(i + 1) / ni, to = static_cast<double>(j + 1) / no;
      if (j < no && (i >= ni || to <= ti)) {
        t.tris.push_back({in(i), out(j), out(j + 1)});
        ++j;
      } else {
        t.tris.push_back({in(i), out(j), in(i + 1)});
        ++i;
      }
    }
  }
  return t;
}

}  // namespace

SimplicialMesh2D rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0)) throw GeometryError("rectangle: bad extents");
  GridBuilder g{x0, y0, (x1 - x0) / nx, (y1 - y0) / ny, nx, ny};
  return g.build([](int, int) { return true; });
}

SimplicialMesh2D unit_square(int n) { return rectangle(0.0, 1.0, 0.0, 1.0, n, n); }

SimplicialMesh2D disk(double radius, int rings, double density) {
  PolarTemplate t = polar_template(rings, density);
  for (auto& p : t.x) p *= radius;
  return SimplicialMesh2D(std::move(t.x), std::move(t.tris));
}

SimplicialMesh2D disk_with_triangles(double radius, int triangles) {
  // closest density to 2*pi keeps ring spacing and arc spacing equal
  int best_rings = -1;
  double best_density = 0.0;
  for (int rings = 2; rings <= 80; ++rings) {
    for (int m = 3000; m <= 9000; ++m) {
      const double s = m * 1e-3;
      long total = 0, outer = 0;
      for (int k = 1; k <= rings; ++k) total += 2 * (outer = ring_count(k, s));
      total -= outer;
      if (total == triangles && (best_rings < 0 || std::abs(s - 2 * kPi) < std::abs(best_density - 2 * kPi))) {
        best_rings = rings;
        best_density = s;
      }
    }
  }
  if (best_rings < 0) throw GeometryError("disk: no ring layout with " + std::to_string(triangles) + " triangles");
  return disk(radius, best_rings, best_density);
}

SimplicialMesh2D l_shape(int n) {
  if (n < 1) throw GeometryError("l_shape: n must be positive");
  const double h = 1.0 / n;
  GridBuilder g{-1.0, -1.0, h, h, 2 * n, 2 * n};
  return g.build([n](int i, int j) { return !(i >= n && j >= n); });
}

SimplicialMesh2D rectangle_with_hole(double x0, double x1, double y0, double y1, double hx0, double hx1,
                                     double hy0, double hy1, double h) {
  const int nx = static_cast<int>(std::lround((x1 - x0) / h));
  const int ny = static_cast<int>(std::lround((y1 - y0) / h));
  auto cell = [h](double a, double origin) { return static_cast<int>(std::lround((a - origin) / h)); };
  const int i0 = cell(hx0, x0), i1 = cell(hx1, x0), j0 = cell(hy0, y0), j1 = cell(hy1, y0);
  for (double v : {hx0 - x0, hx1 - x0, hy0 - y0, hy1 - y0})
    if (std::abs(v / h - std::round(v / h)) > 1e-9) throw GeometryError("rectangle_with_hole: hole not grid aligned");
  if (!(0 < i0 && i0 < i1 && i1 < nx && 0 < j0 && j0 < j1 && j1 < ny))
    throw GeometryError("rectangle_with_hole: hole must lie strictly inside");
  GridBuilder g{x0, y0, (x1 - x0) / nx, (y1 - y0) / ny, nx, ny};
  SimplicialMesh2D m = g.build([&](int i, int j) { return !(i >= i0 && i < i1 && j >= j0 && j < j1); });
  const double tol = 1e-9 * h;
  return m.with_marker_rule([=](const Vec2& a, const Vec2& b) {
    const Vec2 mid = 0.5 * (a + b);
    if (std::abs(mid.x() - x0) < tol) return static_cast<int>(kInlet);
    if (std::abs(mid.x() - x1) < tol) return static_cast<int>(kOutlet);
    if (std::abs(mid.y() - y0) < tol || std::abs(mid.y() - y1) < tol) return static_cast<int>(kWall);
    return static_cast<int>(kObstacle);
  });
}

SimplicialMesh2D channel(double x0, double x1, double y0, double y1, int nx, int ny) {
  const double tol = 1e-9 * std::min((x1 - x0) / nx, (y1 - y0) / ny);
  return rectangle(x0, x1, y0, y1, nx, ny).with_marker_rule([=](const Vec2& a, const Vec2& b) {
    const Vec2 mid = 0.5 * (a + b);
    if (std::abs(mid.x() - x0) < tol) return static_cast<int>(kInlet);
    if (std::abs(mid.x() - x1) < tol) return static_cast<int>(kOutlet);
    return static_cast<int>(kWall);
  });
}

SurfaceMesh3D icosphere(double radius, int refinements) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> x = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0}, {0, -1, p},  {0, 1, p},
                         {0, -1, -p}, {0, 1, -p}, {p, 0, -1},  {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                             {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& v : x) v.normalize();
  for (int r = 0; r < refinements; ++r) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      x.push_back((x[a] + x[b]).normalized());
      return mid[key] = static_cast<int>(x.size()) - 1;
    };
    std::vector<Triangle> g;
    g.reserve(4 * f.size());
    for (const auto& t : f) {
      const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
      g.push_back({t[0], a, c});
      g.push_back({t[1], b, a});
      g.push_back({t[2], c, b});
      g.push_back({a, b, c});
    }
    f = std::move(g);
  }
  for (auto& v : x) v *= radius;
  return SurfaceMesh3D(std::move(x), std::move(f));
}

SurfaceMesh3D spherical_cap(double radius, double theta0, int rings, double density) {
  if (!(theta0 > 0.0 && theta0 < kPi)) throw GeometryError("spherical_cap: theta0 must lie in (0, pi)");
  PolarTemplate t = polar_template(rings, density);
  std::vector<Vec3> x;
  x.reserve(t.x.size());
  for (const auto& p : t.x) {
    const double rho = p.norm(), phi = std::atan2(p.y(), p.x());
    const double th = rho * theta0;
    x.emplace_back(radius * std::sin(th) * std::cos(phi), radius * std::sin(th) * std::sin(phi),
                   radius * std::cos(th));
  }
  return SurfaceMesh3D(std::move(x), std::move(t.tris));
}

SurfaceMesh3D flat_disk(double radius, double height, int rings, double density) {
  PolarTemplate t = polar_template(rings, density);
  std::vector<Vec3> x;
  x.reserve(t.x.size());
  for (const auto& p : t.x) x.emplace_back(radius * p.x(), radius * p.y(), height);
  return SurfaceMesh3D(std::move(x), std::move(t.tris));
}

SurfaceMesh3D cylinder_patch(double radius, double half_angle, double length, int na, int nz) {
  SimplicialMesh2D param = rectangle(-half_angle, half_angle, 0.0, length, na, nz);
  std::vector<Vec3> x;
  x.reserve(param.vertices().size());
  for (const auto& p : param.vertices()) x.emplace_back(radius * std::cos(p.x()), radius * std::sin(p.x()), p.y());
  return SurfaceMesh3D(std::move(x), param.triangles());
}

std::vector<Vec2> nonuniform_circle(double radius, int n, double amp) {
  if (n < 3 || !(std::abs(amp) < 1.0)) throw GeometryError("nonuniform_circle: need n >= 3 and |amp| < 1");
  std::vector<Vec2> x;
  x.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * kPi * i / n;
    const double a = phi + amp * std::sin(phi);
    x.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
  return x;
}

std::vector<Vec2> ellipse_polygon(double a, double b, int n) {
  std::vector<Vec2> x;
  x.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * kPi * i / n;
    x.emplace_back(a * std::cos(phi), b * std::sin(phi));
  }
  return x;
}

namespace {

// Walks n chords of length len along the ellipse from phi = 0 and returns the
// parameter reached; the chord ends are appended to out when given.
double march_chords(double a, double b, double len, int n, std::vector<Vec2>* out) {
  auto at = [&](double t) { return Vec2(a * std::cos(t), b * std::sin(t)); };
  double t = 0.0;
  if (out) out->push_back(at(0.0));
  for (int i = 0; i < n; ++i) {
    double lo = t, hi = t + kPi;
    for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
      const double mid = 0.5 * (lo + hi);
      ((at(mid) - at(t)).norm() < len ? lo : hi) = mid;
    }
    t = 0.5 * (lo + hi);
    if (out && i + 1 < n) out->push_back(at(t));
  }
  return t;
}

}  // namespace

std::vector<Vec2> equilateral_ellipse_polygon(double a, double b, int n) {
  if (n < 3 || !(a > 0) || !(b > 0)) throw GeometryError("equilateral_ellipse_polygon: bad parameters");
  double lo = 0.0, hi = 2.0 * std::max(a, b);
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (march_chords(a, b, mid, n, nullptr) < 2.0 * kPi ? lo : hi) = mid;
  }
  std::vector<Vec2> x;
  x.reserve(n);
  march_chords(a, b, 0.5 * (lo + hi), n, &x);
  return x;
}

}  // namespace shapeflow::mesh
