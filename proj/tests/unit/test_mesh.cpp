#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "shapeflow/error.hpp"
#include "shapeflow/generators.hpp"
#include "shapeflow/mesh.hpp"
#include "shapeflow/mesh_io.hpp"

using namespace shapeflow;
using namespace shapeflow::mesh;

namespace {

constexpr double kPi = std::numbers::pi;

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "shapeflow_test_mesh";
  std::filesystem::create_directories(p);
  return p;
}

// regular n-gon fan around the origin
SimplicialMesh2D ngon(int n) {
  std::vector<Vec2> x{{0.0, 0.0}};
  std::vector<Triangle> t;
  for (int i = 0; i < n; ++i) x.emplace_back(std::cos(2 * kPi * i / n), std::sin(2 * kPi * i / n));
  for (int i = 0; i < n; ++i) t.push_back({0, 1 + i, 1 + (i + 1) % n});
  return SimplicialMesh2D(x, t);
}

Vec2 rotate(const Vec2& p, double a) {
  return Vec2(std::cos(a) * p.x() - std::sin(a) * p.y(), std::sin(a) * p.x() + std::cos(a) * p.y());
}

}  // namespace

TEST_CASE("boundary of the unit square is one counterclockwise loop") {
  const auto m = unit_square(4);
  CHECK(m.boundary_loops().size() == 1);
  CHECK(m.boundary_edges().size() == 16);
  // each boundary edge belongs to exactly one triangle, and that triangle contains it
  for (std::size_t e = 0; e < m.boundary_edges().size(); ++e) {
    const auto& s = m.boundary_edges()[e];
    const auto& tri = m.triangles()[m.boundary_edge_triangle()[e]];
    int hits = 0;
    for (int k = 0; k < 3; ++k) hits += (tri[k] == s[0] && tri[(k + 1) % 3] == s[1]);
    CHECK(hits == 1);
  }
  // loop is closed
  const auto& loop = m.boundary_loops()[0];
  for (std::size_t i = 0; i < loop.size(); ++i)
    CHECK(m.boundary_edges()[loop[i]][1] == m.boundary_edges()[loop[(i + 1) % loop.size()]][0]);
}

TEST_CASE("holes run clockwise and carry obstacle markers") {
  const auto m = rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.05);
  CHECK(m.boundary_loops().size() == 2);
  REQUIRE(m.has_markers());
  const auto n = facet_normals(m);
  for (std::size_t e = 0; e < n.size(); ++e) {
    const Vec2 mid = 0.5 * (m.vertices()[m.boundary_edges()[e][0]] + m.vertices()[m.boundary_edges()[e][1]]);
    if (m.boundary_markers()[e] == kObstacle) {
      // outward from the fluid = pointing into the obstacle, toward the origin
      CHECK(n[e].dot(mid) < 0.0);
    } else {
      CHECK(n[e].dot(mid - Vec2(0.5, 0.0)) > 0.0);
    }
  }
  int inlet = 0, outlet = 0;
  for (int mk : m.boundary_markers()) {
    inlet += mk == kInlet;
    outlet += mk == kOutlet;
  }
  CHECK(inlet == 20);
  CHECK(outlet == 20);
}

TEST_CASE("facet normals") {
  SUBCASE("axis-aligned bottom edge of the unit square points down") {
    const auto m = unit_square(1);
    const auto n = facet_normals(m);
    bool found = false;
    for (std::size_t e = 0; e < n.size(); ++e) {
      const auto& s = m.boundary_edges()[e];
      if (m.vertices()[s[0]] == Vec2(0, 0) && m.vertices()[s[1]] == Vec2(1, 0)) {
        found = true;
        CHECK(n[e].x() == doctest::Approx(0.0));
        CHECK(n[e].y() == doctest::Approx(-1.0));
      }
    }
    CHECK(found);
  }
  SUBCASE("regular polygon normals point outward and have unit length") {
    const auto m = ngon(37);
    const auto n = facet_normals(m);
    for (std::size_t e = 0; e < n.size(); ++e) {
      const Vec2 mid = 0.5 * (m.vertices()[m.boundary_edges()[e][0]] + m.vertices()[m.boundary_edges()[e][1]]);
      CHECK(mid.dot(n[e]) > 0.0);
      CHECK(std::abs(n[e].norm() - 1.0) < 1e-12);
    }
  }
  SUBCASE("icosphere triangle normals are within 5 degrees of radial") {
    const auto s = icosphere(1.0, 2);
    const auto n = facet_normals(s);
    for (int t = 0; t < s.num_triangles(); ++t) {
      const auto& tri = s.triangles()[t];
      const Vec3 c = (s.vertices()[tri[0]] + s.vertices()[tri[1]] + s.vertices()[tri[2]]).normalized();
      const double ang = std::acos(std::clamp(c.dot(n[t]), -1.0, 1.0)) * 180.0 / kPi;
      CHECK(ang < 5.0);
      CHECK(std::abs(n[t].norm() - 1.0) < 1e-12);
    }
  }
  SUBCASE("degenerate boundary edge is reported") {
    std::vector<Vec3> x{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CHECK_THROWS_AS(SurfaceMesh3D(x, {{0, 1, 1}}), GeometryError);
  }
}

TEST_CASE("apply_flow_map") {
  const auto m = disk(1.0, 6, 6.0);
  SUBCASE("zero velocity is the identity") {
    const auto out = apply_flow_map(m, std::vector<Vec2>(m.num_vertices(), Vec2::Zero()), 0.3);
    CHECK(out.vertices() == m.vertices());
    CHECK(out.triangles() == m.triangles());
  }
  SUBCASE("rigid translation shifts every vertex") {
    const auto out = apply_flow_map(m, std::vector<Vec2>(m.num_vertices(), Vec2(1, 0)), 0.5);
    for (int i = 0; i < m.num_vertices(); ++i) CHECK((out.vertices()[i] - m.vertices()[i] - Vec2(0.5, 0)).norm() < 1e-15);
    CHECK(out.triangles() == m.triangles());
    CHECK(out.boundary_edges() == m.boundary_edges());
  }
  SUBCASE("shrinking past the origin inverts elements") {
    std::vector<Vec2> v;
    for (const auto& p : m.vertices()) v.push_back(-p);
    try {
      (void)apply_flow_map(m, v, 2.0);
      FAIL("expected inversion");
    } catch (const InversionError& e) {
      CHECK(e.elements().size() == static_cast<std::size_t>(m.num_triangles()));
    }
  }
}

TEST_CASE("enclosed measure") {
  CHECK(enclosed_measure(unit_square(5)) == doctest::Approx(1.0).epsilon(1e-14));
  for (int n : {8, 64, 512}) CHECK(enclosed_measure(ngon(n)) == doctest::Approx(0.5 * n * std::sin(2 * kPi / n)).epsilon(1e-13));
  CHECK(std::abs(enclosed_measure(icosphere(1.0, 3)) / (4.0 * kPi / 3.0) - 1.0) < 0.01);
  CHECK_THROWS_AS(enclosed_measure(spherical_cap(1.0, 1.0, 4, 6.0)), GeometryError);

  // rigid motion
  const auto m = l_shape(6);
  std::vector<Vec2> x;
  for (const auto& p : m.vertices()) x.push_back(rotate(p, 0.7) + Vec2(3.0, -2.0));
  const auto moved = m.with_vertices(x);
  CHECK(std::abs(enclosed_measure(moved) - enclosed_measure(m)) < 1e-12);
}

TEST_CASE("quality report") {
  SUBCASE("equilateral triangle") {
    SimplicialMesh2D m({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}, {{0, 1, 2}});
    const auto q = quality_report(m);
    CHECK(q.min_angle == doctest::Approx(60.0));
    CHECK(q.max_aspect_ratio == doctest::Approx(1.0));
  }
  SUBCASE("right isoceles triangle") {
    SimplicialMesh2D m({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
    CHECK(quality_report(m).min_angle == doctest::Approx(45.0));
  }
  SUBCASE("structured square has diagonal/side edge ratio") {
    const auto q = quality_report(unit_square(7));
    CHECK(q.edge_length_ratio == doctest::Approx(std::sqrt(2.0)));
    CHECK(q.min_area_ratio == doctest::Approx(1.0));
  }
  SUBCASE("min angle invariant under rigid motion and scaling") {
    const auto m = disk(1.0, 5, 6.3);
    std::vector<Vec2> x;
    for (const auto& p : m.vertices()) x.push_back(3.5 * rotate(p, 1.1) + Vec2(-1, 4));
    CHECK(quality_report(m.with_vertices(x)).min_angle == doctest::Approx(quality_report(m).min_angle).epsilon(1e-10));
  }
  SUBCASE("metric ranges") {
    const auto q = quality_report(disk_with_triangles(1.0, 2842));
    CHECK(q.min_angle > 0.0);
    CHECK(q.min_angle <= 60.0);
    CHECK(q.max_aspect_ratio >= 1.0);
    CHECK(q.edge_length_ratio >= 1.0);
    CHECK(q.min_area_ratio > 0.0);
    CHECK(q.min_area_ratio <= 1.0);
  }
  SUBCASE("empty mesh") { CHECK_THROWS_AS(quality_report(SimplicialMesh2D()), GeometryError); }
}

TEST_CASE("OFF and CSV round trips") {
  const auto dir = temp_dir();
  const auto m = unit_square(3);
  write_off(dir / "square.off", m);
  const auto r = read_off_2d(dir / "square.off");
  CHECK(r.triangles() == m.triangles());
  for (int i = 0; i < m.num_vertices(); ++i) CHECK((r.vertices()[i] - m.vertices()[i]).norm() < 1e-12);

  const auto h = rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.05);
  write_node_ele(dir / "hole", h);
  const auto hr = read_node_ele(dir / "hole");
  CHECK(hr.triangles() == h.triangles());
  CHECK(hr.boundary_markers() == h.boundary_markers());

  const auto s = icosphere(2.0, 1);
  write_off(dir / "sphere.off", s);
  const auto sr = read_off_surface(dir / "sphere.off");
  CHECK(sr.triangles() == s.triangles());
  for (int i = 0; i < s.num_vertices(); ++i) CHECK((sr.vertices()[i] - s.vertices()[i]).norm() < 1e-12);
}

TEST_CASE("OFF parse errors carry the line number") {
  const auto path = temp_dir() / "bad.off";
  {
    std::ofstream out(path);
    out << "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n";
  }
  try {
    (void)read_off_2d(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 6);
  }
  {
    std::ofstream out(path);
    out << "PLY\n";
  }
  CHECK_THROWS_AS(read_off_2d(path), ParseError);
}

TEST_CASE("clockwise OFF triangles are flipped on read") {
  const auto path = temp_dir() / "cw.off";
  {
    std::ofstream out(path);
    out << "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 2 1\n";
  }
  const auto m = read_off_2d(path);
  CHECK(m.signed_area(0) > 0.0);
}

TEST_CASE("shipped reconstruction disk has 2842 triangles") {
  const auto m = read_off_2d(std::filesystem::path(SHAPEFLOW_DATA_DIR) / "disk_2842.off");
  CHECK(m.num_triangles() == 2842);
  CHECK(std::abs(enclosed_measure(m) - kPi) < 0.02);
}

TEST_CASE("surface invariants") {
  const auto cap = spherical_cap(1.0, 0.8, 6, 6.0);
  CHECK_FALSE(cap.is_closed());
  std::vector<int> from_edges;
  for (const auto& e : cap.boundary_edges()) from_edges.insert(from_edges.end(), {e[0], e[1]});
  std::sort(from_edges.begin(), from_edges.end());
  from_edges.erase(std::unique(from_edges.begin(), from_edges.end()), from_edges.end());
  CHECK(from_edges == cap.boundary_vertices());
  // cap normals point away from the sphere centre
  for (const auto& n : facet_normals(cap)) CHECK(n.z() > 0.0);
  CHECK(icosphere(1.0, 2).is_closed());
}
