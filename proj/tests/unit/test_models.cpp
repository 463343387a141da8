#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/generators.hpp"
#include "shapeflow/models.hpp"

using namespace shapeflow;
using namespace shapeflow::models;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJ01 = 2.404825557695773;

std::vector<Vec2> field(const mesh::SimplicialMesh2D& m, const std::function<Vec2(const Vec2&)>& f) {
  std::vector<Vec2> v;
  for (const auto& p : m.vertices()) v.push_back(f(p));
  return v;
}

Vec2 dir_a(const Vec2& p) { return {std::cos(p.x() + 2.0 * p.y()), 0.5 * std::sin(p.x() - p.y())}; }
Vec2 dir_b(const Vec2& p) { return {p.x() * p.x() - p.y(), p.x() * p.y()}; }

// 1/2 int (u_h - u_d)^2 by a collapsed 4x4 Gauss product rule (exact to degree 7)
double objective_by_duffy(const mesh::SimplicialMesh2D& m, const Vec& u, const ReconData& d) {
  const double gp[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  double j = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    const Vec2 &a = m.vertices()[tri[0]], &b = m.vertices()[tri[1]], &c = m.vertices()[tri[2]];
    const double jac = 2.0 * m.signed_area(t);
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) {
        const double s = 0.5 * (gp[i] + 1.0), r = 0.5 * (gp[k] + 1.0);
        const double l1 = s * (1.0 - r), l2 = s * r, l0 = 1.0 - l1 - l2;
        const double w = 0.25 * gw[i] * gw[k] * s * jac;
        const Vec2 x = l0 * a + l1 * b + l2 * c;
        const double e = l0 * u[tri[0]] + l1 * u[tri[1]] + l2 * u[tri[2]] - d.u_d(x);
        j += 0.5 * e * e * w;
      }
  }
  return j;
}

// Union-jack grid on [-1,1]^2 pushed onto the unit disk. Alternating diagonals
// make the mesh symmetric under both axis reflections.
mesh::SimplicialMesh2D symmetric_disk(int n) {
  std::vector<Vec2> x;
  for (int j = 0; j <= 2 * n; ++j)
    for (int i = 0; i <= 2 * n; ++i) {
      const double a = -1.0 + static_cast<double>(i) / n, b = -1.0 + static_cast<double>(j) / n;
      x.emplace_back(a * std::sqrt(1.0 - 0.5 * b * b), b * std::sqrt(1.0 - 0.5 * a * a));
    }
  auto id = [n](int i, int j) { return j * (2 * n + 1) + i; };
  std::vector<Triangle> t;
  for (int j = 0; j < 2 * n; ++j)
    for (int i = 0; i < 2 * n; ++i) {
      const int p = id(i, j), q = id(i + 1, j), r = id(i + 1, j + 1), s = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        t.push_back({p, q, r});
        t.push_back({p, r, s});
      } else {
        t.push_back({p, q, s});
        t.push_back({q, r, s});
      }
    }
  return mesh::SimplicialMesh2D(std::move(x), std::move(t));
}

mesh::SimplicialMesh2D unit_area_disk(int rings) { return mesh::disk(1.0 / std::sqrt(kPi), rings, 6.3); }

}  // namespace

TEST_CASE("reconstruction state and adjoint") {
  SUBCASE("zero data") {
    ReconData d{[](const Vec2&) { return 0.0; }, [](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2(0, 0); }};
    const auto s = recon_solve(mesh::disk(1.0, 6, 6.3), d);
    CHECK(s.u.norm() == 0.0);
    CHECK(s.p.norm() == 0.0);
  }
  SUBCASE("manufactured sine solution converges at second order") {
    auto exact = [](const Vec2& p) { return std::sin(kPi * p.x()) * std::sin(kPi * p.y()); };
    ReconData d{[&](const Vec2& p) { return (2 * kPi * kPi + 1) * exact(p); }, exact,
                [](const Vec2&) { return Vec2(0, 0); }};
    double prev = 0.0;
    for (int n : {8, 16, 32}) {
      const auto m = mesh::unit_square(n);
      const auto s = recon_solve(m, d);
      Vec err(m.num_vertices());
      for (int i = 0; i < m.num_vertices(); ++i) err[i] = s.u[i] - exact(m.vertices()[i]);
      const double e = std::sqrt(fem::l2_norm_squared(m, err));
      if (prev > 0.0) CHECK(std::log2(prev / e) > 1.9);
      prev = e;
    }
  }
  SUBCASE("objective agrees with an independent quadrature") {
    const auto d = recon_preset("recon-case1");
    const auto m = mesh::disk(1.0, 10, 6.3);
    const auto s = recon_solve(m, d);
    CHECK(recon_objective(m, s.u, d) == doctest::Approx(objective_by_duffy(m, s.u, d)).epsilon(1e-12));
  }
  SUBCASE("presets") {
    const auto d = recon_preset("recon-case2");
    CHECK(d.u_d(Vec2(1.0, 0.0)) == doctest::Approx(0.0));
    CHECK(d.f(Vec2(0.0, 0.0)) == doctest::Approx(7.5));
    CHECK(recon_preset("recon-case1").f(Vec2(0.0, 0.0)) == doctest::Approx(7.1));
    CHECK_THROWS_AS(recon_preset("nope"), ConfigError);
  }
}

TEST_CASE("reconstruction derivative") {
  const auto d = recon_preset("recon-case1");
  SUBCASE("stationary residual gives zero functional") {
    const auto m = mesh::disk(1.0, 5, 6.3);
    ReconData lin{[](const Vec2& p) { return 3.0 + p.y(); }, [](const Vec2& p) { return p.x(); },
                  [](const Vec2&) { return Vec2(1, 0); }};
    ReconState s{Vec(m.num_vertices()), Vec::Zero(m.num_vertices())};
    for (int i = 0; i < m.num_vertices(); ++i) s.u[i] = m.vertices()[i].x();
    CHECK(recon_dJ(m, s, lin).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("finite-difference slope") {
    ReconstructionModel model(d);
    for (int rings : {5, 8}) {
      const auto m = mesh::disk(1.0, rings, 6.3);
      for (auto dir : {dir_a, dir_b}) {
        const auto r = fd_check(model, m, field(m, dir));
        CHECK(r.pass);
        CHECK(r.slope == doctest::Approx(1.0).epsilon(0.2));
        // the derivative is exact for the discrete objective: the smallest step is far better than the largest
        CHECK(r.rows.back().error < 1e-2 * r.rows.front().error);
      }
    }
  }
  SUBCASE("zero direction gives zero error") {
    ReconstructionModel model(d);
    const auto m = mesh::disk(1.0, 4, 6.3);
    const auto r = fd_check(model, m, std::vector<Vec2>(m.num_vertices(), Vec2(0, 0)));
    CHECK(r.pass);
    for (const auto& row : r.rows) CHECK(row.error == 0.0);
  }
  SUBCASE("translation is stationary on the symmetric target ellipse") {
    // a reflection-symmetric mesh, so the discrete optimum cannot drift sideways
    const auto disk = symmetric_disk(12);
    std::vector<Vec2> x;
    for (const auto& p : disk.vertices()) x.emplace_back(p.x() / std::sqrt(0.8), p.y() / 1.5);
    const auto m = disk.with_vertices(x);
    const auto s = recon_solve(m, d);
    const Vec g = recon_dJ(m, s, d);
    const Vec tx = mesh::pack(std::vector<Vec2>(m.num_vertices(), Vec2(1, 0)));
    const Vec ty = mesh::pack(std::vector<Vec2>(m.num_vertices(), Vec2(0, 1)));
    CHECK(std::abs(g.dot(tx)) <= 1e-5 * g.norm());
    CHECK(std::abs(g.dot(ty)) <= 1e-5 * g.norm());
  }
}

TEST_CASE("stale state is rejected") {
  ReconstructionModel model(recon_preset("recon-case1"));
  const auto m = mesh::disk(1.0, 4, 6.3);
  CHECK_THROWS_AS(model.objective(m), StaleStateError);
  model.solve(m);
  CHECK_NOTHROW(model.gradient(m));
  const auto moved = mesh::apply_flow_map(m, std::vector<Vec2>(m.num_vertices(), Vec2(0.01, 0)), 1.0);
  CHECK_THROWS_AS(model.gradient(moved), StaleStateError);
  CHECK_THROWS_AS(model.state(moved), StaleStateError);
}

TEST_CASE("drag model") {
  const auto m = mesh::rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.05);
  SUBCASE("zero flow gives a zero functional") {
    DragModel model(stokes::StokesProblem{});
    model.solve(m);
    CHECK(model.objective(m) == 0.0);
    CHECK(model.gradient(m).norm() == 0.0);
  }
  SUBCASE("derivative vanishes on the outer boundary") {
    DragModel model(drag_preset("drag-case1"));
    model.solve(m);
    const Vec g = model.gradient(m);
    const auto outer = outer_boundary_vertices(m);
    const int n = m.num_vertices();
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (outer[i]) {
        CHECK(g[i] == 0.0);
        CHECK(g[n + i] == 0.0);
        ++count;
      }
    CHECK(count == 2 * (40 + 20));
    CHECK(g.norm() > 0.0);
  }
  SUBCASE("finite-difference slope") {
    DragModel model(drag_preset("drag-case1"));
    // fields that vanish on the outer box
    auto bump = [](const Vec2& p) { return std::sin(kPi * (p.x() + 0.5) / 2.0) * std::cos(kPi * p.y()); };
    for (auto dir : {Vec2(1.0, 0.0), Vec2(0.2, 1.0)}) {
      const auto r = fd_check(model, m, field(m, [&](const Vec2& p) { return bump(p) * dir; }));
      CHECK(r.pass);
    }
  }
}

TEST_CASE("eigenvalue model") {
  SUBCASE("unit square approaches 2 pi^2") {
    double prev = 1e9;
    for (int n : {8, 16, 32}) {
      const auto s = eigen_solve(mesh::unit_square(n), 1);
      const double err = std::abs(s.values[0] - 2 * kPi * kPi);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 0.01 * 2 * kPi * kPi);
  }
  SUBCASE("unit-area disk approaches pi j01^2 with a double second eigenvalue") {
    const double target = kPi * kJ01 * kJ01;
    double prev = 1e9;
    EigenState s;
    mesh::SimplicialMesh2D m;
    for (int rings : {8, 16, 24}) {
      m = unit_area_disk(rings);
      s = eigen_solve(m, 3);
      const double err = std::abs(s.values[0] * mesh::enclosed_measure(m) - target);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 0.01 * target);
    CHECK(std::abs(s.values[2] - s.values[1]) < 1e-2 * s.values[1]);
    CHECK(eigen_cluster(s.values, 2, 1e-2) == std::vector<int>{1, 2});
    CHECK(eigen_cluster(s.values, 1, 1e-2) == std::vector<int>{0});
    // Rayleigh quotients
    const SpMat k = fem::stiffness_matrix(m), mm = fem::mass_matrix(m);
    for (int j = 0; j < 3; ++j) {
      const Vec u = s.vectors.col(j);
      CHECK(u.dot(k * u) / u.dot(mm * u) == doctest::Approx(s.values[j]).epsilon(1e-10));
    }
  }
  SUBCASE("rigid motions leave the eigenvalue unchanged") {
    const auto m = mesh::l_shape(4);
    const auto s = eigen_solve(m, 3);
    const Vec g = eigen_dJ(m, s, 1, 1e-2);
    CHECK(std::abs(g.dot(mesh::pack(std::vector<Vec2>(m.num_vertices(), Vec2(1, 0))))) <= 1e-8 * g.norm());
    CHECK(std::abs(g.dot(mesh::pack(field(m, [](const Vec2& p) { return Vec2(-p.y(), p.x()); }))) ) <= 1e-8 * g.norm());
    // dilation: lambda(s Omega) = lambda / s^2, so d lambda (x) = -2 lambda
    CHECK(g.dot(mesh::pack(field(m, [](const Vec2& p) { return p; }))) == doctest::Approx(-2.0 * s.values[0]).epsilon(1e-10));
  }
  SUBCASE("finite-difference slope on the square") {
    EigenvalueModel model(1, 1e-2);
    for (int n : {6, 10}) {
      const auto m = mesh::unit_square(n);
      for (auto dir : {dir_a, dir_b}) CHECK(fd_check(model, m, field(m, dir)).pass);
    }
  }
}

TEST_CASE("volume projection") {
  const auto m = mesh::disk(1.0, 6, 6.3);
  SUBCASE("constant normal speed is removed") {
    const Vec data = fem::boundary_load(m).cwiseSign();  // 1 on the boundary
    CHECK(volume_project(m, data).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("translation data is unchanged") {
    const auto nb = fem::normal_trace(m);
    // nodal normal speed of (1,0) via the lumped boundary mass
    const Vec flux = nb * mesh::pack(std::vector<Vec2>(m.num_vertices(), Vec2(1, 0)));
    const Vec lumped = fem::boundary_load(m);
    Vec data = Vec::Zero(m.num_vertices());
    for (int i = 0; i < data.size(); ++i)
      if (lumped[i] > 0) data[i] = flux[i] / lumped[i];
    CHECK((volume_project(m, data) - data).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("field projection zeroes the flux") {
    const Vec c = volume_gradient(m);
    const Vec w = mesh::pack(field(m, dir_b)) + mesh::pack(field(m, [](const Vec2& p) { return p; }));
    const Vec z = mesh::pack(field(m, [](const Vec2& p) { return p; }));
    const Vec pw = volume_project(w, z, c);
    CHECK(std::abs(c.dot(pw)) <= 1e-12 * mesh::boundary_length(m));
    // the area gradient is d|Omega|/dX: check against a difference quotient
    const auto v = field(m, dir_a);
    const double e = 1e-6;
    const double fd = (mesh::enclosed_measure(mesh::apply_flow_map(m, v, e)) -
                       mesh::enclosed_measure(mesh::apply_flow_map(m, v, -e))) / (2 * e);
    CHECK(c.dot(mesh::pack(v)) == doctest::Approx(fd).epsilon(1e-8));
  }
}
