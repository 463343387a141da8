#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/generators.hpp"
#include "shapeflow/linalg.hpp"

using namespace shapeflow;
using namespace shapeflow::linalg;

namespace {

SpMat diag(std::initializer_list<double> d) {
  TripletAssembler a(static_cast<int>(d.size()), static_cast<int>(d.size()));
  int i = 0;
  for (double v : d) a.add(i, i, v), ++i;
  return a.build();
}

SpMat dirichlet_laplacian(const mesh::SimplicialMesh2D& m, SpMat& mass) {
  const auto fixed = m.boundary_vertex_mask();
  std::vector<int> free_idx;
  for (int i = 0; i < m.num_vertices(); ++i)
    if (!fixed[i]) free_idx.push_back(i);
  std::vector<int> map(m.num_vertices(), -1);
  for (std::size_t k = 0; k < free_idx.size(); ++k) map[free_idx[k]] = static_cast<int>(k);
  auto restrict_ = [&](const SpMat& a) {
    TripletAssembler r(static_cast<int>(free_idx.size()), static_cast<int>(free_idx.size()));
    for (int c = 0; c < a.outerSize(); ++c)
      for (SpMat::InnerIterator it(a, c); it; ++it)
        if (map[it.row()] >= 0 && map[it.col()] >= 0) r.add(map[it.row()], map[it.col()], it.value());
    return r.build();
  };
  mass = restrict_(fem::mass_matrix(m));
  return restrict_(fem::stiffness_matrix(m));
}

}  // namespace

TEST_CASE("solve_spd small systems") {
  SparseSystem id{diag({1, 1, 1}), Symmetry::kSpd};
  const Vec b = Vec::LinSpaced(3, -1.0, 2.0);
  CHECK((solve_spd(id, b) - b).norm() < 1e-15);

  SparseSystem d{diag({1, 2, 4}), Symmetry::kSpd};
  const Vec rhs = (Vec(3) << 1, 2, 4).finished();
  CHECK((solve_spd(d, rhs) - Vec::Ones(3)).norm() < 1e-14);

  SparseSystem indefinite{diag({1, -1}), Symmetry::kSpd};
  CHECK_THROWS_AS(solve_spd(indefinite, Vec::Ones(2)), SolverError);
}

TEST_CASE("solve_spd on a P1 manufactured problem") {
  // -Laplace u + u = f with u = cos(pi x) cos(pi y): natural boundary conditions hold exactly
  const double pi = std::numbers::pi;
  auto exact = [pi](const Vec2& p) { return std::cos(pi * p.x()) * std::cos(pi * p.y()); };
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    const auto m = mesh::unit_square(n);
    SparseSystem a{fem::stiffness_matrix(m) + fem::mass_matrix(m), Symmetry::kSpd};
    const Vec b = fem::load_vector(m, [&](const Vec2& p) { return (2 * pi * pi + 1) * exact(p); });
    const Vec u = solve_spd(a, b);
    CHECK((a.matrix * u - b).norm() <= 1e-10 * b.norm());
    Vec e(m.num_vertices());
    for (int i = 0; i < m.num_vertices(); ++i) e[i] = u[i] - exact(m.vertices()[i]);
    const double err = std::sqrt(fem::l2_norm_squared(m, e));
    if (prev > 0.0) CHECK(std::log2(prev / err) > 1.9);
    prev = err;
  }
}

TEST_CASE("CG energy decreases monotonically") {
  const auto m = mesh::disk(1.0, 8, 6.3);
  SparseSystem a{fem::stiffness_matrix(m) + fem::mass_matrix(m), Symmetry::kSpd};
  const Vec b = fem::load_vector(m, [](const Vec2& p) { return 1.0 + p.x() * p.x() - std::sin(3 * p.y()); });
  const CgResult r = conjugate_gradient(a, b);
  CHECK(r.residual <= 1e-10);
  for (std::size_t i = 1; i < r.energy.size(); ++i) CHECK(r.energy[i] <= r.energy[i - 1] + 1e-14 * std::abs(r.energy[i - 1]));
  CHECK((r.x - solve_spd(a, b)).norm() < 1e-8 * r.x.norm());
}

TEST_CASE("solve_saddle") {
  SUBCASE("3x3 hand solve") {
    TripletAssembler bt(1, 2);
    bt.add(0, 0, 1.0);
    const auto s = solve_saddle(diag({1, 1}), bt.build(), Vec::Zero(2), Vec::Ones(1));
    CHECK(s.primal[0] == doctest::Approx(1.0));
    CHECK(s.primal[1] == doctest::Approx(0.0));
    CHECK(s.multiplier[0] == doctest::Approx(-1.0));
  }
  SUBCASE("zero data gives zero solution") {
    TripletAssembler bt(1, 2);
    bt.add(0, 1, 2.0);
    const auto s = solve_saddle(diag({3, 1}), bt.build(), Vec::Zero(2), Vec::Zero(1));
    CHECK(s.primal.norm() == 0.0);
    CHECK(s.multiplier.norm() == 0.0);
  }
  SUBCASE("empty constraint row") {
    TripletAssembler bt(2, 2);
    bt.add(0, 0, 1.0);
    CHECK_THROWS_AS(solve_saddle(diag({1, 1}), bt.build(), Vec::Zero(2), Vec::Ones(2)), SolverError);
  }
  SUBCASE("constraint rows are met as tightly as primal rows") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    const int n = 30, m = 6;
    Mat kd = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) kd(i, i) = 2.0, kd(i, (i + 1) % n) = kd((i + 1) % n, i) = -1.0;  // singular ring Laplacian
    TripletAssembler bt(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) bt.add(i, j, g(rng));
    Vec f(n), c(m);
    for (auto& v : f) v = g(rng);
    for (auto& v : c) v = g(rng);
    const SpMat b = bt.build();
    const auto s = solve_saddle(kd.sparseView(), b, f, c);
    CHECK((b * s.primal - c).norm() <= 1e-9 * c.norm());
    CHECK((kd * s.primal + b.transpose() * s.multiplier - f).norm() <= 1e-9 * f.norm());
  }
}

TEST_CASE("generalized_eigs") {
  SUBCASE("diagonal examples") {
    auto e = generalized_eigs(diag({1, 2, 3}), diag({1, 1, 1}), 2);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(2.0));
    e = generalized_eigs(diag({2, 2}), diag({1, 2}), 2);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(2.0));
    CHECK_THROWS_AS(generalized_eigs(diag({1, 2}), diag({1, 1}), 3), SolverError);
  }
  SUBCASE("Dirichlet Laplacian on the unit square approaches 2 pi^2") {
    const double target = 2 * std::numbers::pi * std::numbers::pi;
    double prev_err = 1e9;
    for (int n : {8, 16, 32}) {
      SpMat mass;
      const SpMat k = dirichlet_laplacian(mesh::unit_square(n), mass);
      const auto e = generalized_eigs(k, mass, 3);
      const double err = std::abs(e.values[0] - target);
      CHECK(err < prev_err);
      prev_err = err;
      // M-orthonormal and small residuals
      const Mat g = e.vectors.transpose() * (mass * e.vectors);
      CHECK((g - Mat::Identity(3, 3)).norm() < 1e-10);
      for (int j = 0; j < 3; ++j) {
        const Vec x = e.vectors.col(j);
        CHECK((k * x - e.values[j] * (mass * x)).norm() / x.norm() <= 1e-8);
        CHECK(x.dot(k * x) / x.dot(mass * x) == doctest::Approx(e.values[j]).epsilon(1e-10));
      }
      for (int j = 1; j < 3; ++j) CHECK(e.values[j] >= e.values[j - 1]);
    }
    CHECK(prev_err / target < 0.02);
  }
  SUBCASE("invariant under symmetric permutation") {
    SpMat mass;
    const SpMat k = dirichlet_laplacian(mesh::disk(1.0, 6, 6.3), mass);
    const int n = static_cast<int>(k.rows());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = (i * 7 + 3) % n;
    if (std::gcd(7, n) != 1) std::iota(perm.rbegin(), perm.rend(), 0);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(n);
    for (int i = 0; i < n; ++i) p.indices()[i] = perm[i];
    const SpMat kp = (p * k * p.transpose()).eval(), mp = (p * mass * p.transpose()).eval();
    const auto a = generalized_eigs(k, mass, 4), b = generalized_eigs(kp, mp, 4);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(a.values[j] - b.values[j]) <= 1e-8 * a.values[j]);
  }
}

TEST_CASE("Dirichlet elimination keeps symmetry") {
  const auto m = mesh::unit_square(4);
  SpMat a = fem::stiffness_matrix(m) + fem::mass_matrix(m);
  Vec b = Vec::Ones(a.rows());
  const auto fixed = m.boundary_vertex_mask();
  Vec g = Vec::Zero(a.rows());
  for (int i = 0; i < a.rows(); ++i) g[i] = m.vertices()[i].x();
  apply_dirichlet(a, b, fixed, g);
  CHECK(SparseSystem{a, Symmetry::kSpd}.asymmetry() < 1e-14);
  const Vec u = solve_spd({a, Symmetry::kSpd}, b);
  for (int i = 0; i < a.rows(); ++i)
    if (fixed[i]) CHECK(u[i] == doctest::Approx(g[i]));
}
