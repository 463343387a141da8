#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/generators.hpp"
#include "shapeflow/stokes.hpp"

using namespace shapeflow;
using namespace shapeflow::stokes;
using linalg::Mat;

namespace {

Vec2 poiseuille(const Vec2& p) { return {-(p.y() - 0.5) * (p.y() + 0.5), 0.0}; }

StokesProblem channel_problem(double mu = 1.0) {
  StokesProblem pr;
  pr.mu = mu;
  pr.inflow = poiseuille;
  return pr;
}

// smallest nonzero sqrt eigenvalue of B A^-1 B^T against the pressure mass
double inf_sup(const mesh::SimplicialMesh2D& m) {
  const StokesBlocks blk = stokes_blocks(m, 1.0);
  const auto bnd = m.boundary_vertex_mask();
  std::vector<int> free_dofs;
  for (int c = 0; c < 2; ++c) {
    for (int v = 0; v < m.num_vertices(); ++v)
      if (!bnd[v]) free_dofs.push_back(blk.space.vertex_dof(v, c));
    for (int t = 0; t < m.num_triangles(); ++t) free_dofs.push_back(blk.space.bubble_dof(t, c));
  }
  const Mat a = Mat(blk.a), b = Mat(blk.b);
  const int nf = static_cast<int>(free_dofs.size());
  Mat af(nf, nf), bf(b.rows(), nf);
  for (int i = 0; i < nf; ++i) {
    bf.col(i) = b.col(free_dofs[i]);
    for (int j = 0; j < nf; ++j) af(i, j) = a(free_dofs[i], free_dofs[j]);
  }
  const Mat s = bf * af.llt().solve(bf.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(s, Mat(fem::mass_matrix(m)));
  return std::sqrt(es.eigenvalues()[1]);  // [0] is the constant pressure
}

double smooth_bump(const Vec2& p) {
  return std::sin(std::numbers::pi * (p.x() + 0.5) / 2.0) * std::cos(std::numbers::pi * p.y());
}

}  // namespace

TEST_CASE("MINI blocks") {
  const auto m = mesh::unit_square(3);
  const StokesBlocks blk = stokes_blocks(m, 2.0);
  CHECK(blk.space.velocity_dofs() == 2 * (16 + 18));
  CHECK(linalg::SparseSystem{blk.a}.asymmetry() < 1e-12);
  // constant velocities lie in the kernel of a and have zero divergence
  Vec ones = Vec::Zero(blk.space.velocity_dofs());
  for (int v = 0; v < 16; ++v) ones[blk.space.vertex_dof(v, 0)] = 1.0;
  CHECK(Vec(blk.a * ones).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(Vec(blk.b * ones).cwiseAbs().maxCoeff() < 1e-12);
  // b(x e_x, q) = -int q
  Vec lin = Vec::Zero(blk.space.velocity_dofs());
  for (int v = 0; v < 16; ++v) lin[blk.space.vertex_dof(v, 0)] = m.vertices()[v].x();
  CHECK(Vec(blk.b * lin).sum() == doctest::Approx(-1.0));
  CHECK_THROWS_AS(stokes_blocks(m, 0.0), Error);
}

TEST_CASE("Poiseuille channel") {
  const auto m = mesh::channel(0.0, 2.0, -0.5, 0.5, 32, 16);
  for (double mu : {1.0, 0.5}) {
    const StokesProblem pr = channel_problem(mu);
    const StokesSolution s = solve(m, pr);
    const double j = dissipation(m, mu, s.space, s.velocity);
    CHECK(j == doctest::Approx(2.0 * mu / 3.0).epsilon(0.02));
    // boundary-work identity
    CHECK(boundary_work(s) == doctest::Approx(j).epsilon(1e-8));
    // outflow profile and linear pressure 2 mu (2 - x)
    const auto v = vertex_velocity(s.space, s.velocity);
    double err = 0.0, perr = 0.0;
    for (int i = 0; i < m.num_vertices(); ++i) {
      const Vec2& x = m.vertices()[i];
      if (std::abs(x.x() - 2.0) < 1e-12) err = std::max(err, (v[i] - poiseuille(x)).norm());
      perr += std::abs(s.pressure[i] - 2.0 * mu * (2.0 - x.x())) / m.num_vertices();
    }
    CHECK(err < 5e-3);
    // mean pressure error against the range 4 mu; corner values converge slowest
    CHECK(perr < 0.01 * 4.0 * mu);
  }
}

TEST_CASE("zero inflow gives the zero solution") {
  const auto m = mesh::channel(0.0, 1.0, 0.0, 1.0, 6, 6);
  const StokesSolution s = solve(m, StokesProblem{});
  CHECK(s.velocity.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(s.pressure.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(dissipation(m, 1.0, s.space, s.velocity) == 0.0);
}

TEST_CASE("marker partition is required") {
  CHECK_THROWS_AS(solve(mesh::unit_square(4), channel_problem()), GeometryError);
}

TEST_CASE("obstacle benchmark solves with finite dissipation") {
  const auto m = mesh::rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.05);
  const StokesSolution s = solve(m, channel_problem());
  const double j = dissipation(m, 1.0, s.space, s.velocity);
  CHECK(std::isfinite(j));
  // the obstacle blocks part of the channel: more dissipation than plain Poiseuille flow
  CHECK(j > 2.0 / 3.0);
  CHECK(boundary_work(s) == doctest::Approx(j).epsilon(1e-8));
}

TEST_CASE("MINI inf-sup constant stays bounded under refinement") {
  std::vector<double> beta;
  for (int n : {4, 8, 16}) beta.push_back(inf_sup(mesh::unit_square(n)));
  for (double b : beta) CHECK(b > 0.15);
  CHECK(beta.back() > 0.7 * beta.front());
}

TEST_CASE("dissipation gradient matches central differences") {
  const auto m = mesh::rectangle_with_hole(-0.5, 1.5, -0.5, 0.5, -0.2, 0.2, -0.15, 0.15, 0.05);
  const int n = m.num_vertices();
  for (Vec2 force : {Vec2(0.0, 0.0), Vec2(0.3, -1.0)}) {
    StokesProblem pr = channel_problem();
    pr.force = force;
    const StokesSolution s = solve(m, pr);
    const Vec g = dissipation_gradient(m, pr, s);
    for (Vec2 dir : {Vec2(1.0, 0.0), Vec2(0.3, 1.0)}) {
      std::vector<Vec2> v(n);
      for (int i = 0; i < n; ++i) v[i] = smooth_bump(m.vertices()[i]) * dir;
      const double dj = g.dot(mesh::pack(v));
      auto j_at = [&](double e) {
        const auto me = mesh::apply_flow_map(m, v, e);
        const StokesSolution se = solve(me, pr);
        return dissipation(me, pr.mu, se.space, se.velocity);
      };
      const double eps = 1e-5;
      const double fd = (j_at(eps) - j_at(-eps)) / (2 * eps);
      CHECK(dj == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}
