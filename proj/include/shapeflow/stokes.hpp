#pragma once

#include <functional>

#include "shapeflow/linalg.hpp"
#include "shapeflow/mesh.hpp"

namespace shapeflow::stokes {

using linalg::SpMat;
using linalg::Vec;
using mesh::SimplicialMesh2D;

/// MINI velocity space: P1 plus one cubic bubble 27 l1 l2 l3 per triangle.
/// Per component the vertex dofs come first, then one bubble per triangle;
/// the two components are blocked (x then y).
struct MiniSpace {
  int vertices = 0;
  int triangles = 0;

  int component_dofs() const { return vertices + triangles; }
  int velocity_dofs() const { return 2 * component_dofs(); }
  int vertex_dof(int v, int c) const { return c * component_dofs() + v; }
  int bubble_dof(int t, int c) const { return c * component_dofs() + vertices + t; }
};

/// a = mu int grad u : grad v on the velocity space, b = -int q div v with one
/// row per P1 pressure dof.
struct StokesBlocks {
  MiniSpace space;
  SpMat a;
  SpMat b;
};
StokesBlocks stokes_blocks(const SimplicialMesh2D& mesh, double mu);

struct StokesProblem {
  double mu = 1.0;
  Vec2 force{0.0, 0.0};  ///< constant body force
  std::function<Vec2(const Vec2&)> inflow = [](const Vec2&) { return Vec2(0.0, 0.0); };
};

struct StokesSolution {
  MiniSpace space;
  Vec velocity;  ///< MINI coefficients
  Vec pressure;  ///< nodal
  /// (A u + B^T p - F) on velocity dofs; nonzero only on Dirichlet rows.
  Vec reaction;
  std::vector<bool> dirichlet;  ///< per velocity dof
};

/// Velocity Dirichlet on every boundary edge except outlets: the inflow on
/// inlet nodes, zero on walls and the obstacle. Outlets carry the do-nothing
/// condition. Without outlet edges the pressure is fixed to zero mean.
/// Throws GeometryError if the mesh carries no boundary markers.
StokesSolution solve(const SimplicialMesh2D& mesh, const StokesProblem& problem);
/// Same operator with homogeneous Dirichlet data everywhere the state has it.
StokesSolution solve_homogeneous(const SimplicialMesh2D& mesh, const StokesProblem& problem);

/// Velocity gradient (rows = components) of a MINI field at a barycentric point.
Eigen::Matrix2d velocity_gradient(const SimplicialMesh2D& mesh, const MiniSpace& space, const Vec& u, int t,
                                  const std::array<double, 3>& bary);
/// Nodal P1 velocity (the bubbles vanish at vertices).
std::vector<Vec2> vertex_velocity(const MiniSpace& space, const Vec& u);

/// mu int |grad u|^2.
double dissipation(const SimplicialMesh2D& mesh, double mu, const MiniSpace& space, const Vec& u);
/// sum of u_i R_i over Dirichlet dofs, equal to the dissipation when f = 0.
double boundary_work(const StokesSolution& s);

/// Exact derivative of the discrete dissipation with respect to the vertex
/// positions, blocked 2N. Dirichlet values are held fixed, so the result is
/// only meaningful on vertices that do not carry inflow data.
Vec dissipation_gradient(const SimplicialMesh2D& mesh, const StokesProblem& problem, const StokesSolution& state);

}  // namespace shapeflow::stokes
