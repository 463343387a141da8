#pragma once

#include <memory>
#include <vector>

#include "shapeflow/linalg.hpp"
#include "shapeflow/mesh.hpp"

namespace shapeflow::bgn {

using linalg::SpMat;
using linalg::Vec;

/// Polygonal curve on a point set. Points not touched by an edge are inactive,
/// so a bulk mesh boundary can be used with the mesh's own vertex numbering.
/// Outward normal of an edge = tangent rotated clockwise (counterclockwise loops).
struct Curve {
  std::vector<Vec2> points;
  std::vector<Segment> edges;
};

/// Closed polygon p0 -> p1 -> ... -> p0.
Curve closed_polygon(std::vector<Vec2> points);
/// Open chain p0 -> ... -> p_{n-1}.
Curve open_chain(std::vector<Vec2> points);
/// Boundary edges of the mesh (optionally masked), mesh vertex numbering.
Curve boundary_curve(const mesh::SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask = {});

/// Sorted point indices touched by an edge.
std::vector<int> active_nodes(const Curve& c);
/// A_ab = int grad_G phi_a . grad_G phi_b
SpMat curve_stiffness(const Curve& c);
SpMat curve_mass(const Curve& c);
/// omega_a = sum over incident edges of (L_e / 2) n_e: lumped int phi_a n.
std::vector<Vec2> lumped_normals(const Curve& c);
/// Enclosed area (shoelace over the edges).
double enclosed_area(const Curve& c);
double edge_length_ratio(const Curve& c);

/// ||w||_{L2(Gamma)} with the curve mass matrix; w blocked over c.points.
double adaptive_alpha(const Curve& c, const Vec& w);

/// H^0 from the second equation at tau = 0, by nodal least squares:
/// H_a omega_a = (A X)_a.  Circles get H = 1/R up to O(h^2).
Vec init_curvature(const Curve& c);

struct BgnSolution {
  Vec w_hat;  ///< blocked over c.points, zero at inactive points
  Vec H;      ///< zero at inactive points
};

/// Mass-lumped BGN system for the regularized boundary velocity:
///   omega_a . w_a + alpha (A H)_a = omega_a . wt_a
///   H_a omega_a - tau (A w)_a     = (A X)_a
/// Only the right side depends on wt, so one factorization serves any
/// number of solves.
class BgnSystem {
 public:
  BgnSystem(const Curve& c, double alpha, double tau);
  ~BgnSystem();
  BgnSystem(BgnSystem&&) noexcept;
  BgnSystem& operator=(BgnSystem&&) noexcept;

  BgnSolution solve(const Vec& w_tilde) const;
  double alpha() const { return alpha_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double alpha_;
};

BgnSolution bgn_regularize(const Curve& c, const Vec& w_tilde, double alpha, double tau);

/// Points moved by tau * w_hat.
Curve advance(const Curve& c, const Vec& w_hat, double tau);

}  // namespace shapeflow::bgn
