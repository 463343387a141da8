#pragma once

#include <functional>

#include <Eigen/Core>

#include "shapeflow/linalg.hpp"
#include "shapeflow/mesh.hpp"

namespace shapeflow::fem {

using linalg::Mat;
using linalg::SpMat;
using linalg::Vec;
using mesh::SimplicialMesh2D;
using mesh::SurfaceMesh3D;

/// Affine P1 data of one planar triangle: area and the constant gradients of
/// the three barycentric basis functions (one per row).
struct P1Element {
  double area;
  Eigen::Matrix<double, 3, 2> grad;
};
P1Element p1_element(const SimplicialMesh2D& mesh, int t);

/// Same for a surface triangle: gradients are tangential 3-vectors.
struct SurfaceElement {
  double area;
  Vec3 normal;
  Eigen::Matrix<double, 3, 3> grad;
};
SurfaceElement surface_element(const SurfaceMesh3D& mesh, int t);

/// Local P1 mass block area/12 * [[2,1,1],[1,2,1],[1,1,2]].
Eigen::Matrix3d local_mass(double area);

SpMat mass_matrix(const SimplicialMesh2D& mesh);
SpMat stiffness_matrix(const SimplicialMesh2D& mesh);
/// dim copies of a scalar matrix on the diagonal, blocked layout.
SpMat vector_block(const SpMat& scalar, int dim);
/// int eps(w):eps(eta) on the blocked vector P1 space.
SpMat strain_form(const SimplicialMesh2D& mesh);

/// P1 curve mass over boundary edges (N x N, zero rows off the boundary).
/// An optional per-edge mask restricts the integration.
SpMat boundary_mass(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask = {});
/// Normal-trace form: row j, column (a, c) holds sum_e n_{e,c} int_e phi_j phi_a.
SpMat normal_trace(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask = {});
/// int_Gamma phi_j over boundary edges.
Vec boundary_load(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask = {});

/// int f phi_j by the degree-4 rule.
Vec load_vector(const SimplicialMesh2D& mesh, const std::function<double(const Vec2&)>& f);
/// int u^2 for a P1 field.
double l2_norm_squared(const SimplicialMesh2D& mesh, const Vec& u);

SpMat surface_mass(const SurfaceMesh3D& mesh);
SpMat surface_stiffness(const SurfaceMesh3D& mesh);
/// int eps_G(w):eps_G(chi) with eps_G(v) = sym((grad v) P), blocked (x,y,z).
SpMat surface_strain_form(const SurfaceMesh3D& mesh);

/// Nodal averaged normal: L2 projection of facet normals, then renormalized.
std::vector<Vec3> project_normals(const SurfaceMesh3D& mesh);
/// H with int H psi = int div_G(nbar) psi (sum of principal curvatures).
Vec discrete_mean_curvature(const SurfaceMesh3D& mesh, const std::vector<Vec3>& nbar);

}  // namespace shapeflow::fem
