#pragma once

#include <vector>

#include "shapeflow/linalg.hpp"
#include "shapeflow/mesh.hpp"

namespace shapeflow::mdr {

using linalg::SpMat;
using linalg::Vec;
using mesh::SimplicialMesh2D;

struct MdrSolution {
  Vec w;                 ///< blocked 2N bulk velocity
  Vec kappa;             ///< nodal multiplier, zero off the boundary
  double energy = 0.0;   ///< 1/2 int |eps(w)|^2
  int gauge_rows = 0;    ///< rigid modes left free by the constraint and pinned by a gauge row
};

/// Minimal-deformation extension of nodal normal data d:
///   int eps(w):eps(eta) = int_Gamma kappa n.eta,   int_Gamma (w.n) phi = int_Gamma d phi.
/// n is the facet normal, so the constraint is assembled edge by edge.
MdrSolution solve_mdr(const SimplicialMesh2D& mesh, const Vec& normal_data);

/// Same system with the constraint right side given directly:
/// rhs[j] = int_Gamma (v.n) phi_j for some boundary velocity v.
MdrSolution solve_mdr_rhs(const SimplicialMesh2D& mesh, const Vec& rhs);

/// Normal data taken from a full vector field: rhs = normal_trace * v.
MdrSolution solve_mdr_velocity(const SimplicialMesh2D& mesh, const Vec& v);

/// Componentwise discrete harmonic field with the boundary entries of
/// `boundary_values` (blocked 2N) as Dirichlet data; interior entries are ignored.
Vec harmonic_extension(const SimplicialMesh2D& mesh, const Vec& boundary_values);

/// 1/2 int |eps(v)|^2
double deformation_energy(const SimplicialMesh2D& mesh, const Vec& v);

}  // namespace shapeflow::mdr
