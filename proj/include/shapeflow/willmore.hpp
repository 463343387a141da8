#pragma once

#include <string>
#include <vector>

#include "shapeflow/linalg.hpp"
#include "shapeflow/mesh.hpp"

namespace shapeflow::willmore {

using linalg::SpMat;
using linalg::Vec;
using mesh::SurfaceMesh3D;

/// Surface patch with clamped boundary and a prescribed conormal.
///
/// mu_out is the outward conormal of the exterior surface along the hole
/// boundary, so a G1 fit means the patch's own outward conormal equals
/// -mu_out. It is stored per vertex and read only on boundary vertices.
struct SurfacePatch {
  SurfaceMesh3D surface;
  SurfaceMesh3D previous;          ///< equals surface before the first step
  std::vector<Vec3> mu_out;
  Vec H;                           ///< nodal mean curvature (sum of principal curvatures)
  Vec w;                           ///< last velocity, blocked (x,y,z), zero on the boundary
  std::vector<Vec3> previous_nbar; ///< averaged normal of `previous`
  double eps0 = 0.1;
  double tau = 0.01;
  int step = 0;
};

/// Patch at rest on `surface`: H from the averaged-normal divergence, w = 0.
SurfacePatch make_patch(SurfaceMesh3D surface, std::vector<Vec3> mu_out, double eps0 = 0.1, double tau = 0.01);

/// mu_out modes on a hole boundary point p:
///   "sphere": -cos(theta) r + sin(theta) z, theta the polar angle of p, r the
///             horizontal radial direction (conormal of the unit sphere with
///             the polar cap {polar angle < theta} removed);
///   "tilt":   -cos(t) r + sin(t) z with t = tilt_deg (t = 0 is the plane).
Vec3 mu_out_at(const Vec3& p, const std::string& mode, double tilt_deg);

/// Named fixtures, optionally suffixed ":rings":
///   "flat-disk", "hemisphere-hole": unit disk in z = 0 (the second name is
///       the same mesh, meant for mode "sphere");
///   "spherical-cap": polar cap of the unit sphere up to 60 degrees.
SurfacePatch make_fixture(const std::string& name, const std::string& mu_out_mode, double tilt_deg);

/// |grad_G nbar|^2 per triangle.
std::vector<double> normal_gradient_sq(const SurfaceMesh3D& mesh, const std::vector<Vec3>& nbar);

/// Curvature of `mesh` from int H chi = int grad id : grad(chi nbar) + int_boundary mu_out.nbar chi.
/// Closed surfaces have no boundary term; mu_out may then be empty.
Vec boundary_aware_curvature(const SurfaceMesh3D& mesh, const std::vector<Vec3>& nbar,
                             const std::vector<Vec3>& mu_out);

/// int H^2 with H = boundary_aware_curvature of the surface.
double willmore_energy(const SurfaceMesh3D& mesh, const std::vector<Vec3>& mu_out = {});

/// Largest angle (degrees) between the discrete outward conormal at a
/// boundary vertex and -mu_out. Zero for closed surfaces.
double conormal_misfit_deg(const SurfaceMesh3D& mesh, const std::vector<Vec3>& mu_out);

/// eps0/2 int_{previous} (w . nbar_previous)^2.
double kinetic_energy(const SurfacePatch& patch);

struct WillmoreRecord {
  int step = 0;
  double energy = 0.0;
  double kinetic = 0.0;
  double misfit_deg = 0.0;
  double velocity_norm = 0.0;  ///< max nodal |w|
};
WillmoreRecord record(const SurfacePatch& patch);

/// Assembled linear system of one step, unknowns [w interior x,y,z | kappa interior | H all].
struct StepSystem {
  SpMat matrix;
  Vec rhs;
  std::vector<int> interior;  ///< vertex ids of the interior nodes, in unknown order
};
StepSystem assemble_step(const SurfacePatch& patch);

/// One step: solves for (w, kappa, H), moves the patch by tau w.
/// Boundary vertices keep their coordinates bit for bit.
void willmore_step(SurfacePatch& patch);

struct StationaryRun {
  std::vector<WillmoreRecord> history;
  int steps = 0;
  bool converged = false;
};
/// Steps until the relative energy change stays below rel_tol for `window`
/// consecutive steps, or max_steps.
StationaryRun run_until_stationary(SurfacePatch& patch, double rel_tol, int window, int max_steps);

}  // namespace shapeflow::willmore
