#pragma once

#include <vector>

#include "shapeflow/linalg.hpp"
#include "shapeflow/mesh.hpp"

namespace shapeflow::models {
class ShapeModel;
}

namespace shapeflow::flow {

using linalg::SpMat;
using linalg::Vec;
using mesh::SimplicialMesh2D;

/// eta = c / (t + t0)
double damping(double t, double c, double t0);

struct FlowParams {
  double tau = 0.02;
  double eps0 = 1.0;
  double c = 1.0;
  double t0 = 1.0;
  /// eta = c for all t; with eps0 = 0 this is the classical H1 flow.
  bool constant_damping = false;

  double eta(double t) const;
  void validate() const;  ///< throws ConfigError
};

/// Lagrangian state of the time loop. Both meshes share connectivity and
/// vertex numbering, so a nodal vector on the previous mesh composed with
/// the flow map is the same dof vector on the current one.
struct FlowState {
  SimplicialMesh2D current;   ///< Omega^n
  SimplicialMesh2D previous;  ///< Omega^{n-1}
  Vec w_tilde;                ///< inertial velocity w~^n, computed on Omega^{n-1}
  Vec w;                      ///< mesh velocity w^n: Omega^n = (id + tau w^n)(Omega^{n-1})
  int step = 0;
  double time = 0.0;
};

/// Omega^{-1} = Omega^0, w~^0 = w^0 = 0, t = 0.
FlowState initial_state(const SimplicialMesh2D& mesh);

/// (eps0 / 2 tau)(M_n + M_{n-1}) + eta(t_n)(M_n + K_n), blocked 2N.
SpMat inertial_matrix(const FlowState& s, const FlowParams& p);
/// (eps0 / tau) M_{n-1} w~^n - g
Vec inertial_rhs(const FlowState& s, const FlowParams& p, const Vec& g);

struct StepConstraints {
  std::vector<bool> fixed;  ///< per vertex; w~ is held at zero there
  Vec volume_gradient;      ///< c with d|Omega|(v) = c . v; empty means unconstrained
};

/// Solves for w~^{n+1} on Omega^n. With a volume gradient c the result is
/// the minimizer of the step's quadratic form subject to c . w~ = 0,
/// i.e. w~ - (c . w~)/(c . z) z with z = A^{-1} c.
Vec inertial_step(const FlowState& s, const FlowParams& p, const Vec& g, const StepConstraints& cons = {});

/// Shifts Omega^n into Omega^{n-1}, moves the mesh by id + tau * mesh_velocity
/// and stores w~^{n+1}. Throws InversionError if an element flips.
FlowState advance(const FlowState& s, const FlowParams& p, const Vec& w_tilde_next, const Vec& mesh_velocity);

struct EnergyRecord {
  double t = 0.0;
  double J = 0.0;
  double kinetic = 0.0;     ///< (eps0/2) ||w~^n||^2 on Omega^{n-1}, the mesh w~^n was computed on
  double mechanical = 0.0;  ///< J + kinetic
  double eta = 0.0;
};

EnergyRecord mechanical_energy(const FlowState& s, const FlowParams& p, double J);
/// J from the model on the current mesh (solves the state there).
EnergyRecord mechanical_energy(const FlowState& s, const FlowParams& p, models::ShapeModel& model);

/// |J^{n+1} - J^n| / max(J^n, 1e-16) < tol for `window` consecutive steps.
class EarlyStop {
 public:
  explicit EarlyStop(double tol = 1e-10, int window = 10) : tol_(tol), window_(window) {}
  /// Feeds the next objective value; true once the criterion is met.
  bool update(double J);
  int streak() const { return streak_; }

 private:
  double tol_;
  int window_;
  int streak_ = 0;
  bool has_prev_ = false;
  double prev_ = 0.0;
};

}  // namespace shapeflow::flow
