#include "shapeflow/inertial_flow.hpp"

#include <algorithm>
#include <cmath>

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/models.hpp"

namespace shapeflow::flow {

double damping(double t, double c, double t0) {
  if (!(c > 0.0) || !(t0 > 0.0)) throw ConfigError("damping: c and t0 must be positive");
  return c / (t + t0);
}

double FlowParams::eta(double t) const { return constant_damping ? c : damping(t, c, t0); }

void FlowParams::validate() const {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(eps0 >= 0.0)) throw ConfigError("eps0 must be non-negative");
  if (!(c > 0.0)) throw ConfigError("damping constant c must be positive");
  if (!(t0 > 0.0)) throw ConfigError("damping constant t0 must be positive");
}

FlowState initial_state(const SimplicialMesh2D& mesh) {
  FlowState s;
  s.current = mesh;
  s.previous = mesh;
  s.w_tilde = Vec::Zero(2 * mesh.num_vertices());
  s.w = Vec::Zero(2 * mesh.num_vertices());
  return s;
}

SpMat inertial_matrix(const FlowState& s, const FlowParams& p) {
  const double eta = p.eta(s.time);
  if (!(eta > 0.0)) throw SolverError("inertial step: damping must be positive for an SPD system", 1.0);
  const SpMat mn = fem::mass_matrix(s.current);
  const SpMat kn = fem::stiffness_matrix(s.current);
  SpMat a = eta * (mn + kn);
  if (p.eps0 > 0.0) a += (p.eps0 / (2.0 * p.tau)) * (mn + fem::mass_matrix(s.previous));
  return fem::vector_block(a, 2);
}

Vec inertial_rhs(const FlowState& s, const FlowParams& p, const Vec& g) {
  Vec rhs = -g;
  if (p.eps0 > 0.0) rhs += (p.eps0 / p.tau) * (fem::vector_block(fem::mass_matrix(s.previous), 2) * s.w_tilde);
  return rhs;
}

Vec inertial_step(const FlowState& s, const FlowParams& p, const Vec& g, const StepConstraints& cons) {
  const int n = s.current.num_vertices();
  if (g.size() != 2 * n) throw StaleStateError("inertial step: gradient does not match the current mesh");
  if (s.w_tilde.size() != 2 * n || s.previous.num_vertices() != n)
    throw GeometryError("inertial step: previous and current meshes do not share vertices");

  std::vector<bool> fixed(2 * n, false);
  if (!cons.fixed.empty()) {
    if (static_cast<int>(cons.fixed.size()) != n) throw Error("inertial step: fixed mask must be per vertex");
    for (int i = 0; i < n; ++i) fixed[i] = fixed[n + i] = cons.fixed[i];
  }
  const SpMat a = linalg::eliminate(inertial_matrix(s, p), fixed);
  Vec rhs = inertial_rhs(s, p, g);
  for (int i = 0; i < 2 * n; ++i)
    if (fixed[i]) rhs[i] = 0.0;

  const linalg::SpdFactor f(a);
  Vec w = f.solve(rhs);
  if (cons.volume_gradient.size() > 0) {
    if (cons.volume_gradient.size() != 2 * n) throw Error("inertial step: volume gradient must be blocked 2N");
    Vec c = cons.volume_gradient;
    for (int i = 0; i < 2 * n; ++i)
      if (fixed[i]) c[i] = 0.0;
    const Vec z = f.solve(c);
    const double cz = c.dot(z);
    if (cz > 0.0) w -= (c.dot(w) / cz) * z;
  }
  return w;
}

FlowState advance(const FlowState& s, const FlowParams& p, const Vec& w_tilde_next, const Vec& mesh_velocity) {
  const int n = s.current.num_vertices();
  if (w_tilde_next.size() != 2 * n || mesh_velocity.size() != 2 * n)
    throw Error("advance: velocities must be blocked 2N on the current mesh");
  FlowState out;
  out.current = mesh::apply_flow_map(s.current, mesh::unpack2(mesh_velocity), p.tau);
  out.previous = s.current;
  out.w_tilde = w_tilde_next;
  out.w = mesh_velocity;
  out.step = s.step + 1;
  out.time = s.time + p.tau;
  return out;
}

EnergyRecord mechanical_energy(const FlowState& s, const FlowParams& p, double J) {
  EnergyRecord r;
  r.t = s.time;
  r.J = J;
  const SpMat m = fem::vector_block(fem::mass_matrix(s.previous), 2);
  r.kinetic = 0.5 * p.eps0 * s.w_tilde.dot(m * s.w_tilde);
  r.mechanical = r.J + r.kinetic;
  r.eta = p.eta(s.time);
  return r;
}

EnergyRecord mechanical_energy(const FlowState& s, const FlowParams& p, models::ShapeModel& model) {
  return mechanical_energy(s, p, model.evaluate(s.current));
}

bool EarlyStop::update(double J) {
  if (has_prev_) {
    const double rel = std::abs(J - prev_) / std::max(prev_, 1e-16);
    streak_ = rel < tol_ ? streak_ + 1 : 0;
  }
  has_prev_ = true;
  prev_ = J;
  return streak_ >= window_;
}

}  // namespace shapeflow::flow
