#include "shapeflow/willmore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseLU>

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/generators.hpp"

namespace shapeflow::willmore {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 radial(const Vec3& p) {
  const Vec3 r(p.x(), p.y(), 0.0);
  const double len = r.norm();
  if (!(len > 0.0)) throw GeometryError("mu_out: boundary point on the axis");
  return r / len;
}

// outward conormal of a boundary edge, in the plane of its triangle
Vec3 edge_conormal(const SurfaceMesh3D& m, int e) {
  const auto& x = m.vertices();
  const Segment& s = m.boundary_edges()[e];
  const auto& tri = m.triangles()[m.boundary_edge_triangle()[e]];
  int c = tri[0];
  for (int v : tri)
    if (v != s[0] && v != s[1]) c = v;
  const Vec3 t = (x[s[1]] - x[s[0]]).normalized();
  Vec3 d = x[s[0]] - x[c];
  d -= d.dot(t) * t;
  return d.normalized();
}

// int_boundary mu_out . nbar phi_j, P1 on each boundary edge
Vec boundary_load(const SurfaceMesh3D& m, const std::vector<Vec3>& nbar, const std::vector<Vec3>& mu_out) {
  Vec b = Vec::Zero(m.num_vertices());
  if (m.is_closed()) return b;
  if (mu_out.size() != static_cast<std::size_t>(m.num_vertices()))
    throw Error("willmore: mu_out must have one entry per vertex");
  const auto& x = m.vertices();
  for (const Segment& s : m.boundary_edges()) {
    const double len = (x[s[1]] - x[s[0]]).norm();
    const double f0 = mu_out[s[0]].dot(nbar[s[0]]), f1 = mu_out[s[1]].dot(nbar[s[1]]);
    b[s[0]] += len / 6.0 * (2.0 * f0 + f1);
    b[s[1]] += len / 6.0 * (f0 + 2.0 * f1);
  }
  return b;
}

// sum_c nbar_{j,c} (A X_c)_j
Vec stiffness_normal(const SpMat& a, const SurfaceMesh3D& m, const std::vector<Vec3>& nbar) {
  const int n = m.num_vertices();
  Vec out = Vec::Zero(n);
  for (int c = 0; c < 3; ++c) {
    Vec xc(n);
    for (int i = 0; i < n; ++i) xc[i] = m.vertices()[i][c];
    const Vec ax = a * xc;
    for (int i = 0; i < n; ++i) out[i] += nbar[i][c] * ax[i];
  }
  return out;
}

Vec normal_component(const Vec& w, const std::vector<Vec3>& nbar) {
  const int n = static_cast<int>(nbar.size());
  Vec q(n);
  for (int i = 0; i < n; ++i) q[i] = w[i] * nbar[i].x() + w[n + i] * nbar[i].y() + w[2 * n + i] * nbar[i].z();
  return q;
}

int parse_rings(const std::string& name, std::string& base) {
  const auto colon = name.find(':');
  base = name.substr(0, colon);
  if (colon == std::string::npos) return 8;
  try {
    const int r = std::stoi(name.substr(colon + 1));
    if (r < 2) throw ConfigError("fixture rings must be at least 2: " + name);
    return r;
  } catch (const std::logic_error&) {
    throw ConfigError("bad fixture resolution: " + name);
  }
}

}  // namespace

SurfacePatch make_patch(SurfaceMesh3D surface, std::vector<Vec3> mu_out, double eps0, double tau) {
  SurfacePatch p;
  p.surface = std::move(surface);
  p.previous = p.surface;
  p.mu_out = std::move(mu_out);
  p.previous_nbar = fem::project_normals(p.surface);
  p.H = fem::discrete_mean_curvature(p.surface, p.previous_nbar);
  p.w = Vec::Zero(3 * p.surface.num_vertices());
  p.eps0 = eps0;
  p.tau = tau;
  return p;
}

Vec3 mu_out_at(const Vec3& p, const std::string& mode, double tilt_deg) {
  double t;
  if (mode == "sphere") {
    t = std::atan2(std::hypot(p.x(), p.y()), p.z());
  } else if (mode == "tilt") {
    t = tilt_deg * kDeg;
  } else {
    throw ConfigError("unknown mu_out mode: " + mode);
  }
  return -std::cos(t) * radial(p) + std::sin(t) * Vec3::UnitZ();
}

SurfacePatch make_fixture(const std::string& name, const std::string& mu_out_mode, double tilt_deg) {
  std::string base;
  const int rings = parse_rings(name, base);
  const double density = 2.0 * std::numbers::pi;
  SurfaceMesh3D m;
  if (base == "flat-disk" || base == "hemisphere-hole") {
    m = mesh::flat_disk(1.0, 0.0, rings, density);
  } else if (base == "spherical-cap") {
    m = mesh::spherical_cap(1.0, 60.0 * kDeg, rings, density);
  } else {
    throw ConfigError("unknown surface fixture: " + name);
  }
  std::vector<Vec3> mu(m.num_vertices(), Vec3::Zero());
  for (int v : m.boundary_vertices()) mu[v] = mu_out_at(m.vertices()[v], mu_out_mode, tilt_deg);
  return make_patch(std::move(m), std::move(mu));
}

std::vector<double> normal_gradient_sq(const SurfaceMesh3D& mesh, const std::vector<Vec3>& nbar) {
  std::vector<double> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const fem::SurfaceElement e = fem::surface_element(mesh, t);
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();  // row c: grad_G nbar_c
    for (int a = 0; a < 3; ++a) g += nbar[tri[a]] * e.grad.row(a);
    out[t] = g.squaredNorm();
  }
  return out;
}

Vec boundary_aware_curvature(const SurfaceMesh3D& mesh, const std::vector<Vec3>& nbar,
                             const std::vector<Vec3>& mu_out) {
  const Vec rhs = stiffness_normal(fem::surface_stiffness(mesh), mesh, nbar) + boundary_load(mesh, nbar, mu_out);
  return linalg::SpdFactor(fem::surface_mass(mesh)).solve(rhs);
}

double willmore_energy(const SurfaceMesh3D& mesh, const std::vector<Vec3>& mu_out) {
  const Vec h = boundary_aware_curvature(mesh, fem::project_normals(mesh), mu_out);
  return h.dot(fem::surface_mass(mesh) * h);
}

double conormal_misfit_deg(const SurfaceMesh3D& mesh, const std::vector<Vec3>& mu_out) {
  if (mesh.is_closed()) return 0.0;
  std::vector<Vec3> mu(mesh.num_vertices(), Vec3::Zero());
  for (int e = 0; e < static_cast<int>(mesh.boundary_edges().size()); ++e) {
    const Vec3 c = edge_conormal(mesh, e);
    for (int v : mesh.boundary_edges()[e]) mu[v] += c;
  }
  double worst = 0.0;
  for (int v : mesh.boundary_vertices()) {
    const double cosang = std::clamp(mu[v].normalized().dot(-mu_out[v].normalized()), -1.0, 1.0);
    worst = std::max(worst, std::acos(cosang) / kDeg);
  }
  return worst;
}

double kinetic_energy(const SurfacePatch& p) {
  const Vec q = normal_component(p.w, p.previous_nbar);
  return 0.5 * p.eps0 * q.dot(fem::surface_mass(p.previous) * q);
}

WillmoreRecord record(const SurfacePatch& p) {
  WillmoreRecord r;
  r.step = p.step;
  r.energy = willmore_energy(p.surface, p.mu_out);
  r.kinetic = kinetic_energy(p);
  r.misfit_deg = conormal_misfit_deg(p.surface, p.mu_out);
  const int n = p.surface.num_vertices();
  for (int i = 0; i < n; ++i)
    r.velocity_norm = std::max(r.velocity_norm, Vec3(p.w[i], p.w[n + i], p.w[2 * n + i]).norm());
  return r;
}

StepSystem assemble_step(const SurfacePatch& p) {
  if (!(p.tau > 0.0)) throw ConfigError("willmore: tau must be positive");
  if (!(p.eps0 >= 0.0)) throw ConfigError("willmore: eps0 must be non-negative");
  const SurfaceMesh3D& cur = p.surface;
  const int n = cur.num_vertices();
  if (p.previous.num_vertices() != n || p.H.size() != n || p.w.size() != 3 * n ||
      p.previous_nbar.size() != static_cast<std::size_t>(n))
    throw StaleStateError("willmore: patch fields do not match the surface");

  StepSystem sys;
  std::vector<int> lid(n, -1);
  const auto bnd = cur.boundary_vertex_mask();
  for (int v = 0; v < n; ++v)
    if (!bnd[v]) {
      lid[v] = static_cast<int>(sys.interior.size());
      sys.interior.push_back(v);
    }
  const int ni = static_cast<int>(sys.interior.size());
  const int kap = 3 * ni, hof = 4 * ni, dim = 4 * ni + n;
  auto wcol = [&](int c, int v) { return c * ni + lid[v]; };

  const std::vector<Vec3> nbar = fem::project_normals(cur);
  const SpMat m = fem::surface_mass(cur);
  const SpMat mp = fem::surface_mass(p.previous);
  const SpMat a = fem::surface_stiffness(cur);
  const SpMat s = fem::surface_strain_form(cur);

  // int (-3/2 (H^n)^2 + |grad nbar|^2) H chi, coefficient constant per triangle
  const std::vector<double> gn = normal_gradient_sq(cur, nbar);
  linalg::TripletAssembler ca(n, n);
  for (int t = 0; t < cur.num_triangles(); ++t) {
    const auto& tri = cur.triangles()[t];
    double h2 = 0.0;
    for (int v : tri) h2 += p.H[v] * p.H[v] / 3.0;
    const Eigen::Matrix3d loc = fem::local_mass(cur.area(t)) * (-1.5 * h2 + gn[t]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) ca.add(tri[i], tri[j], loc(i, j));
  }
  const SpMat cmat = ca.build();

  linalg::TripletAssembler k(dim, dim);
  sys.rhs = Vec::Zero(dim);
  const double inert = p.eps0 / (2.0 * p.tau);

  // velocity equation, rows 0..ni-1
  for (int col = 0; col < n; ++col) {
    for (SpMat::InnerIterator it(m, col); it; ++it) {
      const int j = static_cast<int>(it.row());
      if (lid[j] < 0 || lid[col] < 0) continue;
      for (int c = 0; c < 3; ++c) k.add(lid[j], wcol(c, col), (1.0 + inert) * it.value() * nbar[col][c]);
    }
    for (SpMat::InnerIterator it(mp, col); it; ++it) {
      const int j = static_cast<int>(it.row());
      if (lid[j] < 0 || lid[col] < 0) continue;
      for (int c = 0; c < 3; ++c) k.add(lid[j], wcol(c, col), inert * it.value() * nbar[col][c]);
    }
    for (SpMat::InnerIterator it(a, col); it; ++it)
      if (lid[it.row()] >= 0) k.add(lid[it.row()], hof + col, it.value());
    for (SpMat::InnerIterator it(cmat, col); it; ++it)
      if (lid[it.row()] >= 0) k.add(lid[it.row()], hof + col, -it.value());
  }
  {
    const Vec qprev = normal_component(p.w, p.previous_nbar);
    const Vec h3 = p.H.array().cube().matrix();
    const Vec r = (p.eps0 / p.tau) * (mp * qprev) + m * h3;
    for (int j = 0; j < ni; ++j) sys.rhs[j] = r[sys.interior[j]];
  }

  // tangential equation, rows ni + (c ni + lid)
  for (int col = 0; col < 3 * n; ++col) {
    const int vc = col % n, cc = col / n;
    if (lid[vc] < 0) continue;
    for (SpMat::InnerIterator it(s, col); it; ++it) {
      const int row = static_cast<int>(it.row()), vr = row % n, cr = row / n;
      if (lid[vr] >= 0) k.add(ni + wcol(cr, vr), wcol(cc, vc), it.value());
    }
  }
  for (int col = 0; col < n; ++col) {
    if (lid[col] < 0) continue;
    for (SpMat::InnerIterator it(m, col); it; ++it) {
      const int j = static_cast<int>(it.row());
      if (lid[j] < 0) continue;
      // -int kappa nbar . chi, with nbar . chi interpolated at the test node j
      for (int c = 0; c < 3; ++c) k.add(ni + wcol(c, j), kap + lid[col], -it.value() * nbar[j][c]);
    }
  }

  // curvature equation, rows hof + j over all vertices
  for (int col = 0; col < n; ++col) {
    for (SpMat::InnerIterator it(m, col); it; ++it) k.add(hof + static_cast<int>(it.row()), hof + col, it.value());
    if (lid[col] < 0) continue;
    for (SpMat::InnerIterator it(a, col); it; ++it) {
      const int j = static_cast<int>(it.row());
      for (int c = 0; c < 3; ++c) k.add(hof + j, wcol(c, col), -p.tau * nbar[j][c] * it.value());
    }
  }
  sys.rhs.tail(n) = stiffness_normal(a, cur, nbar) + boundary_load(cur, nbar, p.mu_out);

  sys.matrix = k.build();
  return sys;
}

void willmore_step(SurfacePatch& p) {
  const StepSystem sys = assemble_step(p);
  Eigen::SparseLU<SpMat> lu;
  lu.compute(sys.matrix);
  if (lu.info() != Eigen::Success) throw SolverError("willmore: step matrix is singular", 0.0);
  const Vec x = lu.solve(sys.rhs);
  const double res = (sys.matrix * x - sys.rhs).norm();
  if (!std::isfinite(res) || res > 1e-8 * std::max(1.0, sys.rhs.norm()))
    throw SolverError("willmore: step solve residual", res);

  const int n = p.surface.num_vertices();
  const int ni = static_cast<int>(sys.interior.size());
  Vec w = Vec::Zero(3 * n);
  std::vector<Vec3> vel(n, Vec3::Zero());
  for (int c = 0; c < 3; ++c)
    for (int j = 0; j < ni; ++j) {
      w[c * n + sys.interior[j]] = x[c * ni + j];
      vel[sys.interior[j]][c] = x[c * ni + j];
    }

  SurfaceMesh3D next = mesh::apply_flow_map(p.surface, vel, p.tau);
  // boundary rows carry a zero velocity, so x + tau * 0 leaves them untouched
  p.previous_nbar = fem::project_normals(p.surface);
  p.previous = std::move(p.surface);
  p.surface = std::move(next);
  p.w = std::move(w);
  p.H = x.tail(n);
  ++p.step;
}

StationaryRun run_until_stationary(SurfacePatch& p, double rel_tol, int window, int max_steps) {
  StationaryRun out;
  out.history.push_back(record(p));
  int streak = 0;
  for (int n = 1; n <= max_steps; ++n) {
    willmore_step(p);
    out.history.push_back(record(p));
    out.steps = n;
    const double e0 = out.history[out.history.size() - 2].energy, e1 = out.history.back().energy;
    streak = std::abs(e1 - e0) / std::max(e0, 1e-16) < rel_tol ? streak + 1 : 0;
    if (streak >= window) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace shapeflow::willmore
