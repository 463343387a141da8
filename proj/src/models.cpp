#include "shapeflow/models.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/quadrature.hpp"

namespace shapeflow::models {

namespace {

// T : grad V with grad V constant on the triangle
void scatter(Vec& g, int n, const Triangle& tri, const fem::P1Element& e, const Eigen::Matrix2d& t) {
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 2; ++c) g[c * n + tri[a]] += t.row(c).dot(e.grad.row(a));
}

Vec2 tri_gradient(const fem::P1Element& e, const Triangle& tri, const Vec& u) {
  return e.grad.transpose() * Eigen::Vector3d(u[tri[0]], u[tri[1]], u[tri[2]]);
}

// Dirichlet-restricted solve of (K + M) x = b with zero boundary values
Vec solve_dirichlet(const SpMat& a, Vec b, const std::vector<bool>& fixed) {
  SpMat m = a;
  linalg::apply_dirichlet(m, b, fixed, Vec::Zero(b.size()));
  return linalg::solve_spd({m, linalg::Symmetry::kSpd}, b);
}

}  // namespace

ReconData recon_preset(const std::string& name) {
  double a = 0.0;
  if (name == "recon-case1")
    a = 0.8;
  else if (name == "recon-case2")
    a = 1.0;
  else
    throw ConfigError("unknown reconstruction preset '" + name + "'");
  const double b = 2.25;
  ReconData d;
  d.u_d = [=](const Vec2& x) { return 1.0 - a * x.x() * x.x() - b * x.y() * x.y(); };
  d.grad_u_d = [=](const Vec2& x) { return Vec2(-2.0 * a * x.x(), -2.0 * b * x.y()); };
  // -Laplace u_d = 2a + 2b
  d.f = [=](const Vec2& x) { return 1.0 + 2.0 * (a + b) - a * x.x() * x.x() - b * x.y() * x.y(); };
  return d;
}

ReconState recon_solve(const SimplicialMesh2D& mesh, const ReconData& data) {
  const SpMat a = fem::stiffness_matrix(mesh) + fem::mass_matrix(mesh);
  const auto fixed = mesh.boundary_vertex_mask();
  ReconState s;
  s.u = solve_dirichlet(a, fem::load_vector(mesh, data.f), fixed);
  // int (u - u_d) phi_j by the same rule
  Vec rhs = Vec::Zero(mesh.num_vertices());
  const auto& rule = quad::triangle_rule(4);
  const auto& x = mesh.vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.signed_area(t);
    for (const auto& q : rule) {
      const Vec2 p = q.bary[0] * x[tri[0]] + q.bary[1] * x[tri[1]] + q.bary[2] * x[tri[2]];
      const double uh = q.bary[0] * s.u[tri[0]] + q.bary[1] * s.u[tri[1]] + q.bary[2] * s.u[tri[2]];
      const double r = (uh - data.u_d(p)) * q.weight * area;
      for (int i = 0; i < 3; ++i) rhs[tri[i]] += r * q.bary[i];
    }
  }
  s.p = solve_dirichlet(a, rhs, fixed);
  return s;
}

double recon_objective(const SimplicialMesh2D& mesh, const Vec& u, const ReconData& data) {
  double j = 0.0;
  const auto& rule = quad::triangle_rule(4);
  const auto& x = mesh.vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.signed_area(t);
    for (const auto& q : rule) {
      const Vec2 p = q.bary[0] * x[tri[0]] + q.bary[1] * x[tri[1]] + q.bary[2] * x[tri[2]];
      const double uh = q.bary[0] * u[tri[0]] + q.bary[1] * u[tri[1]] + q.bary[2] * u[tri[2]];
      const double r = uh - data.u_d(p);
      j += 0.5 * r * r * q.weight * area;
    }
  }
  return j;
}

Vec recon_dJ(const SimplicialMesh2D& mesh, const ReconState& s, const ReconData& data) {
  const int n = mesh.num_vertices();
  if (s.u.size() != n || s.p.size() != n) throw StaleStateError("reconstruction state does not match the mesh");
  Vec g = Vec::Zero(2 * n);
  const auto& rule = quad::triangle_rule(4);
  const auto& x = mesh.vertices();
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const fem::P1Element e = fem::p1_element(mesh, t);
    const Vec2 gu = tri_gradient(e, tri, s.u), gp = tri_gradient(e, tri, s.p);
    double scalar = 0.0;  // int (1/2 |u - u_d|^2 - grad u . grad p - u p)
    for (const auto& q : rule) {
      const Vec2 pt = q.bary[0] * x[tri[0]] + q.bary[1] * x[tri[1]] + q.bary[2] * x[tri[2]];
      const double uh = q.bary[0] * s.u[tri[0]] + q.bary[1] * s.u[tri[1]] + q.bary[2] * s.u[tri[2]];
      const double ph = q.bary[0] * s.p[tri[0]] + q.bary[1] * s.p[tri[1]] + q.bary[2] * s.p[tri[2]];
      const double r = uh - data.u_d(pt);
      const double w = q.weight * e.area;
      scalar += w * (0.5 * r * r - gu.dot(gp) - uh * ph);
      // -f grad p . v - (u - u_d) grad u_d . v
      const Vec2 vec = -data.f(pt) * gp - r * data.grad_u_d(pt);
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 2; ++c) g[c * n + tri[a]] += w * q.bary[a] * vec[c];
    }
    const Eigen::Matrix2d tt = e.area * (gu * gp.transpose() + gp * gu.transpose()) + scalar * id;
    scatter(g, n, tri, e, tt);
  }
  return g;
}

stokes::StokesProblem drag_preset(const std::string& name, double mu) {
  if (name != "drag-case1") throw ConfigError("unknown drag preset '" + name + "'");
  stokes::StokesProblem p;
  p.mu = mu;
  p.inflow = [](const Vec2& x) { return Vec2(-(x.y() - 0.5) * (x.y() + 0.5), 0.0); };
  return p;
}

std::vector<bool> outer_boundary_vertices(const SimplicialMesh2D& mesh) {
  std::vector<bool> out(mesh.num_vertices(), false);
  if (!mesh.has_markers()) return out;
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
    const int m = mesh.boundary_markers()[e];
    if (m == mesh::kInlet || m == mesh::kWall || m == mesh::kOutlet)
      for (int v : mesh.boundary_edges()[e]) out[v] = true;
  }
  return out;
}

Vec stokes_dJ(const SimplicialMesh2D& mesh, const stokes::StokesProblem& problem, const stokes::StokesSolution& s) {
  Vec g = stokes::dissipation_gradient(mesh, problem, s);
  const int n = mesh.num_vertices();
  const auto fixed = outer_boundary_vertices(mesh);
  for (int i = 0; i < n; ++i)
    if (fixed[i]) g[i] = g[n + i] = 0.0;
  return g;
}

EigenState eigen_solve(const SimplicialMesh2D& mesh, int count) {
  const auto bnd = mesh.boundary_vertex_mask();
  std::vector<int> map(mesh.num_vertices(), -1), free_idx;
  for (int i = 0; i < mesh.num_vertices(); ++i)
    if (!bnd[i]) map[i] = static_cast<int>(free_idx.size()), free_idx.push_back(i);
  const int nf = static_cast<int>(free_idx.size());
  auto restrict_ = [&](const SpMat& a) {
    linalg::TripletAssembler r(nf, nf);
    r.reserve(a.nonZeros());
    for (int c = 0; c < a.outerSize(); ++c)
      for (SpMat::InnerIterator it(a, c); it; ++it)
        if (map[it.row()] >= 0 && map[it.col()] >= 0) r.add(map[it.row()], map[it.col()], it.value());
    return r.build();
  };
  const auto pairs = linalg::generalized_eigs(restrict_(fem::stiffness_matrix(mesh)), restrict_(fem::mass_matrix(mesh)), count);
  EigenState s;
  s.values = pairs.values;
  s.vectors = Mat::Zero(mesh.num_vertices(), count);
  for (int k = 0; k < nf; ++k) s.vectors.row(free_idx[k]) = pairs.vectors.row(k);
  // fix the sign so results do not depend on the random start
  for (int j = 0; j < count; ++j) {
    Eigen::Index imax;
    s.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (s.vectors(imax, j) < 0.0) s.vectors.col(j) *= -1.0;
  }
  return s;
}

std::vector<int> eigen_cluster(const Vec& values, int ell, double gap_tol) {
  const int k = ell - 1;
  if (k < 0 || k >= values.size()) throw Error("eigen_cluster: ell out of range");
  int lo = k, hi = k;
  auto close = [&](int i, int j) { return std::abs(values[i] - values[j]) <= gap_tol * std::abs(values[j]); };
  while (lo > 0 && close(lo - 1, lo)) --lo;
  while (hi + 1 < values.size() && close(hi + 1, hi)) ++hi;
  std::vector<int> out;
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

Vec eigen_dJ(const SimplicialMesh2D& mesh, const EigenState& s, int ell, double gap_tol) {
  const int n = mesh.num_vertices();
  if (s.vectors.rows() != n) throw StaleStateError("eigen state does not match the mesh");
  const auto cluster = eigen_cluster(s.values, ell, gap_tol);
  Vec g = Vec::Zero(2 * n);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  for (int k : cluster) {
    const Vec u = s.vectors.col(k);
    const double lambda = s.values[k];
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const fem::P1Element e = fem::p1_element(mesh, t);
      const Vec2 gu = tri_gradient(e, tri, u);
      const Eigen::Vector3d ul(u[tri[0]], u[tri[1]], u[tri[2]]);
      const double u2 = ul.dot(fem::local_mass(e.area) * ul);
      const Eigen::Matrix2d tt = (e.area * gu.squaredNorm() - lambda * u2) * id - 2.0 * e.area * gu * gu.transpose();
      scatter(g, n, tri, e, tt);
    }
  }
  return g / static_cast<double>(cluster.size());
}

// ---------------------------------------------------------------- ShapeModel

std::uint64_t fingerprint(const SimplicialMesh2D& mesh) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 1099511628211ull;
  };
  for (const auto& v : mesh.vertices()) mix(v.data(), 2 * sizeof(double));
  for (const auto& t : mesh.triangles()) mix(t.data(), sizeof(t));
  return h;
}

std::vector<bool> ShapeModel::fixed_vertices(const SimplicialMesh2D& mesh) const {
  return std::vector<bool>(mesh.num_vertices(), false);
}

void ShapeModel::solve(const SimplicialMesh2D& mesh) {
  solved_ = false;
  do_solve(mesh);
  fingerprint_ = fingerprint(mesh);
  solved_ = true;
}

void ShapeModel::check_current(const SimplicialMesh2D& mesh) const {
  if (!solved_) throw StaleStateError("model has not been solved");
  if (fingerprint(mesh) != fingerprint_) throw StaleStateError("model state belongs to a different mesh");
}

double ShapeModel::objective(const SimplicialMesh2D& mesh) const {
  check_current(mesh);
  return do_objective(mesh);
}

Vec ShapeModel::gradient(const SimplicialMesh2D& mesh) const {
  check_current(mesh);
  Vec g = do_gradient(mesh);
  const auto fixed = fixed_vertices(mesh);
  const int n = mesh.num_vertices();
  for (int i = 0; i < n; ++i)
    if (fixed[i]) g[i] = g[n + i] = 0.0;
  return g;
}

double ShapeModel::evaluate(const SimplicialMesh2D& mesh) {
  solve(mesh);
  return objective(mesh);
}

const ReconState& ReconstructionModel::state(const SimplicialMesh2D& mesh) const {
  check_current(mesh);
  return state_;
}
void ReconstructionModel::do_solve(const SimplicialMesh2D& mesh) { state_ = recon_solve(mesh, data_); }
double ReconstructionModel::do_objective(const SimplicialMesh2D& mesh) const {
  return recon_objective(mesh, state_.u, data_);
}
Vec ReconstructionModel::do_gradient(const SimplicialMesh2D& mesh) const { return recon_dJ(mesh, state_, data_); }

std::vector<bool> DragModel::fixed_vertices(const SimplicialMesh2D& mesh) const {
  return outer_boundary_vertices(mesh);
}
const stokes::StokesSolution& DragModel::state(const SimplicialMesh2D& mesh) const {
  check_current(mesh);
  return state_;
}
void DragModel::do_solve(const SimplicialMesh2D& mesh) { state_ = stokes::solve(mesh, problem_); }
double DragModel::do_objective(const SimplicialMesh2D& mesh) const {
  return stokes::dissipation(mesh, problem_.mu, state_.space, state_.velocity);
}
Vec DragModel::do_gradient(const SimplicialMesh2D& mesh) const { return stokes_dJ(mesh, problem_, state_); }

const EigenState& EigenvalueModel::state(const SimplicialMesh2D& mesh) const {
  check_current(mesh);
  return state_;
}
void EigenvalueModel::do_solve(const SimplicialMesh2D& mesh) {
  if (ell_ < 1) throw ConfigError("eigenvalue index must be >= 1");
  state_ = eigen_solve(mesh, ell_ + 2);
}
double EigenvalueModel::do_objective(const SimplicialMesh2D&) const { return state_.values[ell_ - 1]; }
Vec EigenvalueModel::do_gradient(const SimplicialMesh2D& mesh) const {
  return eigen_dJ(mesh, state_, ell_, gap_tol_);
}

// ---------------------------------------------------------------- fd_check

FdReport fd_check(ShapeModel& model, const SimplicialMesh2D& mesh, const std::vector<Vec2>& direction,
                  const std::vector<double>& eps) {
  FdReport r;
  const double j0 = model.evaluate(mesh);
  r.dj = model.gradient(mesh).dot(mesh::pack(direction));
  bool all_zero = true;
  for (double e : eps) {
    const double je = model.evaluate(mesh::apply_flow_map(mesh, direction, e));
    FdRow row{e, (je - j0) / e, 0.0};
    row.error = std::abs(r.dj - row.quotient);
    all_zero &= row.error == 0.0;
    r.rows.push_back(row);
  }
  model.solve(mesh);  // leave the model on the base mesh
  if (all_zero) {
    r.slope = std::numeric_limits<double>::quiet_NaN();
    r.pass = true;
    return r;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& row : r.rows) {
    if (!(row.error > 0.0)) continue;
    const double lx = std::log10(row.eps), ly = std::log10(row.error);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++m;
  }
  r.slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  r.pass = r.slope >= 0.8 && r.slope <= 1.2;
  return r;
}

// ---------------------------------------------------------------- volume

Vec volume_gradient(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask) {
  const int n = mesh.num_vertices();
  const auto& edges = mesh.boundary_edges();
  if (!edge_mask.empty() && edge_mask.size() != edges.size()) throw GeometryError("edge mask size mismatch");
  const auto normals = mesh::facet_normals(mesh);
  Vec c = Vec::Zero(2 * n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!edge_mask.empty() && !edge_mask[e]) continue;
    const double len = (mesh.vertices()[edges[e][1]] - mesh.vertices()[edges[e][0]]).norm();
    for (int v : edges[e])
      for (int k = 0; k < 2; ++k) c[k * n + v] += 0.5 * len * normals[e][k];
  }
  return c;
}

Vec volume_project(const SimplicialMesh2D& mesh, const Vec& normal_data, const std::vector<bool>& edge_mask) {
  const Vec ones_int = fem::boundary_load(mesh, edge_mask);  // int phi_j
  const double length = ones_int.sum();
  if (!(length > 0.0)) throw GeometryError("volume_project: empty free boundary");
  const double c = ones_int.dot(normal_data) / length;
  Vec out = normal_data;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (ones_int[i] > 0.0) out[i] -= c;
  return out;
}

Vec volume_project(const Vec& w, const Vec& z, const Vec& c_vol) {
  const double denom = c_vol.dot(z);
  if (!(std::abs(denom) > 0.0)) throw GeometryError("volume_project: correction field carries no flux");
  return w - (c_vol.dot(w) / denom) * z;
}

}  // namespace shapeflow::models
