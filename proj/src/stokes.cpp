#include "shapeflow/stokes.hpp"

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"
#include "shapeflow/quadrature.hpp"

namespace shapeflow::stokes {

namespace {

using Grad4 = Eigen::Matrix<double, 4, 2>;  // three hats and the bubble

Grad4 basis_gradients(const fem::P1Element& e, const std::array<double, 3>& l) {
  Grad4 g;
  g.topRows<3>() = e.grad;
  g.row(3) = 27.0 * (l[1] * l[2] * e.grad.row(0) + l[0] * l[2] * e.grad.row(1) + l[0] * l[1] * e.grad.row(2));
  return g;
}

Eigen::Vector4d basis_values(const std::array<double, 3>& l) {
  return {l[0], l[1], l[2], 27.0 * l[0] * l[1] * l[2]};
}

std::array<int, 4> scalar_dofs(const MiniSpace& s, const Triangle& tri, int t) {
  return {tri[0], tri[1], tri[2], s.vertices + t};
}

Eigen::Matrix2d gradient_at(const MiniSpace& s, const Vec& u, const std::array<int, 4>& dofs, const Grad4& g) {
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 4; ++a) out.row(c) += u[c * s.component_dofs() + dofs[a]] * g.row(a);
  return out;
}

struct Dirichlet {
  std::vector<bool> fixed;
  Vec values;
};

Dirichlet velocity_dirichlet(const SimplicialMesh2D& mesh, const MiniSpace& s, const StokesProblem& problem,
                             bool homogeneous) {
  if (!mesh.has_markers()) throw GeometryError("stokes: mesh has no inlet/wall/outlet marker partition");
  Dirichlet d{std::vector<bool>(s.velocity_dofs(), false), Vec::Zero(s.velocity_dofs())};
  const auto node = mesh.node_markers();
  const auto& edges = mesh.boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int m = mesh.boundary_markers()[e];
    if (m == mesh::kNoMarker) throw GeometryError("stokes: boundary edge " + std::to_string(e) + " is unmarked");
    if (m == mesh::kOutlet) continue;
    for (int v : edges[e]) {
      for (int c = 0; c < 2; ++c) d.fixed[s.vertex_dof(v, c)] = true;
      if (!homogeneous && node[v] == mesh::kInlet) {
        const Vec2 g = problem.inflow(mesh.vertices()[v]);
        for (int c = 0; c < 2; ++c) d.values[s.vertex_dof(v, c)] = g[c];
      }
    }
  }
  return d;
}

bool has_outlet(const SimplicialMesh2D& mesh) {
  for (int m : mesh.boundary_markers())
    if (m == mesh::kOutlet) return true;
  return false;
}

Vec force_vector(const SimplicialMesh2D& mesh, const MiniSpace& s, const Vec2& f) {
  Vec out = Vec::Zero(s.velocity_dofs());
  if (f.isZero()) return out;
  const auto& rule = quad::triangle_rule(4);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto dofs = scalar_dofs(s, mesh.triangles()[t], t);
    const double area = mesh.signed_area(t);
    for (const auto& q : rule) {
      const Eigen::Vector4d v = basis_values(q.bary);
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 2; ++c) out[c * s.component_dofs() + dofs[a]] += q.weight * area * f[c] * v[a];
    }
  }
  return out;
}

StokesSolution solve_impl(const SimplicialMesh2D& mesh, const StokesProblem& problem, bool homogeneous) {
  const StokesBlocks blk = stokes_blocks(mesh, problem.mu);
  const MiniSpace& s = blk.space;
  const Dirichlet bc = velocity_dirichlet(mesh, s, problem, homogeneous);
  const int nv = s.velocity_dofs(), np = mesh.num_vertices();
  const bool gauge = !has_outlet(mesh);
  const int n = nv + np + (gauge ? 1 : 0);

  linalg::TripletAssembler t(n, n);
  t.reserve(blk.a.nonZeros() + 2 * blk.b.nonZeros() + 2 * np);
  for (int k = 0; k < blk.a.outerSize(); ++k)
    for (SpMat::InnerIterator it(blk.a, k); it; ++it) t.add(it.row(), it.col(), it.value());
  for (int k = 0; k < blk.b.outerSize(); ++k)
    for (SpMat::InnerIterator it(blk.b, k); it; ++it) {
      t.add(nv + it.row(), it.col(), it.value());
      t.add(it.col(), nv + it.row(), it.value());
    }
  if (gauge) {
    const Vec w = fem::mass_matrix(mesh) * Vec::Ones(np);
    for (int i = 0; i < np; ++i) t.add(n - 1, nv + i, w[i]), t.add(nv + i, n - 1, w[i]);
  }
  SpMat k = t.build();
  Vec rhs = Vec::Zero(n);
  const Vec f = force_vector(mesh, s, problem.force);
  rhs.head(nv) = f;

  std::vector<bool> fixed(n, false);
  Vec values = Vec::Zero(n);
  for (int i = 0; i < nv; ++i) fixed[i] = bc.fixed[i], values[i] = bc.values[i];
  linalg::apply_dirichlet(k, rhs, fixed, values);
  const Vec x = linalg::solve_lu(k, rhs, 1e-10);

  StokesSolution out;
  out.space = s;
  out.velocity = x.head(nv);
  out.pressure = x.segment(nv, np);
  out.dirichlet = bc.fixed;
  out.reaction = blk.a * out.velocity + blk.b.transpose() * out.pressure - f;
  for (int i = 0; i < nv; ++i)
    if (!bc.fixed[i]) out.reaction[i] = 0.0;
  return out;
}

// T : grad V summed into g_(a,c) = sum_j T_cj d_j lambda_a
void scatter(Vec& g, int n, const Triangle& tri, const fem::P1Element& e, const Eigen::Matrix2d& t) {
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 2; ++c) g[c * n + tri[a]] += t.row(c).dot(e.grad.row(a));
}

}  // namespace

StokesBlocks stokes_blocks(const SimplicialMesh2D& mesh, double mu) {
  if (!(mu > 0.0)) throw Error("stokes: viscosity must be positive");
  StokesBlocks out;
  out.space = {mesh.num_vertices(), mesh.num_triangles()};
  const MiniSpace& s = out.space;
  linalg::TripletAssembler a(s.velocity_dofs(), s.velocity_dofs()), b(mesh.num_vertices(), s.velocity_dofs());
  a.reserve(32 * mesh.num_triangles());
  b.reserve(24 * mesh.num_triangles());
  const auto& rule = quad::triangle_rule(4);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto dofs = scalar_dofs(s, tri, t);
    const fem::P1Element e = fem::p1_element(mesh, t);
    Eigen::Matrix4d ka = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 3, 8> kb = Eigen::Matrix<double, 3, 8>::Zero();  // pressure x (basis, component)
    for (const auto& q : rule) {
      const double w = q.weight * e.area;
      const Grad4 g = basis_gradients(e, q.bary);
      ka += w * g * g.transpose();
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 4; ++j)
          for (int c = 0; c < 2; ++c) kb(k, c * 4 + j) -= w * q.bary[k] * g(j, c);
    }
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a.add(c * s.component_dofs() + dofs[i], c * s.component_dofs() + dofs[j], mu * ka(i, j));
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 4; ++j) b.add(tri[k], c * s.component_dofs() + dofs[j], kb(k, c * 4 + j));
    }
  }
  out.a = a.build();
  out.b = b.build();
  return out;
}

StokesSolution solve(const SimplicialMesh2D& mesh, const StokesProblem& problem) {
  return solve_impl(mesh, problem, false);
}

StokesSolution solve_homogeneous(const SimplicialMesh2D& mesh, const StokesProblem& problem) {
  return solve_impl(mesh, problem, true);
}

Eigen::Matrix2d velocity_gradient(const SimplicialMesh2D& mesh, const MiniSpace& space, const Vec& u, int t,
                                  const std::array<double, 3>& bary) {
  const fem::P1Element e = fem::p1_element(mesh, t);
  return gradient_at(space, u, scalar_dofs(space, mesh.triangles()[t], t), basis_gradients(e, bary));
}

std::vector<Vec2> vertex_velocity(const MiniSpace& space, const Vec& u) {
  std::vector<Vec2> out(space.vertices);
  for (int v = 0; v < space.vertices; ++v) out[v] = Vec2(u[space.vertex_dof(v, 0)], u[space.vertex_dof(v, 1)]);
  return out;
}

double dissipation(const SimplicialMesh2D& mesh, double mu, const MiniSpace& space, const Vec& u) {
  double j = 0.0;
  const auto& rule = quad::triangle_rule(4);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const fem::P1Element e = fem::p1_element(mesh, t);
    const auto dofs = scalar_dofs(space, mesh.triangles()[t], t);
    for (const auto& q : rule) j += q.weight * e.area * gradient_at(space, u, dofs, basis_gradients(e, q.bary)).squaredNorm();
  }
  return mu * j;
}

double boundary_work(const StokesSolution& s) {
  double w = 0.0;
  for (Eigen::Index i = 0; i < s.velocity.size(); ++i)
    if (s.dirichlet[i]) w += s.velocity[i] * s.reaction[i];
  return w;
}

Vec dissipation_gradient(const SimplicialMesh2D& mesh, const StokesProblem& problem, const StokesSolution& state) {
  const int n = mesh.num_vertices();
  const MiniSpace& s = state.space;
  if (s.vertices != n || s.triangles != mesh.num_triangles())
    throw StaleStateError("stokes: state does not belong to this mesh");
  const double mu = problem.mu;
  const Vec2 f = problem.force;
  const bool forced = !f.isZero();
  StokesSolution adj;
  if (forced) adj = solve_homogeneous(mesh, problem);

  Vec g = Vec::Zero(2 * n);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  const auto& rule = quad::triangle_rule(4);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto dofs = scalar_dofs(s, tri, t);
    const fem::P1Element e = fem::p1_element(mesh, t);
    Eigen::Matrix2d tt = Eigen::Matrix2d::Zero();
    for (const auto& q : rule) {
      const Grad4 bg = basis_gradients(e, q.bary);
      const Eigen::Matrix2d gu = gradient_at(s, state.velocity, dofs, bg);
      const double p = q.bary[0] * state.pressure[tri[0]] + q.bary[1] * state.pressure[tri[1]] +
                       q.bary[2] * state.pressure[tri[2]];
      // a'(u,u) + 2 b'(u,p)
      Eigen::Matrix2d m = mu * (gu.squaredNorm() * id - 2.0 * gu.transpose() * gu) +
                          2.0 * p * (gu.transpose() - gu.trace() * id);
      if (forced) {
        const Eigen::Matrix2d gz = gradient_at(s, adj.velocity, dofs, bg);
        const double r = q.bary[0] * adj.pressure[tri[0]] + q.bary[1] * adj.pressure[tri[1]] +
                         q.bary[2] * adj.pressure[tri[2]];
        const Eigen::Vector4d phi = basis_values(q.bary);
        Vec2 z = Vec2::Zero();
        for (int a = 0; a < 4; ++a)
          for (int c = 0; c < 2; ++c) z[c] += adj.velocity[c * s.component_dofs() + dofs[a]] * phi[a];
        const Eigen::Matrix2d fz = f.dot(z) * id;
        const Eigen::Matrix2d az = mu * ((gu.array() * gz.array()).sum() * id - gu.transpose() * gz - gz.transpose() * gu);
        const Eigen::Matrix2d bzp = p * (gz.transpose() - gz.trace() * id);
        const Eigen::Matrix2d bur = r * (gu.transpose() - gu.trace() * id);
        m += 2.0 * (fz - az - bzp - bur);
      }
      tt += q.weight * e.area * m;
    }
    scatter(g, n, tri, e, tt);
  }
  return g;
}

}  // namespace shapeflow::stokes
