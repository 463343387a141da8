#include "shapeflow/fem.hpp"

#include "shapeflow/error.hpp"
#include "shapeflow/quadrature.hpp"

namespace shapeflow::fem {

namespace {

std::vector<bool> all_edges(const SimplicialMesh2D& mesh, const std::vector<bool>& mask) {
  if (mask.empty()) return std::vector<bool>(mesh.boundary_edges().size(), true);
  if (mask.size() != mesh.boundary_edges().size()) throw GeometryError("edge mask size mismatch");
  return mask;
}

// sym(e_c g_a^T) : sym(e_d g_b^T) summed into a blocked strain matrix
template <int D, class Grad>
void add_strain(linalg::TripletAssembler& asmb, const std::array<int, 3>& tri, int n, double area,
                const Grad& grad) {
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double gg = grad.row(a).dot(grad.row(b));
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          double v = 0.5 * grad(a, d) * grad(b, c);
          if (c == d) v += 0.5 * gg;
          asmb.add(c * n + tri[a], d * n + tri[b], area * v);
        }
    }
}

}  // namespace

P1Element p1_element(const SimplicialMesh2D& mesh, int t) {
  const auto& tri = mesh.triangles()[t];
  const auto& x = mesh.vertices();
  P1Element e;
  e.area = mesh.signed_area(t);
  for (int i = 0; i < 3; ++i) {
    const Vec2 edge = x[tri[(i + 2) % 3]] - x[tri[(i + 1) % 3]];
    e.grad.row(i) = Vec2(-edge.y(), edge.x()) / (2.0 * e.area);
  }
  return e;
}

SurfaceElement surface_element(const SurfaceMesh3D& mesh, int t) {
  const auto& tri = mesh.triangles()[t];
  const auto& x = mesh.vertices();
  SurfaceElement e;
  const Vec3 av = mesh.area_vector(t);
  e.area = av.norm();
  if (!(e.area > 0.0)) throw GeometryError("degenerate surface triangle " + std::to_string(t));
  e.normal = av / e.area;
  for (int i = 0; i < 3; ++i) {
    const Vec3 edge = x[tri[(i + 2) % 3]] - x[tri[(i + 1) % 3]];
    e.grad.row(i) = e.normal.cross(edge) / (2.0 * e.area);
  }
  return e;
}

Eigen::Matrix3d local_mass(double area) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Constant(1.0);
  m.diagonal().setConstant(2.0);
  return m * (area / 12.0);
}

SpMat mass_matrix(const SimplicialMesh2D& mesh) {
  linalg::TripletAssembler a(mesh.num_vertices(), mesh.num_vertices());
  a.reserve(9 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Eigen::Matrix3d m = local_mass(mesh.signed_area(t));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a.add(tri[i], tri[j], m(i, j));
  }
  return a.build();
}

SpMat stiffness_matrix(const SimplicialMesh2D& mesh) {
  linalg::TripletAssembler a(mesh.num_vertices(), mesh.num_vertices());
  a.reserve(9 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const P1Element e = p1_element(mesh, t);
    const Eigen::Matrix3d k = e.area * e.grad * e.grad.transpose();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a.add(tri[i], tri[j], k(i, j));
  }
  return a.build();
}

SpMat vector_block(const SpMat& scalar, int dim) {
  const int n = static_cast<int>(scalar.rows());
  linalg::TripletAssembler a(dim * n, dim * n);
  a.reserve(dim * scalar.nonZeros());
  for (int c = 0; c < dim; ++c)
    for (int k = 0; k < scalar.outerSize(); ++k)
      for (SpMat::InnerIterator it(scalar, k); it; ++it) a.add(c * n + it.row(), c * n + it.col(), it.value());
  return a.build();
}

SpMat strain_form(const SimplicialMesh2D& mesh) {
  const int n = mesh.num_vertices();
  linalg::TripletAssembler a(2 * n, 2 * n);
  a.reserve(36 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e = p1_element(mesh, t);
    add_strain<2>(a, mesh.triangles()[t], n, e.area, e.grad);
  }
  return a.build();
}

SpMat boundary_mass(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask) {
  const auto use = all_edges(mesh, edge_mask);
  const auto& x = mesh.vertices();
  linalg::TripletAssembler a(mesh.num_vertices(), mesh.num_vertices());
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
    if (!use[e]) continue;
    const auto& s = mesh.boundary_edges()[e];
    const double len = (x[s[1]] - x[s[0]]).norm();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a.add(s[i], s[j], len * (i == j ? 2.0 : 1.0) / 6.0);
  }
  return a.build();
}

SpMat normal_trace(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask) {
  const auto use = all_edges(mesh, edge_mask);
  const int n = mesh.num_vertices();
  const auto normals = mesh::facet_normals(mesh);
  const auto& x = mesh.vertices();
  linalg::TripletAssembler a(n, 2 * n);
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
    if (!use[e]) continue;
    const auto& s = mesh.boundary_edges()[e];
    const double len = (x[s[1]] - x[s[0]]).norm();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double m = len * (i == j ? 2.0 : 1.0) / 6.0;
        for (int c = 0; c < 2; ++c) a.add(s[i], c * n + s[j], m * normals[e][c]);
      }
  }
  return a.build();
}

Vec boundary_load(const SimplicialMesh2D& mesh, const std::vector<bool>& edge_mask) {
  const auto use = all_edges(mesh, edge_mask);
  const auto& x = mesh.vertices();
  Vec b = Vec::Zero(mesh.num_vertices());
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
    if (!use[e]) continue;
    const auto& s = mesh.boundary_edges()[e];
    const double len = (x[s[1]] - x[s[0]]).norm();
    b[s[0]] += 0.5 * len;
    b[s[1]] += 0.5 * len;
  }
  return b;
}

Vec load_vector(const SimplicialMesh2D& mesh, const std::function<double(const Vec2&)>& f) {
  Vec b = Vec::Zero(mesh.num_vertices());
  const auto& rule = quad::triangle_rule(4);
  const auto& x = mesh.vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.signed_area(t);
    for (const auto& q : rule) {
      const Vec2 p = q.bary[0] * x[tri[0]] + q.bary[1] * x[tri[1]] + q.bary[2] * x[tri[2]];
      const double fv = f(p) * q.weight * area;
      for (int i = 0; i < 3; ++i) b[tri[i]] += fv * q.bary[i];
    }
  }
  return b;
}

double l2_norm_squared(const SimplicialMesh2D& mesh, const Vec& u) {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Eigen::Vector3d ul(u[tri[0]], u[tri[1]], u[tri[2]]);
    s += ul.dot(local_mass(mesh.signed_area(t)) * ul);
  }
  return s;
}

SpMat surface_mass(const SurfaceMesh3D& mesh) {
  linalg::TripletAssembler a(mesh.num_vertices(), mesh.num_vertices());
  a.reserve(9 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Eigen::Matrix3d m = local_mass(mesh.area(t));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a.add(tri[i], tri[j], m(i, j));
  }
  return a.build();
}

SpMat surface_stiffness(const SurfaceMesh3D& mesh) {
  linalg::TripletAssembler a(mesh.num_vertices(), mesh.num_vertices());
  a.reserve(9 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const SurfaceElement e = surface_element(mesh, t);
    const Eigen::Matrix3d k = e.area * e.grad * e.grad.transpose();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a.add(tri[i], tri[j], k(i, j));
  }
  return a.build();
}

SpMat surface_strain_form(const SurfaceMesh3D& mesh) {
  const int n = mesh.num_vertices();
  linalg::TripletAssembler a(3 * n, 3 * n);
  a.reserve(81 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const SurfaceElement e = surface_element(mesh, t);
    add_strain<3>(a, mesh.triangles()[t], n, e.area, e.grad);
  }
  return a.build();
}

std::vector<Vec3> project_normals(const SurfaceMesh3D& mesh) {
  const int n = mesh.num_vertices();
  Mat rhs = Mat::Zero(n, 3);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Vec3 av = mesh.area_vector(t);  // area * unit normal
    for (int i = 0; i < 3; ++i) rhs.row(tri[i]) += av.transpose() / 3.0;
  }
  linalg::SpdFactor m(surface_mass(mesh));
  const Mat nb = m.solve(rhs);
  std::vector<Vec3> out(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 v = nb.row(i).transpose();
    const double len = v.norm();
    if (!(len > 0.0)) throw GeometryError("averaged normal vanishes at vertex " + std::to_string(i));
    out[i] = v / len;
  }
  return out;
}

Vec discrete_mean_curvature(const SurfaceMesh3D& mesh, const std::vector<Vec3>& nbar) {
  Vec rhs = Vec::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const SurfaceElement e = surface_element(mesh, t);
    double div = 0.0;
    for (int a = 0; a < 3; ++a) div += nbar[tri[a]].dot(e.grad.row(a).transpose());
    for (int i = 0; i < 3; ++i) rhs[tri[i]] += div * e.area / 3.0;
  }
  return linalg::SpdFactor(surface_mass(mesh)).solve(rhs);
}

}  // namespace shapeflow::fem
