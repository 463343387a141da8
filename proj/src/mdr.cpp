#include "shapeflow/mdr.hpp"

#include <Eigen/Dense>

#include "shapeflow/error.hpp"
#include "shapeflow/fem.hpp"

namespace shapeflow::mdr {

namespace {

using linalg::Mat;

// rows of `a` at the given indices
SpMat select_rows(const SpMat& a, const std::vector<int>& rows) {
  linalg::TripletAssembler p(static_cast<int>(rows.size()), static_cast<int>(a.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) p.add(static_cast<int>(i), rows[i], 1.0);
  return SpMat(p.build() * a);
}

// translations and the rotation about the centroid, blocked
Mat rigid_modes(const SimplicialMesh2D& mesh) {
  const int n = mesh.num_vertices();
  Vec2 c = Vec2::Zero();
  for (const Vec2& x : mesh.vertices()) c += x;
  c /= n;
  Mat r = Mat::Zero(2 * n, 3);
  for (int i = 0; i < n; ++i) {
    const Vec2 d = mesh.vertices()[i] - c;
    r(i, 0) = 1.0;
    r(n + i, 1) = 1.0;
    r(i, 2) = -d.y();
    r(n + i, 2) = d.x();
  }
  return r;
}

}  // namespace

double deformation_energy(const SimplicialMesh2D& mesh, const Vec& v) {
  return 0.5 * v.dot(fem::strain_form(mesh) * v);
}

MdrSolution solve_mdr_rhs(const SimplicialMesh2D& mesh, const Vec& rhs) {
  const int n = mesh.num_vertices();
  if (rhs.size() != n) throw Error("solve_mdr: constraint right side must have one entry per vertex");
  const std::vector<int> bnd = mesh.boundary_vertices();
  if (bnd.empty()) throw SolverError("solve_mdr: mesh has no boundary, the constraint is empty", 1.0);

  const SpMat k = fem::strain_form(mesh);
  const SpMat bb = select_rows(fem::normal_trace(mesh), bnd);

  // Rigid motions whose normal trace vanishes stay in the kernel of the
  // whole system (the rotation of a disk). Pin them with r^T M w = 0.
  const Mat r = rigid_modes(mesh);
  const Mat c = Mat(bb * r);
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullV);
  const double smax = svd.singularValues()[0];
  std::vector<Vec> gauge;
  for (int i = 0; i < 3; ++i) {
    const double s = i < svd.singularValues().size() ? svd.singularValues()[i] : 0.0;
    if (s <= 1e-9 * smax) gauge.push_back(r * svd.matrixV().col(i));
  }
  const SpMat mv = fem::vector_block(fem::mass_matrix(mesh), 2);

  const int nb = static_cast<int>(bnd.size());
  const int ng = static_cast<int>(gauge.size());
  linalg::TripletAssembler full(nb + ng, 2 * n);
  for (int col = 0; col < bb.outerSize(); ++col)
    for (SpMat::InnerIterator it(bb, col); it; ++it) full.add(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int g = 0; g < ng; ++g) {
    const Vec row = mv * gauge[g];
    for (int j = 0; j < 2 * n; ++j) full.add(nb + g, j, row[j]);
  }
  Vec g_rhs = Vec::Zero(nb + ng);
  for (int i = 0; i < nb; ++i) g_rhs[i] = rhs[bnd[i]];

  const linalg::SaddleSolution s = linalg::solve_saddle(k, full.build(), Vec::Zero(2 * n), g_rhs);
  MdrSolution out;
  out.w = s.primal;
  // The first block equation reads K w + B^T y = 0, so kappa = -y.
  out.kappa = Vec::Zero(n);
  for (int i = 0; i < nb; ++i) out.kappa[bnd[i]] = -s.multiplier[i];
  out.energy = 0.5 * out.w.dot(k * out.w);
  out.gauge_rows = ng;
  return out;
}

MdrSolution solve_mdr(const SimplicialMesh2D& mesh, const Vec& normal_data) {
  if (normal_data.size() != mesh.num_vertices()) throw Error("solve_mdr: normal data must be nodal");
  return solve_mdr_rhs(mesh, fem::boundary_mass(mesh) * normal_data);
}

MdrSolution solve_mdr_velocity(const SimplicialMesh2D& mesh, const Vec& v) {
  if (v.size() != 2 * mesh.num_vertices()) throw Error("solve_mdr: velocity must be blocked 2N");
  return solve_mdr_rhs(mesh, fem::normal_trace(mesh) * v);
}

Vec harmonic_extension(const SimplicialMesh2D& mesh, const Vec& boundary_values) {
  const int n = mesh.num_vertices();
  if (boundary_values.size() != 2 * n) throw Error("harmonic_extension: data must be blocked 2N");
  const auto bnd = mesh.boundary_vertex_mask();
  const SpMat k0 = fem::stiffness_matrix(mesh);
  Vec out(2 * n);
  for (int c = 0; c < 2; ++c) {
    SpMat k = k0;
    Vec b = Vec::Zero(n);
    const Vec vals = boundary_values.segment(c * n, n);
    linalg::apply_dirichlet(k, b, bnd, vals);
    out.segment(c * n, n) = linalg::solve_spd({k}, b);
  }
  return out;
}

}  // namespace shapeflow::mdr
