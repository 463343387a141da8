#include "shapeflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/Geometry>

#include "shapeflow/error.hpp"

namespace shapeflow::mesh {

namespace {

std::string list_indices(const std::vector<int>& idx) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(idx.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << idx[i];
  if (idx.size() > shown) os << ", ... (" << idx.size() << " total)";
  return os.str();
}

double signed_area2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double triangle_min_angle(double a, double b, double c) {
  // law of cosines, angles opposite each side
  auto angle = [](double opp, double s1, double s2) {
    double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
    cosv = std::clamp(cosv, -1.0, 1.0);
    return std::acos(cosv);
  };
  const double m = std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
  return m * 180.0 / std::numbers::pi;
}

template <class V>
MeshQualityReport quality_of(const std::vector<V>& x, const std::vector<Triangle>& tris,
                             const std::function<double(int)>& area_of) {
  if (tris.empty()) throw GeometryError("quality_report: mesh has no triangles");
  MeshQualityReport r;
  r.min_angle = 180.0;
  r.max_aspect_ratio = 0.0;
  double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
  double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
  for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
    const auto& tri = tris[t];
    const double a = (x[tri[1]] - x[tri[2]]).norm();
    const double b = (x[tri[2]] - x[tri[0]]).norm();
    const double c = (x[tri[0]] - x[tri[1]]).norm();
    const double area = area_of(t);
    r.min_angle = std::min(r.min_angle, triangle_min_angle(a, b, c));
    const double longest = std::max({a, b, c});
    const double ar = longest * (a + b + c) / (4.0 * std::sqrt(3.0) * area);
    r.max_aspect_ratio = std::max(r.max_aspect_ratio, ar);
    amin = std::min(amin, area);
    amax = std::max(amax, area);
    emin = std::min({emin, a, b, c});
    emax = std::max({emax, a, b, c});
  }
  r.min_area_ratio = amin / amax;
  r.edge_length_ratio = emax / emin;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// SimplicialMesh2D

SimplicialMesh2D::SimplicialMesh2D(std::vector<Vec2> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int n = num_vertices();
  std::vector<int> bad;
  for (int t = 0; t < num_triangles(); ++t) {
    for (int k : triangles_[t]) {
      if (k < 0 || k >= n) throw GeometryError("triangle " + std::to_string(t) + " references vertex " +
                                               std::to_string(k) + " out of range");
    }
    if (!(signed_area(t) > 0.0)) bad.push_back(t);
  }
  if (!bad.empty())
    throw InversionError("non-positive triangle area in elements " + list_indices(bad), bad);
  build_boundary();
}

void SimplicialMesh2D::build_boundary() {
  // directed edge -> owning triangle; an edge is on the boundary when its
  // reverse never occurs
  std::map<std::pair<int, int>, int> directed;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const std::pair<int, int> e{tri[k], tri[(k + 1) % 3]};
      if (!directed.emplace(e, t).second)
        throw GeometryError("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                            ") used twice with the same orientation");
    }
  }
  std::map<int, std::pair<int, int>> outgoing;  // start vertex -> (end, owner)
  for (const auto& [e, t] : directed) {
    if (directed.count({e.second, e.first})) continue;
    if (!outgoing.emplace(e.first, std::pair{e.second, t}).second)
      throw GeometryError("boundary is not manifold at vertex " + std::to_string(e.first));
  }
  boundary_edges_.clear();
  boundary_owner_.clear();
  loops_.clear();
  std::map<int, bool> used;
  for (const auto& [start, unused] : outgoing) {
    if (used[start]) continue;
    std::vector<int> loop;
    int v = start;
    do {
      auto it = outgoing.find(v);
      if (it == outgoing.end()) throw GeometryError("open boundary chain at vertex " + std::to_string(v));
      used[v] = true;
      loop.push_back(static_cast<int>(boundary_edges_.size()));
      boundary_edges_.push_back({v, it->second.first});
      boundary_owner_.push_back(it->second.second);
      v = it->second.first;
    } while (v != start);
    loops_.push_back(std::move(loop));
  }
}

std::vector<int> SimplicialMesh2D::boundary_vertices() const {
  std::vector<int> out;
  out.reserve(boundary_edges_.size());
  for (const auto& e : boundary_edges_) out.push_back(e[0]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<bool> SimplicialMesh2D::boundary_vertex_mask() const {
  std::vector<bool> m(vertices_.size(), false);
  for (const auto& e : boundary_edges_) m[e[0]] = m[e[1]] = true;
  return m;
}

double SimplicialMesh2D::signed_area(int t) const {
  const auto& tri = triangles_[t];
  return signed_area2d(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

SimplicialMesh2D SimplicialMesh2D::with_markers(std::vector<int> edge_markers) const {
  if (!edge_markers.empty() && edge_markers.size() != boundary_edges_.size())
    throw GeometryError("boundary marker count does not match boundary edge count");
  SimplicialMesh2D out = *this;
  out.markers_ = std::move(edge_markers);
  return out;
}

SimplicialMesh2D SimplicialMesh2D::with_marker_rule(
    const std::function<int(const Vec2&, const Vec2&)>& rule) const {
  std::vector<int> m;
  m.reserve(boundary_edges_.size());
  for (const auto& e : boundary_edges_) m.push_back(rule(vertices_[e[0]], vertices_[e[1]]));
  return with_markers(std::move(m));
}

SimplicialMesh2D SimplicialMesh2D::with_node_markers(const std::vector<int>& node_markers) const {
  if (node_markers.size() != vertices_.size())
    throw GeometryError("node marker count does not match vertex count");
  std::vector<int> m;
  m.reserve(boundary_edges_.size());
  for (const auto& e : boundary_edges_) {
    const int a = node_markers[e[0]], b = node_markers[e[1]];
    if (a == b)
      m.push_back(a);
    else if (a == kWall)
      m.push_back(b);
    else if (b == kWall)
      m.push_back(a);
    else
      m.push_back(std::max(a, b));
  }
  return with_markers(std::move(m));
}

std::vector<int> SimplicialMesh2D::node_markers() const {
  std::vector<int> nm(vertices_.size(), kNoMarker);
  if (markers_.empty()) return nm;
  for (std::size_t e = 0; e < boundary_edges_.size(); ++e) {
    for (int v : boundary_edges_[e]) {
      if (nm[v] == kNoMarker)
        nm[v] = markers_[e];
      else if (nm[v] != markers_[e])
        nm[v] = (nm[v] == kWall || markers_[e] == kWall) ? kWall : std::max(nm[v], markers_[e]);
    }
  }
  return nm;
}

SimplicialMesh2D SimplicialMesh2D::with_vertices(std::vector<Vec2> vertices) const {
  if (vertices.size() != vertices_.size())
    throw GeometryError("with_vertices: vertex count changed");
  std::vector<int> bad;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    if (!(signed_area2d(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) > 0.0)) bad.push_back(t);
  }
  if (!bad.empty())
    throw InversionError("element inversion in triangles " + list_indices(bad), bad);
  SimplicialMesh2D out = *this;
  out.vertices_ = std::move(vertices);
  return out;
}

// ---------------------------------------------------------------------------
// SurfaceMesh3D

SurfaceMesh3D::SurfaceMesh3D(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int n = num_vertices();
  std::vector<int> bad;
  for (int t = 0; t < num_triangles(); ++t) {
    for (int k : triangles_[t]) {
      if (k < 0 || k >= n) throw GeometryError("triangle " + std::to_string(t) + " references vertex " +
                                               std::to_string(k) + " out of range");
    }
    if (!(area(t) > 0.0)) bad.push_back(t);
  }
  if (!bad.empty()) throw InversionError("degenerate surface triangles " + list_indices(bad), bad);

  std::map<std::pair<int, int>, int> directed;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const std::pair<int, int> e{tri[k], tri[(k + 1) % 3]};
      if (!directed.emplace(e, t).second)
        throw GeometryError("inconsistent orientation or non-manifold edge (" + std::to_string(e.first) +
                            "," + std::to_string(e.second) + ")");
    }
  }
  for (const auto& [e, t] : directed) {
    if (directed.count({e.second, e.first})) continue;
    boundary_edges_.push_back({e.first, e.second});
    boundary_owner_.push_back(t);
    boundary_vertices_.push_back(e.first);
    boundary_vertices_.push_back(e.second);
  }
  std::sort(boundary_vertices_.begin(), boundary_vertices_.end());
  boundary_vertices_.erase(std::unique(boundary_vertices_.begin(), boundary_vertices_.end()),
                           boundary_vertices_.end());
}

std::vector<bool> SurfaceMesh3D::boundary_vertex_mask() const {
  std::vector<bool> m(vertices_.size(), false);
  for (int v : boundary_vertices_) m[v] = true;
  return m;
}

Vec3 SurfaceMesh3D::area_vector(int t) const {
  const auto& tri = triangles_[t];
  return 0.5 * (vertices_[tri[1]] - vertices_[tri[0]]).cross(vertices_[tri[2]] - vertices_[tri[0]]);
}

double SurfaceMesh3D::area(int t) const { return area_vector(t).norm(); }

SurfaceMesh3D SurfaceMesh3D::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size())
    throw GeometryError("with_vertices: vertex count changed");
  std::vector<int> bad;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    const Vec3 before = area_vector(t);
    const Vec3 after =
        0.5 * (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
    if (!(after.norm() > 1e-14 * before.norm()) || !(after.dot(before) > 0.0)) bad.push_back(t);
  }
  if (!bad.empty())
    throw InversionError("surface element inversion in triangles " + list_indices(bad), bad);
  SurfaceMesh3D out = *this;
  out.vertices_ = std::move(vertices);
  return out;
}

// ---------------------------------------------------------------------------
// operations

std::vector<Vec2> facet_normals(const SimplicialMesh2D& mesh) {
  const auto& x = mesh.vertices();
  std::vector<Vec2> n;
  n.reserve(mesh.boundary_edges().size());
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
    const auto& s = mesh.boundary_edges()[e];
    const Vec2 t = x[s[1]] - x[s[0]];
    const double len = t.norm();
    if (!(len > 0.0)) throw GeometryError("degenerate boundary edge " + std::to_string(e));
    n.emplace_back(t.y() / len, -t.x() / len);
  }
  return n;
}

std::vector<Vec3> facet_normals(const SurfaceMesh3D& mesh) {
  std::vector<Vec3> n;
  n.reserve(mesh.triangles().size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 a = mesh.area_vector(t);
    const double len = a.norm();
    if (!(len > 0.0)) throw GeometryError("degenerate surface triangle " + std::to_string(t));
    n.push_back(a / len);
  }
  return n;
}

SimplicialMesh2D apply_flow_map(const SimplicialMesh2D& mesh, const std::vector<Vec2>& velocity,
                                double tau) {
  if (velocity.size() != mesh.vertices().size())
    throw GeometryError("apply_flow_map: velocity size does not match vertex count");
  // The area of each triangle along x + s*tau*v is quadratic in s; an element
  // that collapses anywhere on s in (0, 1] counts as inverted even if it
  // reappears with positive orientation at s = 1.
  const auto& x0 = mesh.vertices();
  std::vector<int> bad;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Vec2 e1 = x0[tri[1]] - x0[tri[0]], e2 = x0[tri[2]] - x0[tri[0]];
    const Vec2 d1 = tau * (velocity[tri[1]] - velocity[tri[0]]), d2 = tau * (velocity[tri[2]] - velocity[tri[0]]);
    auto cross = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
    const double c0 = cross(e1, e2), c1 = cross(e1, d2) + cross(d1, e2), c2 = cross(d1, d2);
    double lo = std::min(c0, c0 + c1 + c2);
    if (c2 > 0.0) {
      const double s = -c1 / (2.0 * c2);
      if (s > 0.0 && s < 1.0) lo = std::min(lo, c0 + s * (c1 + s * c2));
    }
    if (!(lo > 0.0)) bad.push_back(t);
  }
  if (!bad.empty()) throw InversionError("element inversion during flow map in triangles " + list_indices(bad), bad);
  std::vector<Vec2> x = x0;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += tau * velocity[i];
  return mesh.with_vertices(std::move(x));
}

SurfaceMesh3D apply_flow_map(const SurfaceMesh3D& mesh, const std::vector<Vec3>& velocity, double tau) {
  if (velocity.size() != mesh.vertices().size())
    throw GeometryError("apply_flow_map: velocity size does not match vertex count");
  std::vector<Vec3> x = mesh.vertices();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += tau * velocity[i];
  return mesh.with_vertices(std::move(x));
}

double enclosed_measure(const SimplicialMesh2D& mesh) {
  double a = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) a += mesh.signed_area(t);
  return a;
}

double enclosed_measure(const SurfaceMesh3D& mesh) {
  if (!mesh.is_closed()) throw GeometryError("enclosed_measure: surface is open");
  double v = 0.0;
  const auto& x = mesh.vertices();
  for (const auto& tri : mesh.triangles()) v += x[tri[0]].dot(x[tri[1]].cross(x[tri[2]])) / 6.0;
  return v;
}

double surface_area(const SurfaceMesh3D& mesh) {
  double a = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) a += mesh.area(t);
  return a;
}

double boundary_length(const SimplicialMesh2D& mesh) {
  double l = 0.0;
  for (const auto& e : mesh.boundary_edges()) l += (mesh.vertices()[e[1]] - mesh.vertices()[e[0]]).norm();
  return l;
}

MeshQualityReport quality_report(const SimplicialMesh2D& mesh) {
  return quality_of(mesh.vertices(), mesh.triangles(), [&](int t) { return mesh.signed_area(t); });
}

MeshQualityReport quality_report(const SurfaceMesh3D& mesh) {
  return quality_of(mesh.vertices(), mesh.triangles(), [&](int t) { return mesh.area(t); });
}

double boundary_edge_length_ratio(const SimplicialMesh2D& mesh) {
  if (mesh.boundary_edges().empty()) throw GeometryError("mesh has no boundary");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& e : mesh.boundary_edges()) {
    const double l = (mesh.vertices()[e[1]] - mesh.vertices()[e[0]]).norm();
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  return hi / lo;
}

Eigen::VectorXd pack(const std::vector<Vec2>& field) {
  const Eigen::Index n = static_cast<Eigen::Index>(field.size());
  Eigen::VectorXd v(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = field[i].x();
    v[n + i] = field[i].y();
  }
  return v;
}

Eigen::VectorXd pack(const std::vector<Vec3>& field) {
  const Eigen::Index n = static_cast<Eigen::Index>(field.size());
  Eigen::VectorXd v(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = field[i].x();
    v[n + i] = field[i].y();
    v[2 * n + i] = field[i].z();
  }
  return v;
}

std::vector<Vec2> unpack2(const Eigen::VectorXd& blocked) {
  const Eigen::Index n = blocked.size() / 2;
  std::vector<Vec2> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = Vec2(blocked[i], blocked[n + i]);
  return out;
}

std::vector<Vec3> unpack3(const Eigen::VectorXd& blocked) {
  const Eigen::Index n = blocked.size() / 3;
  std::vector<Vec3> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = Vec3(blocked[i], blocked[n + i], blocked[2 * n + i]);
  return out;
}

}  // namespace shapeflow::mesh
