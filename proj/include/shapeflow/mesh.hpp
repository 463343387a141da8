#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace shapeflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;
using Segment = std::array<int, 2>;

namespace mesh {

/// Boundary partition labels. Stokes problems use inlet/wall/outlet/obstacle.
enum Marker : int {
  kNoMarker = 0,
  kInlet = 1,
  kWall = 2,
  kOutlet = 3,
  kObstacle = 4,
};

/// Planar triangulation with counterclockwise triangles.
///
/// Boundary edges are extracted from the triangles and keep the orientation of
/// their owning triangle, so outer loops run counterclockwise and holes run
/// clockwise. The outward normal of every boundary edge is its tangent rotated
/// by 90 degrees clockwise. Edges are stored loop by loop.
class SimplicialMesh2D {
 public:
  SimplicialMesh2D() = default;
  SimplicialMesh2D(std::vector<Vec2> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  const std::vector<Segment>& boundary_edges() const noexcept { return boundary_edges_; }
  /// Owning triangle of each boundary edge.
  const std::vector<int>& boundary_edge_triangle() const noexcept { return boundary_owner_; }
  /// Boundary edge indices grouped by closed loop, in traversal order.
  const std::vector<std::vector<int>>& boundary_loops() const noexcept { return loops_; }
  /// One label per boundary edge, or empty when the mesh carries no partition.
  const std::vector<int>& boundary_markers() const noexcept { return markers_; }
  bool has_markers() const noexcept { return !markers_.empty(); }

  int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles_.size()); }

  /// Sorted indices of the vertices on the boundary.
  std::vector<int> boundary_vertices() const;
  /// Per-vertex flag, true on the boundary.
  std::vector<bool> boundary_vertex_mask() const;

  double signed_area(int t) const;

  SimplicialMesh2D with_markers(std::vector<int> edge_markers) const;
  /// Labels each boundary edge from its endpoints.
  SimplicialMesh2D with_marker_rule(const std::function<int(const Vec2&, const Vec2&)>& rule) const;
  /// Edge label from endpoint labels: equal labels are kept, otherwise the
  /// non-wall label wins so inlet/outlet edges touching a wall corner keep
  /// their own label.
  SimplicialMesh2D with_node_markers(const std::vector<int>& node_markers) const;
  /// Per-vertex labels derived from edge labels (wall wins at shared corners).
  std::vector<int> node_markers() const;

  /// Same connectivity, new coordinates. Throws InversionError if any
  /// triangle ends up with non-positive area.
  SimplicialMesh2D with_vertices(std::vector<Vec2> vertices) const;

 private:
  void build_boundary();

  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Segment> boundary_edges_;
  std::vector<int> boundary_owner_;
  std::vector<std::vector<int>> loops_;
  std::vector<int> markers_;
};

/// Consistently oriented triangulated surface in R^3, open or closed.
class SurfaceMesh3D {
 public:
  SurfaceMesh3D() = default;
  SurfaceMesh3D(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  /// Boundary edges, oriented as in their owning triangle.
  const std::vector<Segment>& boundary_edges() const noexcept { return boundary_edges_; }
  const std::vector<int>& boundary_edge_triangle() const noexcept { return boundary_owner_; }
  /// Sorted vertex indices incident to boundary edges.
  const std::vector<int>& boundary_vertices() const noexcept { return boundary_vertices_; }
  std::vector<bool> boundary_vertex_mask() const;
  bool is_closed() const noexcept { return boundary_edges_.empty(); }

  int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles_.size()); }

  double area(int t) const;
  Vec3 area_vector(int t) const;  ///< (b-a)x(c-a)/2

  /// Same connectivity, new coordinates. Throws InversionError when a triangle
  /// degenerates or flips against its previous orientation.
  SurfaceMesh3D with_vertices(std::vector<Vec3> vertices) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Segment> boundary_edges_;
  std::vector<int> boundary_owner_;
  std::vector<int> boundary_vertices_;
};

struct MeshQualityReport {
  double min_angle = 0.0;         ///< degrees
  double max_aspect_ratio = 0.0;  ///< longest edge * perimeter / (4 sqrt(3) area); 1 if equilateral
  double min_area_ratio = 0.0;    ///< min area / max area
  double edge_length_ratio = 0.0; ///< max / min edge length
};

/// Unit outward normal per boundary edge.
std::vector<Vec2> facet_normals(const SimplicialMesh2D& mesh);
/// Unit normal per triangle, following triangle orientation.
std::vector<Vec3> facet_normals(const SurfaceMesh3D& mesh);

/// Moves every vertex by tau * velocity[i].
SimplicialMesh2D apply_flow_map(const SimplicialMesh2D& mesh, const std::vector<Vec2>& velocity,
                                double tau);
SurfaceMesh3D apply_flow_map(const SurfaceMesh3D& mesh, const std::vector<Vec3>& velocity,
                             double tau);

/// Area of a planar mesh.
double enclosed_measure(const SimplicialMesh2D& mesh);
/// Volume enclosed by a closed surface (divergence theorem).
double enclosed_measure(const SurfaceMesh3D& mesh);
/// Total surface area.
double surface_area(const SurfaceMesh3D& mesh);
/// Total boundary length.
double boundary_length(const SimplicialMesh2D& mesh);

MeshQualityReport quality_report(const SimplicialMesh2D& mesh);
MeshQualityReport quality_report(const SurfaceMesh3D& mesh);

/// Max/min ratio of boundary edge lengths.
double boundary_edge_length_ratio(const SimplicialMesh2D& mesh);

// Vector fields are stored blocked: all x components, then all y (then z).
Eigen::VectorXd pack(const std::vector<Vec2>& field);
Eigen::VectorXd pack(const std::vector<Vec3>& field);
std::vector<Vec2> unpack2(const Eigen::VectorXd& blocked);
std::vector<Vec3> unpack3(const Eigen::VectorXd& blocked);

}  // namespace mesh
}  // namespace shapeflow
