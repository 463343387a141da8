#pragma once

#include <filesystem>

#include "shapeflow/mesh.hpp"

namespace shapeflow::mesh {

// ASCII OFF. Planar meshes are written with z = 0 and read back by dropping z;
// clockwise triangles in a planar OFF file are flipped on read.
SimplicialMesh2D read_off_2d(const std::filesystem::path& path);
SurfaceMesh3D read_off_surface(const std::filesystem::path& path);
void write_off(const std::filesystem::path& path, const SimplicialMesh2D& mesh);
void write_off(const std::filesystem::path& path, const SurfaceMesh3D& mesh);

/// Node/element CSV pair: `<stem>.node.csv` with header "x,y[,marker]" and
/// `<stem>.ele.csv` with header "v0,v1,v2". Node markers are turned into edge
/// markers with SimplicialMesh2D::with_node_markers.
SimplicialMesh2D read_node_ele(const std::filesystem::path& stem);
void write_node_ele(const std::filesystem::path& stem, const SimplicialMesh2D& mesh);

/// Dispatch on file name: `*.off` or `*.node.csv` / `*.ele.csv`.
SimplicialMesh2D read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const SimplicialMesh2D& mesh);

}  // namespace shapeflow::mesh
