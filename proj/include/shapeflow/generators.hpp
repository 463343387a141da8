#pragma once

#include "shapeflow/mesh.hpp"

namespace shapeflow::mesh {

/// Structured grid of nx*ny cells, each split along its (i,j)-(i+1,j+1) diagonal.
SimplicialMesh2D rectangle(double x0, double x1, double y0, double y1, int nx, int ny);
SimplicialMesh2D unit_square(int n);

/// Polar disk: ring k (k = 1..rings) carries round(density * k) points, and
/// neighbouring rings are stitched by angle. Triangle count is
/// 2 * sum(n_k) - n_rings.
SimplicialMesh2D disk(double radius, int rings, double density);
/// Disk whose ring parameters are searched so that it has exactly `triangles` elements.
SimplicialMesh2D disk_with_triangles(double radius, int triangles);

/// [-1,1]^2 minus (0,1)^2 on a structured grid with n cells per unit length.
SimplicialMesh2D l_shape(int n);

/// Box [x0,x1]x[y0,y1] minus the box [hx0,hx1]x[hy0,hy1] on a grid of spacing h;
/// the hole must be grid aligned. Boundary markers: inlet at x0, outlet at x1,
/// walls at y0/y1, obstacle on the hole.
SimplicialMesh2D rectangle_with_hole(double x0, double x1, double y0, double y1, double hx0, double hx1,
                                     double hy0, double hy1, double h);
/// Channel [x0,x1]x[y0,y1] marked inlet/wall/outlet.
SimplicialMesh2D channel(double x0, double x1, double y0, double y1, int nx, int ny);

/// Refined icosahedron projected onto the sphere of the given radius.
SurfaceMesh3D icosphere(double radius, int refinements);
/// Polar cap {polar angle <= theta0} of the sphere of radius R centred at the
/// origin, outward normals. Built from a polar disk template.
SurfaceMesh3D spherical_cap(double radius, double theta0, int rings, double density);
/// Flat disk in the plane z = height, normal +z.
SurfaceMesh3D flat_disk(double radius, double height, int rings, double density);
/// Piece of the cylinder x^2+y^2 = R^2, angle in [-half_angle, half_angle],
/// z in [0, length], outward normals.
SurfaceMesh3D cylinder_patch(double radius, double half_angle, double length, int na, int nz);

/// Closed polygon approximating a circle with vertex angles phi_i + amp*sin(phi_i),
/// phi_i uniform; amp < 1 keeps the ordering.
std::vector<Vec2> nonuniform_circle(double radius, int n, double amp);
/// Polygon on the ellipse (a cos, b sin) with n uniformly spaced parameters.
std::vector<Vec2> ellipse_polygon(double a, double b, int n);
/// Polygon inscribed in the same ellipse with n equal edges, starting at (a, 0).
std::vector<Vec2> equilateral_ellipse_polygon(double a, double b, int n);

}  // namespace shapeflow::mesh
