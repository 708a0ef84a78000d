#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace capbem {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<std::size_t, 3>;

struct BoundingBox {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    double diagonal() const { return (max - min).norm(); }
};

// Closed, watertight triangulated surface. Construction validates index
// range, non-degeneracy and that every undirected edge is used by exactly
// two triangles; the mesh is immutable afterwards.
class SurfaceMesh {
public:
    // Throws MeshIndexError, MeshDegenerateError or MeshWatertightError.
    SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_triangles() const noexcept { return triangles_.size(); }
    const BoundingBox& bounds() const noexcept { return bounds_; }

    // False when some edge is traversed in the same direction by both of its
    // triangles. Capacitance does not depend on orientation, so this is only
    // reported, never rejected.
    bool consistently_oriented() const noexcept { return oriented_; }

private:
    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    BoundingBox bounds_;
    bool oriented_ = true;
};

BoundingBox bounding_box(const std::vector<Vec3>& points);

// Icosahedron refined `subdivisions` times (0..7) by edge midpoints, vertices
// projected onto the sphere. 20 * 4^subdivisions outward-oriented triangles.
SurfaceMesh make_icosphere(double radius, int subdivisions);

// Axis-aligned cube centred at the origin, each face cut into
// panels_per_edge^2 squares of two triangles.
SurfaceMesh make_cube(double side, int panels_per_edge);

// Unit icosphere with x, y, z scaled by the semi-axes a, b, c.
SurfaceMesh make_ellipsoid(double a, double b, double c, int subdivisions);

// Vertex-wise transforms; connectivity is kept.
SurfaceMesh scaled(const SurfaceMesh& mesh, double factor);
SurfaceMesh transformed(const SurfaceMesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& shift);

} // namespace capbem
