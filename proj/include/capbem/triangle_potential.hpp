#pragma once

#include <array>

#include "capbem/mesh.hpp"

namespace capbem {

// Planar triangle with the per-edge frames the closed-form potential needs.
// Edge k runs from vertex k to vertex (k+1) % 3.
class TriangleGeometry {
public:
    // Throws NumericalError if the area is not above 1e-14 * (longest edge)^2.
    TriangleGeometry(const Vec3& p0, const Vec3& p1, const Vec3& p2);

    const std::array<Vec3, 3>& vertices() const noexcept { return v_; }
    const Vec3& normal() const noexcept { return normal_; }
    double area() const noexcept { return area_; }
    Vec3 centroid() const { return (v_[0] + v_[1] + v_[2]) / 3.0; }

    // Point at barycentric weights (b0, b1, b2).
    Vec3 at(const std::array<double, 3>& bary) const
    {
        return bary[0] * v_[0] + bary[1] * v_[1] + bary[2] * v_[2];
    }

    // Integral of 1/|x - y| over y in the triangle.
    double potential(const Vec3& x) const;

private:
    std::array<Vec3, 3> v_;
    std::array<Vec3, 3> tangent_;  // unit edge directions
    std::array<Vec3, 3> outward_;  // in-plane unit normals pointing out of the triangle
    Vec3 normal_;
    double area_ = 0.0;
};

// Closed-form single-layer potential of unit density on a flat triangle,
//     V(x) = int_T dS(y) / |x - y|,
// finite everywhere including on the triangle, its edges and vertices.
// The 1/(4 pi) kernel factor is not included.
double triangle_potential(const Vec3& x, const TriangleGeometry& tri);
double triangle_potential(const Vec3& x, const Vec3& p0, const Vec3& p1, const Vec3& p2);

} // namespace capbem
