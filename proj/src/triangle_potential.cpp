#include "capbem/triangle_potential.hpp"

#include <algorithm>
#include <cmath>

#include "capbem/error.hpp"

namespace capbem {

TriangleGeometry::TriangleGeometry(const Vec3& p0, const Vec3& p1, const Vec3& p2)
    : v_{p0, p1, p2}
{
    const Vec3 cross = (p1 - p0).cross(p2 - p0);
    const double twice_area = cross.norm();
    const double longest = std::max({(p1 - p0).squaredNorm(), (p2 - p1).squaredNorm(), (p0 - p2).squaredNorm()});
    if (!(0.5 * twice_area > 1e-14 * longest))
        throw NumericalError("degenerate triangle");
    area_ = 0.5 * twice_area;
    normal_ = cross / twice_area;
    for (int k = 0; k < 3; ++k) {
        tangent_[k] = (v_[(k + 1) % 3] - v_[k]).normalized();
        outward_[k] = tangent_[k].cross(normal_);
    }
}

// Per edge k with endpoints a = v_k, b = v_{k+1}:
//   t0      signed in-plane distance from the projection of x to the edge
//           line (positive on the triangle side),
//   l-, l+  positions of a and b along the edge relative to the foot point,
//   R0^2 = t0^2 + h^2, R-/+ = |x - a|, |x - b|.
// Then
//   V = sum_k t0 log((R+ + l+) / (R- + l-))
//     - |h| sum_k [atan(t0 l+ / (R0^2 + |h| R+)) - atan(t0 l- / (R0^2 + |h| R-))].
// The log is evaluated in whichever of three equivalent forms avoids the
// cancellation in R + l for l < 0, and the atan difference is folded into a
// single atan2.
double TriangleGeometry::potential(const Vec3& x) const
{
    const std::array<Vec3, 3> r = {v_[0] - x, v_[1] - x, v_[2] - x};
    const std::array<double, 3> dist = {r[0].norm(), r[1].norm(), r[2].norm()};
    const double h = normal_.dot(r[0]);
    const double abs_h = std::abs(h);

    double log_sum = 0.0;
    double angle_sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int k1 = k == 2 ? 0 : k + 1;
        const double t0 = outward_[k].dot(r[k]);
        const double rm = dist[k];
        const double rp = dist[k1];
        // Both terms carry a factor t0. On the edge line t0 is round-off, and
        // at an endpoint the log would be infinite.
        if (std::abs(t0) <= 1e-14 * (rm + rp))
            continue;
        const double lm = tangent_[k].dot(r[k]);
        const double lp = tangent_[k].dot(r[k1]);
        const double r0_sq = t0 * t0 + h * h;

        double log_term;
        if (lm >= 0.0)
            log_term = std::log((rp + lp) / (rm + lm));
        else if (lp <= 0.0)
            log_term = std::log((rm - lm) / (rp - lp));
        else
            log_term = std::log((rp + lp) * (rm - lm) / r0_sq);
        log_sum += t0 * log_term;

        if (abs_h > 0.0) {
            const double alpha = t0 * lp / (r0_sq + abs_h * rp);
            const double beta = t0 * lm / (r0_sq + abs_h * rm);
            // atan(alpha) - atan(beta), exact over the whole range.
            angle_sum += std::atan2(alpha - beta, 1.0 + alpha * beta);
        }
    }
    return log_sum - abs_h * angle_sum;
}

double triangle_potential(const Vec3& x, const TriangleGeometry& tri)
{
    return tri.potential(x);
}

double triangle_potential(const Vec3& x, const Vec3& p0, const Vec3& p1, const Vec3& p2)
{
    return TriangleGeometry(p0, p1, p2).potential(x);
}

} // namespace capbem
