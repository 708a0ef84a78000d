#include "capbem/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include "capbem/error.hpp"

namespace capbem {

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value))
        throw InvalidArgument(std::string(name) + " must be positive and finite");
}

} // namespace

BoundingBox bounding_box(const std::vector<Vec3>& points)
{
    BoundingBox box;
    if (points.empty())
        return box;
    box.min = box.max = points.front();
    for (const auto& p : points) {
        box.min = box.min.cwiseMin(p);
        box.max = box.max.cwiseMax(p);
    }
    return box;
}

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles))
{
    if (triangles_.empty())
        throw MeshError("mesh has no triangles");
    if (vertices_.size() >= (std::size_t{1} << 32))
        throw MeshError("too many vertices");

    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        for (std::size_t k : triangles_[t]) {
            if (k >= vertices_.size())
                throw MeshIndexError("triangle " + std::to_string(t) + " references vertex " +
                                         std::to_string(k) + " of " + std::to_string(vertices_.size()),
                                     t);
        }
    }
    for (const auto& v : vertices_) {
        if (!v.allFinite())
            throw MeshError("mesh has non-finite vertex coordinates");
    }

    bounds_ = bounding_box(vertices_);
    const double diag = bounds_.diagonal();
    const double min_area = 1e-14 * diag * diag;
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        const Vec3& p0 = vertices_[tri[0]];
        const double area = 0.5 * (vertices_[tri[1]] - p0).cross(vertices_[tri[2]] - p0).norm();
        if (!(area > min_area))
            throw MeshDegenerateError("triangle " + std::to_string(t) + " is degenerate (area " +
                                          std::to_string(area) + ")",
                                      t);
    }

    // Undirected use count and signed direction balance per edge.
    struct Use {
        int count = 0;
        int forward = 0;
    };
    std::unordered_map<std::uint64_t, Use> uses;
    uses.reserve(triangles_.size() * 3 / 2 + 1);
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            const std::size_t a = tri[k];
            const std::size_t b = tri[(k + 1) % 3];
            auto& u = uses[edge_key(a, b)];
            ++u.count;
            u.forward += a < b ? 1 : -1;
        }
    }

    std::vector<Edge> bad;
    for (const auto& [key, use] : uses) {
        if (use.count != 2)
            bad.push_back({static_cast<std::size_t>(key >> 32), static_cast<std::size_t>(key & 0xffffffffu)});
        else if (use.forward != 0)
            oriented_ = false;
    }
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end());
        std::string msg = "mesh is not watertight: " + std::to_string(bad.size()) +
                          " edge(s) not shared by exactly two triangles, first (" +
                          std::to_string(bad.front()[0]) + ", " + std::to_string(bad.front()[1]) + ")";
        throw MeshWatertightError(msg, std::move(bad));
    }
}

SurfaceMesh make_icosphere(double radius, int subdivisions)
{
    require_positive(radius, "radius");
    if (subdivisions < 0 || subdivisions > 7)
        throw InvalidArgument("icosphere subdivisions must be in 0..7, got " + std::to_string(subdivisions));

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : verts)
        v.normalize();

    std::vector<Triangle> tris = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };

    for (int level = 0; level < subdivisions; ++level) {
        // Ordered map keeps vertex numbering independent of hashing.
        std::map<std::uint64_t, std::size_t> midpoint;
        auto mid = [&](std::size_t a, std::size_t b) {
            const auto key = edge_key(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end())
                return it->second;
            verts.push_back((0.5 * (verts[a] + verts[b])).normalized());
            midpoint.emplace(key, verts.size() - 1);
            return verts.size() - 1;
        };
        std::vector<Triangle> next;
        next.reserve(tris.size() * 4);
        for (const auto& t : tris) {
            const std::size_t ab = mid(t[0], t[1]);
            const std::size_t bc = mid(t[1], t[2]);
            const std::size_t ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }

    for (auto& v : verts)
        v *= radius;
    return SurfaceMesh(std::move(verts), std::move(tris));
}

SurfaceMesh make_cube(double side, int panels_per_edge)
{
    require_positive(side, "side");
    if (panels_per_edge < 1)
        throw InvalidArgument("panels per edge must be >= 1");

    const int n = panels_per_edge;
    const double h = side / n;
    const double half = 0.5 * side;

    // Surface lattice points are shared between faces through this map.
    std::map<std::array<int, 3>, std::size_t> index;
    std::vector<Vec3> verts;
    auto vertex = [&](std::array<int, 3> ijk) {
        if (auto it = index.find(ijk); it != index.end())
            return it->second;
        verts.emplace_back(ijk[0] * h - half, ijk[1] * h - half, ijk[2] * h - half);
        index.emplace(ijk, verts.size() - 1);
        return verts.size() - 1;
    };

    std::vector<Triangle> tris;
    tris.reserve(12 * static_cast<std::size_t>(n) * n);
    for (int axis = 0; axis < 3; ++axis) {
        const int u_axis = (axis + 1) % 3;
        const int v_axis = (axis + 2) % 3;
        for (int side_index = 0; side_index < 2; ++side_index) {
            // (u, v, axis) is right-handed, so u x v points along +axis.
            const bool outward_positive = side_index == 1;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    auto corner = [&](int di, int dj) {
                        std::array<int, 3> ijk{};
                        ijk[axis] = side_index * n;
                        ijk[u_axis] = i + di;
                        ijk[v_axis] = j + dj;
                        return vertex(ijk);
                    };
                    const std::size_t p00 = corner(0, 0), p10 = corner(1, 0);
                    const std::size_t p11 = corner(1, 1), p01 = corner(0, 1);
                    if (outward_positive) {
                        tris.push_back({p00, p10, p11});
                        tris.push_back({p00, p11, p01});
                    } else {
                        tris.push_back({p00, p11, p10});
                        tris.push_back({p00, p01, p11});
                    }
                }
            }
        }
    }
    return SurfaceMesh(std::move(verts), std::move(tris));
}

SurfaceMesh make_ellipsoid(double a, double b, double c, int subdivisions)
{
    require_positive(a, "semi-axis a");
    require_positive(b, "semi-axis b");
    require_positive(c, "semi-axis c");
    const SurfaceMesh unit = make_icosphere(1.0, subdivisions);
    std::vector<Vec3> verts = unit.vertices();
    for (auto& v : verts) {
        v.x() *= a;
        v.y() *= b;
        v.z() *= c;
    }
    return SurfaceMesh(std::move(verts), unit.triangles());
}

SurfaceMesh scaled(const SurfaceMesh& mesh, double factor)
{
    require_positive(factor, "scale factor");
    std::vector<Vec3> verts = mesh.vertices();
    for (auto& v : verts)
        v *= factor;
    return SurfaceMesh(std::move(verts), mesh.triangles());
}

SurfaceMesh transformed(const SurfaceMesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& shift)
{
    std::vector<Vec3> verts = mesh.vertices();
    for (auto& v : verts)
        v = rotation * v + shift;
    return SurfaceMesh(std::move(verts), mesh.triangles());
}

} // namespace capbem
