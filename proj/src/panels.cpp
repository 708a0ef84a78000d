#include "capbem/panels.hpp"

#include "capbem/error.hpp"

namespace capbem {

PanelSystem::PanelSystem(const SurfaceMesh& mesh)
{
    const auto& vs = mesh.vertices();
    panels_.reserve(mesh.num_triangles());
    for (const auto& t : mesh.triangles())
        panels_.emplace_back(vs[t[0]], vs[t[1]], vs[t[2]]);
    finish();
}

PanelSystem PanelSystem::from_triangles(const std::vector<std::array<Vec3, 3>>& triangles)
{
    if (triangles.empty())
        throw InvalidArgument("panel system needs at least one triangle");
    PanelSystem ps;
    ps.panels_.reserve(triangles.size());
    for (const auto& t : triangles)
        ps.panels_.emplace_back(t[0], t[1], t[2]);
    ps.finish();
    return ps;
}

void PanelSystem::finish()
{
    const auto n = static_cast<Eigen::Index>(panels_.size());
    areas_.resize(n);
    centroids_.resize(n, 3);
    total_area_ = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = panels_[static_cast<std::size_t>(i)];
        areas_[i] = p.area();
        centroids_.row(i) = p.centroid().transpose();
        total_area_ += p.area();
    }
}

PanelSystem build_panels(const SurfaceMesh& mesh)
{
    return PanelSystem(mesh);
}

} // namespace capbem
