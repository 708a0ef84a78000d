#pragma once

#include <vector>

#include <Eigen/Core>

#include "capbem/mesh.hpp"
#include "capbem/triangle_potential.hpp"

namespace capbem {

// Flat panels of a surface mesh, one unknown density per panel.
class PanelSystem {
public:
    // Panels of a validated mesh.
    explicit PanelSystem(const SurfaceMesh& mesh);

    // Panels from loose triangles without any watertightness check. Used for
    // single-panel and other hand-built configurations.
    static PanelSystem from_triangles(const std::vector<std::array<Vec3, 3>>& triangles);

    std::size_t size() const noexcept { return panels_.size(); }
    const TriangleGeometry& panel(std::size_t i) const { return panels_[i]; }
    const std::vector<TriangleGeometry>& panels() const noexcept { return panels_; }

    const Eigen::VectorXd& areas() const noexcept { return areas_; }
    // Vertex averages, one row per panel.
    const Eigen::MatrixX3d& centroids() const noexcept { return centroids_; }
    // Sum of panel areas in index order.
    double total_area() const noexcept { return total_area_; }

private:
    PanelSystem() = default;
    void finish();

    std::vector<TriangleGeometry> panels_;
    Eigen::VectorXd areas_;
    Eigen::MatrixX3d centroids_;
    double total_area_ = 0.0;
};

PanelSystem build_panels(const SurfaceMesh& mesh);

} // namespace capbem
