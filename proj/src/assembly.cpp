#include "capbem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include <omp.h>

#include <json.hpp>

#include "capbem/error.hpp"

namespace capbem {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

// Outer quadrature points of every panel, panel-major.
std::vector<Vec3> outer_points(const PanelSystem& panels, const QuadratureRule& rule)
{
    std::vector<Vec3> pts;
    pts.reserve(panels.size() * rule.size());
    for (const auto& tri : panels.panels())
        for (const auto& q : rule.points())
            pts.push_back(tri.at(q.bary));
    return pts;
}

struct Sphere {
    Vec3 centre;
    double radius;
    double diameter;  // longest edge
};

Sphere bounding_sphere(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 g = (a + b + c) / 3.0;
    return {g, std::sqrt(std::max({(a - g).squaredNorm(), (b - g).squaredNorm(), (c - g).squaredNorm()})),
            std::sqrt(std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()}))};
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double boundary_distance(const Vec3& p, const TriangleGeometry& tri)
{
    const auto& v = tri.vertices();
    return std::min({segment_distance(p, v[0], v[1]), segment_distance(p, v[1], v[2]),
                     segment_distance(p, v[2], v[0])});
}

double triangle_distance(const Vec3& p, const TriangleGeometry& tri)
{
    const auto& v = tri.vertices();
    const Vec3& n = tri.normal();
    const double h = n.dot(p - v[0]);
    const Vec3 q = p - h * n;
    bool inside = true;
    for (int k = 0; k < 3; ++k) {
        const Vec3& a = v[k];
        const Vec3& b = v[(k + 1) % 3];
        if ((b - a).cross(q - a).dot(n) < 0.0)
            inside = false;
    }
    return inside ? std::abs(h) : boundary_distance(p, tri);
}

inline double rule_sum(const QuadratureRule& rule, const Vec3* points, const TriangleGeometry& source)
{
    double sum = 0.0;
    const auto& qp = rule.points();
    for (std::size_t q = 0; q < qp.size(); ++q)
        sum += qp[q].weight * source.potential(points[q]);
    return sum;
}

// Integral of V_source over the cell (a, b, c) of area `area`. A cell closer
// to the singular set of V_source than near_ratio times its diameter is split
// at its edge midpoints, down to max_depth levels. The singular set is the
// source panel, or only its boundary when the cell lies in the source panel.
double outer_integral(const QuadratureRule& rule, const AssemblyOptions& opt, const TriangleGeometry& source,
                      bool self, const Vec3& a, const Vec3& b, const Vec3& c, double area, int depth)
{
    const Sphere s = bounding_sphere(a, b, c);
    const double d = (self ? boundary_distance(s.centre, source) : triangle_distance(s.centre, source)) - s.radius;
    if (depth < opt.max_refinement && d < opt.near_ratio * s.diameter) {
        const Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
        const double quarter = 0.25 * area;
        return outer_integral(rule, opt, source, self, a, ab, ca, quarter, depth + 1) +
               outer_integral(rule, opt, source, self, ab, b, bc, quarter, depth + 1) +
               outer_integral(rule, opt, source, self, ca, bc, c, quarter, depth + 1) +
               outer_integral(rule, opt, source, self, ab, bc, ca, quarter, depth + 1);
    }
    std::array<Vec3, 36> pts;
    const auto& qp = rule.points();
    for (std::size_t q = 0; q < qp.size(); ++q)
        pts[q] = qp[q].bary[0] * a + qp[q].bary[1] * b + qp[q].bary[2] * c;
    return area * rule_sum(rule, pts.data(), source);
}

// Shared by the serial and parallel paths so both give identical bits.
// `points` are the plain rule points of panel i.
inline double entry_value(const QuadratureRule& rule, const AssemblyOptions& opt, const TriangleGeometry& pi,
                          const TriangleGeometry& pj, const Sphere& si, const Sphere& sj, const Vec3* points, bool self)
{
    const double gap = (si.centre - sj.centre).norm() - si.radius - sj.radius;
    if (opt.max_refinement > 0 && gap < opt.near_ratio * si.diameter) {
        const auto& v = pi.vertices();
        return kInv4Pi * outer_integral(rule, opt, pj, self, v[0], v[1], v[2], pi.area(), 0);
    }
    return kInv4Pi * (pi.area() * rule_sum(rule, points, pj));
}

Sphere panel_sphere(const TriangleGeometry& p)
{
    return bounding_sphere(p.vertices()[0], p.vertices()[1], p.vertices()[2]);
}

std::vector<Sphere> panel_spheres(const PanelSystem& panels)
{
    std::vector<Sphere> out;
    out.reserve(panels.size());
    for (const auto& p : panels.panels())
        out.push_back(panel_sphere(p));
    return out;
}

AssemblyOptions validate(const QuadratureRule& rule, const AssemblyOptions& options)
{
    if (rule.size() > 36)
        throw InvalidArgument("quadrature rule has too many points");
    const AssemblyOptions opt = options.resolve(rule.degree());
    if (opt.max_refinement > 12 || !std::isfinite(opt.near_ratio))
        throw InvalidArgument("near-field refinement depth must be at most 12");
    return opt;
}

void check_finite(const Eigen::MatrixXd& raw)
{
    for (Eigen::Index j = 0; j < raw.cols(); ++j)
        for (Eigen::Index i = 0; i < raw.rows(); ++i)
            if (!std::isfinite(raw(i, j)))
                throw NumericalError("non-finite Galerkin entry for panel pair (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ")");
}

// In-place averaging with the transpose; returns max |M - M^T| beforehand.
double symmetrize(Eigen::MatrixXd& m)
{
    double asym = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
            const double a = m(i, j);
            const double b = m(j, i);
            asym = std::max(asym, std::abs(a - b));
            const double avg = 0.5 * (a + b);
            m(i, j) = avg;
            m(j, i) = avg;
        }
    return asym;
}

GalerkinSystem finish(Eigen::MatrixXd raw, const PanelSystem& panels)
{
    check_finite(raw);
    const double asym = symmetrize(raw);
    return GalerkinSystem(std::move(raw), panels.areas(), asym);
}

} // namespace

AssemblyOptions AssemblyOptions::resolve(int rule_degree) const
{
    AssemblyOptions out = *this;
    if (out.near_ratio < 0.0)
        out.near_ratio = rule_degree >= 4 ? 1.0 : 2.5;
    if (out.max_refinement < 0)
        out.max_refinement = 6;
    return out;
}

GalerkinSystem::GalerkinSystem(Eigen::MatrixXd matrix, Eigen::VectorXd areas, double asymmetry_norm)
    : matrix_(std::move(matrix)), areas_(std::move(areas)), asymmetry_norm_(asymmetry_norm)
{
    if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols() || matrix_.rows() != areas_.size())
        throw DimensionMismatch("Galerkin system needs a square matrix matching the area vector");
    total_area_ = 0.0;
    for (Eigen::Index i = 0; i < areas_.size(); ++i)
        total_area_ += areas_[i];
    norm_bound_ = matrix_.cwiseAbs().rowwise().sum().maxCoeff();
}

double galerkin_entry(const PanelSystem& panels, const QuadratureRule& rule, std::size_t i, std::size_t j,
                      const AssemblyOptions& options)
{
    const AssemblyOptions opt = validate(rule, options);
    if (i >= panels.size() || j >= panels.size())
        throw InvalidArgument("panel index out of range");
    const auto& pi = panels.panel(i);
    std::vector<Vec3> pts;
    pts.reserve(rule.size());
    for (const auto& q : rule.points())
        pts.push_back(pi.at(q.bary));
    const auto& pj = panels.panel(j);
    return entry_value(rule, opt, pi, pj, panel_sphere(pi), panel_sphere(pj), pts.data(), i == j);
}

GalerkinSystem assemble_serial(const PanelSystem& panels, const QuadratureRule& rule, const AssemblyOptions& options)
{
    const AssemblyOptions opt = validate(rule, options);
    const auto n = static_cast<Eigen::Index>(panels.size());
    Eigen::MatrixXd raw(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            raw(i, j) = galerkin_entry(panels, rule, static_cast<std::size_t>(i), static_cast<std::size_t>(j), opt);
    return finish(std::move(raw), panels);
}

GalerkinSystem assemble(const PanelSystem& panels, const QuadratureRule& rule, const AssemblyOptions& options)
{
    const AssemblyOptions opt = validate(rule, options);
    const auto n = static_cast<Eigen::Index>(panels.size());
    const auto nq = rule.size();
    const std::vector<Vec3> pts = outer_points(panels, rule);
    const std::vector<Sphere> spheres = panel_spheres(panels);
    const auto& tris = panels.panels();

    Eigen::MatrixXd raw(n, n);
    const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        const Vec3* row_pts = pts.data() + row * nq;
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto col = static_cast<std::size_t>(j);
            raw(i, j) = entry_value(rule, opt, tris[row], tris[col], spheres[row], spheres[col], row_pts, row == col);
        }
    }
    return finish(std::move(raw), panels);
}

SpdDiagnostics spd_check(const GalerkinSystem& system, std::uint64_t seed)
{
    SpdDiagnostics diag;
    const Eigen::MatrixXd& a = system.matrix();
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    diag.cholesky_succeeded = llt.info() == Eigen::Success;

    if (!diag.cholesky_succeeded) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success)
            throw NumericalError("eigenvalue computation failed during SPD check");
        diag.min_eigenvalue = eig.eigenvalues()[0];
        return diag;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd x(a.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = 1.0 + 0.5 * uni(rng);
    x.normalize();

    // With y = A^-1 x the Rayleigh quotient of y is (x.y)/(y.y), so no
    // product with A is needed per step.
    double estimate = x.dot(a * x);
    for (int it = 1; it <= 200; ++it) {
        const Eigen::VectorXd y = llt.solve(x);
        const double yy = y.squaredNorm();
        const double next = x.dot(y) / yy;
        x = y / std::sqrt(yy);
        diag.iterations = it;
        const bool converged = std::abs(next - estimate) <= 1e-8 * std::abs(next);
        estimate = next;
        if (converged)
            break;
    }
    diag.min_eigenvalue = estimate;
    return diag;
}

void dump_matrix(const GalerkinSystem& system, const std::filesystem::path& binary_path,
                 const std::filesystem::path& sidecar_path)
{
    std::ofstream bin(binary_path, std::ios::binary);
    if (!bin)
        throw IoError("cannot open " + binary_path.string() + " for writing");
    const Eigen::Index n = system.size();
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            row[static_cast<std::size_t>(j)] = system.matrix()(i, j);
        bin.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!bin)
        throw IoError("write to " + binary_path.string() + " failed");

    nlohmann::json side;
    side["n"] = n;
    side["areas"] = std::vector<double>(system.areas().begin(), system.areas().end());
    side["totalArea"] = system.total_area();
    std::ofstream js(sidecar_path);
    if (!js)
        throw IoError("cannot open " + sidecar_path.string() + " for writing");
    js << side.dump(2) << '\n';
}

} // namespace capbem
