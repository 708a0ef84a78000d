#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "capbem/panels.hpp"
#include "capbem/quadrature.hpp"

namespace capbem {

// Dense Galerkin matrix of the single-layer operator with kernel
// 1/(4 pi |s - t|) on piecewise-constant panel densities:
//
//     A(i, j) = 1/(4 pi) * int_{T_i} int_{T_j} dS(t) dS(s) / |s - t|
//
// together with the right-hand side b (panel areas), i.e. the Galerkin image
// of the constant potential 1.
class GalerkinSystem {
public:
    GalerkinSystem() = default;
    // Hand-built systems. `matrix` must be square and match `areas`.
    GalerkinSystem(Eigen::MatrixXd matrix, Eigen::VectorXd areas, double asymmetry_norm = 0.0);

    Eigen::Index size() const noexcept { return matrix_.rows(); }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    const Eigen::VectorXd& areas() const noexcept { return areas_; }
    double total_area() const noexcept { return total_area_; }
    // max |M - M^T| of the raw matrix before averaging.
    double asymmetry_norm() const noexcept { return asymmetry_norm_; }
    // Max absolute row sum; an upper bound for the spectral norm.
    double norm_bound() const noexcept { return norm_bound_; }

private:
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd areas_;
    double total_area_ = 0.0;
    double asymmetry_norm_ = 0.0;
    double norm_bound_ = 0.0;
};

struct AssemblyOptions {
    // OpenMP worker count; 0 keeps the runtime default.
    int threads = 0;
    // Outer-integration cells whose distance to the source panel (to its
    // boundary, for the diagonal) is below near_ratio times the cell diameter
    // are split into four, at most max_refinement times; max_refinement = 0
    // disables. Negative values select the defaults of resolve(): depth 6,
    // ratio 1 for degree >= 4 and 2.5 below.
    double near_ratio = -1.0;
    int max_refinement = -1;

    AssemblyOptions resolve(int rule_degree) const;
};

// Row-parallel assembly. Row i is written by one worker, and every entry sums
// its quadrature points in a fixed order, so the result does not depend on
// the worker count. Throws NumericalError naming the first non-finite entry.
GalerkinSystem assemble(const PanelSystem& panels, const QuadratureRule& rule,
                        const AssemblyOptions& options = {});

// Serial reference of the same computation, one galerkin_entry per entry.
GalerkinSystem assemble_serial(const PanelSystem& panels, const QuadratureRule& rule,
                               const AssemblyOptions& options = {});

// Raw (unsymmetrized) entry (i, j): outer rule on panel i, refined near the
// singular set, with the exact inner integral over panel j.
double galerkin_entry(const PanelSystem& panels, const QuadratureRule& rule, std::size_t i, std::size_t j,
                      const AssemblyOptions& options = {});

struct SpdDiagnostics {
    double min_eigenvalue = 0.0;
    bool cholesky_succeeded = false;
    int iterations = 0;
};

// Cholesky attempt plus an estimate of the smallest eigenvalue. With a
// successful factorization the estimate comes from inverse power iteration
// (at most 200 steps, relative tolerance 1e-8) started from a seeded vector;
// otherwise the full symmetric spectrum is computed.
SpdDiagnostics spd_check(const GalerkinSystem& system, std::uint64_t seed = 0);

// Row-major float64 dump of the matrix plus JSON sidecar {n, areas, totalArea}.
void dump_matrix(const GalerkinSystem& system, const std::filesystem::path& binary_path,
                 const std::filesystem::path& sidecar_path);

} // namespace capbem
