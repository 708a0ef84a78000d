#pragma once

// Capacitance functionals on an assembled Galerkin system.
//
// With A the Galerkin matrix and b the panel areas:
//   solve        A sigma = b,  C = b^T sigma
//   rayleigh     R(v) = (b^T v)^2 / (v^T A v) <= C, equality at v = sigma
//   gauss        G(v) = (v^T A v) / (b^T v)^2 >= 1/C
//   zeroth       C0 = |S|^2 / (1^T A 1) = 4 pi |S|^2 / J,  J = 4 pi 1^T A 1
//   subspace     max of R over span{v_1..v_k} = g^T G^+ g

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capbem/assembly.hpp"
#include "capbem/panels.hpp"

namespace capbem {

enum class SolverKind { automatic, direct, cg };

// Above this size `automatic` picks conjugate gradients.
inline constexpr Eigen::Index kDirectSolveLimit = 8000;

struct ChargeSolution {
    Eigen::VectorXd sigma;
    double capacitance = 0.0;  // b^T sigma; 4 pi for the unit sphere
    double total_charge = 0.0;
    // ||A sigma - b|| / ||b||
    double residual_norm = 0.0;
    int solve_iterations = 0;  // 1 for the direct solve
    SolverKind solver = SolverKind::direct;
};

// Throws SolveError when the Cholesky factorization fails (run spd_check) or
// when CG misses relative residual 1e-10 within 10 n iterations.
ChargeSolution solve_capacitance(const GalerkinSystem& system, SolverKind solver = SolverKind::automatic);

struct BoundValue {
    double value = 0.0;
    bool degenerate = false;
};

BoundValue rayleigh_bound(const GalerkinSystem& system, const Eigen::VectorXd& v);

// Maximum of the Rayleigh functional over the span of the columns of
// `family`. Columns are scaled to unit length, then eigen-directions of the
// Gram matrix below 1e-12 of its largest eigenvalue are dropped.
double subspace_bound(const GalerkinSystem& system, const Eigen::MatrixXd& family);

// Throws InvalidArgument when |b^T v| <= 1e-13 ||b|| ||v||.
double gauss_functional(const GalerkinSystem& system, const Eigen::VectorXd& v);

struct ZerothApproximation {
    double c_zeroth = 0.0;
    double j_integral = 0.0;  // int_S int_S dS dS' / r
};

ZerothApproximation zeroth_capacitance(const GalerkinSystem& system);

// Monomials of total degree <= `degree` (0..2) in panel-centroid coordinates,
// shifted to the area-weighted centre and scaled by the bounding radius.
// Column order: 1 | x y z | x^2 y^2 z^2 xy yz zx.
Eigen::MatrixXd monomial_family(const PanelSystem& panels, int degree);

struct FamilyBound {
    std::string family;
    int size = 0;
    double bound = 0.0;
};

struct BoundLedger {
    double c_zeroth = 0.0;
    double j_integral = 0.0;
    std::vector<FamilyBound> subspace_bounds;  // constant, linear, quadratic
    double gauss_value_at_sigma = 0.0;
    double capacitance = 0.0;
};

BoundLedger bound_ledger(const GalerkinSystem& system, const PanelSystem& panels, const ChargeSolution& solution);

std::string to_string(SolverKind kind);

} // namespace capbem
