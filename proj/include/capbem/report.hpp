#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "capbem/assembly.hpp"
#include "capbem/capacitance.hpp"
#include "capbem/mesh.hpp"
#include "capbem/varprinciple.hpp"

namespace capbem {

struct SolveSettings {
    int quad_order = 4;
    SolverKind solver = SolverKind::automatic;
    int threads = 0;
    // Start vector of the inverse iteration in spd_check.
    std::uint64_t seed = 0;
};

struct PhaseTimings {
    double panels = 0.0;
    double assembly = 0.0;
    double spd_check = 0.0;
    double solve = 0.0;
    double bounds = 0.0;
};

struct CapacitanceReport {
    std::size_t num_panels = 0;
    std::size_t num_vertices = 0;
    double total_area = 0.0;
    BoundingBox bounds;
    bool consistently_oriented = true;

    double capacitance = 0.0;
    double residual_norm = 0.0;
    int solve_iterations = 0;
    SolverKind solver = SolverKind::direct;

    BoundLedger ledger;
    SpdDiagnostics spd;
    double asymmetry_norm = 0.0;

    SolveSettings settings;
    PhaseTimings timings;
};

// build_panels -> assemble -> spd_check -> solve_capacitance -> bound_ledger.
// Throws SolveError when the system is not positive definite. `inspect`, if
// set, sees the assembled system before the SPD check.
CapacitanceReport solve_mesh(const SurfaceMesh& mesh, const SolveSettings& settings,
                             const std::function<void(const GalerkinSystem&)>& inspect = {});

// "capreport/1". Worker count and timings live under "runtime", the only
// part that may differ between runs with identical settings.
nlohmann::json to_json(const CapacitanceReport& report, const nlohmann::json& source);

// Analytic capacitance (unit sphere -> 4 pi) of the ellipsoid with semi-axes
// a, b, c: 8 pi / int_0^inf ds / sqrt((a^2+s)(b^2+s)(c^2+s)).
double ellipsoid_capacitance(double a, double b, double c);

struct ConvergenceLevel {
    int parameter = 0;  // subdivisions or panels per edge
    double h = 0.0;     // relative mesh size
    std::size_t num_panels = 0;
    double capacitance = 0.0;
    double c_zeroth = 0.0;
    double error_vs_extrapolated = 0.0;
    std::optional<double> error_vs_exact;
    // Order from this level and the two before it (|C_{k-2}-C_{k-1}| / |C_{k-1}-C_k|).
    std::optional<double> observed_order;
    // Order of the error against the exact value, from this level and the previous one.
    std::optional<double> exact_order;
};

struct RichardsonPair {
    int coarse = 0;
    int fine = 0;
    double capacitance = 0.0;
};

struct ConvergenceStudy {
    std::vector<ConvergenceLevel> levels;
    // Three-level extrapolation with the observed order when at least three
    // levels exist, otherwise the pairwise value with the nominal order.
    double extrapolated = 0.0;
    std::optional<double> extrapolation_order;
    double nominal_order = 1.0;
    // Pairwise extrapolations C_f + (C_f - C_c) / (r^p - 1) with p = nominal_order.
    std::vector<RichardsonPair> pairs;
    std::optional<double> exact;
};

struct LevelInput {
    int parameter = 0;
    double h = 0.0;
    std::function<SurfaceMesh()> make;
};

// Throws InvalidArgument for fewer than two levels or non-decreasing h.
ConvergenceStudy run_convergence(const std::vector<LevelInput>& levels, const SolveSettings& settings,
                                 double nominal_order, std::optional<double> exact);

// Same study from precomputed capacitances (C, C0) per level.
ConvergenceStudy richardson_study(const std::vector<ConvergenceLevel>& levels, double nominal_order,
                                  std::optional<double> exact);

nlohmann::json to_json(const ConvergenceStudy& study, const nlohmann::json& source);
std::string to_table(const ConvergenceStudy& study);

// "principlereport/1".
nlohmann::json to_json(const SymmetricForm& form, const PrincipleReport& report);

} // namespace capbem
