#include "capbem/report.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "capbem/error.hpp"
#include "capbem/panels.hpp"
#include "capbem/quadrature.hpp"

namespace capbem {

using nlohmann::json;

namespace {

class Stopwatch {
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json vec_json(const Vec3& v)
{
    return json::array({v.x(), v.y(), v.z()});
}

json vector_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

json optional_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

constexpr double kFourPi = 4.0 * std::numbers::pi;

} // namespace

CapacitanceReport solve_mesh(const SurfaceMesh& mesh, const SolveSettings& settings,
                             const std::function<void(const GalerkinSystem&)>& inspect)
{
    CapacitanceReport report;
    report.settings = settings;
    report.num_vertices = mesh.vertices().size();
    report.bounds = mesh.bounds();
    report.consistently_oriented = mesh.consistently_oriented();

    Stopwatch clock;
    const PanelSystem panels = build_panels(mesh);
    report.timings.panels = clock.lap();

    const QuadratureRule rule = QuadratureRule::triangle(settings.quad_order);
    AssemblyOptions options;
    options.threads = settings.threads;
    const GalerkinSystem system = assemble(panels, rule, options);
    report.timings.assembly = clock.lap();

    report.num_panels = panels.size();
    report.total_area = system.total_area();
    report.asymmetry_norm = system.asymmetry_norm();
    if (inspect)
        inspect(system);

    report.spd = spd_check(system, settings.seed);
    report.timings.spd_check = clock.lap();
    if (!report.spd.cholesky_succeeded || !(report.spd.min_eigenvalue > 0.0)) {
        std::ostringstream msg;
        msg << "Galerkin matrix is not positive definite (min eigenvalue " << report.spd.min_eigenvalue << ")";
        throw SolveError(msg.str(), std::nan(""));
    }

    const ChargeSolution solution = solve_capacitance(system, settings.solver);
    report.timings.solve = clock.lap();
    report.capacitance = solution.capacitance;
    report.residual_norm = solution.residual_norm;
    report.solve_iterations = solution.solve_iterations;
    report.solver = solution.solver;

    report.ledger = bound_ledger(system, panels, solution);
    report.timings.bounds = clock.lap();
    return report;
}

json to_json(const CapacitanceReport& r, const json& source)
{
    json bounds = json::array();
    for (const auto& b : r.ledger.subspace_bounds)
        bounds.push_back({{"family", b.family}, {"size", b.size}, {"bound", b.bound},
                          {"bound_over_4pi", b.bound / kFourPi}});

    return {
        {"schema", "capreport/1"},
        {"source", source},
        {"settings",
         {{"quadOrder", r.settings.quad_order},
          {"solver", to_string(r.settings.solver)},
          {"seed", r.settings.seed}}},
        {"mesh",
         {{"panels", r.num_panels},
          {"vertices", r.num_vertices},
          {"totalArea", r.total_area},
          {"boundingBox", {{"min", vec_json(r.bounds.min)}, {"max", vec_json(r.bounds.max)}}},
          {"consistentlyOriented", r.consistently_oriented}}},
        {"capacitance",
         {{"C", r.capacitance},
          {"C_over_4pi", r.capacitance / kFourPi},
          {"residualNorm", r.residual_norm},
          {"solver", to_string(r.solver)},
          {"solveIterations", r.solve_iterations}}},
        {"zeroth",
         {{"cZeroth", r.ledger.c_zeroth},
          {"cZeroth_over_4pi", r.ledger.c_zeroth / kFourPi},
          {"J", r.ledger.j_integral}}},
        {"subspaceBounds", bounds},
        {"gaussValueAtSigma", r.ledger.gauss_value_at_sigma},
        {"spd",
         {{"minEigenvalue", r.spd.min_eigenvalue},
          {"choleskySucceeded", r.spd.cholesky_succeeded},
          {"asymmetryNorm", r.asymmetry_norm},
          {"iterations", r.spd.iterations}}},
        {"runtime",
         {{"threads", r.settings.threads},
          {"timings",
           {{"panels", r.timings.panels},
            {"assembly", r.timings.assembly},
            {"spdCheck", r.timings.spd_check},
            {"solve", r.timings.solve},
            {"bounds", r.timings.bounds}}}}},
    };
}

double ellipsoid_capacitance(double a, double b, double c)
{
    if (!(a > 0.0 && b > 0.0 && c > 0.0))
        throw InvalidArgument("semi-axes must be positive");
    // s = m tan^2(t) maps [0, pi/2) onto [0, inf) and leaves a smooth
    // integrand, so plain Gauss-Legendre converges fast.
    const double m = (a * a + b * b + c * c) / 3.0;
    std::vector<double> nodes, weights;
    gauss_legendre_unit(64, nodes, weights);
    const double half_pi = 0.5 * std::numbers::pi;
    double integral = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double t = half_pi * nodes[q];
        const double tn = std::tan(t);
        const double sec = 1.0 / std::cos(t);
        const double s = m * tn * tn;
        const double ds = 2.0 * m * tn * sec * sec;
        integral += weights[q] * half_pi * ds / std::sqrt((a * a + s) * (b * b + s) * (c * c + s));
    }
    return 8.0 * std::numbers::pi / integral;
}

ConvergenceStudy richardson_study(const std::vector<ConvergenceLevel>& input, double nominal_order,
                                  std::optional<double> exact)
{
    if (input.size() < 2)
        throw InvalidArgument("a convergence study needs at least two refinements");
    if (!(nominal_order > 0.0))
        throw InvalidArgument("nominal order must be positive");
    for (std::size_t k = 1; k < input.size(); ++k) {
        if (!(input[k].h < input[k - 1].h))
            throw InvalidArgument("refinements must be listed coarse to fine");
    }

    ConvergenceStudy study;
    study.levels = input;
    study.nominal_order = nominal_order;
    study.exact = exact;
    auto& lv = study.levels;
    const std::size_t n = lv.size();

    for (std::size_t k = 1; k < n; ++k) {
        const double r = lv[k - 1].h / lv[k].h;
        const double cf = lv[k].capacitance;
        const double cc = lv[k - 1].capacitance;
        study.pairs.push_back({lv[k - 1].parameter, lv[k].parameter,
                               cf + (cf - cc) / (std::pow(r, nominal_order) - 1.0)});
    }

    for (std::size_t k = 2; k < n; ++k) {
        const double d1 = lv[k - 1].capacitance - lv[k - 2].capacitance;
        const double d2 = lv[k].capacitance - lv[k - 1].capacitance;
        const double r = lv[k - 1].h / lv[k].h;
        if (d1 != 0.0 && d2 != 0.0 && d1 * d2 > 0.0)
            lv[k].observed_order = std::log(std::abs(d1 / d2)) / std::log(r);
    }

    study.extrapolated = study.pairs.back().capacitance;
    if (n >= 3 && lv[n - 1].observed_order && *lv[n - 1].observed_order > 0.0) {
        const double p = *lv[n - 1].observed_order;
        const double r = lv[n - 2].h / lv[n - 1].h;
        const double cf = lv[n - 1].capacitance;
        study.extrapolated = cf + (cf - lv[n - 2].capacitance) / (std::pow(r, p) - 1.0);
        study.extrapolation_order = p;
    }

    for (std::size_t k = 0; k < n; ++k) {
        lv[k].error_vs_extrapolated = std::abs(lv[k].capacitance - study.extrapolated) / std::abs(study.extrapolated);
        if (exact) {
            lv[k].error_vs_exact = std::abs(lv[k].capacitance - *exact) / *exact;
            if (k > 0 && *lv[k].error_vs_exact > 0.0 && *lv[k - 1].error_vs_exact > 0.0)
                lv[k].exact_order = std::log(*lv[k - 1].error_vs_exact / *lv[k].error_vs_exact) /
                                    std::log(lv[k - 1].h / lv[k].h);
        }
    }
    return study;
}

ConvergenceStudy run_convergence(const std::vector<LevelInput>& levels, const SolveSettings& settings,
                                 double nominal_order, std::optional<double> exact)
{
    if (levels.size() < 2)
        throw InvalidArgument("a convergence study needs at least two refinements");
    std::vector<ConvergenceLevel> rows;
    for (const auto& in : levels) {
        if (!rows.empty() && !(in.h < rows.back().h))
            throw InvalidArgument("refinements must be listed coarse to fine");
        const CapacitanceReport rep = solve_mesh(in.make(), settings);
        ConvergenceLevel row;
        row.parameter = in.parameter;
        row.h = in.h;
        row.num_panels = rep.num_panels;
        row.capacitance = rep.capacitance;
        row.c_zeroth = rep.ledger.c_zeroth;
        rows.push_back(row);
    }
    return richardson_study(rows, nominal_order, exact);
}

json to_json(const ConvergenceStudy& s, const json& source)
{
    json levels = json::array();
    for (const auto& l : s.levels) {
        levels.push_back({
            {"parameter", l.parameter},
            {"h", l.h},
            {"panels", l.num_panels},
            {"C", l.capacitance},
            {"C_over_4pi", l.capacitance / kFourPi},
            {"cZeroth", l.c_zeroth},
            {"cZeroth_over_4pi", l.c_zeroth / kFourPi},
            {"errorVsExtrapolated", l.error_vs_extrapolated},
            {"errorVsExact", optional_json(l.error_vs_exact)},
            {"observedOrder", optional_json(l.observed_order)},
            {"exactOrder", optional_json(l.exact_order)},
        });
    }
    json pairs = json::array();
    for (const auto& p : s.pairs)
        pairs.push_back({{"levels", {p.coarse, p.fine}}, {"C", p.capacitance}, {"C_over_4pi", p.capacitance / kFourPi}});

    return {
        {"schema", "capconverge/1"},
        {"source", source},
        {"levels", levels},
        {"extrapolated",
         {{"C", s.extrapolated}, {"C_over_4pi", s.extrapolated / kFourPi}, {"order", optional_json(s.extrapolation_order)}}},
        {"nominalOrder", s.nominal_order},
        {"pairwise", pairs},
        {"exact", optional_json(s.exact)},
    };
}

std::string to_table(const ConvergenceStudy& s)
{
    std::ostringstream out;
    auto opt = [](const std::optional<double>& v, int prec) {
        std::ostringstream o;
        if (v)
            o << std::fixed << std::setprecision(prec) << *v;
        else
            o << "-";
        return o.str();
    };
    out << std::setw(6) << "level" << std::setw(8) << "panels" << std::setw(14) << "C/4pi" << std::setw(14) << "C0/4pi"
        << std::setw(12) << "err(extr)" << std::setw(12) << "err(exact)" << std::setw(8) << "order" << '\n';
    for (const auto& l : s.levels) {
        std::ostringstream err;
        err << std::scientific << std::setprecision(3) << l.error_vs_extrapolated;
        std::string exact_err = "-";
        if (l.error_vs_exact) {
            std::ostringstream e;
            e << std::scientific << std::setprecision(3) << *l.error_vs_exact;
            exact_err = e.str();
        }
        const auto& order = l.exact_order ? l.exact_order : l.observed_order;
        out << std::setw(6) << l.parameter << std::setw(8) << l.num_panels << std::fixed << std::setprecision(8)
            << std::setw(14) << l.capacitance / kFourPi << std::setw(14) << l.c_zeroth / kFourPi << std::setw(12)
            << err.str() << std::setw(12) << exact_err << std::setw(8) << opt(order, 2) << '\n';
    }
    out << std::fixed << std::setprecision(8);
    for (const auto& p : s.pairs)
        out << "richardson(" << p.coarse << "," << p.fine << ", p=" << std::setprecision(2) << s.nominal_order
            << std::setprecision(8) << ")  C/4pi = " << p.capacitance / kFourPi << '\n';
    out << "extrapolated C/4pi = " << s.extrapolated / kFourPi;
    if (s.extrapolation_order)
        out << "  (observed order " << std::setprecision(2) << *s.extrapolation_order << ")";
    out << '\n';
    if (s.exact)
        out << "exact C/4pi = " << std::setprecision(8) << *s.exact / kFourPi << '\n';
    return out.str();
}

json to_json(const SymmetricForm& form, const PrincipleReport& r)
{
    json witness = nullptr;
    if (r.witness) {
        const auto& w = *r.witness;
        witness = {
            {"z", vector_json(w.z)},
            {"w", vector_json(w.w)},
            {"a", w.a},
            {"b", w.b},
            {"c", w.c},
            {"lambda1", w.lambda1},
            {"lambda2", w.lambda2},
            {"lambdaStar", w.lambda_star},
            {"v", vector_json(w.v_star)},
            {"quotient", w.quotient},
        };
    }
    return {
        {"schema", "principlereport/1"},
        {"n", form.n()},
        {"eigenvalues", vector_json(form.eigenvalues())},
        {"classification", std::string(to_string(r.classification))},
        {"quadraticFormAtU", r.quadratic_form_at_u},
        {"bestQuotient", r.best_quotient},
        {"attainedAtU", r.attained_at_u},
        {"holdsOnProbes", r.holds_on_probes},
        {"probes", r.probes},
        {"fallbackProbes", r.fallback_probes},
        {"consistent", matches_classification(r)},
        {"witness", witness},
    };
}

} // namespace capbem
