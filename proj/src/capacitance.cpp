#include "capbem/capacitance.hpp"

#include <cmath>
#include <numbers>

#include "capbem/error.hpp"

namespace capbem {

namespace {

void require_size(const GalerkinSystem& system, Eigen::Index size, const char* what)
{
    if (size != system.size())
        throw DimensionMismatch(std::string(what) + " has " + std::to_string(size) + " entries, system has " +
                                std::to_string(system.size()) + " panels");
}

// Jacobi-preconditioned conjugate gradients from a zero initial guess.
ChargeSolution solve_cg(const GalerkinSystem& system)
{
    const Eigen::MatrixXd& a = system.matrix();
    const Eigen::VectorXd& b = system.areas();
    const Eigen::Index n = system.size();
    const Eigen::VectorXd inv_diag = a.diagonal().cwiseInverse();
    const double b_norm = b.norm();

    ChargeSolution sol;
    sol.solver = SolverKind::cg;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const long max_iter = 10 * static_cast<long>(n);
    long it = 0;
    double rel = r.norm() / b_norm;
    while (rel > 1e-10 && it < max_iter) {
        const Eigen::VectorXd ap = a * p;
        const double alpha = rz / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
        ++it;
        rel = r.norm() / b_norm;
    }
    // Report the true residual, not the recurrence.
    const double true_rel = (a * x - b).norm() / b_norm;
    if (!(rel <= 1e-10))
        throw SolveError("conjugate gradients did not converge in " + std::to_string(it) +
                             " iterations (relative residual " + std::to_string(true_rel) + ")",
                         true_rel);
    sol.sigma = std::move(x);
    sol.residual_norm = true_rel;
    sol.solve_iterations = static_cast<int>(it);
    return sol;
}

ChargeSolution solve_direct(const GalerkinSystem& system)
{
    const Eigen::LLT<Eigen::MatrixXd> llt(system.matrix());
    if (llt.info() != Eigen::Success)
        throw SolveError("Cholesky factorization failed: the Galerkin matrix is not positive definite "
                         "(inspect it with spd_check)",
                         std::nan(""));
    ChargeSolution sol;
    sol.solver = SolverKind::direct;
    sol.sigma = llt.solve(system.areas());
    sol.residual_norm = (system.matrix() * sol.sigma - system.areas()).norm() / system.areas().norm();
    sol.solve_iterations = 1;
    return sol;
}

} // namespace

std::string to_string(SolverKind kind)
{
    switch (kind) {
    case SolverKind::automatic: return "auto";
    case SolverKind::direct: return "direct";
    case SolverKind::cg: return "cg";
    }
    return "unknown";
}

ChargeSolution solve_capacitance(const GalerkinSystem& system, SolverKind solver)
{
    if (solver == SolverKind::automatic)
        solver = system.size() > kDirectSolveLimit ? SolverKind::cg : SolverKind::direct;
    ChargeSolution sol = solver == SolverKind::cg ? solve_cg(system) : solve_direct(system);
    sol.capacitance = system.areas().dot(sol.sigma);
    sol.total_charge = sol.capacitance;
    if (!(sol.capacitance > 0.0) || !std::isfinite(sol.capacitance))
        throw SolveError("solve produced non-positive capacitance " + std::to_string(sol.capacitance),
                         sol.residual_norm);
    return sol;
}

BoundValue rayleigh_bound(const GalerkinSystem& system, const Eigen::VectorXd& v)
{
    require_size(system, v.size(), "trial vector");
    if (!v.allFinite())
        throw InvalidArgument("trial vector has non-finite entries");
    const double energy = v.dot(system.matrix() * v);
    if (!(std::abs(energy) > 1e-13 * system.norm_bound() * v.squaredNorm()))
        return {0.0, true};
    const double q = system.areas().dot(v);
    return {q * q / energy, false};
}

double subspace_bound(const GalerkinSystem& system, const Eigen::MatrixXd& family)
{
    if (family.cols() == 0)
        throw InvalidArgument("trial family is empty");
    require_size(system, family.rows(), "trial family");
    if (!family.allFinite())
        throw InvalidArgument("trial family has non-finite entries");

    Eigen::MatrixXd basis = family;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        const double len = basis.col(k).norm();
        if (len > 0.0)
            basis.col(k) /= len;
    }

    const Eigen::VectorXd g = basis.transpose() * system.areas();
    Eigen::MatrixXd gram = basis.transpose() * (system.matrix() * basis);
    gram = 0.5 * (gram + gram.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigen-decomposition of the trial Gram matrix failed");
    const Eigen::VectorXd& mu = eig.eigenvalues();
    const double cutoff = 1e-12 * mu[mu.size() - 1];
    if (!(mu[mu.size() - 1] > 0.0))
        throw InvalidArgument("trial family has no direction of positive energy");
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * g;

    double bound = 0.0;
    for (Eigen::Index k = mu.size() - 1; k >= 0; --k) {
        if (!(mu[k] > cutoff))
            break;
        bound += proj[k] * proj[k] / mu[k];
    }
    return bound;
}

double gauss_functional(const GalerkinSystem& system, const Eigen::VectorXd& v)
{
    require_size(system, v.size(), "trial vector");
    if (!v.allFinite())
        throw InvalidArgument("trial vector has non-finite entries");
    const double q = system.areas().dot(v);
    if (!(std::abs(q) > 1e-13 * system.areas().norm() * v.norm()))
        throw InvalidArgument("Gauss functional is undefined for zero total charge");
    return v.dot(system.matrix() * v) / (q * q);
}

ZerothApproximation zeroth_capacitance(const GalerkinSystem& system)
{
    // 1^T A 1 summed column by column in index order.
    double energy = 0.0;
    const Eigen::MatrixXd& a = system.matrix();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        double col = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            col += a(i, j);
        energy += col;
    }
    ZerothApproximation z;
    z.j_integral = 4.0 * std::numbers::pi * energy;
    z.c_zeroth = system.total_area() * system.total_area() / energy;
    return z;
}

Eigen::MatrixXd monomial_family(const PanelSystem& panels, int degree)
{
    if (degree < 0 || degree > 2)
        throw InvalidArgument("monomial family degree must be 0, 1 or 2");
    const Eigen::Index n = static_cast<Eigen::Index>(panels.size());
    const Eigen::MatrixX3d& c = panels.centroids();
    const Eigen::RowVector3d centre = (panels.areas().transpose() * c) / panels.total_area();
    Eigen::MatrixX3d x = c.rowwise() - centre;
    const double radius = x.rowwise().norm().maxCoeff();
    if (radius > 0.0)
        x /= radius;

    const Eigen::Index cols = degree == 0 ? 1 : degree == 1 ? 4 : 10;
    Eigen::MatrixXd f(n, cols);
    f.col(0).setOnes();
    if (degree >= 1)
        f.middleCols(1, 3) = x;
    if (degree >= 2) {
        f.col(4) = x.col(0).cwiseProduct(x.col(0));
        f.col(5) = x.col(1).cwiseProduct(x.col(1));
        f.col(6) = x.col(2).cwiseProduct(x.col(2));
        f.col(7) = x.col(0).cwiseProduct(x.col(1));
        f.col(8) = x.col(1).cwiseProduct(x.col(2));
        f.col(9) = x.col(2).cwiseProduct(x.col(0));
    }
    return f;
}

BoundLedger bound_ledger(const GalerkinSystem& system, const PanelSystem& panels, const ChargeSolution& solution)
{
    require_size(system, static_cast<Eigen::Index>(panels.size()), "panel system");
    require_size(system, solution.sigma.size(), "charge solution");

    BoundLedger ledger;
    const auto zeroth = zeroth_capacitance(system);
    ledger.c_zeroth = zeroth.c_zeroth;
    ledger.j_integral = zeroth.j_integral;
    const char* names[] = {"constant", "linear", "quadratic"};
    for (int d = 0; d <= 2; ++d) {
        const Eigen::MatrixXd fam = monomial_family(panels, d);
        ledger.subspace_bounds.push_back({names[d], static_cast<int>(fam.cols()), subspace_bound(system, fam)});
    }
    ledger.gauss_value_at_sigma = gauss_functional(system, solution.sigma);
    ledger.capacitance = solution.capacitance;
    return ledger;
}

} // namespace capbem
