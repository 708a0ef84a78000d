#include "capbem/varprinciple.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "capbem/error.hpp"

namespace capbem {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* name)
{
    if (!v.allFinite())
        throw InvalidArgument(std::string(name) + " has non-finite entries");
}

void require_dim(const SymmetricForm& a, const Eigen::VectorXd& v, const char* name)
{
    if (v.size() != a.n())
        throw DimensionMismatch(std::string(name) + " has dimension " + std::to_string(v.size()) +
                                ", operator has " + std::to_string(a.n()));
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (;;) {
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = normal(rng);
        const double len = v.norm();
        if (len > 0.0)
            return v / len;
    }
}

// Roots of a*l^2 + 2*b*l + c with a > 0 > c, ordered (negative, positive).
std::pair<double, double> form_roots(double a, double b, double c)
{
    const double disc = std::sqrt(b * b - a * c);
    // Avoid cancellation: q = -(b + sign(b) disc), roots q/a and c/q.
    const double q = -(b + std::copysign(disc, b));
    double r1 = q / a;
    double r2 = c / q;
    if (r1 > r2)
        std::swap(r1, r2);
    return {r1, r2};
}

} // namespace

std::string_view to_string(Definiteness d)
{
    switch (d) {
    case Definiteness::nonneg: return "nonneg";
    case Definiteness::indefinite: return "indefinite";
    case Definiteness::nonpos: return "nonpos";
    case Definiteness::zero: return "zero";
    }
    return "unknown";
}

SymmetricForm::SymmetricForm(const Eigen::MatrixXd& matrix, double asymmetry_tolerance)
{
    if (matrix.rows() < 1 || matrix.rows() != matrix.cols())
        throw InvalidArgument("symmetric form needs a non-empty square matrix, got " +
                              std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()));
    if (!matrix.allFinite())
        throw InvalidArgument("matrix has non-finite entries");

    const double scale = matrix.cwiseAbs().maxCoeff();
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > asymmetry_tolerance * scale)
        throw InvalidArgument("matrix asymmetry " + std::to_string(asym) +
                              " exceeds tolerance relative to max entry " + std::to_string(scale));

    matrix_ = 0.5 * (matrix + matrix.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_);
    if (solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigen-decomposition failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
    norm_ = std::max(std::abs(eigenvalues_[0]), std::abs(eigenvalues_[eigenvalues_.size() - 1]));
}

Eigen::VectorXd SymmetricForm::apply(const Eigen::VectorXd& v) const
{
    return matrix_ * v;
}

double SymmetricForm::form(const Eigen::VectorXd& v) const
{
    return v.dot(matrix_ * v);
}

QuotientValue quotient(const SymmetricForm& a, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    require_dim(a, u, "u");
    require_dim(a, v, "v");
    require_finite(u, "u");
    require_finite(v, "v");

    const Eigen::VectorXd av = a.apply(v);
    const double denom = av.dot(v);
    if (!(std::abs(denom) > kDenominatorEps * a.norm() * v.squaredNorm()))
        return {0.0, true};
    const double num = av.dot(u);
    return {num * num / denom, false};
}

Definiteness classify(const SymmetricForm& a)
{
    const double tol = kSpectralEps * a.norm();
    const double lo = a.eigenvalues()[0];
    const double hi = a.eigenvalues()[a.n() - 1];
    const bool has_pos = hi > tol;
    const bool has_neg = lo < -tol;
    if (has_pos && has_neg)
        return Definiteness::indefinite;
    if (has_pos)
        return Definiteness::nonneg;
    if (has_neg)
        return Definiteness::nonpos;
    return Definiteness::zero;
}

std::vector<SweepSample> witness_sweep(const SymmetricForm& a, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                                       const WitnessOptions& options)
{
    require_dim(a, z, "z");
    require_dim(a, w, "w");
    if (options.sweep_steps < 1 || !(options.approach_factor > 0.0 && options.approach_factor < 1.0))
        throw InvalidArgument("sweep needs steps >= 1 and approach factor in (0, 1)");

    const Eigen::VectorXd az = a.apply(z);
    const double qa = az.dot(z);
    const double qb = az.dot(w);
    const double qc = w.dot(a.apply(w));
    if (!(qa > 0.0) || !(qc < 0.0))
        throw NumericalError("witness pair needs (Az,z) > 0 and (Aw,w) < 0, got " +
                             std::to_string(qa) + " and " + std::to_string(qc));

    const auto [l1, l2] = form_roots(qa, qb, qc);
    const double d0 = 0.5 * std::min(std::abs(l1), l2);

    std::vector<SweepSample> samples;
    samples.reserve(2 * static_cast<std::size_t>(options.sweep_steps));
    for (int root = 1; root <= 2; ++root) {
        double delta = d0;
        for (int k = 0; k < options.sweep_steps; ++k) {
            const double lambda = root == 1 ? l1 - delta : l2 + delta;
            const Eigen::VectorXd v = lambda * z + w;
            samples.push_back({lambda, delta, root, quotient(a, u, v)});
            delta *= options.approach_factor;
        }
    }
    return samples;
}

std::optional<IndefinitenessWitness> witness_from_pair(const SymmetricForm& a,
                                                       const Eigen::VectorXd& u,
                                                       const Eigen::VectorXd& z,
                                                       const Eigen::VectorXd& w,
                                                       const WitnessOptions& options)
{
    const auto samples = witness_sweep(a, u, z, w, options);

    const SweepSample* best = nullptr;
    for (const auto& s : samples) {
        if (s.quotient.degenerate)
            continue;
        // q(lambda) > 0 outside [lambda1, lambda2]; skip anything that
        // round-off pushed to the wrong side.
        const Eigen::VectorXd v = s.lambda * z + w;
        if (!(a.form(v) > 0.0))
            continue;
        if (!best || s.quotient.value > best->quotient.value)
            best = &s;
    }
    if (!best)
        return std::nullopt;

    IndefinitenessWitness wit;
    wit.z = z;
    wit.w = w;
    const Eigen::VectorXd az = a.apply(z);
    wit.a = az.dot(z);
    wit.b = az.dot(w);
    wit.c = w.dot(a.apply(w));
    std::tie(wit.lambda1, wit.lambda2) = form_roots(wit.a, wit.b, wit.c);
    wit.lambda_star = best->lambda;
    wit.v_star = best->lambda * z + w;
    wit.quotient = best->quotient.value;
    return wit;
}

std::optional<IndefinitenessWitness> find_witness(const SymmetricForm& a, const Eigen::VectorXd& u,
                                                  const WitnessOptions& options)
{
    require_dim(a, u, "u");
    require_finite(u, "u");
    if (classify(a) != Definiteness::indefinite)
        return std::nullopt;

    const Eigen::Index n = a.n();
    const Eigen::VectorXd z = a.eigenvectors().col(n - 1);
    const Eigen::VectorXd w = a.eigenvectors().col(0);
    if (!(z.dot(a.apply(z)) > 0.0) || !(w.dot(a.apply(w)) < 0.0))
        throw NumericalError("extreme eigenvectors do not have the expected form signs");

    // p(lambda) = ((Au, z) lambda + (Au, w))^2 vanishes at both roots of q
    // only if both coefficients vanish.
    const Eigen::VectorXd au = a.apply(u);
    const double tol = kDenominatorEps * a.norm() * u.norm();
    if (std::abs(au.dot(z)) <= tol && std::abs(au.dot(w)) <= tol)
        return std::nullopt;

    return witness_from_pair(a, u, z, w, options);
}

PrincipleReport verify_principle(const SymmetricForm& a, const Eigen::VectorXd& u,
                                 const VerifyOptions& options)
{
    require_dim(a, u, "u");
    require_finite(u, "u");
    if (options.random_trials < 0)
        throw InvalidArgument("random_trials must be >= 0");

    PrincipleReport report;
    report.classification = classify(a);
    report.quadratic_form_at_u = a.form(u);
    const double qf = report.quadratic_form_at_u;

    const QuotientValue at_u = quotient(a, u, u);
    report.best_quotient = at_u.value;
    report.attained_at_u = std::abs(at_u.value - qf) <= 1e-10 * (1.0 + std::abs(qf));
    report.probes = 1;

    std::mt19937_64 rng(options.seed);
    for (int t = 0; t < options.random_trials; ++t) {
        const QuotientValue q = quotient(a, u, random_unit(rng, a.n()));
        report.best_quotient = std::max(report.best_quotient, q.value);
        ++report.probes;
    }

    if (report.classification == Definiteness::indefinite) {
        auto wit = find_witness(a, u, options.witness);
        const double target = qf + 1.0;
        if (!wit || !(wit->quotient > target)) {
            // Random pairs with (Az,z) > 0 > (Aw,w) replace the eigenvector pair.
            std::mt19937_64 fallback_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
            const int per_pair = 2 + 2 * options.witness.sweep_steps;
            while (report.fallback_probes + per_pair <= options.fallback_budget) {
                const Eigen::VectorXd z = random_unit(fallback_rng, a.n());
                const Eigen::VectorXd w = random_unit(fallback_rng, a.n());
                report.fallback_probes += 2;
                if (!(a.form(z) > 0.0) || !(a.form(w) < 0.0))
                    continue;
                report.fallback_probes += 2 * options.witness.sweep_steps;
                auto cand = witness_from_pair(a, u, z, w, options.witness);
                if (cand && (!wit || cand->quotient > wit->quotient))
                    wit = std::move(cand);
                if (wit && wit->quotient > target)
                    break;
            }
        }
        if (wit) {
            report.best_quotient = std::max(report.best_quotient, wit->quotient);
            ++report.probes;
        }
        report.witness = std::move(wit);
    }

    report.holds_on_probes =
        report.attained_at_u && report.best_quotient <= qf * (1.0 + 1e-8) + 1e-12;
    return report;
}

bool matches_classification(const PrincipleReport& report)
{
    switch (report.classification) {
    case Definiteness::nonneg:
    case Definiteness::zero:
        return report.holds_on_probes;
    case Definiteness::indefinite:
        return report.witness.has_value() && report.witness->quotient > report.quadratic_form_at_u;
    case Definiteness::nonpos:
        // The identity may hold at a particular u (e.g. u in the kernel);
        // nothing is predicted for a single u.
        return true;
    }
    return false;
}

} // namespace capbem
