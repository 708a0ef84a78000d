#pragma once

// Finite-dimensional max-quotient principle for symmetric operators.
//
// For a real symmetric A and a fixed u, the functional
//
//     Q_u(v) = (Av, u)^2 / (Av, v)        (defined as 0 when (Av, v) = 0)
//
// satisfies max_v Q_u(v) = (Au, u) for every u exactly when A >= 0. This
// header evaluates Q_u, classifies A by the signs of its spectrum, probes
// the identity, and for indefinite A builds an explicit family
// v = lambda*z + w along which Q_u is unbounded.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace capbem {

// Relative band |(Av,v)| <= kDenominatorEps * ||A|| * ||v||^2 treated as zero.
inline constexpr double kDenominatorEps = 1e-13;
// Relative spectral tolerance used for sign classification.
inline constexpr double kSpectralEps = 1e-10;
// Default relative asymmetry accepted by SymmetricForm.
inline constexpr double kSymmetryTolerance = 1e-12;

enum class Definiteness { nonneg, indefinite, nonpos, zero };

std::string_view to_string(Definiteness d);

// Real symmetric n x n operator. The matrix is symmetrized on construction
// and its spectrum computed once; instances are immutable.
class SymmetricForm {
public:
    // Throws InvalidArgument for empty, non-square, non-finite or too
    // asymmetric input (max |M - M^T| > tolerance * max |M|).
    explicit SymmetricForm(const Eigen::MatrixXd& matrix,
                           double asymmetry_tolerance = kSymmetryTolerance);

    Eigen::Index n() const noexcept { return matrix_.rows(); }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    // Ascending eigenvalues and matching orthonormal eigenvectors (columns).
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
    // Spectral norm.
    double norm() const noexcept { return norm_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    // (Av, v)
    double form(const Eigen::VectorXd& v) const;

private:
    Eigen::MatrixXd matrix_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    double norm_ = 0.0;
};

struct QuotientValue {
    double value = 0.0;
    // Set when (Av, v) fell inside the zero band; value is then exactly 0.
    bool degenerate = false;
};

// (Av,u)^2 / (Av,v) with the zero-denominator convention. The value is
// negative when (Av,v) < 0, which can only happen for A not >= 0.
QuotientValue quotient(const SymmetricForm& a, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v);

Definiteness classify(const SymmetricForm& a);

struct IndefinitenessWitness {
    Eigen::VectorXd z;  // (Az, z) > 0
    Eigen::VectorXd w;  // (Aw, w) < 0
    double a = 0.0;     // (Az, z)
    double b = 0.0;     // (Az, w)
    double c = 0.0;     // (Aw, w)
    double lambda1 = 0.0;  // negative root of a*l^2 + 2*b*l + c
    double lambda2 = 0.0;  // positive root
    double lambda_star = 0.0;
    Eigen::VectorXd v_star;  // lambda_star * z + w
    double quotient = 0.0;   // quotient(A, u, v_star)
};

struct SweepSample {
    double lambda = 0.0;
    double delta = 0.0;  // distance from the root being approached
    int root = 0;        // 1 or 2
    QuotientValue quotient;
};

struct WitnessOptions {
    int sweep_steps = 40;
    double approach_factor = 0.5;
};

// Evaluates the quotient along v = lambda*z + w at lambda = lambda1 - delta
// and lambda = lambda2 + delta, delta_k = d0 * factor^k with
// d0 = 0.5 * min(|lambda1|, lambda2). Samples from root 1 come first.
// Requires (Az,z) > 0 and (Aw,w) < 0; throws NumericalError otherwise.
std::vector<SweepSample> witness_sweep(const SymmetricForm& a, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                                       const WitnessOptions& options = {});

// Necessity construction with z, w the unit eigenvectors of the largest and
// smallest eigenvalue. Returns nullopt when A is not indefinite, or when
// (Au, z) and (Au, w) both vanish so that the quotient stays bounded on
// this family.
std::optional<IndefinitenessWitness> find_witness(const SymmetricForm& a,
                                                  const Eigen::VectorXd& u,
                                                  const WitnessOptions& options = {});

// Same construction from an arbitrary pair with (Az,z) > 0 > (Aw,w).
// Returns the best sweep point, or nullopt if no sample has a positive
// non-degenerate denominator.
std::optional<IndefinitenessWitness> witness_from_pair(const SymmetricForm& a,
                                                       const Eigen::VectorXd& u,
                                                       const Eigen::VectorXd& z,
                                                       const Eigen::VectorXd& w,
                                                       const WitnessOptions& options = {});

struct PrincipleReport {
    Definiteness classification = Definiteness::zero;
    double quadratic_form_at_u = 0.0;  // (Au, u)
    double best_quotient = 0.0;        // max over all probes
    bool attained_at_u = false;
    // best_quotient <= (Au,u) * (1 + 1e-8) + 1e-12 and attained_at_u.
    bool holds_on_probes = false;
    int probes = 0;
    // Number of vectors evaluated by the random pair fallback (0 if unused).
    int fallback_probes = 0;
    std::optional<IndefinitenessWitness> witness;
};

struct VerifyOptions {
    int random_trials = 1000;
    std::uint64_t seed = 0;
    WitnessOptions witness;
    // Budget for the random-pair search used when find_witness returns none.
    int fallback_budget = 10000;
};

// Probes the quotient at v = u, at seeded random unit vectors and, for
// indefinite A, at the witness point. Deterministic for a fixed seed.
PrincipleReport verify_principle(const SymmetricForm& a, const Eigen::VectorXd& u,
                                 const VerifyOptions& options = {});

// True if the report is what the theorem predicts for its classification:
// A >= 0 means the identity held on every probe, indefinite A means a
// witness beating (Au, u) was produced.
bool matches_classification(const PrincipleReport& report);

} // namespace capbem
