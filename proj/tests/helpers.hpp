#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace test {

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = normal(rng);
    return v;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// Q diag(eigs) Q^T with a random orthogonal Q; exactly symmetric.
inline Eigen::MatrixXd with_spectrum(std::mt19937_64& rng, const Eigen::VectorXd& eigs)
{
    const Eigen::MatrixXd q = random_orthogonal(rng, eigs.size());
    Eigen::MatrixXd m = q * eigs.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

// Eigenvalues log-uniform in [1e-3, 10].
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n)
{
    std::uniform_real_distribution<double> expo(-3.0, 1.0);
    Eigen::VectorXd eigs(n);
    for (Eigen::Index i = 0; i < n; ++i)
        eigs[i] = std::pow(10.0, expo(rng));
    return with_spectrum(rng, eigs);
}

// Rank-deficient PSD: `rank` positive eigenvalues, the rest exactly zero.
inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank)
{
    std::uniform_real_distribution<double> pos(0.1, 5.0);
    Eigen::VectorXd eigs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < rank; ++i)
        eigs[i] = pos(rng);
    return with_spectrum(rng, eigs);
}

// At least one eigenvalue of each sign, magnitudes in [0.1, 5].
inline Eigen::MatrixXd random_indefinite(std::mt19937_64& rng, Eigen::Index n)
{
    std::uniform_real_distribution<double> mag(0.1, 5.0);
    std::bernoulli_distribution coin(0.5);
    Eigen::VectorXd eigs(n);
    for (Eigen::Index i = 0; i < n; ++i)
        eigs[i] = (coin(rng) ? 1.0 : -1.0) * mag(rng);
    eigs[0] = mag(rng);
    eigs[n - 1] = -mag(rng);
    return with_spectrum(rng, eigs);
}

inline double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("capbem-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace test
