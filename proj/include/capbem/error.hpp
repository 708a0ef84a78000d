#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace capbem {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Direct or iterative solve did not produce a charge density.
class SolveError : public NumericalError {
public:
    SolveError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Mesh errors. Each variant carries the entity it complains about.
class MeshError : public Error {
public:
    using Error::Error;
};

class MeshParseError : public MeshError {
public:
    MeshParseError(const std::string& what, std::size_t line)
        : MeshError(what), line_(line) {}
    // 1-based line number, or 0 for binary input.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

using Edge = std::array<std::size_t, 2>;

class MeshWatertightError : public MeshError {
public:
    MeshWatertightError(const std::string& what, std::vector<Edge> edges)
        : MeshError(what), edges_(std::move(edges)) {}
    // Edges whose use count differs from two, smaller index first.
    const std::vector<Edge>& edges() const noexcept { return edges_; }

private:
    std::vector<Edge> edges_;
};

class MeshDegenerateError : public MeshError {
public:
    MeshDegenerateError(const std::string& what, std::size_t triangle)
        : MeshError(what), triangle_(triangle) {}
    std::size_t triangle() const noexcept { return triangle_; }

private:
    std::size_t triangle_;
};

class MeshIndexError : public MeshError {
public:
    MeshIndexError(const std::string& what, std::size_t triangle)
        : MeshError(what), triangle_(triangle) {}
    std::size_t triangle() const noexcept { return triangle_; }

private:
    std::size_t triangle_;
};

} // namespace capbem
