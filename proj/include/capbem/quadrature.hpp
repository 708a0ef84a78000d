#pragma once

#include <array>
#include <vector>

namespace capbem {

// Symmetric-ish triangle rules in barycentric form. Weights are positive and
// sum to 1, so sum_q w_q f(x_q) * area approximates the integral of f.
//
//   degree 1   1 point   centroid
//   degree 2   3 points  Strang-Fix
//   degree 3   6 points  Strang-Fix (all weights 1/6)
//   degree 4   6 points  Dunavant
//   degree 5   7 points  Dunavant
//   degree 6  12 points  Dunavant
//   degree 7  20 points  collapsed Gauss-Legendre product (5 x 4)
class QuadratureRule {
public:
    struct Point {
        std::array<double, 3> bary;
        double weight;
    };

    // Throws InvalidArgument outside 1..7.
    static QuadratureRule triangle(int degree);

    int degree() const noexcept { return degree_; }
    const std::vector<Point>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    QuadratureRule(int degree, std::vector<Point> points) : degree_(degree), points_(std::move(points)) {}

    int degree_;
    std::vector<Point> points_;
};

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace capbem
