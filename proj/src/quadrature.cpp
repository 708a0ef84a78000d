#include "capbem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "capbem/error.hpp"

namespace capbem {

namespace {

using Point = QuadratureRule::Point;

void add_orbit3(std::vector<Point>& pts, double a, double w)
{
    const double b = 1.0 - 2.0 * a;
    pts.push_back({{b, a, a}, w});
    pts.push_back({{a, b, a}, w});
    pts.push_back({{a, a, b}, w});
}

void add_orbit6(std::vector<Point>& pts, double a, double b, double w)
{
    const double c = 1.0 - a - b;
    pts.push_back({{a, b, c}, w});
    pts.push_back({{a, c, b}, w});
    pts.push_back({{b, a, c}, w});
    pts.push_back({{b, c, a}, w});
    pts.push_back({{c, a, b}, w});
    pts.push_back({{c, b, a}, w});
}

} // namespace

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    if (n < 1)
        throw InvalidArgument("Gauss-Legendre order must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // Map [-1, 1] to [0, 1], ascending.
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

QuadratureRule QuadratureRule::triangle(int degree)
{
    std::vector<Point> pts;
    switch (degree) {
    case 1:
        pts.push_back({{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0});
        break;
    case 2:
        add_orbit3(pts, 1.0 / 6.0, 1.0 / 3.0);
        break;
    case 3:
        add_orbit6(pts, 0.659027622374092, 0.231933368553031, 1.0 / 6.0);
        break;
    case 4:
        add_orbit3(pts, 0.445948490915965, 0.223381589678011);
        add_orbit3(pts, 0.091576213509771, 0.109951743655322);
        break;
    case 5:
        pts.push_back({{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0.225});
        add_orbit3(pts, 0.470142064105115, 0.132394152788506);
        add_orbit3(pts, 0.101286507323456, 0.125939180544827);
        break;
    case 6:
        add_orbit3(pts, 0.249286745170910, 0.116786275726379);
        add_orbit3(pts, 0.063089014491502, 0.050844906370207);
        add_orbit6(pts, 0.053145049844817, 0.310352451033784, 0.082851075618374);
        break;
    case 7: {
        // x = s, y = t (1 - s) maps the unit square onto the triangle with
        // Jacobian (1 - s); 5 points in s absorb that extra degree.
        std::vector<double> sn, sw, tn, tw;
        gauss_legendre_unit(5, sn, sw);
        gauss_legendre_unit(4, tn, tw);
        for (std::size_t i = 0; i < sn.size(); ++i)
            for (std::size_t j = 0; j < tn.size(); ++j) {
                const double x = sn[i];
                const double y = tn[j] * (1.0 - sn[i]);
                pts.push_back({{1.0 - x - y, x, y}, 2.0 * sw[i] * tw[j] * (1.0 - sn[i])});
            }
        break;
    }
    default:
        throw InvalidArgument("quadrature degree must be in 1..7, got " + std::to_string(degree));
    }

    // Normalize the tabulated weights so they sum to 1 in floating point.
    double total = 0.0;
    for (const auto& p : pts)
        total += p.weight;
    for (auto& p : pts)
        p.weight /= total;
    return QuadratureRule(degree, std::move(pts));
}

} // namespace capbem
