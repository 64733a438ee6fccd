#include "dgpenalty/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "dgpenalty/error.hpp"

namespace dgp {

QuadratureRule gauss_legendre(int n)
{
    if (n < 1) {
        throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre needs at least one point");
    }
    QuadratureRule rule;
    rule.degree = 2 * n - 1;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Newton on P_n starting from the Chebyshev guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1], store in increasing order
        const auto idx = static_cast<std::size_t>(n - 1 - i);
        rule.points[idx] = Point(0.5 * (x + 1.0), 0.0);
        rule.weights[idx] = 0.5 * w;
    }
    return rule;
}

QuadratureRule interval_rule(int degree)
{
    const int n = std::max(1, (degree + 2) / 2);
    QuadratureRule rule = gauss_legendre(n);
    return rule;
}

QuadratureRule triangle_rule(int degree)
{
    // x = u, y = v (1 - u) maps the unit square onto the triangle with
    // Jacobian (1 - u); the extra factor raises the u-degree by one.
    const int n = std::max(1, (degree + 3) / 2);
    const QuadratureRule g = gauss_legendre(n);
    QuadratureRule rule;
    rule.degree = 2 * n - 2;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = g.points[i].x();
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double v = g.points[j].x();
            rule.points.emplace_back(u, v * (1.0 - u));
            rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
        }
    }
    return rule;
}

QuadratureRule cell_rule(int dim, int degree)
{
    return dim == 1 ? interval_rule(degree) : triangle_rule(degree);
}

} // namespace dgp
