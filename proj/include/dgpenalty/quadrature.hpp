#pragma once

#include <vector>

#include "dgpenalty/mesh.hpp"

namespace dgp {

/// Quadrature on a reference element. The interval is [0,1] (measure 1),
/// the triangle is {(0,0),(1,0),(0,1)} (measure 1/2).
struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;
    int degree = 0;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// n-point Gauss-Legendre on [0,1]; exact to degree 2n-1.
QuadratureRule gauss_legendre(int n);

QuadratureRule interval_rule(int degree);
/// Collapsed (Duffy) Gauss rule on the reference triangle.
QuadratureRule triangle_rule(int degree);
/// Cell rule for a mesh of the given dimension.
QuadratureRule cell_rule(int dim, int degree);

} // namespace dgp
