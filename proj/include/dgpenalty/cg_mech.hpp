#pragma once

#include <functional>

#include "dgpenalty/dg_flow.hpp"
#include "dgpenalty/spaces.hpp"

namespace dgp {

using VectorField = std::function<Point(const Point&)>;

struct LameParameters {
    double lambda = 0.0;
    double mu = 0.0;
};

/// Lame constants from drained bulk modulus K and Poisson ratio nu.
LameParameters lame_from_bulk(double K, double nu);

/// alpha = 1 - K / K_s; K_s may be +inf.
double biot_alpha(double K, double K_s);

struct ElasticityProblem {
    double lambda = 0.0;
    double mu = 1.0;
    double alpha = 1.0;
    VectorField body_force;   // empty means zero
    VectorField u_dirichlet;  // on DirichletU faces; empty means zero
    VectorField traction;     // sigma . n on TractionT faces; empty means zero

    void validate(int dim) const;
};

/// Quasi-static momentum balance with the pressure coupling on the right-hand
/// side; Dirichlet displacements are eliminated symmetrically.
LinearSystem assemble_elasticity(const CgVectorSpace& space, const ElasticityProblem& problem,
                                 const CellField& pressure);

/// Effective stress sigma'(u) = 2 mu eps(u) + lambda div(u) I at x.
Eigen::Matrix2d effective_stress(const CgVectorSpace& space, const ElasticityProblem& problem,
                                 const Eigen::VectorXd& U, int cell, const Point& x);

} // namespace dgp
