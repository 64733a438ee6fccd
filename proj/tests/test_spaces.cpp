#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "dgpenalty/error.hpp"
#include "dgpenalty/quadrature.hpp"
#include "dgpenalty/spaces.hpp"

using namespace dgp;

namespace {

std::shared_ptr<const Mesh> square(int n)
{
    return std::make_shared<const Mesh>(build_unit_square(n));
}

std::shared_ptr<const Mesh> interval(int n)
{
    return std::make_shared<const Mesh>(build_unit_interval(n));
}

} // namespace

TEST(DgSpace, DofsPerCell)
{
    for (int k = 1; k <= 5; ++k) {
        EXPECT_EQ(DgSpace(interval(3), k).dofs_per_cell(), k + 1);
        const DgSpace s(square(2), k);
        EXPECT_EQ(s.dofs_per_cell(), (k + 1) * (k + 2) / 2);
        EXPECT_EQ(s.n_dofs(), 8 * s.dofs_per_cell());
    }
}

TEST(DgSpace, DegreeOutOfRangeRejected)
{
    EXPECT_THROW(DgSpace(square(1), 0), Error);
    EXPECT_THROW(DgSpace(square(1), 6), Error);
}

TEST(DgSpace, CellMassMatrixIsScaledIdentity)
{
    for (int k = 1; k <= 5; ++k) {
        for (const auto& mesh : {interval(4), square(3)}) {
            const DgSpace s(mesh, k);
            const QuadratureRule q = cell_rule(mesh->dim(), 2 * k + 1);
            const int nb = s.dofs_per_cell();
            for (int c : {0, mesh->n_cells() - 1}) {
                Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb, nb);
                Eigen::VectorXd phi;
                Eigen::MatrixX2d grad;
                const double det = std::abs(s.jacobian_determinant(c));
                for (std::size_t i = 0; i < q.size(); ++i) {
                    s.eval(c, s.to_physical(c, q.points[i]), phi, grad);
                    M += q.weights[i] * det * phi * phi.transpose();
                }
                EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-13 * M.cwiseAbs().maxCoeff());
                EXPECT_LT((M / det - Eigen::MatrixXd::Identity(nb, nb)).cwiseAbs().maxCoeff(), 1e-10)
                    << "k=" << k << " dim=" << mesh->dim();
            }
        }
    }
}

TEST(DgSpace, ReferenceMapRoundTrip)
{
    const DgSpace s(square(3), 2);
    const Point xi(0.2, 0.3);
    for (int c = 0; c < s.mesh().n_cells(); ++c) {
        EXPECT_LT((s.to_reference(c, s.to_physical(c, xi)) - xi).norm(), 1e-14);
    }
}

TEST(DgSpace, GradientMatchesFiniteDifference)
{
    const DgSpace s(square(2), 3);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd coeffs(s.n_dofs());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        coeffs(i) = u(rng);
    }
    const int c = 5;
    const Point x = s.to_physical(c, Point(0.25, 0.3));
    const double eps = 1e-6;
    const Point g = s.evaluate_gradient(coeffs, c, x);
    const double gx = (s.evaluate(coeffs, c, x + Point(eps, 0)) - s.evaluate(coeffs, c, x - Point(eps, 0))) / (2 * eps);
    const double gy = (s.evaluate(coeffs, c, x + Point(0, eps)) - s.evaluate(coeffs, c, x - Point(0, eps))) / (2 * eps);
    EXPECT_NEAR(g.x(), gx, 1e-6);
    EXPECT_NEAR(g.y(), gy, 1e-6);
}

TEST(CgSpace, ContinuousAcrossFaces)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 1; k <= 4; ++k) {
        for (const auto& mesh : {interval(5), square(3)}) {
            const CgVectorSpace s(mesh, k);
            Eigen::VectorXd coeffs(s.n_dofs());
            for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
                coeffs(i) = u(rng);
            }
            for (const Face& f : mesh->faces()) {
                if (f.is_boundary()) {
                    continue;
                }
                const Point a = mesh->vertex(f.vertices[0]);
                const Point b = mesh->dim() == 2 ? mesh->vertex(f.vertices[1]) : a;
                for (double t : {0.1, 0.37, 0.5, 0.82}) {
                    const Point x = a + t * (b - a);
                    for (int comp = 0; comp < s.value_dim(); ++comp) {
                        EXPECT_NEAR(s.evaluate(coeffs, f.plus, x, comp), s.evaluate(coeffs, f.minus, x, comp), 1e-12)
                            << "k=" << k << " face " << f.id;
                    }
                }
            }
        }
    }
}

TEST(CgSpace, InterpolatesPolynomialsOfItsDegree)
{
    for (int k = 1; k <= 4; ++k) {
        const auto mesh = square(2);
        const CgVectorSpace s(mesh, k);
        auto fx = [k](const Point& p) { return std::pow(p.x() + 2.0 * p.y(), k) - p.x(); };
        auto fy = [k](const Point& p) { return std::pow(p.y(), k) + 0.5; };
        Eigen::VectorXd coeffs(s.n_dofs());
        for (int i = 0; i < s.n_scalar_dofs(); ++i) {
            coeffs(2 * i) = fx(s.node(i));
            coeffs(2 * i + 1) = fy(s.node(i));
        }
        for (int c = 0; c < mesh->n_cells(); ++c) {
            const Point x = (mesh->vertex(mesh->cell(c)[0]) * 0.2 + mesh->vertex(mesh->cell(c)[1]) * 0.3
                             + mesh->vertex(mesh->cell(c)[2]) * 0.5);
            EXPECT_NEAR(s.evaluate(coeffs, c, x, 0), fx(x), 1e-11);
            EXPECT_NEAR(s.evaluate(coeffs, c, x, 1), fy(x), 1e-11);
        }
    }
}

TEST(CgSpace, DofCounts)
{
    // P_k on an n x n grid: (k n + 1)^2 scalar nodes
    for (int k = 1; k <= 4; ++k) {
        const CgVectorSpace s(square(3), k);
        EXPECT_EQ(s.n_scalar_dofs(), (3 * k + 1) * (3 * k + 1));
        EXPECT_EQ(s.n_dofs(), 2 * s.n_scalar_dofs());
        const CgVectorSpace s1(interval(4), k);
        EXPECT_EQ(s1.n_scalar_dofs(), 4 * k + 1);
        EXPECT_EQ(s1.n_dofs(), s1.n_scalar_dofs());
    }
}

TEST(CgSpace, DivergenceOfLinearField)
{
    const auto mesh = square(2);
    const CgVectorSpace s(mesh, 1);
    Eigen::VectorXd coeffs(s.n_dofs());
    for (int i = 0; i < s.n_scalar_dofs(); ++i) {
        coeffs(2 * i) = 3.0 * s.node(i).x() + s.node(i).y();
        coeffs(2 * i + 1) = -0.5 * s.node(i).y();
    }
    for (int c = 0; c < mesh->n_cells(); ++c) {
        EXPECT_NEAR(s.divergence(coeffs, c, mesh->cell_centroid(c)), 2.5, 1e-12);
        const Eigen::Matrix2d g = s.gradient(coeffs, c, mesh->cell_centroid(c));
        EXPECT_NEAR(g(0, 1), 1.0, 1e-12);
    }
}
