#include <gtest/gtest.h>

#include <cmath>

#include "dgpenalty/quadrature.hpp"

using namespace dgp;

namespace {

double factorial(int n)
{
    return std::tgamma(n + 1.0);
}

// integral of x^a y^b over the reference triangle
double triangle_moment(int a, int b)
{
    return factorial(a) * factorial(b) / factorial(a + b + 2);
}

} // namespace

TEST(Quadrature, GaussLegendreWeightsSumToOne)
{
    for (int n = 1; n <= 8; ++n) {
        const auto q = gauss_legendre(n);
        double s = 0.0;
        for (double w : q.weights) {
            s += w;
        }
        EXPECT_NEAR(s, 1.0, 1e-14) << n;
    }
}

TEST(Quadrature, IntervalExactToStatedDegree)
{
    for (int deg = 0; deg <= 14; ++deg) {
        const auto q = interval_rule(deg);
        EXPECT_GE(q.degree, deg);
        for (int p = 0; p <= deg; ++p) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) {
                s += q.weights[i] * std::pow(q.points[i].x(), p);
            }
            EXPECT_NEAR(s, 1.0 / (p + 1), 1e-13 / (p + 1)) << "deg " << deg << " p " << p;
        }
    }
}

TEST(Quadrature, TriangleExactToStatedDegree)
{
    for (int deg = 0; deg <= 14; ++deg) {
        const auto q = triangle_rule(deg);
        double ws = 0.0;
        for (double w : q.weights) {
            ws += w;
        }
        EXPECT_NEAR(ws, 0.5, 1e-14);
        for (int a = 0; a <= deg; ++a) {
            for (int b = 0; a + b <= deg; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < q.size(); ++i) {
                    s += q.weights[i] * std::pow(q.points[i].x(), a) * std::pow(q.points[i].y(), b);
                }
                const double exact = triangle_moment(a, b);
                EXPECT_NEAR(s, exact, 1e-13 * exact) << "deg " << deg << " a " << a << " b " << b;
            }
        }
    }
}

TEST(Quadrature, PointsInsideReferenceTriangle)
{
    const auto q = triangle_rule(9);
    for (const Point& p : q.points) {
        EXPECT_GT(p.x(), 0.0);
        EXPECT_GT(p.y(), 0.0);
        EXPECT_LT(p.x() + p.y(), 1.0);
    }
}
