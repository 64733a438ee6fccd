#include "dgpenalty/cg_mech.hpp"

#include <cmath>
#include <vector>

#include "dgpenalty/error.hpp"
#include "dgpenalty/quadrature.hpp"

namespace dgp {

LameParameters lame_from_bulk(double K, double nu)
{
    if (!(K > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "bulk modulus must be positive");
    }
    if (nu == 0.5) {
        throw Error(ErrorKind::IncompressibleUnsupported, "nu = 0.5 is incompressible");
    }
    if (!(nu > -1.0 && nu < 0.5)) {
        throw Error(ErrorKind::InvalidMaterial, "Poisson ratio must lie in (-1, 0.5)");
    }
    return {3.0 * K * nu / (1.0 + nu), 3.0 * K * (1.0 - 2.0 * nu) / (2.0 * (1.0 + nu))};
}

double biot_alpha(double K, double K_s)
{
    if (!(K > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "bulk modulus must be positive");
    }
    if (std::isinf(K_s)) {
        return 1.0;
    }
    if (K_s < K) {
        throw Error(ErrorKind::InvalidMaterial, "grain modulus must not be below the drained modulus");
    }
    return 1.0 - K / K_s;
}

void ElasticityProblem::validate(int dim) const
{
    if (!(mu > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "shear modulus must be positive");
    }
    if (!(lambda + 2.0 * mu / dim > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "bulk response must be positive");
    }
}

LinearSystem assemble_elasticity(const CgVectorSpace& space, const ElasticityProblem& problem,
                                 const CellField& pressure)
{
    const Mesh& mesh = space.mesh();
    const int d = space.value_dim();
    problem.validate(d);
    const int n = space.n_dofs();
    const int k = space.degree();
    const QuadratureRule q = cell_rule(mesh.dim(), 2 * k + 2);
    const int nn = space.nodes_per_cell();

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd phi;
    Eigen::MatrixX2d grad;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& nodes = space.cell_nodes(c);
        const Eigen::Matrix2d J = mesh.jacobian(c);
        const double det = std::abs(J.determinant());
        const Point origin = mesh.vertex(mesh.cell(c)[0]);
        Eigen::MatrixXd kl = Eigen::MatrixXd::Zero(nn * d, nn * d);
        Eigen::VectorXd bl = Eigen::VectorXd::Zero(nn * d);
        for (std::size_t iq = 0; iq < q.size(); ++iq) {
            const Point x = origin + J * q.points[iq];
            const double w = q.weights[iq] * det;
            space.eval(c, x, phi, grad);
            const double p = pressure ? pressure(c, x) : 0.0;
            const Point f = problem.body_force ? problem.body_force(x) : Point::Zero();
            for (int a = 0; a < nn; ++a) {
                for (int i = 0; i < d; ++i) {
                    const int ra = a * d + i;
                    bl(ra) += w * (f(i) * phi(a) + problem.alpha * p * grad(a, i));
                    for (int bn = 0; bn < nn; ++bn) {
                        for (int j = 0; j < d; ++j) {
                            double v = problem.mu * grad(a, j) * grad(bn, i) + problem.lambda * grad(a, i) * grad(bn, j);
                            if (i == j) {
                                v += problem.mu * grad.row(a).head(d).dot(grad.row(bn).head(d));
                            }
                            kl(ra, bn * d + j) += w * v;
                        }
                    }
                }
            }
        }
        for (int a = 0; a < nn * d; ++a) {
            const int ga = nodes[static_cast<std::size_t>(a / d)] * d + a % d;
            b(ga) += bl(a);
            for (int bb = 0; bb < nn * d; ++bb) {
                const int gb = nodes[static_cast<std::size_t>(bb / d)] * d + bb % d;
                trip.emplace_back(ga, gb, kl(a, bb));
            }
        }
    }

    // traction faces and Dirichlet node collection
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    const QuadratureRule fq = interval_rule(2 * k + 2);
    for (const Face& face : mesh.faces()) {
        if (!face.is_boundary()) {
            continue;
        }
        if (face.tags.mech == BoundaryTag::DirichletU) {
            for (int node : space.face_nodes(face.id)) {
                const Point u = problem.u_dirichlet ? problem.u_dirichlet(space.node(node)) : Point::Zero();
                for (int i = 0; i < d; ++i) {
                    fixed[static_cast<std::size_t>(node * d + i)] = 1;
                    g(node * d + i) = u(i);
                }
            }
            continue;
        }
        if (face.tags.mech != BoundaryTag::TractionT || !problem.traction) {
            continue;
        }
        const int c = face.plus;
        const auto& nodes = space.cell_nodes(c);
        auto add_point = [&](const Point& x, double w) {
            space.eval(c, x, phi, grad);
            const Point t = problem.traction(x);
            for (int a = 0; a < nn; ++a) {
                for (int i = 0; i < d; ++i) {
                    b(nodes[static_cast<std::size_t>(a)] * d + i) += w * t(i) * phi(a);
                }
            }
        };
        if (mesh.dim() == 1) {
            add_point(mesh.vertex(face.vertices[0]), face.measure);
        } else {
            const Point& va = mesh.vertex(face.vertices[0]);
            const Point& vb = mesh.vertex(face.vertices[1]);
            for (std::size_t i = 0; i < fq.size(); ++i) {
                add_point(va + fq.points[i].x() * (vb - va), fq.weights[i] * face.measure);
            }
        }
    }

    bool any_fixed = false;
    for (char f : fixed) {
        any_fixed = any_fixed || f != 0;
    }
    if (!any_fixed) {
        throw Error(ErrorKind::RigidModeSingular, "no Dirichlet displacement: rigid modes are unconstrained");
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> full(n, n);
    full.setFromTriplets(trip.begin(), trip.end());
    b -= full * g;
    std::vector<Eigen::Triplet<double>> kept;
    kept.reserve(trip.size());
    for (int r = 0; r < n; ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(full, r); it; ++it) {
            const auto col = static_cast<int>(it.col());
            if (fixed[static_cast<std::size_t>(r)] || fixed[static_cast<std::size_t>(col)]) {
                continue;
            }
            kept.emplace_back(r, col, it.value());
        }
    }
    for (int r = 0; r < n; ++r) {
        if (fixed[static_cast<std::size_t>(r)]) {
            double diag = full.coeff(r, r);
            if (!(diag > 0.0)) {
                diag = 1.0;
            }
            kept.emplace_back(r, r, diag);
            b(r) = diag * g(r);
        }
    }
    LinearSystem sys;
    sys.A.resize(n, n);
    sys.A.setFromTriplets(kept.begin(), kept.end());
    sys.b = std::move(b);
    return sys;
}

Eigen::Matrix2d effective_stress(const CgVectorSpace& space, const ElasticityProblem& problem,
                                 const Eigen::VectorXd& U, int cell, const Point& x)
{
    const int d = space.value_dim();
    const Eigen::Matrix2d G = space.gradient(U, cell, x);
    Eigen::Matrix2d eps = 0.5 * (G + G.transpose());
    if (d == 1) {
        eps(1, 1) = 0.0;
        eps(0, 1) = eps(1, 0) = 0.0;
    }
    const double div = d == 1 ? eps(0, 0) : eps.trace();
    Eigen::Matrix2d s = 2.0 * problem.mu * eps;
    s(0, 0) += problem.lambda * div;
    if (d == 2) {
        s(1, 1) += problem.lambda * div;
    }
    return s;
}

} // namespace dgp
