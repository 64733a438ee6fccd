#include "dgpenalty/spaces.hpp"

#include <cmath>

#include "dgpenalty/error.hpp"
#include "dgpenalty/quadrature.hpp"

namespace dgp {

MonomialSet::MonomialSet(int dim, int degree, Point shift, double scale)
    : dim_(dim), shift_(std::move(shift)), scale_(scale)
{
    for (int total = 0; total <= degree; ++total) {
        if (dim == 1) {
            exponents_.push_back({total, 0});
        } else {
            for (int j = 0; j <= total; ++j) {
                exponents_.push_back({total - j, j});
            }
        }
    }
}

void MonomialSet::eval(const Point& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const
{
    const auto n = static_cast<Eigen::Index>(exponents_.size());
    values.resize(n);
    grads.resize(n, 2);
    const double s = scale_ * (xi.x() - shift_.x());
    const double t = dim_ == 2 ? scale_ * (xi.y() - shift_.y()) : 0.0;
    auto ipow = [](double base, int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) {
            r *= base;
        }
        return r;
    };
    for (Eigen::Index m = 0; m < n; ++m) {
        const auto [a, b] = exponents_[static_cast<std::size_t>(m)];
        const double sa = ipow(s, a);
        const double tb = ipow(t, b);
        values(m) = sa * tb;
        grads(m, 0) = a > 0 ? scale_ * a * ipow(s, a - 1) * tb : 0.0;
        grads(m, 1) = b > 0 ? scale_ * b * sa * ipow(t, b - 1) : 0.0;
    }
}

namespace {

Point reference_centroid(int dim)
{
    return dim == 1 ? Point(0.5, 0.0) : Point(1.0 / 3.0, 1.0 / 3.0);
}

} // namespace

OrthonormalBasis::OrthonormalBasis(int dim, int degree)
    : monomials_(dim, degree, reference_centroid(dim), dim == 1 ? 2.0 : 3.0)
{
    if (degree < 0) {
        throw Error(ErrorKind::InvalidArgument, "polynomial degree must be >= 0");
    }
    const QuadratureRule q = cell_rule(dim, 2 * degree + 2);
    const int n = monomials_.size();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    for (std::size_t i = 0; i < q.size(); ++i) {
        monomials_.eval(q.points[i], v, g);
        gram.noalias() += q.weights[i] * v * v.transpose();
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NonFinite, "monomial Gram matrix is not positive definite");
    }
    // phi = L^{-1} m  =>  int phi phi^T = L^{-1} G L^{-T} = I
    const Eigen::MatrixXd L = llt.matrixL();
    coeffs_ = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
}

void OrthonormalBasis::eval(const Point& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const
{
    Eigen::VectorXd mv;
    Eigen::MatrixX2d mg;
    monomials_.eval(xi, mv, mg);
    values.noalias() = coeffs_ * mv;
    grads.noalias() = coeffs_ * mg;
}

DgSpace::DgSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree), basis_(mesh_ ? mesh_->dim() : 1, degree)
{
    if (degree < 1 || degree > 5) {
        throw Error(ErrorKind::InvalidArgument, "DG degree must be in 1..5");
    }
    jac_inv_.reserve(static_cast<std::size_t>(mesh_->n_cells()));
    det_.reserve(static_cast<std::size_t>(mesh_->n_cells()));
    for (int c = 0; c < mesh_->n_cells(); ++c) {
        const Eigen::Matrix2d J = mesh_->jacobian(c);
        jac_inv_.push_back(J.inverse());
        det_.push_back(J.determinant());
    }
}

Point DgSpace::to_reference(int cell, const Point& x) const
{
    const Point& origin = mesh_->vertex(mesh_->cell(cell)[0]);
    return jac_inv_[static_cast<std::size_t>(cell)] * (x - origin);
}

Point DgSpace::to_physical(int cell, const Point& xi) const
{
    const Point& origin = mesh_->vertex(mesh_->cell(cell)[0]);
    return origin + mesh_->jacobian(cell) * xi;
}

void DgSpace::eval(int cell, const Point& x, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const
{
    Eigen::MatrixX2d ref_grads;
    basis_.eval(to_reference(cell, x), values, ref_grads);
    grads.noalias() = ref_grads * jac_inv_[static_cast<std::size_t>(cell)];
}

double DgSpace::evaluate(const Eigen::VectorXd& coeffs, int cell, const Point& x) const
{
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    eval(cell, x, v, g);
    return coeffs.segment(dof(cell, 0), dofs_per_cell()).dot(v);
}

Point DgSpace::evaluate_gradient(const Eigen::VectorXd& coeffs, int cell, const Point& x) const
{
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    eval(cell, x, v, g);
    return g.transpose() * coeffs.segment(dof(cell, 0), dofs_per_cell());
}

CgVectorSpace::CgVectorSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree), monomials_(mesh_ ? mesh_->dim() : 1, degree)
{
    if (degree < 1 || degree > 4) {
        throw Error(ErrorKind::InvalidArgument, "CG degree must be in 1..4");
    }
    const Mesh& m = *mesh_;
    const int k = degree;
    const int dim = m.dim();

    // Lattice nodes with their topological classification.
    enum class Kind { Vertex, Edge, Interior };
    struct LocalNode {
        Point xi;
        Kind kind;
        int entity; // local vertex, local edge, or interior counter
        int pos;    // position along the local edge, from its first vertex
    };
    std::vector<LocalNode> nodes;
    int n_interior = 0;
    if (dim == 1) {
        for (int i = 0; i <= k; ++i) {
            const Point xi(static_cast<double>(i) / k, 0.0);
            if (i == 0 || i == k) {
                nodes.push_back({xi, Kind::Vertex, i == 0 ? 0 : 1, 0});
            } else {
                nodes.push_back({xi, Kind::Interior, n_interior++, 0});
            }
        }
    } else {
        for (int b = 0; b <= k; ++b) {
            for (int a = 0; a + b <= k; ++a) {
                const Point xi(static_cast<double>(a) / k, static_cast<double>(b) / k);
                if (a == 0 && b == 0) {
                    nodes.push_back({xi, Kind::Vertex, 0, 0});
                } else if (a == k) {
                    nodes.push_back({xi, Kind::Vertex, 1, 0});
                } else if (b == k) {
                    nodes.push_back({xi, Kind::Vertex, 2, 0});
                } else if (b == 0) {
                    nodes.push_back({xi, Kind::Edge, 0, a});
                } else if (a + b == k) {
                    nodes.push_back({xi, Kind::Edge, 1, b});
                } else if (a == 0) {
                    nodes.push_back({xi, Kind::Edge, 2, k - b});
                } else {
                    nodes.push_back({xi, Kind::Interior, n_interior++, 0});
                }
            }
        }
    }

    const int n_local = static_cast<int>(nodes.size());
    Eigen::MatrixXd vandermonde(n_local, monomials_.size());
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    for (int i = 0; i < n_local; ++i) {
        local_nodes_.push_back(nodes[static_cast<std::size_t>(i)].xi);
        monomials_.eval(nodes[static_cast<std::size_t>(i)].xi, v, g);
        vandermonde.row(i) = v.transpose();
    }
    // phi_i(node_j) = delta_ij  =>  coefficient rows = (V^{-1})^T
    lagrange_ = vandermonde.inverse().transpose();

    const int nv = m.n_vertices();
    const int edge_base = nv;
    const int interior_base = dim == 2 ? nv + m.n_faces() * (k - 1) : nv;
    const int n_scalar = interior_base + m.n_cells() * n_interior;
    node_coords_.assign(static_cast<std::size_t>(n_scalar), Point::Zero());
    cell_nodes_.assign(static_cast<std::size_t>(m.n_cells()), {});
    face_nodes_.assign(static_cast<std::size_t>(m.n_faces()), {});

    for (int c = 0; c < m.n_cells(); ++c) {
        const auto& cv = m.cell(c);
        const Point origin = m.vertex(cv[0]);
        const Eigen::Matrix2d J = m.jacobian(c);
        jac_inv_.push_back(J.inverse());
        auto& dofs = cell_nodes_[static_cast<std::size_t>(c)];
        for (const auto& node : nodes) {
            int global = -1;
            switch (node.kind) {
            case Kind::Vertex:
                global = cv[static_cast<std::size_t>(node.entity)];
                break;
            case Kind::Edge: {
                const int a = cv[static_cast<std::size_t>(node.entity)];
                const int b = cv[static_cast<std::size_t>((node.entity + 1) % 3)];
                const int face = m.cell_faces(c)[static_cast<std::size_t>(node.entity)];
                const int pos = a < b ? node.pos : k - node.pos;
                global = edge_base + face * (k - 1) + (pos - 1);
                break;
            }
            case Kind::Interior:
                global = interior_base + c * n_interior + node.entity;
                break;
            }
            dofs.push_back(global);
            node_coords_[static_cast<std::size_t>(global)] = origin + J * node.xi;
        }
    }

    for (int f = 0; f < m.n_faces(); ++f) {
        const Face& face = m.face(f);
        auto& fn = face_nodes_[static_cast<std::size_t>(f)];
        if (dim == 1) {
            fn.push_back(face.vertices[0]);
            continue;
        }
        const int lo = std::min(face.vertices[0], face.vertices[1]);
        const int hi = std::max(face.vertices[0], face.vertices[1]);
        fn.push_back(lo);
        for (int p = 1; p < k; ++p) {
            fn.push_back(edge_base + f * (k - 1) + (p - 1));
        }
        fn.push_back(hi);
    }
}

void CgVectorSpace::eval(int cell, const Point& x, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const
{
    const Point& origin = mesh_->vertex(mesh_->cell(cell)[0]);
    const Eigen::Matrix2d& Jinv = jac_inv_[static_cast<std::size_t>(cell)];
    Eigen::VectorXd mv;
    Eigen::MatrixX2d mg;
    monomials_.eval(Jinv * (x - origin), mv, mg);
    values.noalias() = lagrange_ * mv;
    grads.noalias() = (lagrange_ * mg) * Jinv;
}

double CgVectorSpace::evaluate(const Eigen::VectorXd& coeffs, int cell, const Point& x, int comp) const
{
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    eval(cell, x, v, g);
    const auto& nodes = cell_nodes(cell);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        s += coeffs(nodes[i] * value_dim() + comp) * v(static_cast<Eigen::Index>(i));
    }
    return s;
}

Eigen::Matrix2d CgVectorSpace::gradient(const Eigen::VectorXd& coeffs, int cell, const Point& x) const
{
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    eval(cell, x, v, g);
    Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
    const auto& nodes = cell_nodes(cell);
    const int d = value_dim();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int comp = 0; comp < d; ++comp) {
            grad.row(comp) += coeffs(nodes[i] * d + comp) * g.row(static_cast<Eigen::Index>(i));
        }
    }
    return grad;
}

double CgVectorSpace::divergence(const Eigen::VectorXd& coeffs, int cell, const Point& x) const
{
    const Eigen::Matrix2d grad = gradient(coeffs, cell, x);
    return value_dim() == 1 ? grad(0, 0) : grad.trace();
}

} // namespace dgp
