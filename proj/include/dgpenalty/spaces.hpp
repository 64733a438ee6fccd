#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dgpenalty/mesh.hpp"

namespace dgp {

/// Values and reference gradients of the monomials of total degree <= k in
/// the (shifted, scaled) reference coordinates.
class MonomialSet {
public:
    MonomialSet(int dim, int degree, Point shift = Point::Zero(), double scale = 1.0);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(exponents_.size()); }
    void eval(const Point& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

private:
    int dim_;
    std::vector<std::array<int, 2>> exponents_;
    Point shift_;
    double scale_;
};

/// Modal basis on the reference simplex, orthonormal in L2(reference).
class OrthonormalBasis {
public:
    OrthonormalBasis(int dim, int degree);

    [[nodiscard]] int size() const noexcept { return monomials_.size(); }
    void eval(const Point& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

private:
    MonomialSet monomials_;
    Eigen::MatrixXd coeffs_; // row i: basis function i in the monomial set
};

/// Discontinuous piecewise-polynomial space of total degree k. Dofs are
/// numbered cell-major: dof(c, i) = c * dofs_per_cell + i.
class DgSpace {
public:
    DgSpace(std::shared_ptr<const Mesh> mesh, int degree);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] std::shared_ptr<const Mesh> mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int dofs_per_cell() const noexcept { return basis_.size(); }
    [[nodiscard]] int n_dofs() const noexcept { return mesh_->n_cells() * dofs_per_cell(); }
    [[nodiscard]] int dof(int cell, int i) const noexcept { return cell * dofs_per_cell() + i; }

    [[nodiscard]] Point to_reference(int cell, const Point& x) const;
    [[nodiscard]] Point to_physical(int cell, const Point& xi) const;
    [[nodiscard]] double jacobian_determinant(int cell) const { return det_[static_cast<std::size_t>(cell)]; }

    /// Basis values and physical gradients of cell `cell` at physical point x.
    void eval(int cell, const Point& x, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

    [[nodiscard]] double evaluate(const Eigen::VectorXd& coeffs, int cell, const Point& x) const;
    [[nodiscard]] Point evaluate_gradient(const Eigen::VectorXd& coeffs, int cell, const Point& x) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_;
    OrthonormalBasis basis_;
    std::vector<Eigen::Matrix2d> jac_inv_;
    std::vector<double> det_;
};

/// Continuous vector-valued Lagrange space of degree k with d = mesh.dim
/// components. Scalar nodes are numbered vertices first, then edge-interior
/// nodes, then cell-interior nodes; vector dof = scalar_dof * d + component.
class CgVectorSpace {
public:
    CgVectorSpace(std::shared_ptr<const Mesh> mesh, int degree);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int value_dim() const noexcept { return mesh_->dim(); }
    [[nodiscard]] int n_scalar_dofs() const noexcept { return static_cast<int>(node_coords_.size()); }
    [[nodiscard]] int n_dofs() const noexcept { return n_scalar_dofs() * value_dim(); }
    [[nodiscard]] int nodes_per_cell() const noexcept { return static_cast<int>(local_nodes_.size()); }

    [[nodiscard]] const std::vector<int>& cell_nodes(int cell) const
    {
        return cell_nodes_[static_cast<std::size_t>(cell)];
    }
    [[nodiscard]] const Point& node(int scalar_dof) const { return node_coords_[static_cast<std::size_t>(scalar_dof)]; }
    /// Scalar nodes lying on a face (vertices included).
    [[nodiscard]] const std::vector<int>& face_nodes(int face) const
    {
        return face_nodes_[static_cast<std::size_t>(face)];
    }

    /// Scalar shape values and physical gradients on `cell` at physical x.
    void eval(int cell, const Point& x, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

    /// Component `comp` of the field at x.
    [[nodiscard]] double evaluate(const Eigen::VectorXd& coeffs, int cell, const Point& x, int comp) const;
    /// Divergence of the field at x.
    [[nodiscard]] double divergence(const Eigen::VectorXd& coeffs, int cell, const Point& x) const;
    /// Full gradient (row = component, column = direction) at x.
    [[nodiscard]] Eigen::Matrix2d gradient(const Eigen::VectorXd& coeffs, int cell, const Point& x) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_;
    MonomialSet monomials_;
    Eigen::MatrixXd lagrange_; // row i: shape function i in the monomial set
    std::vector<Point> local_nodes_;
    std::vector<std::vector<int>> cell_nodes_;
    std::vector<std::vector<int>> face_nodes_;
    std::vector<Point> node_coords_;
    std::vector<Eigen::Matrix2d> jac_inv_;
};

} // namespace dgp
