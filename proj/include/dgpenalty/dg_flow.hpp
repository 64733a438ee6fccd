#pragma once

#include <functional>
#include <limits>
#include <string>

#include <Eigen/Sparse>

#include "dgpenalty/spaces.hpp"

namespace dgp {

using ScalarField = std::function<double(const Point&)>;
/// Field known per cell, e.g. a displacement divergence; (cell, x) -> value.
using CellField = std::function<double(int cell, const Point&)>;

/// Isotropic permeability kappa(x) * I. Values on a cell are one-sided, so a
/// piecewise field has well-defined traces on both sides of an interface.
class PermeabilityField {
public:
    using Evaluator = std::function<double(const Mesh&, int cell, const Point&)>;

    static PermeabilityField constant(double kappa);
    static PermeabilityField spatial_scalar(ScalarField kappa);
    /// `left` on cells with centroid x <= interface, `right` elsewhere.
    static PermeabilityField piecewise_two_zone(double left, double right, double interface = 0.5);

    [[nodiscard]] double value(const Mesh& mesh, int cell, const Point& x) const;
    [[nodiscard]] Eigen::Matrix2d tensor(const Mesh& mesh, int cell, const Point& x) const;
    /// n^T kappa n
    [[nodiscard]] double normal_component(const Mesh& mesh, int cell, const Point& x, const Point& n) const;
    /// kappa -> c * kappa
    [[nodiscard]] PermeabilityField scaled(double c) const;

private:
    explicit PermeabilityField(Evaluator eval) : eval_(std::move(eval)) {}
    Evaluator eval_;
};

struct SchemeConfig {
    int theta = 1; // 1 SIPG, 0 IIPG, -1 NIPG
    double beta = 10.0;
    int degree = 1;

    void validate() const;
};

const char* scheme_name(int theta);

struct FlowProblem {
    PermeabilityField kappa = PermeabilityField::constant(1.0);
    double rho = 1.0;
    double phi = 0.0;
    double c_f = 0.0;
    double alpha = 0.0;
    double K_s = std::numeric_limits<double>::infinity();
    double dt = 1.0;
    ScalarField source;        // g; empty means zero
    ScalarField p_dirichlet;   // p_D on DirichletP faces; empty means zero
    ScalarField q_neumann;     // q_D = -kappa grad p . n on NeumannQ faces; empty means zero
    ScalarField initial_pressure;

    /// rho (phi c_f + (alpha - phi) / K_s)
    [[nodiscard]] double storage_coefficient() const;
};

struct LinearSystem {
    Eigen::SparseMatrix<double, Eigen::RowMajor> A;
    Eigen::VectorXd b;
    /// Set when no face carries a Dirichlet condition (pure Neumann problem).
    bool singular_warning = false;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(b.size()); }
};

double weight_delta_e(double kappa_plus_n, double kappa_minus_n);
double harmonic_kappa_e(double kappa_plus_n, double kappa_minus_n);

struct AssemblyOptions {
    bool penalize_dirichlet = true;
};

/// Separately assembled pieces of the interior-penalty operator:
/// A = volume + consistency + theta * consistency^T + beta * penalty.
struct DgBlocks {
    Eigen::SparseMatrix<double, Eigen::RowMajor> volume;
    Eigen::SparseMatrix<double, Eigen::RowMajor> consistency;
    Eigen::SparseMatrix<double, Eigen::RowMajor> penalty; // beta = 1
    Eigen::SparseMatrix<double, Eigen::RowMajor> mass;
    Eigen::VectorXd load;            // (g, w) - <q_D, w>_N
    Eigen::VectorXd dirichlet_adj;   // <p_D, kappa grad w . n>_D
    Eigen::VectorXd dirichlet_pen;   // <kappa_e / h_e p_D, w>_D (beta = 1)
    bool has_dirichlet = false;
};

DgBlocks assemble_blocks(const DgSpace& space, const FlowProblem& problem,
                         const AssemblyOptions& options = {});

/// volume + consistency + theta consistency^T + beta penalty, with the matching right-hand side.
LinearSystem combine_blocks(const DgBlocks& blocks, const SchemeConfig& scheme);

LinearSystem assemble_elliptic(const DgSpace& space, const SchemeConfig& scheme,
                               const FlowProblem& problem, const AssemblyOptions& options = {});

/// One backward-Euler step of the flow equation with the lagged coupling term.
LinearSystem assemble_flow_step(const DgSpace& space, const SchemeConfig& scheme,
                                const FlowProblem& problem, const Eigen::VectorXd& P_prev,
                                const CellField& divU_rate, const AssemblyOptions& options = {});

/// (v, w) over the DG space.
Eigen::SparseMatrix<double, Eigen::RowMajor> mass_matrix(const DgSpace& space);

/// L2 projection of a scalar field onto the DG space.
Eigen::VectorXd project(const DgSpace& space, const ScalarField& f);

} // namespace dgp
