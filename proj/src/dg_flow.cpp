#include "dgpenalty/dg_flow.hpp"

#include <cmath>
#include <vector>

#include "dgpenalty/error.hpp"
#include "dgpenalty/quadrature.hpp"

namespace dgp {

PermeabilityField PermeabilityField::constant(double kappa)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw Error(ErrorKind::InvalidMaterial, "permeability must be positive and finite");
    }
    return PermeabilityField([kappa](const Mesh&, int, const Point&) { return kappa; });
}

PermeabilityField PermeabilityField::spatial_scalar(ScalarField kappa)
{
    if (!kappa) {
        throw Error(ErrorKind::InvalidArgument, "empty permeability function");
    }
    return PermeabilityField([k = std::move(kappa)](const Mesh&, int, const Point& x) { return k(x); });
}

PermeabilityField PermeabilityField::piecewise_two_zone(double left, double right, double interface)
{
    if (!(left > 0.0) || !(right > 0.0) || !std::isfinite(left) || !std::isfinite(right)) {
        throw Error(ErrorKind::InvalidMaterial, "zone permeabilities must be positive and finite");
    }
    return PermeabilityField([=](const Mesh& mesh, int cell, const Point&) {
        return mesh.cell_centroid(cell).x() <= interface ? left : right;
    });
}

double PermeabilityField::value(const Mesh& mesh, int cell, const Point& x) const
{
    const double k = eval_(mesh, cell, x);
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw Error(ErrorKind::InvalidMaterial, "permeability is not positive at a quadrature point");
    }
    return k;
}

Eigen::Matrix2d PermeabilityField::tensor(const Mesh& mesh, int cell, const Point& x) const
{
    return value(mesh, cell, x) * Eigen::Matrix2d::Identity();
}

double PermeabilityField::normal_component(const Mesh& mesh, int cell, const Point& x, const Point& n) const
{
    return n.dot(tensor(mesh, cell, x) * n);
}

PermeabilityField PermeabilityField::scaled(double c) const
{
    if (!(c > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "permeability scale must be positive");
    }
    return PermeabilityField([e = eval_, c](const Mesh& m, int cell, const Point& x) { return c * e(m, cell, x); });
}

void SchemeConfig::validate() const
{
    if (theta < -1 || theta > 1) {
        throw Error(ErrorKind::InvalidScheme, "theta must be -1, 0 or 1");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw Error(ErrorKind::InvalidScheme, "beta must be positive");
    }
    if (degree < 1 || degree > 5) {
        throw Error(ErrorKind::InvalidScheme, "degree must be in 1..5");
    }
}

const char* scheme_name(int theta)
{
    switch (theta) {
    case 1: return "SIPG";
    case 0: return "IIPG";
    case -1: return "NIPG";
    default: return "unknown";
    }
}

double FlowProblem::storage_coefficient() const
{
    const double inv_ks = std::isinf(K_s) ? 0.0 : 1.0 / K_s;
    return rho * (phi * c_f + (alpha - phi) * inv_ks);
}

double weight_delta_e(double kappa_plus_n, double kappa_minus_n)
{
    if (!(kappa_plus_n > 0.0) || !(kappa_minus_n > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "one-sided normal permeabilities must be positive");
    }
    return kappa_minus_n / (kappa_plus_n + kappa_minus_n);
}

double harmonic_kappa_e(double kappa_plus_n, double kappa_minus_n)
{
    if (!(kappa_plus_n > 0.0) || !(kappa_minus_n > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "one-sided normal permeabilities must be positive");
    }
    return 2.0 * kappa_plus_n * kappa_minus_n / (kappa_plus_n + kappa_minus_n);
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;
using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

RowSparse from_triplets(int n, const Triplets& t)
{
    RowSparse m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

struct FacePoint {
    Point x;
    double w;
};

std::vector<FacePoint> face_points(const Mesh& mesh, const Face& face, int degree)
{
    std::vector<FacePoint> pts;
    if (mesh.dim() == 1) {
        pts.push_back({mesh.vertex(face.vertices[0]), face.measure});
        return pts;
    }
    const QuadratureRule q = interval_rule(degree);
    const Point& a = mesh.vertex(face.vertices[0]);
    const Point& b = mesh.vertex(face.vertices[1]);
    for (std::size_t i = 0; i < q.size(); ++i) {
        pts.push_back({a + q.points[i].x() * (b - a), q.weights[i] * face.measure});
    }
    return pts;
}

template <class F>
void for_cell_points(const DgSpace& space, int cell, const QuadratureRule& q, F&& f)
{
    const double det = std::abs(space.jacobian_determinant(cell));
    for (std::size_t i = 0; i < q.size(); ++i) {
        f(space.to_physical(cell, q.points[i]), q.weights[i] * det);
    }
}

} // namespace

DgBlocks assemble_blocks(const DgSpace& space, const FlowProblem& problem, const AssemblyOptions& options)
{
    const Mesh& mesh = space.mesh();
    const int n = space.n_dofs();
    const int nb = space.dofs_per_cell();
    const int k = space.degree();
    const QuadratureRule cell_q = cell_rule(mesh.dim(), 2 * k + 2);
    const QuadratureRule rhs_q = cell_rule(mesh.dim(), 2 * k + 4);

    Triplets vol;
    Triplets cons;
    Triplets pen;
    Triplets mass;
    DgBlocks blocks;
    blocks.load = Eigen::VectorXd::Zero(n);
    blocks.dirichlet_adj = Eigen::VectorXd::Zero(n);
    blocks.dirichlet_pen = Eigen::VectorXd::Zero(n);

    Eigen::VectorXd phi;
    Eigen::MatrixX2d grad;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        Eigen::MatrixXd kl = Eigen::MatrixXd::Zero(nb, nb);
        Eigen::MatrixXd ml = Eigen::MatrixXd::Zero(nb, nb);
        for_cell_points(space, c, cell_q, [&](const Point& x, double w) {
            space.eval(c, x, phi, grad);
            const double kappa = problem.kappa.value(mesh, c, x);
            kl.noalias() += (w * kappa) * grad * grad.transpose();
            ml.noalias() += w * phi * phi.transpose();
        });
        for (int i = 0; i < nb; ++i) {
            for (int j = 0; j < nb; ++j) {
                vol.emplace_back(space.dof(c, i), space.dof(c, j), kl(i, j));
                mass.emplace_back(space.dof(c, i), space.dof(c, j), ml(i, j));
            }
        }
        if (problem.source) {
            for_cell_points(space, c, rhs_q, [&](const Point& x, double w) {
                space.eval(c, x, phi, grad);
                blocks.load.segment(space.dof(c, 0), nb) += (w * problem.source(x)) * phi;
            });
        }
    }

    Eigen::VectorXd phi_p;
    Eigen::VectorXd phi_m;
    Eigen::MatrixX2d grad_p;
    Eigen::MatrixX2d grad_m;
    for (const Face& face : mesh.faces()) {
        const Point& nrm = face.normal;
        const double he = face_characteristic_length(mesh, face.id);
        if (!face.is_boundary()) {
            const int cp = face.plus;
            const int cm = face.minus;
            // local block indices: 0 = plus, 1 = minus
            Eigen::MatrixXd C[2][2];
            Eigen::MatrixXd P[2][2];
            for (auto& row : C) {
                for (auto& m : row) {
                    m = Eigen::MatrixXd::Zero(nb, nb);
                }
            }
            for (auto& row : P) {
                for (auto& m : row) {
                    m = Eigen::MatrixXd::Zero(nb, nb);
                }
            }
            for (const FacePoint& fp : face_points(mesh, face, 2 * k + 2)) {
                space.eval(cp, fp.x, phi_p, grad_p);
                space.eval(cm, fp.x, phi_m, grad_m);
                const double kp = problem.kappa.normal_component(mesh, cp, fp.x, nrm);
                const double km = problem.kappa.normal_component(mesh, cm, fp.x, nrm);
                const double delta = weight_delta_e(kp, km);
                const double ke = harmonic_kappa_e(kp, km);
                const double kap_p = problem.kappa.value(mesh, cp, fp.x);
                const double kap_m = problem.kappa.value(mesh, cm, fp.x);
                // weighted normal flux of each trial function, and signed trace of each test function
                const Eigen::VectorXd flux[2] = {delta * kap_p * (grad_p * nrm),
                                                 (1.0 - delta) * kap_m * (grad_m * nrm)};
                const Eigen::VectorXd jump[2] = {phi_p, -phi_m};
                for (int sw = 0; sw < 2; ++sw) {
                    for (int sv = 0; sv < 2; ++sv) {
                        C[sw][sv].noalias() -= fp.w * jump[sw] * flux[sv].transpose();
                        P[sw][sv].noalias() += (fp.w * ke / he) * jump[sw] * jump[sv].transpose();
                    }
                }
            }
            const int cells[2] = {cp, cm};
            for (int sw = 0; sw < 2; ++sw) {
                for (int sv = 0; sv < 2; ++sv) {
                    for (int i = 0; i < nb; ++i) {
                        for (int j = 0; j < nb; ++j) {
                            const int row = space.dof(cells[sw], i);
                            const int col = space.dof(cells[sv], j);
                            cons.emplace_back(row, col, C[sw][sv](i, j));
                            pen.emplace_back(row, col, P[sw][sv](i, j));
                        }
                    }
                }
            }
            continue;
        }

        const int c = face.plus;
        if (face.tags.flow == BoundaryTag::NeumannQ) {
            if (problem.q_neumann) {
                for (const FacePoint& fp : face_points(mesh, face, 2 * k + 4)) {
                    space.eval(c, fp.x, phi_p, grad_p);
                    blocks.load.segment(space.dof(c, 0), nb) -= (fp.w * problem.q_neumann(fp.x)) * phi_p;
                }
            }
            continue;
        }
        blocks.has_dirichlet = true;
        Eigen::MatrixXd Cl = Eigen::MatrixXd::Zero(nb, nb);
        Eigen::MatrixXd Pl = Eigen::MatrixXd::Zero(nb, nb);
        for (const FacePoint& fp : face_points(mesh, face, 2 * k + 4)) {
            space.eval(c, fp.x, phi_p, grad_p);
            const double kap = problem.kappa.value(mesh, c, fp.x);
            const double ke = problem.kappa.normal_component(mesh, c, fp.x, nrm);
            const Eigen::VectorXd flux = kap * (grad_p * nrm);
            Cl.noalias() -= fp.w * phi_p * flux.transpose();
            if (options.penalize_dirichlet) {
                Pl.noalias() += (fp.w * ke / he) * phi_p * phi_p.transpose();
            }
            const double pd = problem.p_dirichlet ? problem.p_dirichlet(fp.x) : 0.0;
            blocks.dirichlet_adj.segment(space.dof(c, 0), nb) += (fp.w * pd) * flux;
            if (options.penalize_dirichlet) {
                blocks.dirichlet_pen.segment(space.dof(c, 0), nb) += (fp.w * ke / he * pd) * phi_p;
            }
        }
        for (int i = 0; i < nb; ++i) {
            for (int j = 0; j < nb; ++j) {
                cons.emplace_back(space.dof(c, i), space.dof(c, j), Cl(i, j));
                pen.emplace_back(space.dof(c, i), space.dof(c, j), Pl(i, j));
            }
        }
    }

    blocks.volume = from_triplets(n, vol);
    blocks.consistency = from_triplets(n, cons);
    blocks.penalty = from_triplets(n, pen);
    blocks.mass = from_triplets(n, mass);
    return blocks;
}

LinearSystem combine_blocks(const DgBlocks& blocks, const SchemeConfig& scheme)
{
    LinearSystem sys;
    RowSparse ct = blocks.consistency.transpose();
    sys.A = blocks.volume + blocks.consistency + static_cast<double>(scheme.theta) * ct
            + scheme.beta * blocks.penalty;
    sys.A.prune(0.0);
    sys.b = blocks.load - static_cast<double>(scheme.theta) * blocks.dirichlet_adj
            + scheme.beta * blocks.dirichlet_pen;
    sys.singular_warning = !blocks.has_dirichlet;
    return sys;
}

LinearSystem assemble_elliptic(const DgSpace& space, const SchemeConfig& scheme, const FlowProblem& problem,
                               const AssemblyOptions& options)
{
    scheme.validate();
    if (scheme.degree != space.degree()) {
        throw Error(ErrorKind::InvalidScheme, "scheme degree does not match the space");
    }
    return combine_blocks(assemble_blocks(space, problem, options), scheme);
}

LinearSystem assemble_flow_step(const DgSpace& space, const SchemeConfig& scheme, const FlowProblem& problem,
                                const Eigen::VectorXd& P_prev, const CellField& divU_rate,
                                const AssemblyOptions& options)
{
    if (!(problem.dt > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "time step must be positive");
    }
    if (P_prev.size() != space.n_dofs()) {
        throw Error(ErrorKind::InvalidArgument, "previous pressure has the wrong length");
    }
    scheme.validate();
    const double storage = problem.storage_coefficient();
    if (storage < 0.0) {
        throw Error(ErrorKind::InvalidMaterial, "storage coefficient is negative");
    }
    const DgBlocks blocks = assemble_blocks(space, problem, options);
    LinearSystem sys = combine_blocks(blocks, scheme);
    const double s = storage / problem.dt;
    if (s != 0.0) {
        sys.A += s * blocks.mass;
        sys.b += s * (blocks.mass * P_prev);
    }
    if (divU_rate && problem.alpha != 0.0) {
        const Mesh& mesh = space.mesh();
        const int nb = space.dofs_per_cell();
        const QuadratureRule q = cell_rule(mesh.dim(), 2 * space.degree() + 2);
        Eigen::VectorXd phi;
        Eigen::MatrixX2d grad;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            for_cell_points(space, c, q, [&](const Point& x, double w) {
                space.eval(c, x, phi, grad);
                sys.b.segment(space.dof(c, 0), nb) -= (w * problem.rho * problem.alpha * divU_rate(c, x)) * phi;
            });
        }
    }
    return sys;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> mass_matrix(const DgSpace& space)
{
    const Mesh& mesh = space.mesh();
    const int nb = space.dofs_per_cell();
    const QuadratureRule q = cell_rule(mesh.dim(), 2 * space.degree() + 2);
    Triplets t;
    Eigen::VectorXd phi;
    Eigen::MatrixX2d grad;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        Eigen::MatrixXd ml = Eigen::MatrixXd::Zero(nb, nb);
        for_cell_points(space, c, q, [&](const Point& x, double w) {
            space.eval(c, x, phi, grad);
            ml.noalias() += w * phi * phi.transpose();
        });
        for (int i = 0; i < nb; ++i) {
            for (int j = 0; j < nb; ++j) {
                t.emplace_back(space.dof(c, i), space.dof(c, j), ml(i, j));
            }
        }
    }
    return from_triplets(space.n_dofs(), t);
}

Eigen::VectorXd project(const DgSpace& space, const ScalarField& f)
{
    const Mesh& mesh = space.mesh();
    const int nb = space.dofs_per_cell();
    const QuadratureRule q = cell_rule(mesh.dim(), 2 * space.degree() + 4);
    Eigen::VectorXd out(space.n_dofs());
    Eigen::VectorXd phi;
    Eigen::MatrixX2d grad;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        Eigen::MatrixXd ml = Eigen::MatrixXd::Zero(nb, nb);
        Eigen::VectorXd rl = Eigen::VectorXd::Zero(nb);
        for_cell_points(space, c, q, [&](const Point& x, double w) {
            space.eval(c, x, phi, grad);
            ml.noalias() += w * phi * phi.transpose();
            rl += (w * f(x)) * phi;
        });
        out.segment(space.dof(c, 0), nb) = ml.ldlt().solve(rl);
    }
    return out;
}

} // namespace dgp
