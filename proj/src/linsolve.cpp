#include "dgpenalty/linsolve.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "dgpenalty/error.hpp"

namespace dgp {

const char* to_string(SolverKind kind) noexcept
{
    return kind == SolverKind::Direct ? "direct" : "iterative";
}

SolverKind solver_kind_from_string(const std::string& name)
{
    if (name == "direct") {
        return SolverKind::Direct;
    }
    if (name == "iterative") {
        return SolverKind::Iterative;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown solver kind '" + name + "'");
}

namespace {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

double max_abs(const RowSparse& A)
{
    double m = 0.0;
    for (int r = 0; r < A.outerSize(); ++r) {
        for (RowSparse::InnerIterator it(A, r); it; ++it) {
            m = std::max(m, std::abs(it.value()));
        }
    }
    return m;
}

void check_square(const LinearSystem& system)
{
    if (system.A.rows() != system.A.cols() || system.A.rows() != system.b.size()) {
        throw Error(ErrorKind::InvalidArgument, "system matrix is not square or does not match b");
    }
}

} // namespace

bool is_numerically_symmetric(const RowSparse& A, double tol)
{
    const RowSparse At = A.transpose();
    const RowSparse D = A - At;
    return max_abs(D) <= tol * max_abs(A);
}

SolveResult solve_direct(const LinearSystem& system)
{
    check_square(system);
    SolveResult out;
    out.report.solver_kind = SolverKind::Direct;
    out.report.method = "lu";
    const Eigen::SparseMatrix<double>& A = system.A;
    // symmetric diagonal equilibration: factor S A S with S = |diag A|^{-1/2}
    Eigen::VectorXd scale = A.diagonal().cwiseAbs();
    for (Eigen::Index i = 0; i < scale.size(); ++i) {
        scale(i) = scale(i) > 0.0 ? 1.0 / std::sqrt(scale(i)) : 1.0;
    }
    const Eigen::SparseMatrix<double> As = scale.asDiagonal() * A * scale.asDiagonal();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(As);
    lu.factorize(As);
    if (lu.info() != Eigen::Success) {
        throw Error(ErrorKind::SingularMatrix, "LU factorization failed: " + lu.lastErrorMessage());
    }
    const auto apply = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
        return scale.cwiseProduct(lu.solve(scale.cwiseProduct(rhs)));
    };
    out.x = apply(system.b);
    Eigen::VectorXd r = system.b - A * out.x;
    // two rounds of iterative refinement recover accuracy on badly scaled systems
    for (int i = 0; i < 2 && r.norm() > 1e-12 * system.b.norm(); ++i) {
        out.x += apply(r);
        r = system.b - A * out.x;
    }
    out.report.final_residual = r.norm();
    const double bn = system.b.norm();
    if (!out.x.allFinite()) {
        throw Error(ErrorKind::SingularMatrix, "LU solve produced non-finite values");
    }
    out.report.converged = out.report.final_residual <= 1e-10 * (bn > 0.0 ? bn : 1.0);
    if (!out.report.converged) {
        out.report.diagnostic = "residual above 1e-10 relative after refinement";
    }
    return out;
}

namespace {

Eigen::VectorXd jacobi_inverse(const RowSparse& A)
{
    Eigen::VectorXd d = A.diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        d(i) = d(i) != 0.0 ? 1.0 / d(i) : 1.0;
    }
    return d;
}

SolveResult pcg(const RowSparse& A, const Eigen::VectorXd& b, double tol, int max_iter)
{
    SolveResult out;
    out.report.solver_kind = SolverKind::Iterative;
    out.report.method = "pcg";
    const Eigen::Index n = b.size();
    const double bn = b.norm();
    out.x = Eigen::VectorXd::Zero(n);
    if (bn == 0.0) {
        out.report.converged = true;
        return out;
    }
    const double target = tol * bn;
    const Eigen::VectorXd dinv = jacobi_inverse(A);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = dinv.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd q(n);
    double rz = r.dot(z);
    int it = 0;
    while (it < max_iter) {
        q.noalias() = A * p;
        const double pq = p.dot(q);
        if (!(std::abs(pq) > 0.0) || !std::isfinite(pq)) {
            out.report.diagnostic = "breakdown: p^T A p = 0";
            break;
        }
        const double a = rz / pq;
        out.x += a * p;
        r -= a * q;
        ++it;
        if (r.norm() <= target) {
            // confirm against the true residual before declaring success
            r = b - A * out.x;
            if (r.norm() <= target) {
                out.report.converged = true;
                break;
            }
        }
        z = dinv.cwiseProduct(r);
        const double rz_new = r.dot(z);
        if (!std::isfinite(rz_new)) {
            out.report.diagnostic = "non-finite residual";
            break;
        }
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    out.report.iterations = it;
    out.report.final_residual = (b - A * out.x).norm();
    if (!out.report.converged && out.report.diagnostic.empty()) {
        out.report.diagnostic = "maximum iterations reached";
    }
    return out;
}

SolveResult bicgstab(const RowSparse& A, const Eigen::VectorXd& b, double tol, int max_iter)
{
    SolveResult out;
    out.report.solver_kind = SolverKind::Iterative;
    out.report.method = "bicgstab";
    const Eigen::Index n = b.size();
    const double bn = b.norm();
    out.x = Eigen::VectorXd::Zero(n);
    if (bn == 0.0) {
        out.report.converged = true;
        return out;
    }
    const double target = tol * bn;
    const Eigen::VectorXd dinv = jacobi_inverse(A);
    Eigen::VectorXd r = b;
    const Eigen::VectorXd r0 = r;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y(n);
    Eigen::VectorXd s(n);
    Eigen::VectorXd zs(n);
    Eigen::VectorXd t(n);
    double rho = 1.0;
    double alpha = 1.0;
    double omega = 1.0;
    int it = 0;
    while (it < max_iter) {
        const double rho_new = r0.dot(r);
        if (rho_new == 0.0 || omega == 0.0 || !std::isfinite(rho_new)) {
            out.report.diagnostic = "breakdown: rho or omega vanished";
            break;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p = r + beta * (p - omega * v);
        y = dinv.cwiseProduct(p);
        v.noalias() = A * y;
        const double r0v = r0.dot(v);
        if (r0v == 0.0 || !std::isfinite(r0v)) {
            out.report.diagnostic = "breakdown: r0^T v = 0";
            break;
        }
        alpha = rho / r0v;
        s = r - alpha * v;
        ++it;
        if (s.norm() <= target) {
            out.x += alpha * y;
            r = b - A * out.x;
            if (r.norm() <= target) {
                out.report.converged = true;
                break;
            }
            continue;
        }
        zs = dinv.cwiseProduct(s);
        t.noalias() = A * zs;
        const double tt = t.dot(t);
        if (tt == 0.0 || !std::isfinite(tt)) {
            out.report.diagnostic = "breakdown: t = 0";
            break;
        }
        omega = t.dot(s) / tt;
        out.x += alpha * y + omega * zs;
        r = s - omega * t;
        if (r.norm() <= target) {
            r = b - A * out.x;
            if (r.norm() <= target) {
                out.report.converged = true;
                break;
            }
        }
    }
    out.report.iterations = it;
    out.report.final_residual = (b - A * out.x).norm();
    if (!out.x.allFinite()) {
        out.report.converged = false;
        out.report.diagnostic = "non-finite iterate";
    }
    if (!out.report.converged && out.report.diagnostic.empty()) {
        out.report.diagnostic = "maximum iterations reached";
    }
    return out;
}

} // namespace

SolveResult solve_krylov(const LinearSystem& system, const KrylovOptions& options)
{
    check_square(system);
    const int n = system.size();
    const int max_iter = options.max_iter > 0 ? options.max_iter : 10 * std::max(n, 1);
    if (is_numerically_symmetric(system.A)) {
        return pcg(system.A, system.b, options.tol, max_iter);
    }
    return bicgstab(system.A, system.b, options.tol, max_iter);
}

SolveResult solve(const LinearSystem& system, SolverKind kind, const KrylovOptions& options)
{
    return kind == SolverKind::Direct ? solve_direct(system) : solve_krylov(system, options);
}

} // namespace dgp
