#pragma once

#include <string>

#include <Eigen/Sparse>

#include "dgpenalty/dg_flow.hpp"

namespace dgp {

enum class SolverKind { Direct, Iterative };

const char* to_string(SolverKind kind) noexcept;
SolverKind solver_kind_from_string(const std::string& name);

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0; // ||b - Ax||, absolute
    SolverKind solver_kind = SolverKind::Direct;
    std::string method;     // "lu", "pcg" or "bicgstab"
    std::string diagnostic; // empty unless something went wrong
};

struct SolveResult {
    Eigen::VectorXd x;
    SolveReport report;
};

struct KrylovOptions {
    double tol = 1e-8; // relative to ||b||
    int max_iter = 0;  // <= 0 means 10 * ndof
};

/// Sparse LU. Throws singular-matrix when factorization fails.
SolveResult solve_direct(const LinearSystem& system);

/// Jacobi-preconditioned CG for symmetric A, BiCGStab otherwise. Breakdown
/// and stagnation are reported through `converged = false`, never thrown.
SolveResult solve_krylov(const LinearSystem& system, const KrylovOptions& options = {});

SolveResult solve(const LinearSystem& system, SolverKind kind, const KrylovOptions& options = {});

/// ||A - A^T||_max <= tol * ||A||_max
bool is_numerically_symmetric(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A, double tol = 1e-12);

} // namespace dgp
