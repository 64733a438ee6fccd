#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dgpenalty/cg_mech.hpp"
#include "dgpenalty/dg_flow.hpp"
#include "dgpenalty/linsolve.hpp"

namespace dgp {

using GradientField = std::function<Point(const Point&)>;

enum class CaseKind { Continuous2D, HeterogeneousContinuous2D, Discontinuous1D };

const char* to_string(CaseKind kind) noexcept;
CaseKind case_kind_from_string(const std::string& name);

struct CaseParams {
    double kappa = 1.0;  // continuous cases
    double kappa0 = 1.0; // Discontinuous1D, x <= 0.5
    double kappa1 = 1.0; // Discontinuous1D, x > 0.5
};

struct ManufacturedCase {
    CaseKind kind = CaseKind::Continuous2D;
    CaseParams params;
    FlowProblem problem;
    ScalarField exact;
    GradientField exact_gradient;

    [[nodiscard]] int dim() const noexcept { return kind == CaseKind::Discontinuous1D ? 1 : 2; }
    /// Uniform mesh with nominal size h = 1/n.
    [[nodiscard]] std::shared_ptr<const Mesh> make_mesh(int n) const;
};

ManufacturedCase manufactured_elliptic_case(CaseKind kind, const CaseParams& params = {});

struct StudyRow {
    double h = 0.0;
    int n_dofs = 0;
    double h1_error = 0.0;
    double l2_error = 0.0;
    int iterations = 0;
    bool failed = false;
    std::string diagnostic;
};

struct ConvergenceStudy {
    std::vector<StudyRow> rows;
    std::vector<double> h1_rates; // rate_i = log2(e_i / e_{i+1})
    std::vector<double> l2_rates;

    [[nodiscard]] bool any_failed() const;
};

struct StudyOptions {
    int n_cycles = 6;
    double h0 = 6.25e-2;
    SolverKind solver = SolverKind::Direct;
    KrylovOptions krylov{};
    /// Skip the remaining cycles after a failed solve.
    bool stop_on_failure = false;
};

ConvergenceStudy run_convergence_study(const ManufacturedCase& mcase, const SchemeConfig& scheme,
                                       const StudyOptions& options = {});

/// Mesh, space and penalty-independent blocks of one refinement level.
struct StudyLevel {
    int n = 0;
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const DgSpace> space;
    DgBlocks blocks;
};

/// Levels n0, 2 n0, ... of a study; reusable for every theta and beta.
std::vector<StudyLevel> prepare_study_levels(const ManufacturedCase& mcase, int degree, const StudyOptions& options);

ConvergenceStudy run_convergence_study(const ManufacturedCase& mcase, const std::vector<StudyLevel>& levels,
                                       const SchemeConfig& scheme, const StudyOptions& options = {});

/// Each of the last two H1 rates >= k - 0.1 and no failed row. Studies whose
/// last errors sit at round-off (exact solution in the space) count as optimal.
bool is_rate_optimal(const ConvergenceStudy& study, int k);
bool is_rate_optimal(const std::vector<double>& h1_rates, int k);

/// Errors (H1 seminorm, L2) of a DG solution against exact callbacks.
std::pair<double, double> dg_errors(const DgSpace& space, const Eigen::VectorXd& P, const ScalarField& exact,
                                    const GradientField& exact_gradient);

// ---------------------------------------------------------------------------
// Staggered Biot column

enum class Drainage { Top, Bottom };

enum class CouplingMode { SinglePass, FixedPoint };

/// Rest: P = 0 and U = 0 before the load is switched on at t = 0.
/// Undrained: P = undrained pressure of the loaded column, U in equilibrium with it.
enum class BiotStart { Rest, Undrained };

const char* to_string(Drainage d) noexcept;
Drainage drainage_from_string(const std::string& name);

struct BiotParameters {
    double fluid_viscosity = 1e-6; // kPa s
    double rho = 1000.0;           // kg/m^3
    double K = 1000.0;             // kPa
    double nu = 0.25;
    double K_s = std::numeric_limits<double>::infinity();
    double phi = 0.2;
    double c_f = 1e-5;   // 1/kPa
    double k1 = 1e-12;   // m^2, x <= 0.5
    double k2 = 1e-16;   // m^2, x > 0.5
    double h = 0.05;
    double dt = 1.0;
    double load = 1.0; // compressive traction magnitude on the top, kPa
    double p_drained = 0.0;
    Drainage drainage = Drainage::Top;
    BiotStart start = BiotStart::Undrained;
    CouplingMode coupling = CouplingMode::SinglePass;
    int degree_p = 1;
    int degree_u = 1;
};

struct BiotModel {
    BiotParameters params;
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const DgSpace> pressure_space;
    std::shared_ptr<const CgVectorSpace> displacement_space;
    FlowProblem flow;
    ElasticityProblem mech;
};

BiotModel make_biot_column(const BiotParameters& params);

/// Pressure of the column right after loading when no fluid has escaped.
double undrained_pressure(const BiotParameters& params);

const char* to_string(CouplingMode m) noexcept;
CouplingMode coupling_mode_from_string(const std::string& name);
const char* to_string(BiotStart s) noexcept;
BiotStart biot_start_from_string(const std::string& name);

struct BiotState {
    double t = 0.0;
    int step = 0;
    Eigen::VectorXd P;
    Eigen::VectorXd U;
    Eigen::VectorXd U_prev; // empty before the first step
    bool failed = false;
};

/// Initial state per `params.start`; U solves the mechanics with the initial P.
BiotState initial_biot_state(const BiotModel& model, SolverKind solver);

struct BiotStepResult {
    BiotState state;
    SolveReport flow_report;
    SolveReport mech_report;
    int coupling_iterations = 1;

    [[nodiscard]] bool converged() const { return flow_report.converged && mech_report.converged; }
};

/// One time step. SinglePass lags the volumetric strain rate by one step;
/// FixedPoint iterates flow and mechanics within the step (fixed-stress
/// split) until the pressure update stalls.
BiotStepResult step_biot(const BiotState& state, const BiotModel& model, const SchemeConfig& scheme,
                         SolverKind solver, CouplingMode mode = CouplingMode::SinglePass,
                         const KrylovOptions& krylov = {});

// ---------------------------------------------------------------------------
// Solution quality

enum class QualityReason { SolverFailed, Oscillation, Clean };

const char* to_string(QualityReason r) noexcept;

struct QualityVerdict {
    int bool_quality = 0;
    QualityReason reason = QualityReason::SolverFailed;
};

/// Classifies samples ordered along x.
QualityVerdict classify_profile(const std::vector<double>& samples, double p_min, double p_max, bool converged = true);

/// Samples cell-midpoint pressures sorted by x, then classifies the profile.
QualityVerdict classify_quality(const Eigen::VectorXd& P, const DgSpace& space, const SolveReport& report,
                                double p_min, double p_max);

std::vector<double> midpoint_profile(const Eigen::VectorXd& P, const DgSpace& space);

/// First staggered step of the column followed by quality classification.
struct BiotRun {
    BiotStepResult step;
    QualityVerdict verdict;
};

BiotRun run_biot_quality(const BiotParameters& params, double beta, int theta = 1,
                         SolverKind solver = SolverKind::Direct);

} // namespace dgp
