#include "dgpenalty/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dgpenalty/error.hpp"
#include "dgpenalty/quadrature.hpp"

namespace dgp {

const char* to_string(CaseKind kind) noexcept
{
    switch (kind) {
    case CaseKind::Continuous2D: return "continuous";
    case CaseKind::HeterogeneousContinuous2D: return "heterogeneous";
    case CaseKind::Discontinuous1D: return "discontinuous";
    }
    return "unknown";
}

CaseKind case_kind_from_string(const std::string& name)
{
    if (name == "continuous") {
        return CaseKind::Continuous2D;
    }
    if (name == "heterogeneous") {
        return CaseKind::HeterogeneousContinuous2D;
    }
    if (name == "discontinuous") {
        return CaseKind::Discontinuous1D;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown case '" + name + "' (continuous|heterogeneous|discontinuous)");
}

std::shared_ptr<const Mesh> ManufacturedCase::make_mesh(int n) const
{
    if (dim() == 1) {
        return std::make_shared<const Mesh>(build_unit_interval(n));
    }
    return std::make_shared<const Mesh>(build_unit_square(n));
}

ManufacturedCase manufactured_elliptic_case(CaseKind kind, const CaseParams& params)
{
    ManufacturedCase mc;
    mc.kind = kind;
    mc.params = params;
    switch (kind) {
    case CaseKind::Continuous2D: {
        const double k = params.kappa;
        mc.problem.kappa = PermeabilityField::constant(k);
        mc.exact = [](const Point& x) { return std::sin(x.x() + x.y()); };
        mc.exact_gradient = [](const Point& x) {
            const double c = std::cos(x.x() + x.y());
            return Point(c, c);
        };
        mc.problem.source = [k](const Point& x) { return 2.0 * k * std::sin(x.x() + x.y()); };
        break;
    }
    case CaseKind::HeterogeneousContinuous2D: {
        const double k = params.kappa;
        if (!(k > 0.0)) {
            throw Error(ErrorKind::InvalidMaterial, "kappa must be positive");
        }
        mc.problem.kappa = PermeabilityField::spatial_scalar([k](const Point& x) { return k * std::sin(x.x() + x.y()); });
        mc.exact = [](const Point& x) { return std::sin(x.x() + x.y()); };
        mc.exact_gradient = [](const Point& x) {
            const double c = std::cos(x.x() + x.y());
            return Point(c, c);
        };
        // -div(k sin(s) cos(s) (1,1)) with s = x + y
        mc.problem.source = [k](const Point& x) { return -2.0 * k * std::cos(2.0 * (x.x() + x.y())); };
        break;
    }
    case CaseKind::Discontinuous1D: {
        const double k0 = params.kappa0;
        const double k1 = params.kappa1;
        mc.problem.kappa = PermeabilityField::piecewise_two_zone(k0, k1, 0.5);
        const double s = k0 + k1;
        mc.exact = [k0, k1, s](const Point& x) {
            return x.x() <= 0.5 ? 2.0 * x.x() * k1 / s : ((2.0 * x.x() - 1.0) * k0 + k1) / s;
        };
        mc.exact_gradient = [k0, k1, s](const Point& x) {
            return Point(x.x() <= 0.5 ? 2.0 * k1 / s : 2.0 * k0 / s, 0.0);
        };
        break;
    }
    }
    mc.problem.p_dirichlet = mc.exact;
    return mc;
}

bool ConvergenceStudy::any_failed() const
{
    return std::any_of(rows.begin(), rows.end(), [](const StudyRow& r) { return r.failed; });
}

std::pair<double, double> dg_errors(const DgSpace& space, const Eigen::VectorXd& P, const ScalarField& exact,
                                    const GradientField& exact_gradient)
{
    const Mesh& mesh = space.mesh();
    const QuadratureRule q = cell_rule(mesh.dim(), 2 * space.degree() + 4);
    const int nb = space.dofs_per_cell();
    double h1 = 0.0;
    double l2 = 0.0;
    Eigen::VectorXd phi;
    Eigen::MatrixX2d grad;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double det = std::abs(space.jacobian_determinant(c));
        const Eigen::VectorXd coeffs = P.segment(space.dof(c, 0), nb);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Point x = space.to_physical(c, q.points[i]);
            space.eval(c, x, phi, grad);
            const double w = q.weights[i] * det;
            const double e = coeffs.dot(phi) - exact(x);
            Point ge = grad.transpose() * coeffs - exact_gradient(x);
            if (mesh.dim() == 1) {
                ge.y() = 0.0;
            }
            l2 += w * e * e;
            h1 += w * ge.squaredNorm();
        }
    }
    return {std::sqrt(h1), std::sqrt(l2)};
}

std::vector<StudyLevel> prepare_study_levels(const ManufacturedCase& mcase, int degree, const StudyOptions& options)
{
    if (options.n_cycles < 1 || !(options.h0 > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "need at least one cycle and a positive h0");
    }
    const int n0 = static_cast<int>(std::lround(1.0 / options.h0));
    if (n0 < 1) {
        throw Error(ErrorKind::InvalidArgument, "h0 must not exceed 1");
    }
    std::vector<StudyLevel> levels;
    for (int cycle = 0; cycle < options.n_cycles; ++cycle) {
        StudyLevel lv;
        lv.n = n0 << cycle;
        lv.mesh = mcase.make_mesh(lv.n);
        lv.space = std::make_shared<const DgSpace>(lv.mesh, degree);
        lv.blocks = assemble_blocks(*lv.space, mcase.problem);
        levels.push_back(std::move(lv));
    }
    return levels;
}

ConvergenceStudy run_convergence_study(const ManufacturedCase& mcase, const std::vector<StudyLevel>& levels,
                                       const SchemeConfig& scheme, const StudyOptions& options)
{
    scheme.validate();
    ConvergenceStudy study;
    for (const StudyLevel& lv : levels) {
        if (lv.space->degree() != scheme.degree) {
            throw Error(ErrorKind::InvalidScheme, "scheme degree does not match the study levels");
        }
        StudyRow row;
        row.h = 1.0 / lv.n;
        row.n_dofs = lv.space->n_dofs();
        try {
            const LinearSystem sys = combine_blocks(lv.blocks, scheme);
            const SolveResult res = solve(sys, options.solver, options.krylov);
            row.iterations = res.report.iterations;
            if (!res.report.converged) {
                row.failed = true;
                row.diagnostic = res.report.diagnostic;
            }
            if (res.x.allFinite()) {
                std::tie(row.h1_error, row.l2_error) = dg_errors(*lv.space, res.x, mcase.exact, mcase.exact_gradient);
            } else {
                row.failed = true;
                row.h1_error = row.l2_error = std::numeric_limits<double>::quiet_NaN();
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingularMatrix) {
                throw;
            }
            row.failed = true;
            row.diagnostic = e.what();
            row.h1_error = row.l2_error = std::numeric_limits<double>::quiet_NaN();
        }
        study.rows.push_back(row);
        if (row.failed && options.stop_on_failure) {
            break;
        }
    }
    for (std::size_t i = 0; i + 1 < study.rows.size(); ++i) {
        const auto& a = study.rows[i];
        const auto& b = study.rows[i + 1];
        study.h1_rates.push_back(std::log2(a.h1_error / b.h1_error));
        study.l2_rates.push_back(std::log2(a.l2_error / b.l2_error));
    }
    return study;
}

ConvergenceStudy run_convergence_study(const ManufacturedCase& mcase, const SchemeConfig& scheme,
                                       const StudyOptions& options)
{
    scheme.validate();
    return run_convergence_study(mcase, prepare_study_levels(mcase, scheme.degree, options), scheme, options);
}

bool is_rate_optimal(const std::vector<double>& h1_rates, int k)
{
    if (h1_rates.size() < 2) {
        return false;
    }
    const double a = h1_rates[h1_rates.size() - 2];
    const double b = h1_rates[h1_rates.size() - 1];
    return std::isfinite(a) && std::isfinite(b) && std::min(a, b) >= k - 0.1;
}

bool is_rate_optimal(const ConvergenceStudy& study, int k)
{
    if (study.rows.size() < 3 || study.any_failed()) {
        return false;
    }
    constexpr double roundoff = 1e-9;
    const auto n = study.rows.size();
    if (study.rows[n - 1].h1_error <= roundoff && study.rows[n - 2].h1_error <= roundoff) {
        return true;
    }
    return is_rate_optimal(study.h1_rates, k);
}

// ---------------------------------------------------------------------------

const char* to_string(Drainage d) noexcept
{
    return d == Drainage::Top ? "top" : "bottom";
}

Drainage drainage_from_string(const std::string& name)
{
    if (name == "top") {
        return Drainage::Top;
    }
    if (name == "bottom") {
        return Drainage::Bottom;
    }
    throw Error(ErrorKind::InvalidArgument, "drainage must be top or bottom");
}

BiotModel make_biot_column(const BiotParameters& p)
{
    if (!(p.h > 0.0) || p.h > 1.0) {
        throw Error(ErrorKind::InvalidArgument, "column cell size must lie in (0, 1]");
    }
    if (!(p.fluid_viscosity > 0.0) || !(p.rho > 0.0) || !(p.k1 > 0.0) || !(p.k2 > 0.0)) {
        throw Error(ErrorKind::InvalidMaterial, "viscosity, density and permeabilities must be positive");
    }
    BiotModel model;
    model.params = p;
    const int n = std::max(1, static_cast<int>(std::lround(1.0 / p.h)));
    const Drainage drainage = p.drainage;
    auto tagger = [drainage](const Point& mid, const Point&) {
        const bool top = mid.x() > 0.5;
        BoundaryTags t;
        t.mech = top ? BoundaryTag::TractionT : BoundaryTag::DirichletU;
        const bool drained = (drainage == Drainage::Top) == top;
        t.flow = drained ? BoundaryTag::DirichletP : BoundaryTag::NeumannQ;
        return t;
    };
    model.mesh = std::make_shared<const Mesh>(build_unit_interval(n, tagger));
    model.pressure_space = std::make_shared<const DgSpace>(model.mesh, p.degree_p);
    model.displacement_space = std::make_shared<const CgVectorSpace>(model.mesh, p.degree_u);

    const double alpha = biot_alpha(p.K, p.K_s);
    const LameParameters lame = lame_from_bulk(p.K, p.nu);

    FlowProblem& flow = model.flow;
    flow.kappa = PermeabilityField::piecewise_two_zone(p.rho * p.k1 / p.fluid_viscosity,
                                                       p.rho * p.k2 / p.fluid_viscosity, 0.5);
    flow.rho = p.rho;
    flow.phi = p.phi;
    flow.c_f = p.c_f;
    flow.alpha = alpha;
    flow.K_s = p.K_s;
    flow.dt = p.dt;
    const double pd = p.p_drained;
    const double p0 = p.start == BiotStart::Undrained ? undrained_pressure(p) : 0.0;
    flow.p_dirichlet = [pd](const Point&) { return pd; };
    flow.initial_pressure = [p0](const Point&) { return p0; };

    ElasticityProblem& mech = model.mech;
    mech.lambda = lame.lambda;
    mech.mu = lame.mu;
    mech.alpha = alpha;
    const double load = p.load;
    mech.traction = [load](const Point&) { return Point(-load, 0.0); };
    return model;
}

double undrained_pressure(const BiotParameters& p)
{
    const double alpha = biot_alpha(p.K, p.K_s);
    const LameParameters lame = lame_from_bulk(p.K, p.nu);
    const double M = lame.lambda + 2.0 * lame.mu;
    const double inv_ks = std::isinf(p.K_s) ? 0.0 : 1.0 / p.K_s;
    const double storage = p.phi * p.c_f + (alpha - p.phi) * inv_ks;
    return alpha * p.load / (M * storage + alpha * alpha);
}

const char* to_string(CouplingMode m) noexcept
{
    return m == CouplingMode::SinglePass ? "single-pass" : "fixed-point";
}

CouplingMode coupling_mode_from_string(const std::string& name)
{
    if (name == "single-pass") {
        return CouplingMode::SinglePass;
    }
    if (name == "fixed-point") {
        return CouplingMode::FixedPoint;
    }
    throw Error(ErrorKind::InvalidArgument, "coupling must be single-pass or fixed-point");
}

const char* to_string(BiotStart s) noexcept
{
    return s == BiotStart::Rest ? "rest" : "undrained";
}

BiotStart biot_start_from_string(const std::string& name)
{
    if (name == "rest") {
        return BiotStart::Rest;
    }
    if (name == "undrained") {
        return BiotStart::Undrained;
    }
    throw Error(ErrorKind::InvalidArgument, "start must be rest or undrained");
}

namespace {

CellField pressure_field(const DgSpace& space, const Eigen::VectorXd& P)
{
    return [&space, &P](int cell, const Point& x) { return space.evaluate(P, cell, x); };
}

bool solve_safely(const LinearSystem& sys, SolverKind solver, const KrylovOptions& krylov, Eigen::VectorXd& x,
                  SolveReport& report)
{
    try {
        SolveResult r = solve(sys, solver, krylov);
        report = r.report;
        x = std::move(r.x);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularMatrix) {
            throw;
        }
        report = SolveReport{};
        report.solver_kind = solver;
        report.diagnostic = e.what();
        return false;
    }
    return report.converged && x.allFinite();
}

} // namespace

BiotState initial_biot_state(const BiotModel& model, SolverKind solver)
{
    BiotState s;
    const int nu = model.displacement_space->n_dofs();
    if (model.params.start == BiotStart::Rest) {
        s.P = Eigen::VectorXd::Zero(model.pressure_space->n_dofs());
        s.U = Eigen::VectorXd::Zero(nu);
        return s;
    }
    s.P = project(*model.pressure_space, model.flow.initial_pressure);
    const LinearSystem mech = assemble_elasticity(*model.displacement_space, model.mech,
                                                  pressure_field(*model.pressure_space, s.P));
    SolveReport report;
    if (!solve_safely(mech, solver, {}, s.U, report)) {
        s.failed = true;
        s.U = Eigen::VectorXd::Zero(nu);
    }
    return s;
}

BiotStepResult step_biot(const BiotState& state, const BiotModel& model, const SchemeConfig& scheme,
                         SolverKind solver, CouplingMode mode, const KrylovOptions& krylov)
{
    const DgSpace& ps = *model.pressure_space;
    const CgVectorSpace& us = *model.displacement_space;
    const double dt = model.flow.dt;
    if (!(dt > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "time step must be positive");
    }

    BiotStepResult out;
    out.state = state;
    if (state.failed) {
        out.flow_report.diagnostic = "state already failed";
        return out;
    }
    auto fail = [&](int passes) {
        out.state.failed = true;
        out.coupling_iterations = passes;
        return out;
    };

    if (mode == CouplingMode::SinglePass) {
        // lagged rate (div U^{n-1} - div U^{n-2}) / dt; zero on the first step
        const bool has_prev = state.U_prev.size() > 0;
        auto rate = [&](int cell, const Point& x) {
            if (!has_prev) {
                return 0.0;
            }
            return (us.divergence(state.U, cell, x) - us.divergence(state.U_prev, cell, x)) / dt;
        };
        const LinearSystem fsys = assemble_flow_step(ps, scheme, model.flow, state.P, rate);
        Eigen::VectorXd P;
        if (!solve_safely(fsys, solver, krylov, P, out.flow_report)) {
            return fail(1);
        }
        const LinearSystem msys = assemble_elasticity(us, model.mech, pressure_field(ps, P));
        Eigen::VectorXd U;
        if (!solve_safely(msys, solver, krylov, U, out.mech_report)) {
            return fail(1);
        }
        out.state.U_prev = state.U;
        out.state.P = std::move(P);
        out.state.U = std::move(U);
    } else {
        // fixed-stress split: extra storage L = rho alpha^2 / K_dr on the part of the pressure
        // increment that the volumetric strain can see (degree k_u - 1 per cell). The modal
        // basis is hierarchical and L2-orthogonal, so that part is a leading block of each cell.
        const int d = us.value_dim();
        const double K_dr = model.mech.lambda + 2.0 * model.mech.mu / d;
        const double L = model.flow.rho * model.flow.alpha * model.flow.alpha / K_dr;
        const int ku = us.degree();
        const int n_seen = std::min(ps.dofs_per_cell(), d == 1 ? ku : ku * (ku + 1) / 2);
        Eigen::VectorXd stab = Eigen::VectorXd::Zero(ps.n_dofs());
        for (int c = 0; c < ps.mesh().n_cells(); ++c) {
            for (int i = 0; i < n_seen; ++i) {
                stab(ps.dof(c, i)) = L / dt * ps.jacobian_determinant(c);
            }
        }
        Eigen::VectorXd P = state.P;
        Eigen::VectorXd U = state.U;
        int pass = 0;
        bool done = false;
        while (!done && pass < 50) {
            auto rate = [&](int cell, const Point& x) {
                return (us.divergence(U, cell, x) - us.divergence(state.U, cell, x)) / dt;
            };
            LinearSystem fsys = assemble_flow_step(ps, scheme, model.flow, state.P, rate);
            for (Eigen::Index i = 0; i < stab.size(); ++i) {
                fsys.A.coeffRef(i, i) += stab(i);
            }
            fsys.b += stab.cwiseProduct(P);
            Eigen::VectorXd P_new;
            ++pass;
            if (!solve_safely(fsys, solver, krylov, P_new, out.flow_report)) {
                return fail(pass);
            }
            const LinearSystem msys = assemble_elasticity(us, model.mech, pressure_field(ps, P_new));
            Eigen::VectorXd U_new;
            if (!solve_safely(msys, solver, krylov, U_new, out.mech_report)) {
                return fail(pass);
            }
            const double scale = P_new.lpNorm<Eigen::Infinity>();
            done = pass > 1 && (P_new - P).lpNorm<Eigen::Infinity>() <= 1e-6 * (scale > 0.0 ? scale : 1.0);
            P = std::move(P_new);
            U = std::move(U_new);
        }
        out.coupling_iterations = pass;
        out.state.U_prev = state.U;
        out.state.P = std::move(P);
        out.state.U = std::move(U);
    }
    out.state.t = state.t + dt;
    out.state.step = state.step + 1;
    return out;
}

// ---------------------------------------------------------------------------

const char* to_string(QualityReason r) noexcept
{
    switch (r) {
    case QualityReason::SolverFailed: return "solver-failed";
    case QualityReason::Oscillation: return "oscillation";
    case QualityReason::Clean: return "clean";
    }
    return "unknown";
}

QualityVerdict classify_profile(const std::vector<double>& samples, double p_min, double p_max, bool converged)
{
    if (samples.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty pressure profile");
    }
    if (!converged) {
        return {0, QualityReason::SolverFailed};
    }
    double max_abs = 0.0;
    for (double s : samples) {
        if (!std::isfinite(s)) {
            return {0, QualityReason::SolverFailed};
        }
        max_abs = std::max(max_abs, std::abs(s));
    }
    const double tau = 1e-3 * (p_max - p_min);
    for (double s : samples) {
        if (s < p_min - tau || s > p_max + tau) {
            return {0, QualityReason::Oscillation};
        }
    }
    const double ignore = 1e-3 * max_abs;
    int last_sign = 0;
    int changes = 0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double d = samples[i + 1] - samples[i];
        if (std::abs(d) < ignore) {
            continue;
        }
        const int sign = d > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) {
            ++changes;
        }
        last_sign = sign;
    }
    if (changes > 1) {
        return {0, QualityReason::Oscillation};
    }
    return {1, QualityReason::Clean};
}

std::vector<double> midpoint_profile(const Eigen::VectorXd& P, const DgSpace& space)
{
    const Mesh& mesh = space.mesh();
    std::vector<int> order(static_cast<std::size_t>(mesh.n_cells()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&mesh](int a, int b) {
        const Point ca = mesh.cell_centroid(a);
        const Point cb = mesh.cell_centroid(b);
        return ca.x() < cb.x() || (ca.x() == cb.x() && ca.y() < cb.y());
    });
    std::vector<double> out;
    out.reserve(order.size());
    for (int c : order) {
        out.push_back(space.evaluate(P, c, mesh.cell_centroid(c)));
    }
    return out;
}

QualityVerdict classify_quality(const Eigen::VectorXd& P, const DgSpace& space, const SolveReport& report,
                                double p_min, double p_max)
{
    if (P.size() == 0) {
        throw Error(ErrorKind::InvalidArgument, "empty pressure vector");
    }
    if (!report.converged) {
        return {0, QualityReason::SolverFailed};
    }
    return classify_profile(midpoint_profile(P, space), p_min, p_max, true);
}

BiotRun run_biot_quality(const BiotParameters& params, double beta, int theta, SolverKind solver)
{
    const BiotModel model = make_biot_column(params);
    SchemeConfig scheme;
    scheme.theta = theta;
    scheme.beta = beta;
    scheme.degree = params.degree_p;
    BiotRun run;
    const BiotState s0 = initial_biot_state(model, solver);
    run.step = step_biot(s0, model, scheme, solver, params.coupling);
    if (s0.failed || !run.step.converged() || run.step.state.failed) {
        run.verdict = {0, QualityReason::SolverFailed};
        return run;
    }
    const double pu = undrained_pressure(params);
    const double lo = std::min(params.p_drained, pu);
    const double hi = std::max(params.p_drained, pu);
    run.verdict = classify_quality(run.step.state.P, *model.pressure_space, run.step.flow_report, lo, hi);
    return run;
}

} // namespace dgp
