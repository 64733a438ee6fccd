// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dgpenalty/cli/app.hpp"
#include "dgpenalty/drivers.hpp"
#include "dgpenalty/ml/model.hpp"
#include "dgpenalty/ml/stats.hpp"
#include "dgpenalty/sweeps.hpp"

using namespace dgp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = false;
    std::string detail;
};

int g_failed = 0;

void report(int id, const char* title, const Verdict& v)
{
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str());
    std::fflush(stdout);
    g_failed += v.pass ? 0 : 1;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int hardware_jobs()
{
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Penalty search grid shared by the beta_min and U-shape criteria.
SweepConfig search_config()
{
    SweepConfig c;
    c.beta0 = 100.0;
    c.shrink = 0.99;
    c.beta_floor = 1e-2;
    c.h0 = 0.25;
    c.n_h = 4;
    c.search = BetaSearch::Scan;
    return c;
}

Verdict convergence_rates()
{
    const auto t0 = Clock::now();
    const ManufacturedCase mc = manufactured_elliptic_case(CaseKind::Continuous2D);
    StudyOptions opts;
    opts.n_cycles = 5;
    opts.h0 = 0.25;
    opts.solver = SolverKind::Direct;
    bool ok = true;
    std::string detail;
    for (int k = 1; k <= 3; ++k) {
        const ConvergenceStudy s = run_convergence_study(mc, SchemeConfig{1, 10.0, k}, opts);
        const auto& r = s.h1_rates;
        const double mean = r.size() >= 2 ? 0.5 * (r[r.size() - 1] + r[r.size() - 2]) : std::nan("");
        ok = ok && !s.any_failed() && std::abs(mean - k) <= 0.15;
        detail += "k=" + std::to_string(k) + " mean rate " + fmt("%.3f", mean) + ", ";
    }
    const double t = seconds_since(t0);
    ok = ok && t < 120.0;
    detail += "runtime " + fmt("%.1f", t) + " s";
    return {ok, detail};
}

struct BetaMinRuns {
    double sipg1_direct = 0.0;
    double sipg1_iterative = 0.0;
    double iipg1 = 0.0;
    double sipg2 = 0.0;
    double sipg3 = 0.0;
};

BetaMinRuns beta_min_runs()
{
    struct Job {
        int theta;
        int k;
        SolverKind solver;
        double* out;
    };
    BetaMinRuns r;
    const std::vector<Job> jobs{{1, 1, SolverKind::Direct, &r.sipg1_direct},
                                {1, 1, SolverKind::Iterative, &r.sipg1_iterative},
                                {0, 1, SolverKind::Direct, &r.iipg1},
                                {1, 2, SolverKind::Direct, &r.sipg2},
                                {1, 3, SolverKind::Direct, &r.sipg3}};
    const ManufacturedCase mc = manufactured_elliptic_case(CaseKind::Continuous2D);
    const SweepConfig cfg = search_config();
    parallel_for(static_cast<int>(jobs.size()), static_cast<int>(jobs.size()), [&](int i) {
        const Job& j = jobs[static_cast<std::size_t>(i)];
        SchemeConfig scheme;
        scheme.theta = j.theta;
        scheme.degree = j.k;
        *j.out = find_beta_min(mc, scheme, j.solver, cfg).beta_min;
    });
    return r;
}

Verdict beta_min_reproduction(const BetaMinRuns& r)
{
    const bool range = r.sipg1_direct >= 0.6 && r.sipg1_direct <= 2.2;
    const bool iipg = r.iipg1 < r.sipg1_direct;
    const bool increasing = r.sipg1_direct < r.sipg2 && r.sipg2 < r.sipg3;
    const bool same = r.sipg1_direct == r.sipg1_iterative;
    std::string d = "SIPG k=1 " + fmt("%.4f", r.sipg1_direct) + " (iterative " + fmt("%.4f", r.sipg1_iterative) +
                    "), IIPG k=1 " + fmt("%.4f", r.iipg1) + ", SIPG k=2 " + fmt("%.4f", r.sipg2) + ", k=3 " +
                    fmt("%.4f", r.sipg3);
    return {range && iipg && increasing && same, d};
}

Verdict iteration_u_shape(double beta_min)
{
    const ManufacturedCase mc = manufactured_elliptic_case(CaseKind::Continuous2D);
    StudyOptions opts;
    opts.n_cycles = 1;
    opts.h0 = 1.0 / 16.0;
    opts.solver = SolverKind::Iterative;
    const auto levels = prepare_study_levels(mc, 1, opts);
    const std::vector<double> betas = log_grid(beta_min, 100.0, 20);
    std::vector<int> its;
    bool solved = true;
    for (double b : betas) {
        const ConvergenceStudy s = run_convergence_study(mc, levels, SchemeConfig{1, b, 1}, opts);
        solved = solved && !s.any_failed();
        its.push_back(s.rows.at(0).iterations);
    }
    const auto amin = static_cast<std::size_t>(std::min_element(its.begin(), its.end()) - its.begin());
    const bool interior = amin > 0 && amin + 1 < its.size();
    const bool rises = its.back() > its[amin];
    std::string d = "iterations";
    for (int it : its) {
        d += ' ' + std::to_string(it);
    }
    d += "; min " + std::to_string(its[amin]) + " at beta " + fmt("%.3g", betas[amin]) + ", " +
         std::to_string(its.back()) + " at beta 100";
    return {solved && interior && rises, d};
}

Verdict discontinuous_exactness()
{
    const std::vector<std::pair<double, double>> zones{{1.0, 1e-6}, {1e-6, 1.0}, {3.0, 1e-3}, {1.0, 1e-18}};
    StudyOptions opts;
    opts.n_cycles = 6;
    opts.h0 = 0.5;
    opts.solver = SolverKind::Direct;
    double worst = 0.0;
    bool ok = true;
    for (const auto& [k0, k1] : zones) {
        CaseParams p;
        p.kappa0 = k0;
        p.kappa1 = k1;
        const ConvergenceStudy s =
            run_convergence_study(manufactured_elliptic_case(CaseKind::Discontinuous1D, p), SchemeConfig{1, 10.0, 1}, opts);
        ok = ok && !s.any_failed();
        for (const StudyRow& row : s.rows) {
            worst = std::max(worst, row.h1_error);
        }
    }
    ok = ok && worst <= 1e-8;
    return {ok, "worst H1-seminorm error " + fmt("%.3g", worst) + " over 4 contrasts x 6 meshes (h = 1/2 .. 1/64)"};
}

Verdict biot_flip()
{
    const BiotParameters p;
    const BiotRun low = run_biot_quality(p, 1.1);
    const BiotRun high = run_biot_quality(p, 50.0);
    return {low.verdict.bool_quality == 1 && high.verdict.bool_quality == 0,
            std::string("beta 1.1 -> ") + std::to_string(low.verdict.bool_quality) + " (" + to_string(low.verdict.reason) +
                "), beta 50 -> " + std::to_string(high.verdict.bool_quality) + " (" +
                to_string(high.verdict.reason) + ")"};
}

// ---------------------------------------------------------------------------
// datasets for screening and model comparisons

ml::Table elliptic_table(const SweepConfig& cfg)
{
    std::stringstream ss;
    write_elliptic_csv(ss, profile_iterations(cfg), uses_zone_pair(cfg.case_kind));
    return ml::read_csv(ss);
}

SweepConfig elliptic_dataset_config(CaseKind kind)
{
    SweepConfig c;
    c.case_kind = kind;
    c.thetas = {1, 0};
    c.degrees = {1};
    c.betas = log_grid(1.2, 100.0, 40);
    c.hs = halving_grid(0.5, 5);
    c.solver = SolverKind::Iterative;
    c.jobs = hardware_jobs();
    if (kind == CaseKind::Discontinuous1D) {
        c.kappa0s = {1.0, 1e-3, 1e-6, 1e-9, 1e-12, 1e-15, 1e-18};
        c.kappa1s = c.kappa0s;
    } else {
        c.kappas = {1e-4, 1e-2, 1.0, 1e2, 1e4};
    }
    return c;
}

ml::Table biot_table()
{
    SweepConfig c;
    c.biot_kappa1s = {1e-14, 1e-12, 1e-10, 1e-8};
    c.biot_kappa_mults = {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 10.0};
    c.biot_hs = halving_grid(0.0625, 4);
    c.biot_betas = log_grid(0.045, 100.0, 15);
    c.solver = SolverKind::Direct;
    c.jobs = hardware_jobs();
    std::stringstream ss;
    write_biot_csv(ss, sweep_biot(c));
    return ml::read_csv(ss);
}

std::vector<double> screen(const ml::Table& t, const std::vector<std::string>& features)
{
    const auto res = ml::chi2_screen(ml::make_dataset(t, features, "iterations"));
    std::vector<double> p;
    for (const auto& r : res) {
        p.push_back(r.p_value);
    }
    return p;
}

Verdict chi_squared_screening(const ml::Table& con, const ml::Table& dis)
{
    const auto pc = screen(con, {"theta", "kappa", "beta", "h"});
    const auto pd = screen(dis, {"theta", "kappa0", "kappa1", "beta", "h"});
    const bool rows = con.values.rows() >= 2000;
    const bool con_ok = pc[1] > 0.5 && pc[2] < 0.025 && pc[3] < 0.025;
    const bool dis_ok = pd[1] > 0.5 && pd[2] > 0.5;
    std::string d = "continuous (" + std::to_string(con.values.rows()) + " rows) p(kappa) " + fmt("%.3g", pc[1]) +
                    " p(beta) " + fmt("%.3g", pc[2]) + " p(h) " + fmt("%.3g", pc[3]) + "; heterogeneous (" +
                    std::to_string(dis.values.rows()) + " rows) p(kappa0) " + fmt("%.3g", pd[1]) + " p(kappa1) " +
                    fmt("%.3g", pd[2]);
    return {rows && con_ok && dis_ok, d};
}

ml::TrainSpec train_spec(ml::ModelType type, std::vector<std::string> features, const std::string& target)
{
    ml::TrainSpec s;
    s.type = type;
    s.features = std::move(features);
    s.target = target;
    s.seed = 0;
    s.linear.epochs = 200;
    s.linear.lr = 0.01;
    s.linear.lr_decay = 0.01;
    s.linear.max_iter = 10000;
    s.n_hls = {2, 4};
    s.n_ns = {10, 20};
    s.jobs = hardware_jobs();
    return s;
}

ml::Evaluation fit_and_test(const ml::Table& t, const ml::TrainSpec& spec)
{
    const ml::TrainOutcome out = ml::train_model(t, spec);
    return ml::evaluate_test_split(out.model, t);
}

Verdict ml_superiority(const ml::Table& con, const ml::Table& dis, const ml::Table& biot)
{
    using ml::ModelType;
    bool ok = true;
    std::string d;
    const auto regression = [&](const char* name, const ml::Table& t, const std::vector<std::string>& f) {
        const double lin = fit_and_test(t, train_spec(ModelType::Linear, f, "iterations")).r2.value_or(std::nan(""));
        const double mlp =
            fit_and_test(t, train_spec(ModelType::MlpRegression, f, "iterations")).r2.value_or(std::nan(""));
        ok = ok && mlp >= lin + 0.05;
        d += std::string(name) + " R2 mlp " + fmt("%.3f", mlp) + " vs linear " + fmt("%.3f", lin) + "; ";
    };
    regression("continuous", con, {"theta", "kappa", "beta", "h"});
    regression("heterogeneous", dis, {"theta", "kappa0", "kappa1", "beta", "h"});

    const std::vector<std::string> bf{"kappa1", "kappa_mult", "beta", "h"};
    ml::TrainSpec ls = train_spec(ModelType::Logistic, bf, "bool_quality");
    ml::TrainSpec ms = train_spec(ModelType::MlpClassification, bf, "bool_quality");
    ls.log_features = bf;
    ms.log_features = bf;
    const ml::Evaluation lg = fit_and_test(biot, ls);
    const ml::Evaluation mp = fit_and_test(biot, ms);
    ok = ok && mp.acc >= lg.acc && mp.cm.fp <= lg.cm.fp;
    d += "Biot ACC mlp " + fmt("%.3f", mp.acc) + " vs logistic " + fmt("%.3f", lg.acc) + ", FP " +
         std::to_string(mp.cm.fp) + " vs " + std::to_string(lg.cm.fp) + " (" + std::to_string(mp.n) + " test rows)";
    return {ok, d};
}

Verdict metric_exactness()
{
    const ml::ConfusionMatrix logistic{172, 210, 74, 959};
    const ml::ConfusionMatrix mlp{367, 15, 72, 961};
    const bool acc = logistic.total() == 1415 && mlp.total() == 1415 &&
                     logistic.accuracy() == 1131.0 / 1415.0 && mlp.accuracy() == 1328.0 / 1415.0 &&
                     std::round(logistic.accuracy() * 100) == 80 && std::round(mlp.accuracy() * 100) == 94;

    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5 + trial;
        Eigen::VectorXd y(n);
        Eigen::VectorXd e(n);
        for (int i = 0; i < n; ++i) {
            y(i) = 3.0 * g(rng) + trial;
            e(i) = 0.3 * g(rng);
        }
        e.array() -= e.mean();
        const Eigen::VectorXd y_hat = y - e;
        worst = std::max(worst, std::abs(*ml::r2_score(y, y_hat) - *ml::explained_variance(y, y_hat)));
    }
    return {acc && worst <= 1e-12, "ACC " + fmt("%.4f", logistic.accuracy()) + " and " + fmt("%.4f", mlp.accuracy()) +
                                       ", max |R2 - EVS| " + fmt("%.2g", worst) + " over 100 zero-mean residuals"};
}

double relative_error(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-8);
}

Verdict gradient_check()
{
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool cls = trial % 2 == 1;
        const ml::Activation hidden = trial % 3 == 0 ? ml::Activation::Sigmoid : ml::Activation::Relu;
        ml::Mlp m({4, 6, 5, 1}, hidden, cls ? ml::Activation::Sigmoid : ml::Activation::Identity);
        m.init_he(static_cast<std::uint64_t>(trial));
        // He init zeroes the biases; jitter so no ReLU input sits exactly on the kink
        for (Eigen::Index i = 0; i < m.n_params(); ++i) {
            m.params()(i) += 0.1 * g(rng);
        }
        Eigen::MatrixXd X(9, 4);
        Eigen::VectorXd y(9);
        for (int i = 0; i < 9; ++i) {
            for (int j = 0; j < 4; ++j) {
                X(i, j) = g(rng);
            }
            y(i) = cls ? (g(rng) > 0 ? 1.0 : 0.0) : g(rng);
        }
        Eigen::VectorXd grad;
        m.loss_and_gradient(X, y, grad);
        const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m.n_params()));
        const double eps = 1e-6;
        ml::Mlp p = m;
        p.params()(i) += eps;
        ml::Mlp q = m;
        q.params()(i) -= eps;
        worst = std::max(worst, relative_error(grad(i), (p.loss(X, y) - q.loss(X, y)) / (2 * eps)));
    }
    return {worst < 1e-5, "max relative error " + fmt("%.3g", worst) + " over 100 trials"};
}

// ---------------------------------------------------------------------------
// determinism through the command-line tool

std::string run_tool(std::vector<std::string> args, int& code)
{
    args.insert(args.begin(), "dgpenalty");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return out.str();
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Runs the command set once in `dir`; returns stdout of every command plus
// every CSV and model file, keyed by name.
std::vector<std::pair<std::string, std::string>> command_set(const fs::path& dir, const std::string& jobs, bool& ok)
{
    const std::string o = dir.string();
    const std::vector<std::vector<std::string>> cmds{
        {"sweep-elliptic", "--case", "continuous", "--kappas", "1e-2,1,1e2", "--betas", "log:1.2:100:8", "--hs",
         "halving:0.25:3", "--output", "con.csv"},
        {"sweep-elliptic", "--case", "discontinuous", "--kappa0s", "1,1e-6", "--kappa1s", "1,1e-6", "--betas",
         "log:1.2:100:8", "--hs", "halving:0.25:3", "--output", "dis.csv"},
        {"sweep-biot", "--kappa1s", "1e-12,1e-10", "--kappa-mults", "1e-4,1", "--hs", "0.05,0.025", "--betas",
         "log:0.1:100:10", "--output", "biot.csv"},
        {"train", "--data", o + "/con.csv", "--model", "linear", "--output", "lin.json"},
        {"train", "--data", o + "/con.csv", "--model", "mlp-regression", "--mlp-epochs", "40", "--output",
         "mlpr.json", "--grid-output", "mlpr_grid.csv"},
        {"train", "--data", o + "/biot.csv", "--model", "logistic", "--output", "log.json"},
        {"train", "--data", o + "/biot.csv", "--model", "mlp-classification", "--mlp-epochs", "40",
         "--log-features", "kappa1,kappa2,kappa_mult,beta,h", "--output", "mlpc.json", "--grid-output",
         "mlpc_grid.csv"},
        {"evaluate", "--model", o + "/mlpc.json", "--data", o + "/biot.csv"},
    };
    std::vector<std::pair<std::string, std::string>> got;
    for (auto args : cmds) {
        args.insert(args.end(), {"--output-dir", o, "--jobs", jobs, "--seed", "7"});
        int code = 0;
        got.emplace_back(args[0] + " stdout", run_tool(args, code));
        ok = ok && code == 0;
    }
    for (const char* f : {"con.csv", "dis.csv", "biot.csv", "lin.json", "mlpr.json", "mlpr_grid.csv", "log.json",
                          "mlpc.json", "mlpc_grid.csv"}) {
        got.emplace_back(f, slurp(dir / f));
    }
    return got;
}

Verdict determinism()
{
    const fs::path dir = fs::temp_directory_path() / "dgpenalty_acceptance";
    const fs::path first = fs::temp_directory_path() / "dgpenalty_acceptance_first";
    fs::remove_all(dir);
    fs::remove_all(first);
    fs::create_directories(dir);
    bool ok = true;
    const auto a = command_set(dir, "1", ok);
    fs::rename(dir, first);
    fs::create_directories(dir);
    const auto b = command_set(dir, "4", ok);
    std::string diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].second.empty() || a[i].second != b[i].second) {
            diff += ' ' + a[i].first;
        }
    }
    fs::remove_all(dir);
    fs::remove_all(first);
    if (!ok) {
        return {false, "a command exited with an error"};
    }
    return {diff.empty(), diff.empty() ? std::to_string(a.size()) + " outputs byte-identical across reruns (1 vs 4 threads)"
                                       : "differs:" + diff};
}

} // namespace

int main()
{
    const auto t0 = Clock::now();
    report(1, "convergence rates", convergence_rates());
    const BetaMinRuns bm = beta_min_runs();
    report(2, "beta_min reproduction", beta_min_reproduction(bm));
    report(3, "iteration U-shape", iteration_u_shape(bm.sipg1_direct));
    report(4, "discontinuous 1D exactness", discontinuous_exactness());
    report(5, "Biot quality flip", biot_flip());
    const ml::Table con = elliptic_table(elliptic_dataset_config(CaseKind::Continuous2D));
    const ml::Table dis = elliptic_table(elliptic_dataset_config(CaseKind::Discontinuous1D));
    report(6, "chi-squared screening", chi_squared_screening(con, dis));
    report(7, "ML superiority", ml_superiority(con, dis, biot_table()));
    report(8, "metric exactness", metric_exactness());
    report(9, "gradient check", gradient_check());
    report(10, "determinism", determinism());
    std::printf("%d of 10 criteria failed, %.0f s\n", g_failed, seconds_since(t0));
    return g_failed == 0 ? 0 : 1;
}
