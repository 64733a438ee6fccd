#include "dgpenalty/cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dgpenalty/cli/config.hpp"
#include "dgpenalty/error.hpp"
#include "dgpenalty/ml/model.hpp"
#include "dgpenalty/ml/stats.hpp"
#include "dgpenalty/sweeps.hpp"

namespace dgp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
    std::string command;
    const Config& cfg;
    std::ostream& out;
    std::ostream& err;
    fs::path dir;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    json outputs = json::array();
};

using Handler = std::function<int(Context&)>;

struct Command {
    std::string name;
    std::string help;
    std::vector<ConfigKey> keys;
    Handler run;
};

std::vector<ConfigKey> common_keys()
{
    return {{"output_dir", "", "output directory (default: $DGPENALTY_OUTPUT_DIR, else .)"},
            {"jobs", "1", "worker threads"},
            {"seed", "0", "random seed"}};
}

std::vector<ConfigKey> with_common(std::vector<ConfigKey> keys)
{
    auto c = common_keys();
    keys.insert(keys.end(), c.begin(), c.end());
    return keys;
}

std::vector<ConfigKey> elliptic_grid_keys()
{
    return {{"case", "continuous", "continuous | heterogeneous | discontinuous"},
            {"thetas", "1,0", "theta values: 1 SIPG, 0 IIPG, -1 NIPG"},
            {"degrees", "1", "polynomial degrees"},
            {"kappas", "1", "kappa grid (continuous cases)"},
            {"kappa0s", "1", "left-zone kappa grid (discontinuous case)"},
            {"kappa1s", "1e-6", "right-zone kappa grid (discontinuous case)"},
            {"hs", "halving:0.25:4", "mesh sizes, each half the previous"},
            {"solver", "iterative", "direct | iterative"},
            {"krylov_tol", "1e-8", "relative residual tolerance"},
            {"max_iter", "0", "Krylov iteration cap (0: 10 x dofs)"}};
}

std::vector<ConfigKey> biot_keys()
{
    return {{"kappa1s", "1e-12", "lower-layer permeability grid (m^2)"},
            {"kappa_mults", "1e-4", "kappa2 / kappa1 grid"},
            {"hs", "0.05", "mesh size grid"},
            {"betas", "log:0.01:100:40", "penalty grid"},
            {"theta", "1", "1 SIPG, 0 IIPG, -1 NIPG"},
            {"degree_p", "1", "pressure degree"},
            {"degree_u", "1", "displacement degree"},
            {"viscosity", "1e-6", "fluid viscosity (kPa s)"},
            {"rho", "1000", "fluid density (kg/m^3)"},
            {"bulk", "1000", "drained bulk modulus (kPa)"},
            {"nu", "0.25", "Poisson ratio"},
            {"solid_bulk", "inf", "solid grain bulk modulus (kPa)"},
            {"phi", "0.2", "porosity"},
            {"c_f", "1e-5", "fluid compressibility (1/kPa)"},
            {"dt", "1", "time step (s)"},
            {"load", "1", "top traction (kPa)"},
            {"p_drained", "0", "drained boundary pressure"},
            {"drainage", "top", "top | bottom"},
            {"start", "undrained", "undrained | rest"},
            {"coupling", "single-pass", "single-pass | fixed-point"},
            {"solver", "direct", "direct | iterative"},
            {"output", "biot.csv", "dataset file"}};
}

KrylovOptions krylov_from(const Config& c)
{
    KrylovOptions k;
    k.tol = c.real("krylov_tol");
    k.max_iter = c.integer("max_iter");
    return k;
}

SweepConfig elliptic_sweep_from(const Config& c)
{
    SweepConfig s;
    s.case_kind = case_kind_from_string(c.str("case"));
    s.thetas = c.integers("thetas");
    s.degrees = c.integers("degrees");
    s.kappas = c.reals("kappas");
    s.kappa0s = c.reals("kappa0s");
    s.kappa1s = c.reals("kappa1s");
    s.hs = c.reals("hs");
    s.solver = solver_kind_from_string(c.str("solver"));
    s.krylov = krylov_from(c);
    s.seed = c.uint64("seed");
    s.jobs = c.integer("jobs");
    return s;
}

BiotParameters biot_params_from(const Config& c)
{
    BiotParameters p;
    p.fluid_viscosity = c.real("viscosity");
    p.rho = c.real("rho");
    p.K = c.real("bulk");
    p.nu = c.real("nu");
    p.K_s = c.real("solid_bulk");
    p.phi = c.real("phi");
    p.c_f = c.real("c_f");
    p.dt = c.real("dt");
    p.load = c.real("load");
    p.p_drained = c.real("p_drained");
    p.drainage = drainage_from_string(c.str("drainage"));
    p.start = biot_start_from_string(c.str("start"));
    p.coupling = coupling_mode_from_string(c.str("coupling"));
    p.degree_p = c.integer("degree_p");
    p.degree_u = c.integer("degree_u");
    return p;
}

fs::path output_path(Context& ctx, const std::string& key)
{
    const fs::path p = ctx.dir / ctx.cfg.str(key);
    ctx.outputs.push_back(p.string());
    return p;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    }
    body(os);
    os.flush();
    if (!os) {
        throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
    }
}

void finish(Context& ctx, long rows, const json& extra = json::object())
{
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    const fs::path cfg_path = ctx.dir / (ctx.command + ".config");
    write_file(cfg_path, [&](std::ostream& os) { ctx.cfg.write(os); });
    json m;
    m["command"] = ctx.command;
    m["rows"] = rows;
    m["seed"] = ctx.cfg.uint64("seed");
    json grid = json::object();
    for (const auto& k : ctx.cfg.keys()) {
        grid[k.name] = ctx.cfg.str(k.name);
    }
    m["config"] = grid;
    m["resolved_config"] = cfg_path.string();
    m["outputs"] = ctx.outputs;
    m["wall_time_s"] = wall;
    for (const auto& [k, v] : extra.items()) {
        m[k] = v;
    }
    write_file(ctx.dir / (ctx.command + ".manifest.json"), [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

// ---------------------------------------------------------------------------

int cmd_convergence(Context& ctx)
{
    const Config& c = ctx.cfg;
    CaseParams params;
    params.kappa = c.real("kappa");
    params.kappa0 = c.real("kappa0");
    params.kappa1 = c.real("kappa1");
    const ManufacturedCase mc = manufactured_elliptic_case(case_kind_from_string(c.str("case")), params);
    SchemeConfig s;
    s.theta = c.integer("theta");
    s.degree = c.integer("degree");
    s.beta = c.real("beta");
    StudyOptions opts;
    opts.h0 = c.real("h0");
    opts.n_cycles = c.integer("cycles");
    opts.solver = solver_kind_from_string(c.str("solver"));
    opts.krylov = krylov_from(c);
    const ConvergenceStudy study = run_convergence_study(mc, s, opts);
    const bool optimal = is_rate_optimal(study, s.degree);

    write_file(output_path(ctx, "output"), [&](std::ostream& os) {
        os << "h,n_dofs,h1_error,l2_error,h1_rate,l2_rate,iterations,failed\n";
        for (std::size_t i = 0; i < study.rows.size(); ++i) {
            const StudyRow& r = study.rows[i];
            os << format_double(r.h) << ',' << r.n_dofs << ',' << format_double(r.h1_error) << ','
               << format_double(r.l2_error) << ',';
            if (i > 0) {
                os << format_double(study.h1_rates[i - 1]) << ',' << format_double(study.l2_rates[i - 1]);
            } else {
                os << ',';
            }
            os << ',' << r.iterations << ',' << (r.failed ? 1 : 0) << '\n';
        }
    });
    ctx.out << scheme_name(s.theta) << " k=" << s.degree << " beta=" << format_double(s.beta) << '\n';
    ctx.out << std::setw(12) << "h" << std::setw(14) << "H1 error" << std::setw(10) << "rate" << std::setw(14)
            << "L2 error" << std::setw(10) << "rate" << '\n';
    auto rate = [](const std::vector<double>& rates, std::size_t i) {
        std::ostringstream ss;
        if (i > 0) {
            ss << std::fixed << std::setprecision(3) << rates[i - 1];
        } else {
            ss << '-';
        }
        return ss.str();
    };
    for (std::size_t i = 0; i < study.rows.size(); ++i) {
        const StudyRow& r = study.rows[i];
        std::ostringstream h1;
        std::ostringstream l2;
        h1 << std::scientific << std::setprecision(4) << r.h1_error;
        l2 << std::scientific << std::setprecision(4) << r.l2_error;
        ctx.out << std::setw(12) << r.h << std::setw(14) << h1.str() << std::setw(10) << rate(study.h1_rates, i)
                << std::setw(14) << l2.str() << std::setw(10) << rate(study.l2_rates, i)
                << (r.failed ? "  failed" : "") << '\n';
    }
    ctx.out << "rate optimal: " << (optimal ? "yes" : "no") << '\n';
    finish(ctx, static_cast<long>(study.rows.size()), {{"rate_optimal", optimal}});
    return optimal ? Success : CriterionFailed;
}

int cmd_sweep_elliptic(Context& ctx)
{
    SweepConfig s = elliptic_sweep_from(ctx.cfg);
    s.betas = ctx.cfg.reals("betas");
    const auto records = profile_iterations(s);
    write_file(output_path(ctx, "output"),
               [&](std::ostream& os) { write_elliptic_csv(os, records, uses_zone_pair(s.case_kind)); });
    ctx.out << records.size() << " rows written to " << ctx.outputs.back().get<std::string>() << '\n';
    finish(ctx, static_cast<long>(records.size()));
    return Success;
}

int cmd_profile_iterations(Context& ctx)
{
    const Config& c = ctx.cfg;
    SweepConfig s = elliptic_sweep_from(c);
    s.beta0 = c.real("beta0");
    s.shrink = c.real("shrink");
    s.beta_floor = c.real("beta_floor");
    s.search = beta_search_from_string(c.str("search"));
    s.bracket_stride = c.integer("bracket_stride");
    s.h0 = c.real("search_h0");
    s.n_h = c.integer("search_cycles");
    const int n_beta = c.integer("n_beta");
    if (n_beta < 2) {
        throw Error(ErrorKind::InvalidArgument, "n_beta must be >= 2");
    }
    const auto table = beta_min_table(s);
    const bool zp = uses_zone_pair(s.case_kind);
    write_file(output_path(ctx, "beta_min_output"), [&](std::ostream& os) { write_beta_min_csv(os, table, zp); });
    for (const auto& r : table) {
        ctx.out << scheme_name(r.theta) << " k=" << r.k << " beta_min="
                << (r.stable ? format_double(r.result.beta_min) : std::string("none"))
                << (r.result.reached_floor ? " (floor)" : "") << '\n';
    }
    const auto records = profile_above_beta_min(s, table, n_beta);
    write_file(output_path(ctx, "output"), [&](std::ostream& os) { write_elliptic_csv(os, records, zp); });
    ctx.out << records.size() << " rows written to " << ctx.outputs.back().get<std::string>() << '\n';
    finish(ctx, static_cast<long>(records.size()));
    return Success;
}

int cmd_sweep_biot(Context& ctx)
{
    const Config& c = ctx.cfg;
    SweepConfig s;
    s.biot_kappa1s = c.reals("kappa1s");
    s.biot_kappa_mults = c.reals("kappa_mults");
    s.biot_hs = c.reals("hs");
    s.biot_betas = c.reals("betas");
    s.biot_theta = c.integer("theta");
    s.biot = biot_params_from(c);
    s.solver = solver_kind_from_string(c.str("solver"));
    s.seed = c.uint64("seed");
    s.jobs = c.integer("jobs");
    const auto records = sweep_biot(s);
    write_file(output_path(ctx, "output"), [&](std::ostream& os) { write_biot_csv(os, records); });
    long good = 0;
    for (const auto& r : records) {
        good += r.bool_quality;
    }
    ctx.out << records.size() << " rows (" << good << " clean) written to " << ctx.outputs.back().get<std::string>()
            << '\n';
    finish(ctx, static_cast<long>(records.size()));
    return Success;
}

const std::vector<std::string> label_columns{"iterations", "converged", "rate_ok", "bool_quality"};

std::vector<std::string> default_features(const ml::Table& t, const std::string& target)
{
    std::vector<std::string> f;
    for (const auto& col : t.columns) {
        if (col != target && std::find(label_columns.begin(), label_columns.end(), col) == label_columns.end()) {
            f.push_back(col);
        }
    }
    return f;
}

std::string default_target(const ml::Table& t, ml::ModelType type)
{
    if (t.column_index("bool_quality") >= 0) {
        return "bool_quality";
    }
    return ml::is_classifier(type) ? "rate_ok" : "iterations";
}

json evaluation_json(const ml::Evaluation& e, bool classifier)
{
    json j;
    j["n"] = e.n;
    if (classifier) {
        j["bce"] = e.bce;
        j["acc"] = e.acc;
        j["confusion"] = {{"tp", e.cm.tp}, {"fp", e.cm.fp}, {"fn", e.cm.fn}, {"tn", e.cm.tn}};
    } else {
        j["mse"] = e.mse;
        j["r2"] = e.r2 ? json(*e.r2) : json(nullptr);
        j["evs"] = e.evs ? json(*e.evs) : json(nullptr);
    }
    return j;
}

void print_evaluation(std::ostream& os, const ml::Evaluation& e, bool classifier)
{
    os << "test rows: " << e.n << '\n';
    if (classifier) {
        os << "BCE: " << e.bce << "\nACC: " << e.acc << '\n';
        os << "confusion: tp=" << e.cm.tp << " fp=" << e.cm.fp << " fn=" << e.cm.fn << " tn=" << e.cm.tn << '\n';
    } else {
        os << "MSE: " << e.mse << '\n';
        os << "R2: " << (e.r2 ? std::to_string(*e.r2) : std::string("undefined")) << '\n';
        os << "EVS: " << (e.evs ? std::to_string(*e.evs) : std::string("undefined")) << '\n';
    }
}

ml::SplitRatios ratios_from(const Config& c)
{
    const auto r = c.reals("split");
    if (r.size() != 3) {
        throw Error(ErrorKind::InvalidArgument, "split needs three ratios");
    }
    return {r[0], r[1], r[2]};
}

int cmd_train(Context& ctx)
{
    const Config& c = ctx.cfg;
    if (c.str("data").empty()) {
        throw Error(ErrorKind::InvalidArgument, "train needs data = <csv>");
    }
    const ml::Table table = ml::read_csv_file(c.str("data"));
    ml::TrainSpec spec;
    spec.type = ml::model_type_from_string(c.str("model"));
    spec.target = c.str("target").empty() ? default_target(table, spec.type) : c.str("target");
    spec.features = c.list("features");
    if (spec.features.empty()) {
        spec.features = default_features(table, spec.target);
    }
    spec.log_features = c.list("log_features");
    spec.ratios = ratios_from(c);
    spec.seed = c.uint64("seed");
    spec.linear.epochs = c.integer("linear_epochs");
    spec.linear.lr = c.real("linear_lr");
    spec.linear.lr_decay = c.real("lr_decay");
    spec.linear.seed = spec.seed;
    spec.linear.max_iter = c.integer("logistic_max_iter");
    spec.mlp.epochs = c.integer("mlp_epochs");
    spec.mlp.lr = c.real("mlp_lr");
    spec.mlp.batch = c.integer("batch");
    spec.mlp.patience = c.integer("patience");
    spec.mlp.optimizer = ml::optimizer_from_string(c.str("optimizer"));
    spec.mlp.hidden = ml::activation_from_string(c.str("hidden"));
    spec.n_hls = c.integers("n_hls");
    spec.n_ns = c.integers("n_ns");
    spec.jobs = c.integer("jobs");

    ml::TrainOutcome res = ml::train_model(table, spec);
    const ml::Evaluation ev = ml::evaluate_test_split(res.model, table);
    const bool cls = ml::is_classifier(spec.type);
    if (cls) {
        res.model.metrics["test_acc"] = ev.acc;
        res.model.metrics["test_bce"] = ev.bce;
    } else {
        res.model.metrics["test_mse"] = ev.mse;
        if (ev.r2) {
            res.model.metrics["test_r2"] = *ev.r2;
        }
    }
    write_file(output_path(ctx, "output"), [&](std::ostream& os) { ml::write_model(os, res.model); });
    ctx.out << ml::to_string(spec.type) << " on " << spec.target << " with";
    for (const auto& f : spec.features) {
        const bool lg = std::find(spec.log_features.begin(), spec.log_features.end(), f) != spec.log_features.end();
        ctx.out << ' ' << (lg ? "log10(" + f + ")" : f);
    }
    ctx.out << "\nsplit: " << res.split.train.size() << '/' << res.split.validation.size() << '/'
            << res.split.test.size() << '\n';
    if (res.linear_report.capped) {
        ctx.err << "warning: " << res.linear_report.warning << '\n';
    }
    if (res.grid) {
        write_file(output_path(ctx, "grid_output"), [&](std::ostream& os) {
            os << "n_hl,n_n,score\n";
            for (const auto& cell : res.grid->cells) {
                os << cell.n_hl << ',' << cell.n_n << ',' << format_double(cell.score) << '\n';
            }
        });
        const auto& b = res.grid->cells[res.grid->best];
        ctx.out << "best architecture: n_hl=" << b.n_hl << " n_n=" << b.n_n << " validation "
                << (cls ? "ACC" : "MSE") << '=' << b.score << '\n';
    }
    print_evaluation(ctx.out, ev, cls);
    finish(ctx, static_cast<long>(table.values.rows()), {{"test", evaluation_json(ev, cls)}});
    return Success;
}

int cmd_evaluate(Context& ctx)
{
    const Config& c = ctx.cfg;
    if (c.str("model").empty() || c.str("data").empty()) {
        throw Error(ErrorKind::InvalidArgument, "evaluate needs model = <file> and data = <csv>");
    }
    const ml::TrainedModel model = ml::load_model(c.str("model"));
    const ml::Table table = ml::read_csv_file(c.str("data"));
    const ml::Evaluation ev = ml::evaluate_test_split(model, table);
    const bool cls = ml::is_classifier(model.type);
    const json report = evaluation_json(ev, cls);
    write_file(output_path(ctx, "output"), [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    print_evaluation(ctx.out, ev, cls);
    finish(ctx, ev.n);
    return Success;
}

std::map<std::string, double> parse_point(const std::string& spec)
{
    std::map<std::string, double> out;
    std::istringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidArgument, "point entries are name=value");
        }
        auto name = item.substr(0, eq);
        name.erase(0, name.find_first_not_of(' '));
        name.erase(name.find_last_not_of(' ') + 1);
        out[name] = parse_real(item.substr(eq + 1), name);
    }
    return out;
}

Eigen::MatrixXd design_matrix(const ml::TrainedModel& m, const std::map<std::string, double>& point,
                              const std::vector<double>& betas)
{
    std::vector<std::string> missing;
    for (const auto& f : m.features) {
        if (f != "beta" && point.count(f) == 0) {
            missing.push_back(f);
        }
    }
    if (!missing.empty()) {
        std::string msg = "point lacks model features:";
        for (const auto& f : missing) {
            msg += ' ' + f;
        }
        throw Error(ErrorKind::SchemaMismatch, msg);
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(betas.size()), static_cast<Eigen::Index>(m.features.size()));
    for (std::size_t i = 0; i < betas.size(); ++i) {
        for (std::size_t j = 0; j < m.features.size(); ++j) {
            const auto& f = m.features[j];
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f == "beta" ? betas[i] : point.at(f);
        }
    }
    return X;
}

int cmd_predict(Context& ctx)
{
    const Config& c = ctx.cfg;
    if (c.str("classifier").empty()) {
        throw Error(ErrorKind::InvalidArgument, "predict needs classifier = <model file>");
    }
    const ml::TrainedModel gate = ml::load_model(c.str("classifier"));
    if (!ml::is_classifier(gate.type)) {
        throw Error(ErrorKind::InvalidArgument, "classifier model must be logistic or mlp-classification");
    }
    std::optional<ml::TrainedModel> cost;
    if (!c.str("regressor").empty()) {
        cost = ml::load_model(c.str("regressor"));
        if (ml::is_classifier(cost->type)) {
            throw Error(ErrorKind::InvalidArgument, "regressor model must be linear or mlp-regression");
        }
    }
    std::vector<double> betas = c.reals("betas");
    std::sort(betas.begin(), betas.end());
    const auto point = parse_point(c.str("point"));
    const Eigen::VectorXd stable = gate.predict_class(design_matrix(gate, point, betas));
    Eigen::VectorXd predicted_cost;
    if (cost) {
        predicted_cost = cost->predict(design_matrix(*cost, point, betas));
    }
    json rep;
    std::optional<std::size_t> first;
    std::optional<std::size_t> cheapest;
    json rows = json::array();
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        json r = {{"beta", betas[i]}, {"stable", stable(ii) == 1.0}};
        if (cost) {
            r["cost"] = predicted_cost(ii);
        }
        rows.push_back(r);
        if (stable(ii) != 1.0) {
            continue;
        }
        if (!first) {
            first = i;
        }
        if (cost && (!cheapest || predicted_cost(ii) < predicted_cost(static_cast<Eigen::Index>(*cheapest)))) {
            cheapest = i;
        }
    }
    rep["grid"] = rows;
    rep["smallest_stable_beta"] = first ? json(betas[*first]) : json(nullptr);
    rep["cheapest_stable_beta"] = cheapest ? json(betas[*cheapest]) : json(nullptr);
    write_file(output_path(ctx, "output"), [&](std::ostream& os) { os << rep.dump(2) << '\n'; });
    if (!first) {
        ctx.out << "no beta on the grid is predicted stable\n";
        finish(ctx, static_cast<long>(betas.size()));
        return CriterionFailed;
    }
    ctx.out << "smallest stable beta: " << format_double(betas[*first]) << '\n';
    if (cheapest) {
        ctx.out << "cheapest stable beta: " << format_double(betas[*cheapest]) << " (predicted "
                << predicted_cost(static_cast<Eigen::Index>(*cheapest)) << ")\n";
    }
    finish(ctx, static_cast<long>(betas.size()));
    return Success;
}

std::vector<Command> commands()
{
    std::vector<Command> cmds;
    cmds.push_back({"convergence",
                    "h-refinement study of a manufactured elliptic case",
                    with_common({{"case", "continuous", "continuous | heterogeneous | discontinuous"},
                                 {"kappa", "1", "permeability (continuous cases)"},
                                 {"kappa0", "1", "left-zone permeability (discontinuous case)"},
                                 {"kappa1", "1e-6", "right-zone permeability (discontinuous case)"},
                                 {"theta", "1", "1 SIPG, 0 IIPG, -1 NIPG"},
                                 {"degree", "1", "polynomial degree"},
                                 {"beta", "10", "penalty"},
                                 {"h0", "0.0625", "coarsest mesh size"},
                                 {"cycles", "6", "refinement levels"},
                                 {"solver", "direct", "direct | iterative"},
                                 {"krylov_tol", "1e-8", "relative residual tolerance"},
                                 {"max_iter", "0", "Krylov iteration cap (0: 10 x dofs)"},
                                 {"output", "convergence.csv", "study table"}}),
                    cmd_convergence});
    {
        auto keys = elliptic_grid_keys();
        keys.push_back({"betas", "log:1:100:20", "penalty grid"});
        keys.push_back({"output", "elliptic.csv", "dataset file"});
        cmds.push_back({"sweep-elliptic", "iteration counts over an explicit elliptic grid", with_common(keys),
                        cmd_sweep_elliptic});
    }
    {
        auto keys = elliptic_grid_keys();
        keys.push_back({"beta0", "100", "starting penalty"});
        keys.push_back({"shrink", "0.99", "penalty reduction factor"});
        keys.push_back({"beta_floor", "0.01", "smallest penalty tried"});
        keys.push_back({"search", "scan", "scan | bracket"});
        keys.push_back({"bracket_stride", "16", "stride of the bracket search"});
        keys.push_back({"search_h0", "0.0625", "coarsest mesh of the rate studies"});
        keys.push_back({"search_cycles", "6", "refinement levels of the rate studies"});
        keys.push_back({"n_beta", "20", "profile points in [beta_min, beta0]"});
        keys.push_back({"output", "elliptic.csv", "dataset file"});
        keys.push_back({"beta_min_output", "beta_min.csv", "beta_min table"});
        cmds.push_back({"profile-iterations", "beta_min search followed by iteration profiles above it",
                        with_common(keys), cmd_profile_iterations});
    }
    cmds.push_back({"sweep-biot", "quality labels of the layered Biot column", with_common(biot_keys()),
                    cmd_sweep_biot});
    cmds.push_back({"train",
                    "fit a model to a dataset",
                    with_common({{"data", "", "dataset CSV"},
                                 {"model", "linear", "linear | logistic | mlp-regression | mlp-classification"},
                                 {"target", "", "target column (default from the dataset kind)"},
                                 {"features", "", "feature columns (default: all non-label columns)"},
                                 {"log_features", "", "features fed to the model as log10(value)"},
                                 {"split", "0.8,0.1,0.1", "train, validation, test ratios"},
                                 {"linear_epochs", "200", "SGD epochs (linear)"},
                                 {"linear_lr", "0.01", "SGD learning rate (linear)"},
                                 {"lr_decay", "0.01", "SGD rate decay per epoch (linear)"},
                                 {"logistic_max_iter", "10000", "gradient-descent iterations (logistic)"},
                                 {"mlp_epochs", "200", "epoch budget (mlp)"},
                                 {"mlp_lr", "0.001", "learning rate (mlp)"},
                                 {"batch", "10", "mini-batch size (mlp)"},
                                 {"patience", "20", "early-stopping patience, 0 disables (mlp)"},
                                 {"optimizer", "adam", "adam | sgd (mlp)"},
                                 {"hidden", "relu", "hidden activation: relu | identity | sigmoid (mlp)"},
                                 {"n_hls", "2,4", "hidden-layer counts of the grid (mlp)"},
                                 {"n_ns", "10,20", "neurons per layer of the grid (mlp)"},
                                 {"output", "model.json", "model file"},
                                 {"grid_output", "grid.csv", "architecture scores (mlp)"}}),
                    cmd_train});
    cmds.push_back({"evaluate",
                    "metrics of a trained model on its held-out test rows",
                    with_common({{"model", "", "model file"},
                                 {"data", "", "dataset CSV the model was trained on"},
                                 {"output", "metrics.json", "metrics report"}}),
                    cmd_evaluate});
    cmds.push_back({"predict",
                    "recommend a penalty from a stability classifier and a cost regressor",
                    with_common({{"classifier", "", "stability model (logistic | mlp-classification)"},
                                 {"regressor", "", "cost model (linear | mlp-regression), optional"},
                                 {"point", "", "fixed features, e.g. theta=1,kappa=1,h=0.0625,k=1"},
                                 {"betas", "log:0.01:100:200", "candidate penalties"},
                                 {"output", "prediction.json", "recommendation report"}}),
                    cmd_predict});
    return cmds;
}

std::string flag_name(const std::string& key)
{
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

bool is_usage_error(ErrorKind k)
{
    switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidMaterial:
    case ErrorKind::InvalidScheme:
    case ErrorKind::IncompressibleUnsupported:
    case ErrorKind::SchemaMismatch:
    case ErrorKind::Io:
        return true;
    default:
        return false;
    }
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Interior-penalty DG studies, datasets and penalty models", "dgpenalty"};
    app.require_subcommand(1);
    const std::vector<Command> cmds = commands();

    struct Slot {
        std::string config_path;
        bool show = false;
        std::map<std::string, std::string> flags;
        std::map<std::string, CLI::Option*> options;
        CLI::App* sub = nullptr;
    };
    std::vector<Slot> slots(cmds.size());
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        Slot& s = slots[i];
        s.sub = app.add_subcommand(cmds[i].name, cmds[i].help);
        s.sub->add_option("-c,--config", s.config_path, "key = value config file");
        s.sub->add_flag("--show-config", s.show, "print the resolved configuration and exit");
        for (const auto& k : cmds[i].keys) {
            s.options[k.name] = s.sub->add_option(flag_name(k.name), s.flags[k.name],
                                                  k.help + " [" + k.default_value + "]");
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Success : UsageError;
    }

    for (std::size_t i = 0; i < cmds.size(); ++i) {
        Slot& s = slots[i];
        if (!s.sub->parsed()) {
            continue;
        }
        try {
            Config cfg(cmds[i].keys);
            if (!s.config_path.empty()) {
                cfg.load_file(s.config_path);
            }
            for (const auto& [name, opt] : s.options) {
                if (opt->count() > 0) {
                    cfg.set(name, s.flags[name]);
                }
            }
            if (cfg.str("output_dir").empty()) {
                const char* env = std::getenv("DGPENALTY_OUTPUT_DIR");
                cfg.set("output_dir", env != nullptr && *env != '\0' ? env : ".");
            }
            if (s.show) {
                cfg.write(out);
                return Success;
            }
            Context ctx{cmds[i].name, cfg, out, err, fs::path(cfg.str("output_dir"))};
            std::error_code ec;
            fs::create_directories(ctx.dir, ec);
            if (ec || !fs::is_directory(ctx.dir)) {
                throw Error(ErrorKind::Io, "cannot create output directory '" + ctx.dir.string() + "'");
            }
            return cmds[i].run(ctx);
        } catch (const Error& e) {
            err << "dgpenalty " << cmds[i].name << ": " << e.what() << '\n';
            return is_usage_error(e.kind()) ? UsageError : CriterionFailed;
        } catch (const std::exception& e) {
            err << "dgpenalty " << cmds[i].name << ": " << e.what() << '\n';
            return CriterionFailed;
        }
    }
    return UsageError;
}

} // namespace dgp::cli
