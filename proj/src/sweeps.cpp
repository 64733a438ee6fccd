#include "dgpenalty/sweeps.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "dgpenalty/error.hpp"

namespace dgp {

const char* to_string(BetaSearch s) noexcept
{
    return s == BetaSearch::Scan ? "scan" : "bracket";
}

BetaSearch beta_search_from_string(const std::string& name)
{
    if (name == "scan") {
        return BetaSearch::Scan;
    }
    if (name == "bracket") {
        return BetaSearch::Bracket;
    }
    throw Error(ErrorKind::InvalidArgument, "beta search must be scan or bracket");
}

void SweepConfig::validate() const
{
    auto need = [](bool ok, const char* what) {
        if (!ok) {
            throw Error(ErrorKind::InvalidArgument, what);
        }
    };
    need(beta0 > 0.0, "beta0 must be positive");
    need(shrink > 0.0 && shrink < 1.0, "shrink must lie in (0, 1)");
    need(beta_floor > 0.0 && beta_floor < beta0, "beta floor must lie in (0, beta0)");
    need(h0 > 0.0 && h0 <= 1.0, "h0 must lie in (0, 1]");
    need(n_h >= 1, "n_h must be >= 1");
    need(bracket_stride >= 1, "bracket stride must be >= 1");
    need(!thetas.empty() && !degrees.empty(), "theta and degree grids must be nonempty");
    for (int t : thetas) {
        need(t >= -1 && t <= 1, "theta must be -1, 0 or 1");
    }
    for (int k : degrees) {
        need(k >= 1 && k <= 5, "degree must be in 1..5");
    }
    for (double k : kappas) {
        need(k > 0.0, "kappa must be positive");
    }
    for (double k : kappa0s) {
        need(k > 0.0, "kappa0 must be positive");
    }
    for (double k : kappa1s) {
        need(k > 0.0, "kappa1 must be positive");
    }
    for (double b : betas) {
        need(b > 0.0, "beta grid values must be positive");
    }
    for (double b : biot_betas) {
        need(b > 0.0, "Biot beta grid values must be positive");
    }
    for (double h : hs) {
        need(h > 0.0 && h <= 1.0, "h grid values must lie in (0, 1]");
    }
    for (double h : biot_hs) {
        need(h > 0.0 && h <= 1.0, "Biot h values must lie in (0, 1]");
    }
    for (double k : biot_kappa1s) {
        need(k > 0.0, "Biot kappa1 must be positive");
    }
    for (double m : biot_kappa_mults) {
        need(m > 0.0, "kappa_mult must be positive");
    }
    need(jobs >= 1, "jobs must be >= 1");
}

std::vector<double> beta_sequence(double beta0, double shrink, double floor)
{
    std::vector<double> seq;
    for (double b = beta0; b >= floor; b *= shrink) {
        seq.push_back(b);
    }
    return seq;
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    if (!(lo > 0.0) || !(hi >= lo) || n < 1) {
        throw Error(ErrorKind::InvalidArgument, "log grid needs 0 < lo <= hi and n >= 1");
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> halving_grid(double h0, int n)
{
    std::vector<double> g;
    double h = h0;
    for (int i = 0; i < n; ++i, h *= 0.5) {
        g.push_back(h);
    }
    return g;
}

BetaMinResult find_beta_min(const ManufacturedCase& mcase, const SchemeConfig& scheme_template, SolverKind solver,
                            const SweepConfig& config)
{
    config.validate();
    const std::vector<double> seq = beta_sequence(config.beta0, config.shrink, config.beta_floor);
    StudyOptions opts;
    opts.n_cycles = config.n_h;
    opts.h0 = config.h0;
    opts.solver = solver;
    opts.krylov = config.krylov;
    opts.stop_on_failure = true;

    scheme_template.validate();
    const std::vector<StudyLevel> levels = prepare_study_levels(mcase, scheme_template.degree, opts);
    BetaMinResult res;
    auto optimal = [&](int i) {
        SchemeConfig s = scheme_template;
        s.beta = seq[static_cast<std::size_t>(i)];
        ++res.studies;
        return is_rate_optimal(run_convergence_study(mcase, levels, s, opts), s.degree);
    };
    if (!optimal(0)) {
        throw Error(ErrorKind::NoStableBeta, "convergence rate is not optimal at beta0 = " + format_double(seq[0]));
    }
    const int last = static_cast<int>(seq.size()) - 1;
    int good = 0;
    int bad = -1;
    if (config.search == BetaSearch::Scan) {
        for (int i = 1; i <= last; ++i) {
            if (!optimal(i)) {
                bad = i;
                break;
            }
            good = i;
        }
    } else {
        int probe = 0;
        while (probe < last) {
            const int next = std::min(probe + config.bracket_stride, last);
            if (!optimal(next)) {
                for (int i = probe + 1; i < next; ++i) {
                    if (!optimal(i)) {
                        bad = i;
                        break;
                    }
                    good = i;
                }
                if (bad < 0) {
                    bad = next;
                }
                break;
            }
            good = next;
            probe = next;
        }
    }
    res.index = good;
    res.beta_min = seq[static_cast<std::size_t>(good)];
    res.reached_floor = bad < 0;
    return res;
}

std::vector<CaseParams> material_points(const SweepConfig& config)
{
    std::vector<CaseParams> out;
    if (uses_zone_pair(config.case_kind)) {
        for (double k0 : config.kappa0s) {
            for (double k1 : config.kappa1s) {
                if (k0 == k1) {
                    continue;
                }
                CaseParams p;
                p.kappa0 = k0;
                p.kappa1 = k1;
                out.push_back(p);
            }
        }
    } else {
        for (double k : config.kappas) {
            CaseParams p;
            p.kappa = k;
            out.push_back(p);
        }
    }
    return out;
}

std::vector<EllipticSweepRecord> profile_iterations(const SweepConfig& config)
{
    config.validate();
    if (config.betas.empty() || config.hs.empty()) {
        throw Error(ErrorKind::InvalidArgument, "beta and h grids must be nonempty");
    }
    for (std::size_t i = 1; i < config.hs.size(); ++i) {
        if (std::abs(config.hs[i] - 0.5 * config.hs[i - 1]) > 1e-12 * config.hs[i - 1]) {
            throw Error(ErrorKind::InvalidArgument, "h grid must halve from one value to the next");
        }
    }
    const std::vector<CaseParams> materials = material_points(config);
    if (materials.empty()) {
        throw Error(ErrorKind::InvalidArgument, "material grid is empty");
    }
    const std::size_t nh = config.hs.size();
    const std::size_t nb = config.betas.size();
    const std::size_t nm = materials.size();
    const std::size_t nk = config.degrees.size();
    const std::size_t nt = config.thetas.size();
    std::vector<EllipticSweepRecord> records(nt * nk * nm * nb * nh);
    StudyOptions opts;
    opts.h0 = config.hs.front();
    opts.n_cycles = static_cast<int>(nh);
    opts.solver = config.solver;
    opts.krylov = config.krylov;
    // levels depend on (k, material) only; theta and beta reuse them
    for (std::size_t ik = 0; ik < nk; ++ik) {
        const int k = config.degrees[ik];
        for (std::size_t im = 0; im < nm; ++im) {
            const CaseParams& mat = materials[im];
            const ManufacturedCase mc = manufactured_elliptic_case(config.case_kind, mat);
            const std::vector<StudyLevel> levels = prepare_study_levels(mc, k, opts);
            parallel_for(static_cast<int>(nt * nb), config.jobs, [&](int t) {
                const std::size_t it = static_cast<std::size_t>(t) / nb;
                const std::size_t ib = static_cast<std::size_t>(t) % nb;
                SchemeConfig s;
                s.theta = config.thetas[it];
                s.degree = k;
                s.beta = config.betas[ib];
                const ConvergenceStudy study = run_convergence_study(mc, levels, s, opts);
                const bool rate_ok = is_rate_optimal(study, k);
                const std::size_t base = (((it * nk + ik) * nm + im) * nb + ib) * nh;
                for (std::size_t i = 0; i < nh; ++i) {
                    const StudyRow& row = study.rows[i];
                    EllipticSweepRecord& r = records[base + i];
                    r.theta = s.theta;
                    r.kappa = mat.kappa;
                    r.kappa0 = mat.kappa0;
                    r.kappa1 = mat.kappa1;
                    r.beta = s.beta;
                    r.h = config.hs[i];
                    r.k = k;
                    r.converged = !row.failed;
                    const int max_iter = config.krylov.max_iter > 0 ? config.krylov.max_iter : 10 * row.n_dofs;
                    r.iterations = r.converged ? row.iterations : max_iter;
                    r.rate_ok = rate_ok;
                }
            });
        }
    }
    return records;
}

std::vector<BetaMinRecord> beta_min_table(const SweepConfig& config)
{
    config.validate();
    const std::vector<CaseParams> materials = material_points(config);
    std::vector<BetaMinRecord> table;
    for (int theta : config.thetas) {
        for (int k : config.degrees) {
            for (const CaseParams& m : materials) {
                BetaMinRecord r;
                r.theta = theta;
                r.k = k;
                r.material = m;
                table.push_back(r);
            }
        }
    }
    parallel_for(static_cast<int>(table.size()), config.jobs, [&](int i) {
        BetaMinRecord& r = table[static_cast<std::size_t>(i)];
        SchemeConfig s;
        s.theta = r.theta;
        s.degree = r.k;
        try {
            r.result = find_beta_min(manufactured_elliptic_case(config.case_kind, r.material), s, config.solver, config);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoStableBeta) {
                throw;
            }
            r.stable = false;
        }
    });
    return table;
}

std::vector<EllipticSweepRecord> profile_above_beta_min(const SweepConfig& config,
                                                        const std::vector<BetaMinRecord>& table, int n_beta)
{
    std::vector<EllipticSweepRecord> out;
    for (const BetaMinRecord& r : table) {
        if (!r.stable) {
            continue;
        }
        SweepConfig c = config;
        c.thetas = {r.theta};
        c.degrees = {r.k};
        c.kappas = {r.material.kappa};
        c.kappa0s = {r.material.kappa0};
        c.kappa1s = {r.material.kappa1};
        c.betas = log_grid(r.result.beta_min, config.beta0, n_beta);
        const auto recs = profile_iterations(c);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

void write_beta_min_csv(std::ostream& os, const std::vector<BetaMinRecord>& table, bool zone_pair)
{
    os << (zone_pair ? "theta,kappa0,kappa1,k,beta_min,reached_floor,stable,studies\n"
                     : "theta,kappa,k,beta_min,reached_floor,stable,studies\n");
    for (const BetaMinRecord& r : table) {
        os << r.theta << ',';
        if (zone_pair) {
            os << format_double(r.material.kappa0) << ',' << format_double(r.material.kappa1) << ',';
        } else {
            os << format_double(r.material.kappa) << ',';
        }
        os << r.k << ',' << (r.stable ? format_double(r.result.beta_min) : std::string("nan")) << ','
           << (r.result.reached_floor ? 1 : 0) << ',' << (r.stable ? 1 : 0) << ',' << r.result.studies << '\n';
    }
}

std::vector<BiotSweepRecord> sweep_biot(const SweepConfig& config)
{
    config.validate();
    if (config.biot_betas.empty()) {
        throw Error(ErrorKind::InvalidArgument, "Biot beta grid must be nonempty");
    }
    std::vector<BiotSweepRecord> records;
    for (double k1 : config.biot_kappa1s) {
        for (double mult : config.biot_kappa_mults) {
            for (double h : config.biot_hs) {
                for (double beta : config.biot_betas) {
                    BiotSweepRecord r;
                    r.kappa1 = k1;
                    r.kappa_mult = mult;
                    r.kappa2 = k1 * mult;
                    r.h = h;
                    r.beta = beta;
                    records.push_back(r);
                }
            }
        }
    }
    parallel_for(static_cast<int>(records.size()), config.jobs, [&](int i) {
        BiotSweepRecord& r = records[static_cast<std::size_t>(i)];
        BiotParameters p = config.biot;
        p.k1 = r.kappa1;
        p.k2 = r.kappa2;
        p.h = r.h;
        r.bool_quality = run_biot_quality(p, r.beta, config.biot_theta, config.solver).verdict.bool_quality;
    });
    return records;
}

bool uses_zone_pair(CaseKind kind) noexcept
{
    return kind == CaseKind::Discontinuous1D;
}

std::string elliptic_csv_header(bool zone_pair)
{
    return zone_pair ? "theta,kappa0,kappa1,beta,h,k,iterations,converged,rate_ok"
                     : "theta,kappa,beta,h,k,iterations,converged,rate_ok";
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_elliptic_csv(std::ostream& os, const std::vector<EllipticSweepRecord>& records, bool zone_pair)
{
    os << elliptic_csv_header(zone_pair) << '\n';
    for (const auto& r : records) {
        os << r.theta << ',';
        if (zone_pair) {
            os << format_double(r.kappa0) << ',' << format_double(r.kappa1) << ',';
        } else {
            os << format_double(r.kappa) << ',';
        }
        os << format_double(r.beta) << ',' << format_double(r.h) << ',' << r.k << ',' << r.iterations << ','
           << (r.converged ? 1 : 0) << ',' << (r.rate_ok ? 1 : 0) << '\n';
    }
}

void write_biot_csv(std::ostream& os, const std::vector<BiotSweepRecord>& records)
{
    os << "kappa1,kappa2,kappa_mult,beta,h,bool_quality\n";
    for (const auto& r : records) {
        os << format_double(r.kappa1) << ',' << format_double(r.kappa2) << ',' << format_double(r.kappa_mult) << ','
           << format_double(r.beta) << ',' << format_double(r.h) << ',' << r.bool_quality << '\n';
    }
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn)
{
    const int workers = std::max(1, std::min(jobs, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    int first_index = n;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (i < first_index) {
                        first_index = i;
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace dgp
