#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgpenalty/drivers.hpp"

namespace dgp {

enum class BetaSearch {
    Scan,    // every term of beta0 * shrink^n until the first non-optimal study
    Bracket, // every stride-th term, then every term inside the failing stride
};

const char* to_string(BetaSearch s) noexcept;
BetaSearch beta_search_from_string(const std::string& name);

struct SweepConfig {
    // beta_min search
    double beta0 = 100.0;
    double shrink = 0.99;
    double beta_floor = 1e-2;
    double h0 = 6.25e-2;
    int n_h = 6;
    BetaSearch search = BetaSearch::Scan;
    int bracket_stride = 16;

    // elliptic grids
    CaseKind case_kind = CaseKind::Continuous2D;
    std::vector<int> thetas{1, 0};
    std::vector<int> degrees{1};
    std::vector<double> kappas{1.0};
    std::vector<double> kappa0s{1.0};
    std::vector<double> kappa1s{1e-6};
    std::vector<double> betas;
    std::vector<double> hs;

    // Biot grids
    std::vector<double> biot_kappa1s{1e-12};
    std::vector<double> biot_kappa_mults{1e-4};
    std::vector<double> biot_hs{0.05};
    std::vector<double> biot_betas;
    BiotParameters biot{};
    int biot_theta = 1;

    SolverKind solver = SolverKind::Iterative;
    KrylovOptions krylov{};
    unsigned long long seed = 0;
    int jobs = 1;

    void validate() const;
};

/// beta0 * shrink^n by repeated multiplication, down to (and including the
/// last term above) floor.
std::vector<double> beta_sequence(double beta0, double shrink, double floor);

/// n log-spaced points in [lo, hi], endpoints included.
std::vector<double> log_grid(double lo, double hi, int n);

/// h0, h0/2, ..., n values.
std::vector<double> halving_grid(double h0, int n);

struct BetaMinResult {
    double beta_min = 0.0;
    int index = 0;          // position in the beta sequence
    int studies = 0;        // convergence studies run
    bool reached_floor = false;
};

BetaMinResult find_beta_min(const ManufacturedCase& mcase, const SchemeConfig& scheme_template,
                            SolverKind solver, const SweepConfig& config);

struct EllipticSweepRecord {
    int theta = 1;
    double kappa = 1.0;
    double kappa0 = 1.0;
    double kappa1 = 1.0;
    double beta = 1.0;
    double h = 1.0;
    int k = 1;
    int iterations = 0;
    bool converged = false;
    bool rate_ok = false;
};

struct BiotSweepRecord {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa_mult = 0.0;
    double beta = 0.0;
    double h = 0.0;
    int bool_quality = 0;
};

/// Material points of an elliptic sweep: kappas for the continuous cases,
/// (kappa0, kappa1) pairs with kappa0 != kappa1 for the discontinuous case.
std::vector<CaseParams> material_points(const SweepConfig& config);

/// One record per (theta, k, material, beta, h), in that nesting order. For
/// each (theta, k, material, beta) one convergence study over the h grid
/// supplies the iteration counts and the shared rate_ok flag.
std::vector<EllipticSweepRecord> profile_iterations(const SweepConfig& config);

struct BetaMinRecord {
    int theta = 1;
    int k = 1;
    CaseParams material;
    BetaMinResult result;
    bool stable = true; // false when beta0 itself is not rate-optimal
};

/// beta_min for every (theta, k, material), in that nesting order.
std::vector<BetaMinRecord> beta_min_table(const SweepConfig& config);

/// Iteration profile of every beta_min record on n_beta log-spaced betas in
/// [beta_min, beta0] over config.hs; records follow the table order.
std::vector<EllipticSweepRecord> profile_above_beta_min(const SweepConfig& config,
                                                        const std::vector<BetaMinRecord>& table, int n_beta);

void write_beta_min_csv(std::ostream& os, const std::vector<BetaMinRecord>& table, bool zone_pair);

/// Nested kappa1 -> kappa_mult -> h -> beta, one staggered step each.
std::vector<BiotSweepRecord> sweep_biot(const SweepConfig& config);

bool uses_zone_pair(CaseKind kind) noexcept;
std::string elliptic_csv_header(bool zone_pair);
void write_elliptic_csv(std::ostream& os, const std::vector<EllipticSweepRecord>& records, bool zone_pair);
void write_biot_csv(std::ostream& os, const std::vector<BiotSweepRecord>& records);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

} // namespace dgp
