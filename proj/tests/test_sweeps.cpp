#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dgpenalty/error.hpp"
#include "dgpenalty/sweeps.hpp"

using namespace dgp;

namespace {

SweepConfig small_elliptic()
{
    SweepConfig c;
    c.thetas = {1, 0};
    c.degrees = {1};
    c.kappas = {1.0};
    c.betas = {0.5, 10.0, 100.0};
    c.hs = halving_grid(0.25, 3);
    c.solver = SolverKind::Iterative;
    return c;
}

std::string csv(const std::vector<EllipticSweepRecord>& r)
{
    std::ostringstream os;
    write_elliptic_csv(os, r, false);
    return os.str();
}

} // namespace

TEST(Grids, BetaSequenceIsGeometric)
{
    const auto seq = beta_sequence(100.0, 0.99, 1e-2);
    ASSERT_GT(seq.size(), 900u);
    EXPECT_DOUBLE_EQ(seq[0], 100.0);
    for (std::size_t i = 1; i < seq.size(); ++i) {
        EXPECT_NEAR(seq[i] / seq[i - 1], 0.99, 1e-12);
    }
    EXPECT_GE(seq.back(), 1e-2);
    EXPECT_LT(seq.back() * 0.99, 1e-2);
}

TEST(Grids, LogAndHalving)
{
    const auto g = log_grid(0.01, 100.0, 5);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_DOUBLE_EQ(g.front(), 0.01);
    EXPECT_DOUBLE_EQ(g.back(), 100.0);
    EXPECT_NEAR(g[2], 1.0, 1e-12);
    const auto h = halving_grid(0.25, 3);
    EXPECT_EQ(h, (std::vector<double>{0.25, 0.125, 0.0625}));
}

TEST(Grids, FormatRoundTrips)
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}

TEST(EllipticSweep, RecordCountAndOrder)
{
    const SweepConfig c = small_elliptic();
    const auto r = profile_iterations(c);
    ASSERT_EQ(r.size(), 2u * 3u * 3u);
    EXPECT_EQ(r[0].theta, 1);
    EXPECT_EQ(r.back().theta, 0);
    EXPECT_DOUBLE_EQ(r[0].h, 0.25);
    EXPECT_DOUBLE_EQ(r[1].h, 0.125);
    EXPECT_DOUBLE_EQ(r[3].beta, 10.0);
    for (std::size_t i = 0; i < r.size(); i += 3) {
        // one study per (theta, beta): rate flag shared over h
        EXPECT_EQ(r[i].rate_ok, r[i + 1].rate_ok);
        EXPECT_EQ(r[i].rate_ok, r[i + 2].rate_ok);
    }
    EXPECT_TRUE(r[3].rate_ok);
}

TEST(EllipticSweep, DeterministicAndJobIndependent)
{
    SweepConfig c = small_elliptic();
    const std::string a = csv(profile_iterations(c));
    EXPECT_EQ(a, csv(profile_iterations(c)));
    c.jobs = 4;
    EXPECT_EQ(a, csv(profile_iterations(c)));
    EXPECT_EQ(a.substr(0, a.find('\n')), elliptic_csv_header(false));
}

TEST(EllipticSweep, RejectsNonHalvingGrid)
{
    SweepConfig c = small_elliptic();
    c.hs = {0.25, 0.1};
    EXPECT_THROW(profile_iterations(c), Error);
}

TEST(EllipticSweep, ZonePairsSkipEqualKappas)
{
    SweepConfig c;
    c.case_kind = CaseKind::Discontinuous1D;
    c.kappa0s = {1.0, 1e-6};
    c.kappa1s = {1e-6, 1.0};
    const auto m = material_points(c);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_DOUBLE_EQ(m[0].kappa0, 1.0);
    EXPECT_DOUBLE_EQ(m[0].kappa1, 1e-6);
    EXPECT_TRUE(uses_zone_pair(c.case_kind));
    EXPECT_EQ(elliptic_csv_header(true), "theta,kappa0,kappa1,beta,h,k,iterations,converged,rate_ok");
}

TEST(BetaMin, ScanFindsSmallestOptimalPenalty)
{
    SweepConfig c;
    c.thetas = {1};
    c.h0 = 0.25;
    c.n_h = 4;
    c.beta0 = 4.0;
    c.shrink = 0.9;
    c.solver = SolverKind::Direct;
    const auto table = beta_min_table(c);
    ASSERT_EQ(table.size(), 1u);
    ASSERT_TRUE(table[0].stable);
    const double bmin = table[0].result.beta_min;
    EXPECT_FALSE(table[0].result.reached_floor);
    EXPECT_GT(bmin, 0.3);
    EXPECT_LT(bmin, 4.0);
    // the next term of the sequence fails, the found one passes
    SchemeConfig s;
    s.beta = bmin;
    StudyOptions o;
    o.h0 = 0.25;
    o.n_cycles = 4;
    const ManufacturedCase mc = manufactured_elliptic_case(CaseKind::Continuous2D);
    EXPECT_TRUE(is_rate_optimal(run_convergence_study(mc, s, o), 1));
    s.beta = bmin * 0.9;
    EXPECT_FALSE(is_rate_optimal(run_convergence_study(mc, s, o), 1));
    std::ostringstream os;
    write_beta_min_csv(os, table, false);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "theta,kappa,k,beta_min,reached_floor,stable,studies");
}

TEST(BetaMin, UnstableStartIsReported)
{
    SweepConfig c;
    c.thetas = {1};
    c.h0 = 0.25;
    c.n_h = 4;
    c.beta0 = 0.2;
    c.solver = SolverKind::Direct;
    const auto table = beta_min_table(c);
    ASSERT_EQ(table.size(), 1u);
    EXPECT_FALSE(table[0].stable);
    SchemeConfig s;
    try {
        find_beta_min(manufactured_elliptic_case(CaseKind::Continuous2D), s, SolverKind::Direct, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoStableBeta);
    }
}

TEST(BiotSweep, OrderingAndHomogeneousColumn)
{
    SweepConfig c;
    c.biot_kappa1s = {1e-12, 1e-13};
    c.biot_kappa_mults = {1.0};
    c.biot_hs = {0.1};
    c.biot_betas = {1.1, 10.0, 50.0};
    c.solver = SolverKind::Direct;
    const auto r = sweep_biot(c);
    ASSERT_EQ(r.size(), 6u);
    EXPECT_DOUBLE_EQ(r[0].kappa1, 1e-12);
    EXPECT_DOUBLE_EQ(r[3].kappa1, 1e-13);
    EXPECT_DOUBLE_EQ(r[1].beta, 10.0);
    for (const auto& rec : r) {
        EXPECT_EQ(rec.bool_quality, 1);
        EXPECT_DOUBLE_EQ(rec.kappa2, rec.kappa1 * rec.kappa_mult);
    }
    std::ostringstream os;
    write_biot_csv(os, r);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "kappa1,kappa2,kappa_mult,beta,h,bool_quality");
}

TEST(Parallel, CoversEveryIndexOnce)
{
    std::vector<int> hits(100, 0);
    parallel_for(100, 3, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
    for (int h : hits) {
        EXPECT_EQ(h, 1);
    }
}
