#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgpenalty/cli/app.hpp"
#include "dgpenalty/cli/config.hpp"
#include "dgpenalty/error.hpp"

namespace fs = std::filesystem;
using namespace dgp;
using namespace dgp::cli;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args)
{
    args.insert(args.begin(), "dgpenalty");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    CliRun r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("dgpenalty_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    [[nodiscard]] std::string dir(const std::string& sub = "") const { return (dir_ / sub).string(); }

    fs::path dir_;
};

} // namespace

TEST(Config, ParsesFileAndRejectsUnknownKeys)
{
    Config c({{"alpha", "1", ""}, {"grid", "1,2", ""}, {"name", "x", ""}});
    std::istringstream is("# comment\nalpha = 2.5\n\ngrid = log:1:100:3\n");
    c.load(is, "test");
    EXPECT_DOUBLE_EQ(c.real("alpha"), 2.5);
    const auto g = c.reals("grid");
    ASSERT_EQ(g.size(), 3u);
    EXPECT_NEAR(g[1], 10.0, 1e-12);
    EXPECT_EQ(c.str("name"), "x");
    std::istringstream bad("beta = 1\n");
    EXPECT_THROW(c.load(bad, "test"), Error);
    EXPECT_THROW(c.set("gamma", "1"), Error);
    c.set("alpha", "abc");
    EXPECT_THROW((void)c.real("alpha"), Error);
}

TEST(Config, GridForms)
{
    EXPECT_EQ(parse_grid("0.25,0.5"), (std::vector<double>{0.25, 0.5}));
    EXPECT_EQ(parse_grid("halving:0.5:3"), (std::vector<double>{0.5, 0.25, 0.125}));
    EXPECT_THROW(parse_grid("log:1:10"), Error);
}

TEST_F(CliTest, ConvergenceExitCodes)
{
    const CliRun ok = run({"convergence", "--h0", "0.25", "--cycles", "4", "--output-dir", dir()});
    EXPECT_EQ(ok.code, Success) << ok.err;
    EXPECT_NE(ok.out.find("rate optimal: yes"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir("convergence.csv")));
    EXPECT_TRUE(fs::exists(dir("convergence.config")));
    const auto manifest = nlohmann::json::parse(slurp(dir("convergence.manifest.json")));
    EXPECT_EQ(manifest["command"], "convergence");

    const CliRun bad = run({"convergence", "--h0", "0.25", "--cycles", "4", "--beta", "0.2", "--output-dir", dir()});
    EXPECT_EQ(bad.code, CriterionFailed);
}

TEST_F(CliTest, UsageErrors)
{
    EXPECT_EQ(run({"convergence", "-c", dir("missing.cfg")}).code, UsageError);
    EXPECT_EQ(run({"convergence", "--no-such-flag", "1"}).code, UsageError);
    EXPECT_EQ(run({}).code, UsageError);
    EXPECT_EQ(run({"convergence", "--theta", "5", "--output-dir", dir()}).code, UsageError);
    std::ofstream(dir("bad.cfg")) << "unknown_key = 3\n";
    EXPECT_EQ(run({"convergence", "-c", dir("bad.cfg")}).code, UsageError);
    EXPECT_EQ(run({"--help"}).code, Success);
}

TEST_F(CliTest, FlagsOverrideConfigFile)
{
    std::ofstream(dir("run.cfg")) << "degree = 2\nbeta = 7\n";
    const CliRun r = run({"convergence", "-c", dir("run.cfg"), "--beta", "9", "--show-config"});
    EXPECT_EQ(r.code, Success);
    EXPECT_NE(r.out.find("degree = 2"), std::string::npos);
    EXPECT_NE(r.out.find("beta = 9"), std::string::npos);
}

TEST_F(CliTest, EllipticSweepRowsAndDeterminism)
{
    const std::vector<std::string> args{"sweep-elliptic", "--thetas", "1,0", "--betas", "1,10,100", "--hs",
                                        "0.25,0.125", "--degrees", "1", "--output-dir", dir()};
    ASSERT_EQ(run(args).code, Success);
    const std::string first = slurp(dir("elliptic.csv"));
    std::istringstream is(first);
    std::string line;
    int lines = 0;
    while (std::getline(is, line)) {
        ++lines;
    }
    EXPECT_EQ(lines, 1 + 12);
    EXPECT_EQ(first.substr(0, first.find('\n')), "theta,kappa,beta,h,k,iterations,converged,rate_ok");
    ASSERT_EQ(run(args).code, Success);
    EXPECT_EQ(slurp(dir("elliptic.csv")), first);
}

TEST_F(CliTest, BiotSweepCleanAtSmallPenalty)
{
    ASSERT_EQ(run({"sweep-biot", "--betas", "1.1", "--output-dir", dir()}).code, Success);
    const std::string csv = slurp(dir("biot.csv"));
    EXPECT_EQ(csv, "kappa1,kappa2,kappa_mult,beta,h,bool_quality\n1e-12,1e-16,1e-04,1.1,0.05,1\n");
}

TEST_F(CliTest, TrainEvaluateLinear)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    {
        std::ofstream os(dir("data.csv"));
        os << "a,b,iterations\n";
        for (int i = 0; i < 200; ++i) {
            const double a = u(rng);
            const double b = u(rng);
            os << a << ',' << b << ',' << 3 * a - 2 * b + 1 << '\n';
        }
    }
    const CliRun t = run({"train", "--data", dir("data.csv"), "--output-dir", dir()});
    ASSERT_EQ(t.code, Success) << t.err;
    const CliRun e = run({"evaluate", "--model", dir("model.json"), "--data", dir("data.csv"), "--output-dir", dir()});
    ASSERT_EQ(e.code, Success) << e.err;
    const auto m = nlohmann::json::parse(slurp(dir("metrics.json")));
    EXPECT_EQ(m["n"], 20);
    EXPECT_GT(m["r2"].get<double>(), 0.9999);
    const std::string first = slurp(dir("metrics.json"));
    ASSERT_EQ(run({"train", "--data", dir("data.csv"), "--output-dir", dir()}).code, Success);
    ASSERT_EQ(run({"evaluate", "--model", dir("model.json"), "--data", dir("data.csv"), "--output-dir", dir()}).code,
              Success);
    EXPECT_EQ(slurp(dir("metrics.json")), first);
}

TEST_F(CliTest, PredictFindsThreshold)
{
    {
        std::ofstream os(dir("stab.csv"));
        os << "beta,h,rate_ok\n";
        for (int i = 0; i < 400; ++i) {
            const double beta = 0.1 + 2.9 * i / 399.0;
            const double h = i % 2 == 0 ? 0.1 : 0.05;
            os << beta << ',' << h << ',' << (beta >= 1.0 ? 1 : 0) << '\n';
        }
    }
    ASSERT_EQ(run({"train", "--data", dir("stab.csv"), "--model", "logistic", "--output-dir", dir()}).code, Success);
    const CliRun p = run({"predict", "--classifier", dir("model.json"), "--point", "h=0.1", "--betas",
                       "log:0.1:100:301", "--output-dir", dir()});
    ASSERT_EQ(p.code, Success) << p.err;
    const auto rep = nlohmann::json::parse(slurp(dir("prediction.json")));
    const double b = rep["smallest_stable_beta"].get<double>();
    EXPECT_GT(b, 0.85);
    EXPECT_LT(b, 1.2);
    EXPECT_TRUE(rep["cheapest_stable_beta"].is_null());

    const CliRun missing = run({"predict", "--classifier", dir("model.json"), "--point", "kappa=1", "--output-dir", dir()});
    EXPECT_EQ(missing.code, UsageError);
    EXPECT_NE(missing.err.find("schema-mismatch"), std::string::npos);

    const CliRun none = run({"predict", "--classifier", dir("model.json"), "--point", "h=0.1", "--betas", "0.1,0.2",
                          "--output-dir", dir()});
    EXPECT_EQ(none.code, CriterionFailed);
}

TEST_F(CliTest, OutputDirFromEnvironment)
{
    ::setenv("DGPENALTY_OUTPUT_DIR", dir("env").c_str(), 1);
    const CliRun r = run({"sweep-biot", "--betas", "1.1"});
    ::unsetenv("DGPENALTY_OUTPUT_DIR");
    EXPECT_EQ(r.code, Success) << r.err;
    EXPECT_TRUE(fs::exists(dir("env/biot.csv")));
}

TEST_F(CliTest, UnwritableOutputIsUsageError)
{
    std::ofstream(dir("file")) << "x";
    const CliRun r = run({"sweep-biot", "--betas", "1.1", "--output-dir", dir("file/sub")});
    EXPECT_EQ(r.code, UsageError);
    EXPECT_NE(r.err.find("io"), std::string::npos);
}
