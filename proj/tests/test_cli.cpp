#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "philap/cli.hpp"
#include "philap/config.hpp"
#include "philap/errors.hpp"

namespace fs = std::filesystem;
using namespace philap;

namespace {

const char* kSolveConfig = R"(# -u'' = sqrt(u) on (0, 1)
[problem]
a = 0
b = 1
lambda = 1
case = I

[phi]
kind = p_laplacian
p = 2

[f]
expr = sqrt(t)
k1 = 1
k2 = 1
q = 0.5
t_bar = 1

[weight_m]
pieces = 1

[witnesses]
psi = power
psi_p = 1
t1 = 1

[solver]
grid_n = 513
sweep = 1, 0.1, 0.01
)";

const char* kExpConfig = R"([problem]
a = 0
b = 4
case = II

[phi]
kind = exp_power
p = 1

[f]
expr = sqrt(t)
q1 = 0.5
q2 = 0.5

[witnesses]
p = 1
)";

const char* kBoundsConfig = R"([phi]
kind = p_laplacian
p = 2

[f]
expr = sqrt(t)

[weight_m]
pieces = 0; 1; 0
breakpoints = 0.4, 0.6

[witnesses]
psi = power

[solver]
grid_n = 1001
)";

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("philap_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }
    int run_cli(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return philap::run(args, out_, err_);
    }
    static std::string slurp(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, SolveWritesCertificateAndProfiles) {
    const auto cfg = write("solve.ini", kSolveConfig);
    const auto out = dir_ / "out";
    ASSERT_EQ(run_cli({"solve", "--config", cfg.string(), "--out", out.string()}), kExitOk) << err_.str();
    for (const char* f : {"certificate.json", "sub.csv", "super.csv", "solution.csv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto cert = nlohmann::json::parse(slurp(out / "certificate.json"));
    EXPECT_EQ(cert["case"], "I");
    EXPECT_TRUE(cert["in_positive_cone"].get<bool>());
    EXPECT_LE(cert["final_residual"].get<double>(), 1e-6);
    EXPECT_EQ(cert["grid_n"].get<int>(), 513);
    EXPECT_TRUE(cert["margins"].contains("sub_pointwise"));
    EXPECT_EQ(slurp(out / "solution.csv").rfind("x,u,uprime\n", 0), 0u);
    EXPECT_NE(out_.str().find("positive cone = yes"), std::string::npos);
}

TEST_F(CliTest, OutputIsDeterministic) {
    const auto cfg = write("solve.ini", kSolveConfig);
    ASSERT_EQ(run_cli({"solve", "--config", cfg.string(), "--out", (dir_ / "a").string()}), kExitOk);
    ASSERT_EQ(run_cli({"solve", "--config", cfg.string(), "--out", (dir_ / "b").string()}), kExitOk);
    for (const char* f : {"certificate.json", "solution.csv"}) {
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    }
}

TEST_F(CliTest, GridOverride) {
    const auto cfg = write("solve.ini", kSolveConfig);
    ASSERT_EQ(run_cli({"solve", "--config", cfg.string(), "--out", dir_.string(), "--grid-n", "257"}), kExitOk);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "certificate.json"))["grid_n"].get<int>(), 257);
    EXPECT_EQ(run_cli({"solve", "--config", cfg.string(), "--grid-n", "2"}), kExitConfig);
}

TEST_F(CliTest, HypothesesViolationExitsTwo) {
    const auto cfg = write("exp.ini", kExpConfig);
    EXPECT_EQ(run_cli({"hypotheses", "--config", cfg.string(), "--out", dir_.string()}), kExitHypothesis);
    EXPECT_NE(out_.str().find("hbi"), std::string::npos) << out_.str();
    const auto doc = nlohmann::json::parse(slurp(dir_ / "hypotheses.json"));
    EXPECT_FALSE(doc["all_corroborated"].get<bool>());
    EXPECT_EQ(doc["reports"][0]["failed_condition"], "hbi");
}

TEST_F(CliTest, HypothesesPassExitsZero) {
    const auto cfg = write("solve.ini", kSolveConfig);
    EXPECT_EQ(run_cli({"hypotheses", "--config", cfg.string(), "--out", dir_.string()}), kExitOk) << out_.str();
}

TEST_F(CliTest, SolveWithViolatedHypothesisExitsTwo) {
    const auto cfg = write("exp.ini", kExpConfig);
    EXPECT_EQ(run_cli({"solve", "--config", cfg.string(), "--out", dir_.string()}), kExitHypothesis);
    EXPECT_NE(err_.str().find("error:"), std::string::npos);
}

TEST_F(CliTest, BoundsIndicator) {
    const auto cfg = write("bounds.ini", kBoundsConfig);
    ASSERT_EQ(run_cli({"bounds", "--config", cfg.string(), "--out", dir_.string()}), kExitOk) << err_.str();
    EXPECT_NE(out_.str().find("PASS"), std::string::npos);
    const auto doc = nlohmann::json::parse(slurp(dir_ / "bounds.json"));
    EXPECT_NEAR(doc["lower_at_theta_bar"].get<double>(), 0.0375, 1e-9);
    EXPECT_NEAR(doc["u_at_theta_bar"].get<double>(), 0.045, 1e-9);
    EXPECT_NEAR(doc["upper_at_theta_bar"].get<double>(), 0.1, 1e-12);
    EXPECT_EQ(doc["violations"].get<int>(), 0);
    EXPECT_EQ(slurp(dir_ / "bounds.csv").rfind("x,lower,u,upper\n", 0), 0u);
}

TEST_F(CliTest, SweepWritesTable) {
    const auto cfg = write("solve.ini", kSolveConfig);
    ASSERT_EQ(run_cli({"sweep", "--config", cfg.string(), "--out", dir_.string()}), kExitOk) << err_.str();
    std::istringstream csv(slurp(dir_ / "sweep.csv"));
    std::string line;
    int rows = 0;
    std::getline(csv, line);
    EXPECT_EQ(line.rfind("lambda,", 0), 0u);
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, ConfigErrorsExitFour) {
    EXPECT_EQ(run_cli({"solve", "--config", (dir_ / "missing.ini").string()}), kExitConfig);
    const auto unknown = write("bad.ini", std::string(kSolveConfig) + "\n[phi2]\nx = 1\n");
    EXPECT_EQ(run_cli({"solve", "--config", unknown.string()}), kExitConfig);
    const auto expr = write("expr.ini", "[f]\nexpr = sqrt(t\n[witnesses]\npsi = power\n");
    EXPECT_EQ(run_cli({"solve", "--config", expr.string()}), kExitConfig);
    EXPECT_NE(err_.str().find("f.expr"), std::string::npos) << err_.str();
    EXPECT_EQ(run_cli({"solve"}), kExitConfig);
    EXPECT_EQ(run_cli({"frobnicate", "--config", "x"}), kExitConfig);
    EXPECT_EQ(run_cli({}), kExitConfig);
}

TEST_F(CliTest, HelpExitsZero) {
    EXPECT_EQ(run_cli({"--help"}), kExitOk);
    EXPECT_NE(out_.str().find("solve"), std::string::npos);
}

TEST_F(CliTest, BinaryExitStatus) {
    const auto good = write("solve.ini", kSolveConfig);
    const auto bad = write("exp.ini", kExpConfig);
    const std::string bin = PHILAP_CLI_PATH;
    auto status = [&](const std::string& args) {
        const int raw = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(raw);
    };
    EXPECT_EQ(status("hypotheses --config " + good.string() + " --out " + dir_.string()), 0);
    EXPECT_EQ(status("hypotheses --config " + bad.string() + " --out " + dir_.string()), 2);
    EXPECT_EQ(status("solve --config " + (dir_ / "nope.ini").string()), 4);
}

TEST(ExitCodeFor, Mapping) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(ParseError("x", 0)), kExitConfig);
    EXPECT_EQ(exit_code_for(HypothesisViolation("x")), kExitHypothesis);
    EXPECT_EQ(exit_code_for(PreconditionError("x")), kExitHypothesis);
    EXPECT_EQ(exit_code_for(NonConvergence("x")), kExitNumerical);
    EXPECT_EQ(exit_code_for(ConstructionFailure("x")), kExitNumerical);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitNumerical);
}

TEST(IniDocument, ParsesSectionsAndRejectsJunk) {
    const auto doc = IniDocument::parse("# comment\n[problem]\n a = 0 \n; other\nb=2\n[params]\nk = 3\n");
    EXPECT_EQ(doc.get("problem", "a"), "0");
    EXPECT_EQ(doc.get("problem", "b"), "2");
    EXPECT_EQ(doc.get("params", "k"), "3");
    EXPECT_FALSE(doc.get("problem", "lambda").has_value());
    EXPECT_THROW(IniDocument::parse("[problem]\na = 1\na = 2\n"), ConfigError);
    EXPECT_THROW(IniDocument::parse("[problem]\nzeta = 1\n"), ConfigError);
    EXPECT_THROW(IniDocument::parse("a = 1\n"), ConfigError);
    EXPECT_THROW(IniDocument::parse("[problem\n"), ConfigError);
    EXPECT_THROW(IniDocument::parse("[problem]\njust text\n"), ConfigError);
}

TEST(ParseConfig, ResolvesProblem) {
    const RunConfig cfg = parse_config(
        "[params]\nc = 3\n[problem]\na = -1\nb = 1\nlambda = 2\ncase = II\nomega0 = -1, 0\n"
        "[phi]\nkind = sum_powers\np1 = 2\np2 = 1\n[f]\nexpr = c*sqrt(t)\nq1 = 0.25\n"
        "[weight_m]\npieces = 1; -1\nbreakpoints = 0\n[solver]\ngrid_n = 65\n[output]\nformats = json\n");
    EXPECT_EQ(cfg.problem.interval, Interval(-1.0, 1.0));
    EXPECT_EQ(cfg.problem.lambda, 2.0);
    EXPECT_EQ(cfg.problem.problem_case, ProblemCase::CaseII);
    ASSERT_TRUE(cfg.omega0.has_value());
    EXPECT_EQ(cfg.omega0->b(), 0.0);
    EXPECT_EQ(cfg.problem.phi.kind(), PhiKind::SumPowers);
    EXPECT_DOUBLE_EQ(cfg.problem.f(4.0), 6.0);
    EXPECT_EQ(cfg.problem.q1, 0.25);
    EXPECT_EQ(cfg.problem.m.breakpoints, std::vector<double>{0.0});
    EXPECT_EQ(cfg.problem.grid_n, 65);
    EXPECT_TRUE(cfg.output.json);
    EXPECT_FALSE(cfg.output.csv);
}

TEST(ParseConfig, Rejections) {
    EXPECT_THROW(parse_config("[f]\nexpr = t\n"), ConfigError);  // case I without psi
    EXPECT_THROW(parse_config("[witnesses]\npsi = power\n"), ConfigError);  // no f
    EXPECT_THROW(parse_config("[f]\nexpr = t\n[witnesses]\npsi = power\n[problem]\nlambda = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("[f]\nexpr = t\n[witnesses]\npsi = power\n[problem]\na = 1\nb = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("[f]\nexpr = t\n[witnesses]\npsi = power\n[phi]\nkind = cubic\n"), ConfigError);
    EXPECT_THROW(parse_config("[f]\nexpr = t\n[witnesses]\npsi = power\n[solver]\ngrid_n = 2.5\n"), ConfigError);
    EXPECT_THROW(parse_config("[f]\nexpr = t\n[witnesses]\npsi = power\n[weight_m]\npieces = 1; 2\n"), ConfigError);
    EXPECT_THROW(parse_config("[f]\nexpr = t\n[witnesses]\npsi = power\n[phi]\nkind = custom\nexpr = x\n"),
                 ConfigError);
    EXPECT_THROW(parse_number("1.5x", "k"), ConfigError);
    EXPECT_EQ(parse_number_list(" 1, 2.5 ,3 ", "l"), (std::vector<double>{1.0, 2.5, 3.0}));
}
