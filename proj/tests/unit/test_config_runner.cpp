#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chemolab/runner.hpp"

using namespace chemolab;
namespace fs = std::filesystem;

namespace {

const char* kSmallRun = R"([params]
chi = 1
a = 1
b = 2
lambda = 1
mu = 1
dim = 1

[grid]
extent = 6.283185307179586
points = 64

[u0]
kind = random_band
low = 0.2
high = 0.8
modes = 4
seed = 11

[v0]
kind = cosine
base = 0.3
amplitude = 0.1

[step]
dt_max = 0.01
t_end = 4
record_every = 0.25

[checks]
run = eventual_bound, lyapunov, persistence

[calibration]
c_grad = 0.5641895835477563
)";

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("chemolab_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    }

    fs::path dir_;
};

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    if (pos == std::string::npos) throw std::logic_error("pattern not found: " + from);
    return text.replace(pos, from.size(), to);
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CHEMOLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, CanonicalTextRoundTrips) {
    const auto c = parse_experiment(kSmallRun);
    EXPECT_EQ(c.params.b, 2.0);
    EXPECT_EQ(c.u0.kind, ProfileKind::random_band);
    EXPECT_TRUE(c.checks.eventual_bound && c.checks.lyapunov && c.checks.persistence);
    EXPECT_FALSE(c.checks.convergence);
    ASSERT_TRUE(c.calibration.c_grad.has_value());
    const std::string text = to_text(c);
    const auto back = parse_experiment(text);
    EXPECT_TRUE(back == c);
    EXPECT_EQ(to_text(back), text);
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(parse_experiment(replace(kSmallRun, "points = 64", "points = 60")), ConfigError);
    EXPECT_THROW(parse_experiment(replace(kSmallRun, "b = 2", "b = banana")), ConfigError);
    EXPECT_THROW(parse_experiment(replace(kSmallRun, "b = 2", "b = 2\nbeta = 3")), ConfigError);
    EXPECT_THROW(parse_experiment(std::string(kSmallRun) + "\n[extra]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse_experiment(replace(kSmallRun, "run = eventual_bound", "run = everything")), ConfigError);
    EXPECT_THROW(parse_experiment(replace(kSmallRun, "mu = 1", "mu = -1")), ConfigError);
}

TEST(Config, SeedOverride) {
    auto c = parse_experiment(kSmallRun);
    c.override_seed(99);
    EXPECT_EQ(c.u0.seed, 99u);
    EXPECT_EQ(c.v0.seed, 100u);
}

TEST(Csv, DiagnosticsRoundTripIsExact) {
    Series s(3);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i].t = 0.1 * static_cast<double>(i);
        s[i].sup_u = 1.0 / 3.0 + static_cast<double>(i);
        s[i].err_v = 1e-17 * static_cast<double>(i + 1);
    }
    const std::string text = diagnostics_csv(s);
    EXPECT_EQ(text.substr(0, text.find('\n')), kDiagnosticsHeader);
    EXPECT_EQ(parse_diagnostics_csv(text), s);
    EXPECT_THROW(parse_diagnostics_csv("t,x\n1,2\n"), ConfigError);
}

TEST(Execute, SmallRunPasses) {
    const auto r = execute(parse_experiment(kSmallRun));
    EXPECT_FALSE(r.diverged);
    ASSERT_EQ(r.verdicts.size(), 3u);
    for (const auto& v : r.verdicts) EXPECT_TRUE(v.pass) << v.check << ": " << v.detail;
    EXPECT_EQ(r.exit_code(), kExitOk);
    EXPECT_EQ(r.series.size(), 17u);
    EXPECT_DOUBLE_EQ(r.constants.theta, 0.125);
}

TEST(Execute, NegativeInitialDataIsReportedAsDivergence) {
    const auto r = execute(parse_experiment(
        replace(kSmallRun, "kind = random_band\nlow = 0.2", "kind = cosine\nbase = 0\namplitude = 1\nlow = 0.2")));
    EXPECT_TRUE(r.diverged);
    EXPECT_GT(r.divergence_time, 0.0);
    EXPECT_EQ(r.exit_code(), kExitDiverged);
}

TEST(Execute, UnreachableBoundFailsTheCheck) {
    const auto c = parse_experiment(replace(kSmallRun, "run = eventual_bound, lyapunov, persistence",
                                            "run = eventual_bound\nbound_target = 0.01"));
    const auto r = execute(c);
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_FALSE(r.verdicts[0].pass);
    EXPECT_EQ(r.exit_code(), kExitCheckFailed);
}

using RunCommand = TempDir;

TEST_F(RunCommand, WritesArtifactsAndIsReproducible) {
    const auto cfg = write("run.ini", kSmallRun);
    std::ostringstream log;
    ASSERT_EQ(run_command(cfg, CommandOptions{dir_ / "a", std::nullopt, std::nullopt}, log), kExitOk) << log.str();
    ASSERT_EQ(run_command(cfg, CommandOptions{dir_ / "b", std::nullopt, std::nullopt}, log), kExitOk);
    for (const char* f : {"diagnostics.csv", "constants.json", "verdicts.json"}) {
        ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    }
    // The echoed config reproduces the run up to its output directory.
    auto echoed = load_experiment(dir_ / "a" / "config.ini");
    auto original = parse_experiment(kSmallRun);
    EXPECT_EQ(echoed.output_dir, (dir_ / "a").string());
    echoed.output_dir = original.output_dir;
    EXPECT_TRUE(echoed == original);
}

TEST_F(RunCommand, SeedOverrideChangesRandomData) {
    const auto cfg = write("run.ini", kSmallRun);
    std::ostringstream log;
    run_command(cfg, CommandOptions{dir_ / "a", 1u, std::nullopt}, log);
    run_command(cfg, CommandOptions{dir_ / "b", 2u, std::nullopt}, log);
    EXPECT_NE(slurp(dir_ / "a" / "diagnostics.csv"), slurp(dir_ / "b" / "diagnostics.csv"));
}

TEST_F(RunCommand, ConfigErrorWritesNothing) {
    const auto cfg = write("bad.ini", replace(kSmallRun, "points = 64", "points = 63"));
    std::ostringstream log;
    EXPECT_EQ(run_command(cfg, CommandOptions{dir_ / "out", std::nullopt, std::nullopt}, log), kExitConfigError);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
    EXPECT_NE(log.str().find("config error"), std::string::npos);
    EXPECT_EQ(run_command(dir_ / "missing.ini", CommandOptions{dir_ / "out"}, log), kExitConfigError);
}

using SweepCommand = TempDir;

TEST_F(SweepCommand, GridOfDampingValues) {
    write("base.ini", kSmallRun);
    const auto sweep = write("sweep.ini", "[sweep]\ntemplate = base.ini\nworkers = 3\n\n[axes]\nparams.b = 0.5, 1, 2, 4, 8, 16\n");
    const auto sc = load_sweep(sweep);
    EXPECT_EQ(sc.point_count(), 6u);
    EXPECT_EQ(sc.point_config(3).params.b, 4.0);

    std::ostringstream log;
    const int code = sweep_command(sweep, CommandOptions{dir_ / "out"}, log);
    EXPECT_TRUE(code == kExitOk || code == kExitCheckFailed) << log.str();
    const std::string summary = slurp(dir_ / "out" / "sweep_summary.csv");
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 7);
    EXPECT_EQ(summary.rfind("point,params.b,chi,a,b,", 0), 0u);
    for (int i = 0; i < 6; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04d", i);
        EXPECT_TRUE(fs::exists(dir_ / "out" / name / "verdicts.json")) << name;
    }
}

TEST_F(SweepCommand, SinglePointMatchesRun) {
    write("base.ini", kSmallRun);
    const auto sweep = write("sweep.ini", "[sweep]\ntemplate = base.ini\n\n[axes]\nparams.b = 2\n");
    std::ostringstream log;
    ASSERT_EQ(sweep_command(sweep, CommandOptions{dir_ / "sweep"}, log), kExitOk) << log.str();
    ASSERT_EQ(run_command(dir_ / "base.ini", CommandOptions{dir_ / "run"}, log), kExitOk);
    EXPECT_EQ(slurp(dir_ / "sweep" / "point_0000" / "diagnostics.csv"), slurp(dir_ / "run" / "diagnostics.csv"));
    EXPECT_EQ(slurp(dir_ / "sweep" / "point_0000" / "verdicts.json"), slurp(dir_ / "run" / "verdicts.json"));
}

TEST_F(SweepCommand, EmptyGridIsAConfigError) {
    write("base.ini", kSmallRun);
    const auto sweep = write("sweep.ini", "[sweep]\ntemplate = base.ini\n");
    std::ostringstream log;
    EXPECT_EQ(sweep_command(sweep, CommandOptions{dir_ / "out"}, log), kExitConfigError);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
    const auto typo = write("typo.ini", "[sweep]\ntemplate = base.ini\n\n[axes]\nparams.bb = 1, 2\n");
    EXPECT_EQ(sweep_command(typo, CommandOptions{dir_ / "out"}, log), kExitConfigError);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(SweepCommand, PoisonedPointIsIsolated) {
    write("base.ini", kSmallRun);
    const auto sweep = write("sweep.ini", "[sweep]\ntemplate = base.ini\n\n[axes]\nparams.b = 2, nan, 4\n");
    std::ostringstream log;
    EXPECT_EQ(sweep_command(sweep, CommandOptions{dir_ / "out"}, log), kExitCheckFailed) << log.str();
    std::istringstream summary(slurp(dir_ / "out" / "sweep_summary.csv"));
    std::string header, row0, row1, row2;
    std::getline(summary, header);
    std::getline(summary, row0);
    std::getline(summary, row1);
    std::getline(summary, row2);
    EXPECT_NE(row1.find(",error,"), std::string::npos) << row1;
    for (const auto& row : {row0, row2}) {
        EXPECT_NE(row.find(",completed,"), std::string::npos) << row;
        EXPECT_EQ(row.find("nan"), std::string::npos) << row;
    }
    write("base2.ini", replace(kSmallRun, "b = 2", "b = 4"));
    ASSERT_EQ(run_command(dir_ / "base2.ini", CommandOptions{dir_ / "single"}, log), kExitOk);
    EXPECT_EQ(slurp(dir_ / "out" / "point_0002" / "diagnostics.csv"), slurp(dir_ / "single" / "diagnostics.csv"));
}

using ReportCommand = TempDir;

TEST_F(ReportCommand, MarksDivergedPoints) {
    write("base.ini", replace(kSmallRun, "kind = random_band\nlow = 0.2", "kind = cosine\nbase = 0.5\namplitude = 0.1\nlow = 0.2"));
    const auto sweep = write("sweep.ini", "[sweep]\ntemplate = base.ini\n\n[axes]\nu0.base = 0.5, 0\n");
    std::ostringstream log;
    ASSERT_EQ(sweep_command(sweep, CommandOptions{dir_ / "out"}, log), kExitDiverged) << log.str();
    std::ostringstream out;
    ASSERT_EQ(report_command(dir_ / "out", CommandOptions{}, out, log), kExitOk) << log.str();
    EXPECT_NE(out.str().find("DIVERGED(t="), std::string::npos) << out.str();
    EXPECT_TRUE(fs::exists(dir_ / "out" / "plot_data.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "summary.txt"));
}

TEST_F(ReportCommand, EmptyDirectoryIsAConfigError) {
    std::ostringstream out, log;
    EXPECT_EQ(report_command(dir_, CommandOptions{}, out, log), kExitConfigError);
    EXPECT_EQ(report_command(dir_ / "nope", CommandOptions{}, out, log), kExitConfigError);
}

using Cli = TempDir;

TEST_F(Cli, ExitCodes) {
    const auto good = write("run.ini", kSmallRun);
    EXPECT_EQ(cli("run " + good.string() + " --out " + (dir_ / "ok").string()), 0);
    EXPECT_EQ(cli("report " + (dir_ / "ok").string()), 0);
    const auto failing = write("fail.ini", replace(kSmallRun, "run = eventual_bound, lyapunov, persistence",
                                                   "run = eventual_bound\nbound_target = 0.01"));
    EXPECT_EQ(cli("run " + failing.string() + " --out " + (dir_ / "fail").string()), 2);
    const auto diverging = write("div.ini", replace(kSmallRun, "kind = random_band\nlow = 0.2",
                                                    "kind = cosine\nbase = 0\namplitude = 1\nlow = 0.2"));
    EXPECT_EQ(cli("run " + diverging.string() + " --out " + (dir_ / "div").string()), 3);
    EXPECT_EQ(cli("run " + (dir_ / "missing.ini").string()), 4);
    EXPECT_EQ(cli("frobnicate"), 4);
    EXPECT_EQ(cli("run " + good.string() + " --seed notanumber"), 4);
}
