#include "support.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

using simlab::testing::scenario_path;
using simlab::testing::scratch_dir;

namespace {

int simlab_cli(const std::string& args, const std::filesystem::path& log) {
    const std::string cmd = std::string(SIMLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path write(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string with(const std::string& path, const std::string& from, const std::string& to) {
    std::string text = slurp(path);
    const auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos);
    text.replace(pos, from.size(), to);
    return text;
}

}  // namespace

TEST(Cli, CheckGainsPassesForSyntheticScenario) {
    const auto dir = scratch_dir("cli_gains");
    const auto log = dir / "out.txt";
    EXPECT_EQ(simlab_cli("check-gains " + scenario_path("synthetic_truth.cfg") + " --bounds " +
                             scenario_path("synthetic_truth.bounds"),
                         log),
              0)
        << slurp(log);
    const auto j = nlohmann::json::parse(slurp(log));
    EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(Cli, CheckGainsFailureExitsFour) {
    const auto dir = scratch_dir("cli_gains_fail");
    const auto bounds = write(dir, "big.bounds", "w_m: 1\nv_m: 1\nrho_m: 1\nrho_hat_m: 1\neps_m: 0\nomega_m: 0\nf_m: 100\n");
    EXPECT_EQ(simlab_cli("check-gains " + scenario_path("synthetic_truth.cfg") + " --bounds " + bounds.string(), dir / "o"), 4);
    const auto partial = write(dir, "partial.bounds", "w_m: 1\n");
    EXPECT_EQ(simlab_cli("check-gains " + scenario_path("synthetic_truth.cfg") + " --bounds " + partial.string(), dir / "o"), 2);
}

TEST(Cli, ValidationFailureExitsTwo) {
    const auto dir = scratch_dir("cli_invalid");
    const auto cfg = write(dir, "bad.cfg", with(scenario_path("synthetic_truth.cfg"), "lambda: [2, 1]", "lambda: [-1, 1]"));
    EXPECT_EQ(simlab_cli("run " + cfg.string() + " --out " + (dir / "run").string(), dir / "o"), 2);
    EXPECT_NE(slurp(dir / "o").find("sliding"), std::string::npos);
    EXPECT_EQ(simlab_cli("run " + scenario_path("synthetic_truth.cfg") + " --bogus-flag", dir / "o"), 2);
    EXPECT_EQ(simlab_cli("", dir / "o"), 2);
}

TEST(Cli, InitialBarrierViolationExitsThree) {
    const auto dir = scratch_dir("cli_barrier");
    const auto cfg = write(dir, "tight.cfg", with(scenario_path("synthetic_truth.cfg"), "mu: 10", "mu: 0.5"));
    EXPECT_EQ(simlab_cli("run " + cfg.string() + " --out " + (dir / "run").string(), dir / "o"), 3);
    EXPECT_TRUE(std::filesystem::exists(dir / "run" / "summary.json"));
    EXPECT_EQ(simlab_cli("check " + cfg.string(), dir / "o"), 3);
}

TEST(Cli, RunPlotAndEnvironmentRoot) {
    const auto dir = scratch_dir("cli_run");
    const auto cfg = write(dir, "short.cfg", with(scenario_path("synthetic_truth.cfg"), "t_final: 10", "t_final: 0.2"));
    const std::string env = "SIMLAB_OUT_ROOT=" + (dir / "root").string() + " ";
    const std::string cmd = std::string(SIMLAB_CLI_PATH) + " run " + cfg.string() + " --seed 11 --format csv,json,svg > " +
                            (dir / "o").string() + " 2>&1";
    ASSERT_EQ(std::system((env + cmd).c_str()), 0) << slurp(dir / "o");
    const auto out = dir / "root" / "synthetic_truth";
    EXPECT_TRUE(std::filesystem::exists(out / "trace.csv"));
    EXPECT_TRUE(std::filesystem::exists(out / "r_norm.svg"));
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_EQ(summary["seed"], 11);

    EXPECT_EQ(simlab_cli("plot " + (out / "trace.csv").string() + " --out " + (dir / "plots").string(), dir / "o"), 0)
        << slurp(dir / "o");
    EXPECT_TRUE(std::filesystem::exists(dir / "plots" / "positions.svg"));
    EXPECT_EQ(simlab_cli("plot " + (dir / "missing.csv").string() + " --out " + (dir / "plots").string(), dir / "o"), 2);
}

TEST(Cli, GraphInfoAndSweep) {
    const auto dir = scratch_dir("cli_graph");
    ASSERT_EQ(simlab_cli("graph-info " + scenario_path("reference.cfg"), dir / "o"), 0);
    const auto j = nlohmann::json::parse(slurp(dir / "o"));
    EXPECT_EQ(j["q"], (std::vector<double>{1, 2, 3, 4}));
    EXPECT_TRUE(j["all_reachable"].get<bool>());

    const auto cfg = write(dir, "short.cfg", with(scenario_path("synthetic_truth.cfg"), "t_final: 10", "t_final: 0.1"));
    EXPECT_EQ(simlab_cli("sweep " + cfg.string() + " --axis gamma1=80,120 --out " + (dir / "sweep").string(), dir / "o"), 0)
        << slurp(dir / "o");
    EXPECT_TRUE(std::filesystem::exists(dir / "sweep" / "gamma1=80" / "trace.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "sweep" / "sweep.json"));
    EXPECT_EQ(simlab_cli("sweep " + cfg.string() + " --axis gamma1=-5 --out " + (dir / "bad").string(), dir / "o"), 2);
}
