#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "flipper/follower.hpp"
#include "flipper/path_search.hpp"
#include "flipper/terrain.hpp"

namespace fs = std::filesystem;
using namespace flipper;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "flipperplan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("flipper_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Cli, ParamsDumpIsLoadable) {
  const CliRun r = run({"params", "--dump"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::istringstream in(r.out);
  EXPECT_EQ(parse_robot_params(in, "dump"), RobotParams{});
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  const CliRun r = run({"gen-map", "--kind", "wall", "--out", "/tmp/x.txt"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("error: code=2 kind="), std::string::npos) << r.err;
}

TEST(Cli, MissingInputIsAnIoError) {
  const fs::path d = fresh_dir("io");
  const CliRun r = run({"plan", "--map", (d / "nope.txt").string(), "--out", (d / "p.txt").string()});
  EXPECT_EQ(r.code, cli::kIo);
  EXPECT_FALSE(fs::exists(d / "p.txt"));
}

TEST(Cli, MapPlanSimulatePipeline) {
  const fs::path d = fresh_dir("pipeline");
  const auto map = (d / "step.txt").string();
  const auto inflated = (d / "step_d.txt").string();
  const auto path = (d / "path.txt").string();
  ASSERT_EQ(run({"gen-map", "--kind", "step", "--rot", "15", "--out", map}).code, cli::kOk);
  ASSERT_EQ(run({"inflate", "--map", map, "--out", inflated}).code, cli::kOk);
  const CliRun p = run({"plan", "--map", map, "--inflated", inflated, "--out", path,
                     "--h-samples", "20", "--debug-candidates", (d / "cands.csv").string()});
  ASSERT_EQ(p.code, cli::kOk) << p.err;
  const PlanPath loaded = import_path(path);
  EXPECT_EQ(loaded.steps.size(), 26u);
  EXPECT_TRUE(fs::file_size(d / "cands.csv") > 0);

  const CliRun s = run({"simulate", "--path", path, "--out-dir", (d / "report").string(),
                     "--disturbance", "yaw-drift"});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  const TrackingReport rep = read_report(d / "report");
  EXPECT_TRUE(rep.completed);
  EXPECT_NE(slurp(d / "report" / "summary.csv").find("completed,1"), std::string::npos);
}

TEST(Cli, InfeasiblePlanExitsWithThreeAndWritesNothing) {
  const fs::path d = fresh_dir("infeasible");
  const auto map = (d / "wall.txt").string();
  ASSERT_EQ(run({"gen-map", "--kind", "step", "--height", "0.3", "--out", map}).code, cli::kOk);
  const CliRun p = run({"plan", "--map", map, "--out", (d / "path.txt").string()});
  EXPECT_EQ(p.code, cli::kInfeasible);
  EXPECT_NE(p.err.find("kind=infeasible"), std::string::npos) << p.err;
  EXPECT_FALSE(fs::exists(d / "path.txt"));
}

TEST(Cli, ConfigFileIsOverriddenByFlags) {
  const fs::path d = fresh_dir("config");
  const auto map = (d / "step.txt").string();
  ASSERT_EQ(run({"gen-map", "--kind", "step", "--out", map}).code, cli::kOk);
  {
    std::ofstream cfg(d / "run.cfg");
    cfg << "# planner\ndx = 0.04\ntarget_x = 0.2\n";
  }
  const auto path = (d / "path.txt").string();
  ASSERT_EQ(run({"plan", "--map", map, "--out", path, "--config", (d / "run.cfg").string(),
                 "--target-x", "0.4"})
                .code,
            cli::kOk);
  const PlanPath p = import_path(path);
  EXPECT_EQ(p.settings.dx, 0.04);
  EXPECT_EQ(p.settings.target_x, 0.4);
  EXPECT_EQ(p.steps.size(), 10u);

  {
    std::ofstream cfg(d / "bad.cfg");
    cfg << "warp = 9\n";
  }
  EXPECT_EQ(run({"plan", "--map", map, "--out", path, "--config", (d / "bad.cfg").string()}).code,
            cli::kIo);
}

TEST(Cli, SweepWritesEveryCaseAndTables) {
  const fs::path d = fresh_dir("sweep");
  const CliRun r = run({"sweep", "--out-dir", d.string(), "--kinds", "ramp,iramp", "--rot-min", "0",
                     "--rot-max", "10", "--rot-step", "10", "--seed", "3"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  for (const char* c : {"ramp_00", "ramp_10", "iramp_00", "iramp_10"}) {
    EXPECT_TRUE(fs::exists(d / c / "path.txt")) << c;
    EXPECT_TRUE(fs::exists(d / c / "report" / "position_bias.csv")) << c;
  }
  EXPECT_NE(r.out.find("planned"), std::string::npos);
  EXPECT_NE(r.out.find("followed"), std::string::npos);
  const std::string summary = slurp(d / "summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 5);
}
