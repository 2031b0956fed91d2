#include <cmath>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "cmcflow/cli.hpp"
#include "cmcflow/errors.hpp"
#include "support.hpp"

using namespace cmcflow;
using namespace testing_support;
using nlohmann::json;

namespace {

std::string model_arg(const std::string& name) { return "--model " + model_path(name); }

json read_json(const fs::path& path) { return json::parse(slurp(path)); }

}  // namespace

TEST(ParseSamples, RangeAndList) {
  EXPECT_EQ(cli::parse_samples("0:1:5"), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(cli::parse_samples("0.5,2,10"), (std::vector<double>{0.5, 2.0, 10.0}));
  EXPECT_EQ(cli::parse_samples("3"), std::vector<double>{3.0});
  EXPECT_THROW(cli::parse_samples("0:1:0"), ArgumentError);
  EXPECT_THROW(cli::parse_samples("a,b"), ArgumentError);
  EXPECT_THROW(cli::parse_samples(""), ArgumentError);
}

TEST(ParseInitialSurface, MiniLanguage) {
  const PeriodicGrid grid({8, 1, 1}, {kPi, kPi, kPi});
  const auto flat = cli::parse_initial_surface("const:1.2", grid);
  EXPECT_TRUE((flat.u.array() == 1.2).all());
  const auto sine = cli::parse_initial_surface("sine:1.2,0.1,1", grid);
  for (std::size_t i = 0; i < grid.points(); ++i)
    EXPECT_NEAR(sine.u[static_cast<Eigen::Index>(i)], 1.2 + 0.1 * std::sin(grid.coordinate(i, 0)), 1e-15);
  EXPECT_THROW(cli::parse_initial_surface("sine:1.2", grid), ArgumentError);
  EXPECT_THROW(cli::parse_initial_surface("bump:1", grid), ArgumentError);

  const auto dir = scratch_dir("surface");
  {
    std::ofstream out(dir / "u.csv");
    write_surface_csv(out, grid, sine.u);
  }
  const auto loaded = cli::parse_initial_surface("file:" + (dir / "u.csv").string(), PeriodicGrid());
  EXPECT_EQ(loaded.grid, grid);
  EXPECT_EQ(loaded.u, sine.u);
  fs::remove_all(dir);
}

TEST(Cli, UsageErrors) {
  const auto dir = scratch_dir("usage");
  EXPECT_EQ(run_cli("", dir).code, cli::kUsage);
  EXPECT_EQ(run_cli("frobnicate", dir).code, cli::kUsage);
  EXPECT_EQ(run_cli("flow " + model_arg("power_law_example.json"), dir).code, cli::kUsage);
  EXPECT_EQ(run_cli("--help", dir).code, cli::kSuccess);
  fs::remove_all(dir);
}

TEST(Cli, CheckEnergyExitCodes) {
  const auto dir = scratch_dir("energy");
  auto run = run_cli("check-energy " + model_arg("power_law_example.json") +
                         " --lambda 0 --t 0.5:100:200 --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kSuccess) << run.err;
  const auto doc = read_json(dir / "energy.json");
  EXPECT_TRUE(doc.at("pass").get<bool>());
  EXPECT_TRUE(fs::exists(dir / "run_record.json"));
  run = run_cli("check-energy " + model_arg("power_squared.json") + " --lambda 0 --t 1 --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kVerificationFailed);
  fs::remove_all(dir);
}

TEST(Cli, MalformedModelNamesKey) {
  const auto dir = scratch_dir("model");
  std::ofstream(dir / "bad.json") << R"({"t_min": 0, "t_max": null, "lambda": 0,
    "fibers": [{"dim": 1, "period": 5, "law": {"type": "power", "q": 0.75}}]})";
  auto run = run_cli("boundary --model " + (dir / "bad.json").string() + " --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kModelError);
  EXPECT_NE(run.err.find("fibers[0].law.p"), std::string::npos) << run.err;
  std::ofstream(dir / "broken.json") << "{ not json";
  run = run_cli("boundary --model " + (dir / "broken.json").string() + " --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kModelError);
  run = run_cli("boundary --model " + (dir / "missing.json").string() + " --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kModelError);
  fs::remove_all(dir);
}

TEST(Cli, FlowWithAutoBarriersConverges) {
  const auto dir = scratch_dir("flow");
  const auto run = run_cli("flow " + model_arg("power_law_example.json") +
                               " --c 2 --u0 const:1.1 --auto-barriers --grid 8 --out " + dir.string(), dir);
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  const auto doc = read_json(dir / "run.json");
  EXPECT_EQ(doc.at("verdict"), "Converged");
  std::ifstream in(dir / "surface.csv");
  const auto surface = read_surface_csv(in);
  EXPECT_NEAR(surface.u.mean(), 1.375, 1e-6);
  const auto csv = slurp(dir / "flow.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,s,ds,minH,maxH,maxv,minu,maxu,residual");
  fs::remove_all(dir);
}

TEST(Cli, FlowVerdictExitCodes) {
  const auto dir = scratch_dir("verdicts");
  auto run = run_cli("flow " + model_arg("power_law_example.json") +
                         " --c 2 --u0 const:1.1 --t1 1.0 --t2 1.2 --grid 8 --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kBarrierViolation) << run.err;
  run = run_cli("flow " + model_arg("power_law_example.json") + " --c 2 --u0 const:1.1 --max-steps 3 --grid 8 --out " +
                    dir.string(), dir);
  EXPECT_EQ(run.code, cli::kMaxSteps);
  run = run_cli("flow " + model_arg("flrw_linear.json") + " --c 2 --u0 sine:1.2,5,1 --grid 64 --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kSpacelikenessLost);
  fs::remove_all(dir);
}

TEST(Cli, BarrierPrintsCertificate) {
  const auto dir = scratch_dir("barrier");
  const auto run = run_cli("barrier " + model_arg("power_law_example.json") + " --c 2 --t-ref 1 --out " + dir.string(), dir);
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  const auto doc = read_json(dir / "barrier.json");
  EXPECT_EQ(doc.at("t1").get<double>(), 1.0);
  EXPECT_EQ(doc.at("t2").get<double>(), 4.0);
  EXPECT_EQ(doc.at("tau").get<double>(), 3.0);
  EXPECT_EQ(doc.at("bound").get<double>(), 1.0);
  const auto bad = run_cli("barrier " + model_arg("de_sitter.json") + " --c 3 --t-ref 0 --out " + dir.string(), dir);
  EXPECT_EQ(bad.code, cli::kModelError);
  fs::remove_all(dir);
}

TEST(Cli, BoundaryAndHorizon) {
  const auto dir = scratch_dir("boundary");
  auto run = run_cli("boundary " + model_arg("all_sub_one.json") + " --out " + dir.string(), dir);
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  EXPECT_EQ(read_json(dir / "boundary.json").at("shape"), "point");
  run = run_cli("boundary " + model_arg("power_law_example.json") + " --out " + dir.string(), dir);
  EXPECT_EQ(read_json(dir / "boundary.json").at("shape"), "T¹ (circle)");
  run = run_cli("horizon " + model_arg("power_law_example.json") + " --t1 1 --jobs 2 --out " + dir.string(), dir);
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  EXPECT_FALSE(read_json(dir / "horizon.json").at("covers_slice").get<bool>());
  fs::remove_all(dir);
}

TEST(Cli, EigenWithPerturbation) {
  const auto dir = scratch_dir("eigen");
  auto run = run_cli("eigen " + model_arg("flrw_linear.json") + " --u0 const:2 --grid 32 --out " + dir.string(), dir);
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  auto doc = read_json(dir / "eigen.json");
  EXPECT_NEAR(doc.at("lambda1").get<double>(), 0.75, 1e-8);
  EXPECT_TRUE(doc.contains("iters"));
  EXPECT_TRUE(doc.contains("residual"));
  EXPECT_TRUE(fs::exists(dir / "phi1.csv"));
  run = run_cli("eigen " + model_arg("flrw_linear.json") + " --surface " + (dir / "phi1.csv").string() +
                    " --perturb 0.01 --out " + dir.string(), dir);
  // phi1 = 1 read back as heights gives the t = 1 slice
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  doc = read_json(dir / "eigen.json");
  EXPECT_NEAR(doc.at("lambda1").get<double>(), 3.0, 1e-8);
  EXPECT_GT(doc.at("perturbed_min_H").get<double>(), 0.0);
  fs::remove_all(dir);
}

TEST(Cli, VerifyEstimatesOnRecordedRun) {
  const auto dir = scratch_dir("estimates");
  auto run = run_cli("flow " + model_arg("flrw_linear.json") +
                         " --c 2 --u0 sine:1.2,0.05,1 --grid 32 --snapshot-stride 100 --out " + dir.string(), dir);
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  run = run_cli("verify-estimates --run " + (dir / "run.json").string() + " --out " + dir.string(), dir);
  EXPECT_EQ(run.code, cli::kSuccess) << run.err << run.out;
  const auto doc = read_json(dir / "estimates.json");
  EXPECT_EQ(doc.at("violations").get<int>(), 0);
  EXPECT_TRUE(doc.contains("identity_residual"));
  EXPECT_TRUE(doc.contains("slack"));
  fs::remove_all(dir);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch_dir("env");
  const auto target = dir / "from_env";
  const auto run = run_cli("boundary " + model_arg("de_sitter.json") + " --out " + (dir / "ignored").string(), dir,
                           "CMCFLOW_OUT=" + target.string());
  ASSERT_EQ(run.code, cli::kSuccess) << run.err;
  EXPECT_TRUE(fs::exists(target / "boundary.json"));
  EXPECT_TRUE(fs::exists(target / "run_record.json"));
  EXPECT_FALSE(fs::exists(dir / "ignored"));
  const auto record = read_json(target / "run_record.json");
  EXPECT_EQ(record.at("command"), "boundary");
  EXPECT_TRUE(record.contains("wall_time_s"));
  fs::remove_all(dir);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto a = scratch_dir("det_a");
  const auto b = scratch_dir("det_b");
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(run_cli("flow " + model_arg("flrw_linear.json") + " --c 2 --u0 sine:1.2,0.1,1 --grid 32 --out " +
                          dir.string(), dir).code, 0);
    ASSERT_EQ(run_cli("geodesics " + model_arg("power_law_example.json") +
                          " --t0 10 --t-stop 1 --random 20 --seed 7 --out " + dir.string(), dir).code, 0);
  }
  for (const char* name : {"flow.csv", "surface.csv", "run.json", "fan.csv", "geodesics.json"})
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  fs::remove_all(a);
  fs::remove_all(b);
}
