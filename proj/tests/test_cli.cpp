#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sqzcam/app/commands.hpp"
#include "sqzcam/errors.hpp"
#include "sqzcam/frame_io.hpp"

using namespace sqzcam;
using namespace sqzcam::app;

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sqzcam_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "sqzcam");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

RunConfig small_config(const fs::path& dir) {
  RunConfig cfg;
  cfg.rows = 4;
  cfg.cols = 4;
  cfg.frames = 200;
  cfg.out_dir = dir;
  return cfg;
}

}  // namespace

TEST(Config, DefaultsMatchFigureFour) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.n_alpha, 1e6);
  EXPECT_EQ(cfg.n_s, 1.0);
  EXPECT_EQ(cfg.rows, 32u);
  EXPECT_EQ(cfg.cols, 32u);
  EXPECT_EQ(cfg.frames, 10000u);
  ASSERT_EQ(cfg.phases.size(), 2u);
  EXPECT_EQ(cfg.phases[1], kPi / 2);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ParseText) {
  const RunConfig cfg = parse_config_text(
      "# comment\n"
      "n-alpha = 2.5e5\n"
      "n-s = 0.5   # trailing comment\n"
      "\n"
      "phi = 0, pi/2, pi\n"
      "rows = 8\ncols=16\nrun-counts = 2,4\nexport-csv = true\n");
  EXPECT_EQ(cfg.n_alpha, 2.5e5);
  EXPECT_EQ(cfg.n_s, 0.5);
  ASSERT_EQ(cfg.phases.size(), 3u);
  EXPECT_EQ(cfg.phases[2], kPi);
  EXPECT_EQ(cfg.rows, 8u);
  EXPECT_EQ(cfg.cols, 16u);
  EXPECT_EQ(cfg.run_counts, (std::vector<std::size_t>{2, 4}));
  EXPECT_TRUE(cfg.export_csv);
}

TEST(Config, RoundTripThroughText) {
  RunConfig cfg;
  cfg.n_alpha = 123.456;
  cfg.phases = {0.1, 0.25};
  cfg.seed = 987654321;
  cfg.inputs = {"a.sqzf", "b.sqzf"};
  const RunConfig back = parse_config_text(cfg.to_text());
  EXPECT_EQ(back.to_text(), cfg.to_text());
  EXPECT_EQ(back.n_alpha, 123.456);
  EXPECT_EQ(back.phases, cfg.phases);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config_text("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("rows\n"), ConfigError);
  EXPECT_THROW(parse_config_text("rows = -3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n-s = abc\n"), ConfigError);
  EXPECT_THROW(parse_config_text("export-csv = maybe\n"), ConfigError);
  RunConfig cfg;
  cfg.n_s = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.run_counts = {1, 4};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.rows = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, WeightFile) {
  const auto dir = fresh_dir("weights");
  {
    std::ofstream os(dir / "w.txt");
    os << "0.1 0.2\n0.3 0.4\n";
  }
  RunConfig cfg;
  cfg.rows = 2;
  cfg.cols = 2;
  cfg.weights = (dir / "w.txt").string();
  EXPECT_EQ(cfg.geometry().weight(3), 0.4);
  cfg.cols = 3;
  EXPECT_THROW(cfg.geometry(), ConfigError);
  cfg.weights = (dir / "missing.txt").string();
  EXPECT_THROW(cfg.geometry(), IoError);
}

TEST(Analytic, Defaults) {
  const auto dir = fresh_dir("analytic");
  RunConfig cfg;
  cfg.out_dir = dir;
  std::ostringstream log;
  const AnalyticReport r = cmd_analytic(cfg, log);
  EXPECT_NEAR(r.squeezed.q, -8.2842e-7, 0.00005e-7);
  EXPECT_NEAR(r.anti_squeezed.q, 4.8284e-6, 0.00005e-6);
  EXPECT_EQ(r.mean, 1000001.0);
  EXPECT_EQ(r.homodyne_var_ns, 4.0);
  const auto j = nlohmann::json::parse(slurp(dir / "analytic.json"));
  EXPECT_EQ(j["config"]["n-alpha"], "1000000");
  EXPECT_EQ(slurp(dir / "analytic_config.txt"), cfg.to_text());
}

TEST(Analytic, NoSqueezing) {
  RunConfig cfg;
  cfg.n_s = 0.0;
  cfg.out_dir = fresh_dir("analytic_ns0");
  std::ostringstream log;
  const AnalyticReport r = cmd_analytic(cfg, log);
  EXPECT_EQ(r.squeezed.q, 0.0);
  EXPECT_EQ(r.anti_squeezed.q, 0.0);
  EXPECT_EQ(r.squeezed.variance, r.mean);
  EXPECT_EQ(r.anti_squeezed.variance, r.mean);
  EXPECT_EQ(r.homodyne_var_ns, 0.0);
  EXPECT_FALSE(r.squeezed.sensitivity.has_value());
}

TEST(Analytic, SensitivityRatioAtLargeDisplacement) {
  RunConfig cfg;
  cfg.n_alpha = 1e8;
  cfg.out_dir = fresh_dir("analytic_1e8");
  std::ostringstream log;
  const AnalyticReport r = cmd_analytic(cfg, log);
  ASSERT_TRUE(r.squeezed.sensitivity && r.anti_squeezed.sensitivity);
  EXPECT_NEAR(r.squeezed.sensitivity->ratio, 1.0, 1e-3);
  EXPECT_NEAR(r.anti_squeezed.sensitivity->ratio, 1.0, 1e-3);
}

TEST(Simulate, WritesOneFilePerBranch) {
  const auto dir = fresh_dir("simulate");
  const RunConfig cfg = small_config(dir);
  std::ostringstream log;
  const auto files = cmd_simulate(cfg, log);
  ASSERT_EQ(files.size(), 2u);
  const FrameBatch s = read_batch(files[0].path);
  const FrameBatch a = read_batch(files[1].path);
  EXPECT_EQ(s.params().phi1, 0.0);
  EXPECT_EQ(a.params().phi1, kPi / 2);
  EXPECT_EQ(s.n_frames(), 200u);
  EXPECT_EQ(s.pixel_count(), 16u);
  EXPECT_EQ(files[0].checksum, batch_checksum(s));
  EXPECT_NE(log.str().find("seed=1"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "simulate_config.txt"));
}

TEST(Simulate, SameSeedTwiceIsByteIdentical) {
  RunConfig cfg = small_config(fresh_dir("sim_a"));
  std::ostringstream log;
  const auto first = cmd_simulate(cfg, log);
  cfg.out_dir = fresh_dir("sim_b");
  cfg.threads = 4;
  const auto second = cmd_simulate(cfg, log);
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(slurp(first[i].path), slurp(second[i].path));
  }
}

TEST(Simulate, SingleFrameWarns) {
  RunConfig cfg = small_config(fresh_dir("sim_one"));
  cfg.frames = 1;
  std::ostringstream log;
  const auto files = cmd_simulate(cfg, log);
  EXPECT_TRUE(fs::exists(files[0].path));
  EXPECT_NE(log.str().find("warning"), std::string::npos);
}

TEST(Simulate, CsvExport) {
  RunConfig cfg = small_config(fresh_dir("sim_csv"));
  cfg.frames = 3;
  cfg.phases = {0.0};
  cfg.export_csv = true;
  std::ostringstream log;
  const auto files = cmd_simulate(cfg, log);
  auto csv = files[0].path;
  csv.replace_extension(".csv");
  const std::string text = slurp(csv);
  EXPECT_EQ(text.rfind("frame,pixel,count\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 16);
}

TEST(Estimate, RecoversStateFromSimulatedBranches) {
  const auto dir = fresh_dir("estimate");
  RunConfig cfg = small_config(dir);
  cfg.frames = 2000;
  std::ostringstream log;
  const auto files = cmd_simulate(cfg, log);
  cfg.inputs = {files[0].path, files[1].path};
  const EstimateReport r = cmd_estimate(cfg, log);
  ASSERT_TRUE(r.squeezed && r.anti_squeezed && r.estimate);
  EXPECT_LT(r.squeezed->analysis.fit.q(), 0.0);
  EXPECT_GT(r.anti_squeezed->analysis.fit.q(), 0.0);
  EXPECT_NEAR(r.estimate->n_s_hat, 1.0, 5 * r.estimate->n_s_se);
  EXPECT_NEAR(r.estimate->n_alpha_hat, 1e6, 0.01e6);
  EXPECT_TRUE(fs::exists(dir / "curve_squeezed.csv"));
  EXPECT_TRUE(fs::exists(dir / "curve_anti_squeezed.csv"));
  const auto j = nlohmann::json::parse(slurp(dir / "estimate.json"));
  EXPECT_TRUE(j.contains("estimate"));
  EXPECT_TRUE(j.contains("config"));
  const std::string curve = slurp(dir / "curve_squeezed.csv");
  EXPECT_EQ(curve.rfind("# n-alpha = ", 0), 0u);
  EXPECT_NE(curve.find("k,eta,mean,variance\n"), std::string::npos);
}

TEST(Estimate, FilesFromTheSameBranchAreAMismatch) {
  const auto dir = fresh_dir("estimate_dup");
  RunConfig cfg = small_config(dir);
  cfg.phases = {0.0};
  std::ostringstream log;
  const auto a = cmd_simulate(cfg, log);
  cfg.out_dir = dir / "second";
  cfg.seed = 2;
  const auto b = cmd_simulate(cfg, log);
  cfg.inputs = {a[0].path, b[0].path};
  EXPECT_THROW(cmd_estimate(cfg, log), ConfigError);
}

TEST(Estimate, UnexpectedPhaseIsAMismatch) {
  const auto dir = fresh_dir("estimate_phase");
  RunConfig cfg = small_config(dir);
  cfg.phases = {0.3};
  std::ostringstream log;
  const auto files = cmd_simulate(cfg, log);
  RunConfig est = small_config(dir);
  est.inputs = {files[0].path};
  try {
    cmd_estimate(est, log);
    FAIL() << "expected a mismatch";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mismatch"), std::string::npos);
  }
}

TEST(Estimate, DifferentStateParametersAreAMismatch) {
  const auto dir = fresh_dir("estimate_params");
  RunConfig cfg = small_config(dir);
  cfg.phases = {0.0};
  std::ostringstream log;
  const auto s = cmd_simulate(cfg, log);
  cfg.phases = {kPi / 2};
  cfg.n_s = 2.0;
  const auto a = cmd_simulate(cfg, log);
  cfg.inputs = {s[0].path, a[0].path};
  EXPECT_THROW(cmd_estimate(cfg, log), ConfigError);
}

TEST(Estimate, DifferentGeometryIsAMismatch) {
  const auto dir = fresh_dir("estimate_geom");
  RunConfig cfg = small_config(dir);
  cfg.phases = {0.0};
  std::ostringstream log;
  const auto s = cmd_simulate(cfg, log);
  cfg.phases = {kPi / 2};
  cfg.cols = 2;
  const auto a = cmd_simulate(cfg, log);
  cfg.inputs = {s[0].path, a[0].path};
  EXPECT_THROW(cmd_estimate(cfg, log), ConfigError);
}

TEST(Estimate, SingleFrameFileIsRejected) {
  RunConfig cfg = small_config(fresh_dir("estimate_one"));
  cfg.frames = 1;
  cfg.phases = {0.0};
  std::ostringstream log;
  const auto files = cmd_simulate(cfg, log);
  cfg.inputs = {files[0].path};
  EXPECT_THROW(cmd_estimate(cfg, log), DomainError);
}

TEST(Sweep, ShapeAndCrossing) {
  RunConfig cfg;
  cfg.out_dir = fresh_dir("sweep");
  std::ostringstream log;
  const SweepReport r = cmd_sweep(cfg, log);
  ASSERT_EQ(r.rows.size(), 181u);
  auto min_it = std::min_element(r.rows.begin(), r.rows.end(),
                                 [](const SweepRow& a, const SweepRow& b) { return a.variance < b.variance; });
  auto max_it = std::max_element(r.rows.begin(), r.rows.end(),
                                 [](const SweepRow& a, const SweepRow& b) { return a.variance < b.variance; });
  EXPECT_EQ(min_it->phi1, 0.0);
  EXPECT_NEAR(max_it->phi1, kPi / 2, 1e-12);
  EXPECT_TRUE(r.rows.front().below_shot_noise);
  EXPECT_FALSE(r.rows[90].below_shot_noise);
  ASSERT_TRUE(r.crossing_phase && r.crossing_phase_bisection);
  EXPECT_NEAR(*r.crossing_phase, *r.crossing_phase_bisection, 1e-9);
  const std::string csv = slurp(cfg.out_dir / "sweep.csv");
  EXPECT_NE(csv.find("phi1,variance,snl,below_snl\n"), std::string::npos);
}

TEST(Sweep, FlatWithoutSqueezing) {
  RunConfig cfg;
  cfg.n_s = 0.0;
  cfg.out_dir = fresh_dir("sweep_flat");
  std::ostringstream log;
  const SweepReport r = cmd_sweep(cfg, log);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.variance, row.shot_noise);
    EXPECT_FALSE(row.below_shot_noise);
  }
  EXPECT_FALSE(r.crossing_phase.has_value());
}

TEST(Precision, SingleRunCountReportsUndefinedSlope) {
  RunConfig cfg = small_config(fresh_dir("precision"));
  cfg.run_counts = {4};
  cfg.frames_per_run = 50;
  cfg.groups = 3;
  std::ostringstream log;
  const PrecisionReport r = cmd_precision(cfg, log);
  EXPECT_EQ(r.squeezed.rows.size(), 1u);
  EXPECT_FALSE(r.squeezed.slope.has_value());
  EXPECT_NE(log.str().find("undefined"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(cfg.out_dir / "precision.json"));
  EXPECT_TRUE(j["squeezed"]["slope"].is_null());
  EXPECT_TRUE(fs::exists(cfg.out_dir / "precision.csv"));
}

TEST(OracleCheck, DefaultBoxPasses) {
  RunConfig cfg;
  cfg.out_dir = fresh_dir("oracle");
  std::ostringstream log;
  const OracleReport r = cmd_oracle_check(cfg, log);
  EXPECT_TRUE(r.passed()) << log.str();
  ASSERT_EQ(r.theta_gap_ratios.size(), 2u);
  for (double ratio : r.theta_gap_ratios) EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(OracleCheck, CorruptedToleranceFails) {
  RunConfig cfg;
  cfg.tolerance = 1e-15;
  cfg.out_dir = fresh_dir("oracle_tight");
  std::ostringstream log;
  EXPECT_FALSE(cmd_oracle_check(cfg, log).passed());
}

TEST(RunCli, ExitCodes) {
  const auto dir = fresh_dir("exit_codes");
  EXPECT_EQ(run({"analytic", "--out-dir", dir.string()}), kExitOk);
  EXPECT_EQ(run({"analytic", "--n-s", "-1", "--out-dir", dir.string()}), kExitValidation);
  EXPECT_EQ(run({"analytic", "--n-s", "abc", "--out-dir", dir.string()}), kExitValidation);
  EXPECT_EQ(run({"nonsense"}), kExitValidation);
  EXPECT_EQ(run({"estimate", (dir / "missing.sqzf").string(), "--out-dir", dir.string()}), kExitIo);
  EXPECT_EQ(run({"oracle-check", "--tolerance", "1e-15", "--out-dir", dir.string()}), kExitCheckFailed);
}

TEST(RunCli, FlagsOverrideConfigFile) {
  const auto dir = fresh_dir("override");
  {
    std::ofstream os(dir / "run.cfg");
    os << "n-alpha = 5e5\nn-s = 2\nout-dir = " << (dir / "from_file").string() << "\n";
  }
  ASSERT_EQ(run({"analytic", "--config", (dir / "run.cfg").string(), "--n-s", "1", "--out-dir", dir.string()}),
            kExitOk);
  const RunConfig used = load_config_file(dir / "analytic_config.txt");
  EXPECT_EQ(used.n_alpha, 5e5);
  EXPECT_EQ(used.n_s, 1.0);
  EXPECT_EQ(used.out_dir, dir);
}

TEST(RunCli, SimulateThenEstimate) {
  const auto dir = fresh_dir("cli_pipeline");
  ASSERT_EQ(run({"simulate", "--rows", "4", "--cols", "4", "--frames", "300", "--seed", "7", "--out-dir",
                 dir.string()}),
            kExitOk);
  EXPECT_EQ(run({"estimate", (dir / branch_file_name(0.0)).string(), (dir / branch_file_name(kPi / 2)).string(),
                 "--out-dir", dir.string()}),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "estimate.json"));
}
