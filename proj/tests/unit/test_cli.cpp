#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gmvshrink/error.hpp"
#include "gmvshrink_cli/commands.hpp"

namespace gmvshrink::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / "gmvshrink_cli_tests" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path path = dir_ / name;
    std::ofstream(path) << text;
    return path;
  }

  static std::string read(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path returns_csv(Index p, Index t, std::uint64_t seed, const std::string& name = "r.csv") {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 0.01);
    std::ostringstream out;
    out << "date";
    for (Index i = 0; i < p; ++i) out << ",A" << i;
    out << '\n';
    for (Index s = 0; s < t; ++s) {
      out << "d" << s;
      for (Index i = 0; i < p; ++i) out << ',' << z(gen);
      out << '\n';
    }
    return write(name, out.str());
  }

  int run_args(std::vector<std::string> args) const {
    std::vector<const char*> argv{"gmvshrink"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
  }

  GlobalOptions global(const std::string& sub, std::optional<std::uint64_t> seed = {}) const {
    GlobalOptions g;
    g.output_dir = dir_ / sub;
    g.seed = seed;
    g.threads = 2;
    return g;
  }

  fs::path dir_;
};

TEST(ConfigHash, StableHex) {
  EXPECT_EQ(config_hash(""), "cbf29ce484222325");
  EXPECT_EQ(config_hash("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(config_hash("abc").size(), 16u);
}

TEST(Parsers, Grid) {
  EXPECT_EQ(parse_grid("0.1,0.5,0.9"), (std::vector<double>{0.1, 0.5, 0.9}));
  EXPECT_EQ(parse_grid("0.1:0.5:0.1"), (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}));
  EXPECT_THROW(parse_grid(""), ConfigError);
  EXPECT_THROW(parse_grid("a"), ConfigError);
  EXPECT_THROW(parse_grid("1:0:0.1"), ConfigError);
}

TEST(Parsers, ScheduleSpectrumEstimatorsTarget) {
  const auto sched = parse_schedule("9:18, 18:36");
  ASSERT_EQ(sched.size(), 2u);
  EXPECT_EQ(sched[1], (simulation::CellSize{18, 36}));
  EXPECT_THROW(parse_schedule("9-18"), ConfigError);
  const auto spec = parse_spectrum("3:0.2,1:0.8");
  EXPECT_EQ(spec[0].value, 3.0);
  EXPECT_EQ(spec[1].fraction, 0.8);
  EXPECT_EQ(parse_estimators("traditional,bona_fide").size(), 2u);
  EXPECT_THROW(parse_estimators("traditional,magic"), ConfigError);
  EXPECT_EQ(parse_target("naive").kind, simulation::TargetSpec::Kind::kNaive);
  EXPECT_EQ(parse_target("gmv").kind, simulation::TargetSpec::Kind::kPopulationGmv);
  EXPECT_EQ(parse_target("0.5,0.5").weights.size(), 2);
  EXPECT_THROW(parse_target("0.5,0.6"), ConfigError);
}

TEST_F(CliTest, EstimateIsotropicNearEqualWeights) {
  EstimateOptions opt;
  opt.returns_csv = returns_csv(2, 10, 1);
  const ShrinkageEstimate est = cmd_estimate(opt, global("est"));
  EXPECT_NEAR(est.weights(0), 0.5, 0.15);
  EXPECT_NEAR(est.weights(1), 0.5, 0.15);
  const auto doc = nlohmann::json::parse(read(dir_ / "est" / "estimate.json"));
  EXPECT_EQ(doc["p"], 2);
  EXPECT_EQ(doc["n"], 10);
  EXPECT_EQ(doc["regime"], "sub-critical");
  EXPECT_DOUBLE_EQ(doc["c_ratio"].get<double>(), 0.2);
  EXPECT_DOUBLE_EQ(doc["weights"][0].get<double>(), est.weights(0));
  const std::string weights = read(dir_ / "est" / "weights.csv");
  EXPECT_NE(weights.find("# seed: none"), std::string::npos);
  EXPECT_NE(weights.find("asset,weight\nA0,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "est" / "manifest.json"));
}

TEST_F(CliTest, EstimateExplicitTargetIsConvexCombination) {
  EstimateOptions opt;
  opt.returns_csv = returns_csv(3, 10, 2);
  opt.target = "0.2,0.3,0.5";
  const ShrinkageEstimate est = cmd_estimate(opt, global("est"));
  const Eigen::Vector3d b(0.2, 0.3, 0.5);
  const Vector expect = est.alpha_hat * est.traditional.values() + (1.0 - est.alpha_hat) * b;
  EXPECT_LE((est.weights.values() - expect).cwiseAbs().maxCoeff(), 1e-12);
  opt.target = "0.5,0.5";
  EXPECT_THROW(cmd_estimate(opt, global("est")), ConfigError);
}

TEST_F(CliTest, EstimateMissingCellExitsWithDataError) {
  const fs::path bad = write("bad.csv", "date,A,B\nd1,0.1,0.2\nd2,,0.1\n");
  ::testing::internal::CaptureStderr();
  const int code = run_args({"estimate", "--returns", bad.string(), "-o", (dir_ / "o").string()});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 3);
  const auto doc = nlohmann::json::parse(err);
  EXPECT_EQ(doc["error"]["kind"], "data");
  EXPECT_EQ(doc["error"]["exit_code"], 3);
  const std::string msg = doc["error"]["message"];
  EXPECT_NE(msg.find("line 3"), std::string::npos);
  EXPECT_NE(msg.find("column 2"), std::string::npos);
}

TEST_F(CliTest, SimulateWritesThreeFileFamilies) {
  simulation::SimulationConfig cfg;
  cfg.c_target = 0.5;
  cfg.schedule = {{9, 18}};
  cfg.repetitions = 15;
  const auto report = cmd_simulate(cfg, global("sim", 5));
  ASSERT_EQ(report.cells.size(), 1u);
  const fs::path out = dir_ / "sim";
  const std::string losses = read(out / "losses_p9_n18.csv");
  EXPECT_NE(losses.find("# seed: 5\n"), std::string::npos);
  EXPECT_NE(losses.find("# config_hash: "), std::string::npos);
  EXPECT_NE(losses.find("# gmvshrink "), std::string::npos);
  std::size_t rows_trad = 0;
  std::size_t rows_bf = 0;
  std::istringstream in(losses);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("traditional,", 0) == 0) ++rows_trad;
    if (line.rfind("bona_fide,", 0) == 0) ++rows_bf;
  }
  EXPECT_EQ(rows_trad, 15u);
  EXPECT_EQ(rows_bf, 15u);
  EXPECT_NE(read(out / "summary.csv").find("estimator,p,n,mean_loss\ntraditional,9,18,"),
            std::string::npos);
  EXPECT_NE(read(out / "ecdf_p9_n18.csv").find("estimator,loss_value,cdf\n"), std::string::npos);
}

TEST_F(CliTest, SimulateRequiresSeed) {
  simulation::SimulationConfig cfg;
  cfg.c_target = 0.5;
  EXPECT_THROW(cmd_simulate(cfg, global("sim")), ConfigError);
}

TEST_F(CliTest, SimulateDivisibilityError) {
  ::testing::internal::CaptureStderr();
  const int code = run_args({"simulate", "--seed", "1", "--c", "0.5", "--schedule", "10:20",
                             "-o", (dir_ / "o").string()});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("divisible by 9"), std::string::npos) << err;
}

TEST_F(CliTest, SimulateRerunsAreByteIdentical) {
  auto once = [&](const std::string& sub, const std::string& threads) {
    ::testing::internal::CaptureStdout();
    const int code = run_args({"simulate", "--seed", "9", "--c", "0.5", "--schedule", "9:18,18:36",
                               "--repetitions", "12", "--estimators",
                               "traditional,bona_fide,oracle_shrinkage", "--threads", threads,
                               "-o", (dir_ / sub).string()});
    ::testing::internal::GetCapturedStdout();
    EXPECT_EQ(code, 0);
  };
  once("a", "1");
  once("b", "3");
  for (const char* f : {"summary.csv", "losses_p9_n18.csv", "losses_p18_n36.csv",
                        "ecdf_p9_n18.csv", "ecdf_p18_n36.csv"}) {
    EXPECT_EQ(read(dir_ / "a" / f), read(dir_ / "b" / f)) << f;
    EXPECT_FALSE(read(dir_ / "a" / f).empty()) << f;
  }
}

TEST_F(CliTest, ConfigFileWithCommandLineOverride) {
  const fs::path ini = write("sim.ini",
                             "command = simulate\nseed = 4\nc = 0.5\nschedule = 9:18\n"
                             "repetitions = 30\nestimators = traditional,bona_fide\n");
  ::testing::internal::CaptureStdout();
  const int code = run_args({"--config", ini.string(), "--repetitions", "7", "-o",
                             (dir_ / "o").string()});
  ::testing::internal::GetCapturedStdout();
  ASSERT_EQ(code, 0);
  const std::string losses = read(dir_ / "o" / "losses_p9_n18.csv");
  EXPECT_NE(losses.find("traditional,6,"), std::string::npos);
  EXPECT_EQ(losses.find("traditional,7,"), std::string::npos);
  const auto manifest = nlohmann::json::parse(read(dir_ / "o" / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 4);
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["config_path"], ini.string());
}

TEST_F(CliTest, ConfigFileUnknownKeyIsConfigError) {
  const fs::path ini = write("bad.ini", "bogus_key = 1\n");
  ::testing::internal::CaptureStderr();
  const int code = run_args({"--config", ini.string(), "curves", "--c-grid", "0.5"});
  ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
}

TEST_F(CliTest, CurvesExamples) {
  CurvesOptions opt;
  opt.c_grid = "0.1,0.5,0.9";
  const auto pts = cmd_curves(opt, global("c"));
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_NEAR(pts[0].rel_loss_traditional, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(pts[1].rel_loss_traditional, 1.0, 1e-15);
  EXPECT_NEAR(pts[2].rel_loss_traditional, 9.0, 1e-12);
  const std::string csv = read(dir_ / "c" / "curves.csv");
  EXPECT_NE(csv.find("c,alpha_star_or_plus,rel_loss_traditional_branch,rel_loss_gse,variance_ratio\n"
                     "0.1,0.9,"),
            std::string::npos)
      << csv;
  opt.c_grid = "2";
  EXPECT_DOUBLE_EQ(cmd_curves(opt, global("c")).front().alpha, 0.25);
  opt.c_grid = "0.5,1,1.5";
  EXPECT_THROW(cmd_curves(opt, global("c")), ConfigError);
  opt.c_grid = "0.5:1.5:0.25";
  EXPECT_THROW(cmd_curves(opt, global("c")), ConfigError);
}

TEST_F(CliTest, BacktestOutputs) {
  BacktestOptions opt;
  opt.returns_csv = returns_csv(12, 40, 3);
  opt.config.window_n = 12;
  opt.config.portfolio_p = 6;
  opt.config.num_portfolios = 4;
  const auto report = cmd_backtest(opt, global("bt", 2));
  EXPECT_EQ(report.draws.size(), 4u);
  const fs::path out = dir_ / "bt";
  for (const char* f : {"variance.csv", "sharpe.csv", "ecdf_variance.csv", "ecdf_sharpe.csv",
                        "draws.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const std::string var = read(out / "variance.csv");
  EXPECT_NE(var.find("# out_of_sample_dates: d12 .. d39\n"), std::string::npos) << var;
  EXPECT_NE(var.find("estimator,draw_index,value\ntraditional,0,"), std::string::npos);
  EXPECT_NE(read(out / "ecdf_sharpe.csv").find("estimator,value,cdf\n"), std::string::npos);
}

TEST_F(CliTest, BacktestErrors) {
  const fs::path csv = returns_csv(12, 40, 4);
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run_args({"backtest", "--returns", csv.string(), "--portfolio-p", "6", "--c", "1.5",
                      "--estimators", "traditional,frahm_memmel", "-o", (dir_ / "o").string()}),
            2);
  EXPECT_EQ(run_args({"backtest", "--returns", csv.string(), "--portfolio-p", "20",
                      "--window-n", "10", "--seed", "1", "-o", (dir_ / "o").string()}),
            3);
  EXPECT_EQ(run_args({"backtest", "--returns", csv.string(), "--portfolio-p", "6", "--c", "1.5",
                      "--estimators", "traditional,frahm_memmel", "--seed", "1", "-o",
                      (dir_ / "o").string()}),
            2);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, UnwritableOutputDirectory) {
  const fs::path file = write("occupied", "x");
  CurvesOptions opt;
  opt.c_grid = "0.5";
  GlobalOptions g;
  g.output_dir = file / "sub";
  EXPECT_THROW(cmd_curves(opt, g), ConfigError);
}

#ifdef GMVSHRINK_CLI_PATH
int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, ExecutableExitCodes) {
  const std::string exe = GMVSHRINK_CLI_PATH;
  const std::string out = " -o " + (dir_ / "o").string() + " >/dev/null 2>&1";
  EXPECT_EQ(shell(exe + " curves --c-grid 0.5,2" + out), 0);
  EXPECT_EQ(shell(exe + " curves --c-grid 1" + out), 2);
  EXPECT_EQ(shell(exe + " simulate --c 0.5" + out), 2);
  EXPECT_EQ(shell(exe + " frobnicate" + out), 2);
  const fs::path bad = write("bad.csv", "A,B\n1,NA\n2,3\n");
  EXPECT_EQ(shell(exe + " estimate --returns " + bad.string() + out), 3);
  const fs::path flat = write("flat.csv", "A,B\n0.01,0.01\n0.01,0.01\n0.01,0.01\n");
  EXPECT_EQ(shell(exe + " estimate --returns " + flat.string() + out), 4);
}
#endif

}  // namespace
}  // namespace gmvshrink::cli
