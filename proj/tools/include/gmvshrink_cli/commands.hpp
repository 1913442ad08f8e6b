#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gmvshrink/backtest.hpp"
#include "gmvshrink/estimators.hpp"
#include "gmvshrink/simulation.hpp"

namespace gmvshrink::cli {

enum class Command { kEstimate, kSimulate, kBacktest, kCurves };

const char* to_string(Command command) noexcept;

/// What was run, recorded as manifest.json next to every set of outputs.
struct RunManifest {
  Command command = Command::kEstimate;
  std::filesystem::path config_path;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  std::string version;
};

struct GlobalOptions {
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;
  /// 0 = hardware concurrency.
  unsigned threads = 0;
  std::filesystem::path config_path;
};

struct EstimateOptions {
  std::filesystem::path returns_csv;
  /// "naive" or a comma-separated weight list summing to 1.
  std::string target = "naive";
};

struct CurvePoint {
  double c = 0.0;
  double alpha = 0.0;
  double rel_loss_traditional = 0.0;
  double rel_loss_gse = 0.0;
  double variance_ratio = 0.0;
};

struct CurvesOptions {
  /// "0.1,0.5,0.9" or "start:stop:step" (inclusive), segments joined by ','.
  std::string c_grid;
  double r_b = 1.0;
};

struct BacktestOptions {
  std::filesystem::path returns_csv;
  backtest::BacktestConfig config;
};

/// 64-bit FNV-1a of a canonical description, as 16 hex digits.
std::string config_hash(const std::string& canonical);

std::string describe(const simulation::SimulationConfig& config);
std::string describe(const backtest::BacktestConfig& config);

std::vector<double> parse_grid(const std::string& spec);
std::vector<simulation::CellSize> parse_schedule(const std::string& spec);
std::vector<simulation::SpectrumBlock> parse_spectrum(const std::string& spec);
std::vector<EstimatorKind> parse_estimators(const std::string& spec);
simulation::TargetSpec parse_target(const std::string& spec);

/// Bona fide shrinkage estimate for a returns CSV (one row per date); writes
/// estimate.json and weights.csv.
ShrinkageEstimate cmd_estimate(const EstimateOptions& options, const GlobalOptions& global);

/// Writes summary.csv plus losses_p{p}_n{n}.csv and ecdf_p{p}_n{n}.csv per
/// cell. The seed is mandatory.
simulation::MonteCarloReport cmd_simulate(simulation::SimulationConfig config,
                                          const GlobalOptions& global);

/// Writes variance.csv, sharpe.csv, ecdf_variance.csv, ecdf_sharpe.csv and
/// draws.csv. The seed is mandatory.
backtest::BacktestReport cmd_backtest(BacktestOptions options, const GlobalOptions& global);

/// Writes curves.csv. The grid must not contain c = 1.
std::vector<CurvePoint> cmd_curves(const CurvesOptions& options, const GlobalOptions& global);

/// Full command-line entry point; returns the process exit code
/// (0 success, 2 configuration, 3 data, 4 numeric degeneracy).
int run(int argc, const char* const* argv);

}  // namespace gmvshrink::cli
