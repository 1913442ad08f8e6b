#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmvshrink/ecdf.hpp"
#include "gmvshrink/estimator_kind.hpp"
#include "gmvshrink/linalg.hpp"

namespace gmvshrink::backtest {

struct BacktestConfig {
  /// Estimation window length n.
  Index window_n = 0;
  /// Size of each random sub-portfolio.
  Index portfolio_p = 0;
  int num_portfolios = 1000;
  std::vector<EstimatorKind> estimators{EstimatorKind::kTraditional, EstimatorKind::kBonaFide};
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Realized out-of-sample returns of one estimator plus the number of windows
/// where the estimator was degenerate (zero sample covariance) and the naive
/// portfolio was held instead.
struct RollingSeries {
  std::vector<double> realized;
  int degenerate_windows = 0;
};

/// For every window of window_n consecutive columns, fits weights on the
/// window and records their return over the following column; T - window_n
/// values in total. Shrinkage targets the naive portfolio.
RollingSeries rolling_returns(const ReturnsMatrix& returns, EstimatorKind estimator,
                              Index window_n);

/// Same, fitting every estimator on a window from one shared sample
/// covariance. Result is indexed like `estimators`.
std::vector<RollingSeries> rolling_returns(const ReturnsMatrix& returns,
                                           std::span<const EstimatorKind> estimators,
                                           Index window_n);

struct OosStatistics {
  /// Mean realized return over the T - n out-of-sample periods.
  double mean = 0.0;
  /// Sum of squared deviations from `mean` divided by T - n - 1.
  double variance = 0.0;
  double sharpe = 0.0;
  /// Set when variance is zero; sharpe then holds +inf, -inf, or 0 for a
  /// zero mean.
  bool sharpe_infinite = false;
};

OosStatistics oos_statistics(std::span<const double> realized);

struct EstimatorResults {
  EstimatorKind kind = EstimatorKind::kTraditional;
  /// Indexed by draw.
  std::vector<OosStatistics> stats;
  std::vector<int> degenerate_windows;

  std::vector<double> variances() const;
  std::vector<double> sharpes() const;
  Ecdf variance_ecdf() const { return Ecdf(variances()); }
  Ecdf sharpe_ecdf() const { return Ecdf(sharpes()); }
};

struct BacktestReport {
  BacktestConfig config;
  /// Sorted asset indices of every sub-portfolio draw.
  std::vector<std::vector<Index>> draws;
  std::vector<EstimatorResults> estimators;

  const EstimatorResults& at(EstimatorKind kind) const;
};

/// Throws ConfigError for invalid settings and DataError when the panel has
/// fewer assets than portfolio_p or no more than window_n observations.
void validate(const BacktestConfig& config, Index assets, Index observations);

/// Draws num_portfolios independent uniform subsets of portfolio_p assets and
/// runs the rolling evaluation for each. Deterministic given config.seed;
/// draw d only depends on (seed, d).
BacktestReport run_backtest(const ReturnsMatrix& returns, const BacktestConfig& config);

}  // namespace gmvshrink::backtest
