#include "gmvshrink/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gmvshrink/detail/parallel.hpp"
#include "gmvshrink/error.hpp"
#include "gmvshrink/estimators.hpp"

namespace gmvshrink::backtest {

namespace {

constexpr std::uint64_t kDrawStreamTag = 0x6261636b74657374ULL;

void check_estimators(std::span<const EstimatorKind> estimators, Index p, Index window_n) {
  if (estimators.empty()) throw ConfigError("backtest: no estimators selected");
  for (EstimatorKind kind : estimators) {
    if (is_oracle(kind)) {
      throw ConfigError("backtest: " + std::string(to_string(kind)) +
                        " needs the population covariance and cannot run on observed data");
    }
    if (kind == EstimatorKind::kFrahmMemmel && p >= window_n) {
      throw ConfigError("backtest: frahm_memmel requires p/n < 1, got p=" + std::to_string(p) +
                        ", n=" + std::to_string(window_n));
    }
  }
}

Vector fit_weights(EstimatorKind kind, const SampleMoments& moments,
                   const TargetPortfolio& target) {
  switch (kind) {
    case EstimatorKind::kTraditional: return traditional_gmv(moments.pinv).values();
    case EstimatorKind::kBonaFide: return bona_fide_shrinkage(moments, target).weights.values();
    case EstimatorKind::kFrahmMemmel: return frahm_memmel(moments).values();
    default: break;
  }
  throw ConfigError("backtest: unsupported estimator");
}

}  // namespace

std::vector<RollingSeries> rolling_returns(const ReturnsMatrix& returns,
                                           std::span<const EstimatorKind> estimators,
                                           Index window_n) {
  const Index p = returns.assets();
  const Index total = returns.observations();
  if (window_n < 2) throw ConfigError("backtest: window_n must be at least 2");
  if (total <= window_n) {
    throw DataError("backtest: insufficient history, T=" + std::to_string(total) +
                    " must exceed window_n=" + std::to_string(window_n));
  }
  if (p < 2) throw ConfigError("backtest: need at least two assets");
  check_estimators(estimators, p, window_n);

  const Matrix& y = returns.data();
  const TargetPortfolio target = TargetPortfolio::naive(p);
  std::vector<RollingSeries> out(estimators.size());
  for (RollingSeries& s : out) s.realized.reserve(static_cast<std::size_t>(total - window_n));

  for (Index start = 0; start + window_n < total; ++start) {
    const ReturnsMatrix window(y.middleCols(start, window_n));
    const SampleMoments moments = sample_moments(window);
    const auto next = y.col(start + window_n);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      Vector w;
      try {
        w = fit_weights(estimators[e], moments, target);
      } catch (const DegenerateError&) {
        w = target.weights.values();
        ++out[e].degenerate_windows;
      }
      out[e].realized.push_back(w.dot(next));
    }
  }
  return out;
}

RollingSeries rolling_returns(const ReturnsMatrix& returns, EstimatorKind estimator,
                              Index window_n) {
  const EstimatorKind kinds[] = {estimator};
  return std::move(rolling_returns(returns, kinds, window_n).front());
}

OosStatistics oos_statistics(std::span<const double> realized) {
  if (realized.size() < 2) {
    throw DataError("oos_statistics: need at least two realized returns");
  }
  const double count = static_cast<double>(realized.size());
  OosStatistics out;
  out.mean = std::accumulate(realized.begin(), realized.end(), 0.0) / count;
  double ss = 0.0;
  for (double r : realized) ss += (r - out.mean) * (r - out.mean);
  out.variance = ss / (count - 1.0);
  if (out.variance > 0.0) {
    out.sharpe = out.mean / std::sqrt(out.variance);
  } else {
    out.sharpe_infinite = true;
    out.sharpe = out.mean > 0.0   ? std::numeric_limits<double>::infinity()
                 : out.mean < 0.0 ? -std::numeric_limits<double>::infinity()
                                  : 0.0;
  }
  return out;
}

std::vector<double> EstimatorResults::variances() const {
  std::vector<double> out;
  out.reserve(stats.size());
  for (const OosStatistics& s : stats) out.push_back(s.variance);
  return out;
}

std::vector<double> EstimatorResults::sharpes() const {
  std::vector<double> out;
  out.reserve(stats.size());
  for (const OosStatistics& s : stats) out.push_back(s.sharpe);
  return out;
}

const EstimatorResults& BacktestReport::at(EstimatorKind kind) const {
  for (const EstimatorResults& r : estimators) {
    if (r.kind == kind) return r;
  }
  throw ConfigError("estimator '" + std::string(to_string(kind)) + "' was not part of the run");
}

void validate(const BacktestConfig& config, Index assets, Index observations) {
  if (config.window_n < 2) throw ConfigError("backtest: window_n must be at least 2");
  if (config.portfolio_p < 2) throw ConfigError("backtest: portfolio_p must be at least 2");
  if (config.num_portfolios < 1) throw ConfigError("backtest: num_portfolios must be positive");
  check_estimators(config.estimators, config.portfolio_p, config.window_n);
  if (assets < config.portfolio_p) {
    throw DataError("backtest: insufficient assets, universe has " + std::to_string(assets) +
                    " but portfolio_p=" + std::to_string(config.portfolio_p));
  }
  if (observations <= config.window_n) {
    throw DataError("backtest: insufficient history, T=" + std::to_string(observations) +
                    " must exceed window_n=" + std::to_string(config.window_n));
  }
}

BacktestReport run_backtest(const ReturnsMatrix& returns, const BacktestConfig& config) {
  validate(config, returns.assets(), returns.observations());
  const auto draws = static_cast<std::size_t>(config.num_portfolios);
  const std::size_t k = config.estimators.size();

  BacktestReport report;
  report.config = config;
  report.draws.resize(draws);
  std::vector<std::vector<RollingSeries>> series(draws);

  std::vector<Index> universe(static_cast<std::size_t>(returns.assets()));
  std::iota(universe.begin(), universe.end(), Index{0});

  detail::parallel_for(draws, config.threads, [&](std::size_t d) {
    Rng rng = make_stream(config.seed, kDrawStreamTag, d);
    std::vector<Index> subset;
    subset.reserve(static_cast<std::size_t>(config.portfolio_p));
    std::sample(universe.begin(), universe.end(), std::back_inserter(subset),
                config.portfolio_p, rng);
    std::sort(subset.begin(), subset.end());

    Matrix sub(config.portfolio_p, returns.observations());
    for (std::size_t i = 0; i < subset.size(); ++i) {
      sub.row(static_cast<Index>(i)) = returns.data().row(subset[i]);
    }
    series[d] = rolling_returns(ReturnsMatrix(std::move(sub)), config.estimators, config.window_n);
    report.draws[d] = std::move(subset);
  });

  report.estimators.resize(k);
  for (std::size_t e = 0; e < k; ++e) {
    EstimatorResults& r = report.estimators[e];
    r.kind = config.estimators[e];
    r.stats.reserve(draws);
    for (std::size_t d = 0; d < draws; ++d) {
      r.stats.push_back(oos_statistics(series[d][e].realized));
      r.degenerate_windows.push_back(series[d][e].degenerate_windows);
    }
  }
  return report;
}

}  // namespace gmvshrink::backtest
