#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmvshrink/ecdf.hpp"
#include "gmvshrink/estimator_kind.hpp"
#include "gmvshrink/estimators.hpp"
#include "gmvshrink/linalg.hpp"

namespace gmvshrink::simulation {

enum class Scenario {
  /// 1/9 of eigenvalues 2, 4/9 equal 5, 4/9 equal 10.
  kBoundedSpectrum,
  /// As bounded, except one eigenvalue 10 is replaced by p.
  kUnboundedSpectrum,
  /// 20% of eigenvalues 3, 40% equal 1, 40% equal 0.5.
  kFig1Spectrum,
  /// User-supplied (value, fraction) blocks.
  kCustom,
};

std::string_view to_string(Scenario scenario) noexcept;
Scenario parse_scenario(std::string_view name);

struct SpectrumBlock {
  double value = 1.0;
  double fraction = 1.0;
};

struct Distribution {
  enum class Kind { kGaussian, kStudentT };
  Kind kind = Kind::kGaussian;
  /// Degrees of freedom for Student-t; must be >= 3. df = 3 has no finite
  /// fourth moment and is outside the regime the limit theory covers.
  int df = 5;

  static Distribution gaussian() { return {}; }
  static Distribution student_t(int df) { return {Kind::kStudentT, df}; }
  std::string label() const;
  bool experimental() const noexcept { return kind == Kind::kStudentT && df < 5; }
};

/// Parses "gaussian", "student_t(5)" or "t5".
Distribution parse_distribution(std::string_view text);

struct TargetSpec {
  enum class Kind { kNaive, kPopulationGmv, kExplicit };
  Kind kind = Kind::kNaive;
  Vector weights;

  std::string label() const;
};

struct CellSize {
  Index p = 0;
  Index n = 0;

  double c_ratio() const noexcept { return static_cast<double>(p) / static_cast<double>(n); }
  friend bool operator==(const CellSize&, const CellSize&) = default;
};

struct SimulationConfig {
  Scenario scenario = Scenario::kBoundedSpectrum;
  std::vector<SpectrumBlock> custom_spectrum;
  /// When set, every cell must satisfy |p/n - c| <= 1% of c (custom scenarios
  /// excepted); an empty schedule is filled with default_schedule(c).
  std::optional<double> c_target;
  std::vector<CellSize> schedule;
  Distribution distribution;
  int repetitions = 1000;
  std::vector<EstimatorKind> estimators{EstimatorKind::kTraditional, EstimatorKind::kBonaFide};
  TargetSpec target;
  std::uint64_t seed = 0;
  /// Common expected return added to every asset.
  double mean_return = 0.0;
  /// false: Sigma (Haar eigenvectors) drawn once per cell and held fixed over
  /// repetitions. true: a fresh Sigma per repetition.
  bool redraw_sigma = false;
  /// 0 = hardware concurrency. Results do not depend on this value.
  unsigned threads = 1;
};

/// Geometric schedule p = 9 * 2^j, n = round(p / c), j = 0..5.
std::vector<CellSize> default_schedule(double c);

/// Throws ConfigError describing the first violated constraint. Returns the
/// config with an empty schedule replaced by the default one.
SimulationConfig validated(SimulationConfig config);

/// Eigenvalues for a scenario at dimension p, in block order.
Vector scenario_spectrum(Scenario scenario, Index p,
                         const std::vector<SpectrumBlock>& custom = {});

/// Scenario spectrum with Haar eigenvectors drawn from rng.
CovarianceModel build_scenario(Scenario scenario, Index p, Rng& rng,
                               const std::vector<SpectrumBlock>& custom = {});

/// Returns Y = mu 1^T + Sigma^{1/2} X and the innovations X that produced it.
struct GeneratedSample {
  Matrix innovations;
  ReturnsMatrix returns;
};

GeneratedSample generate_sample(const CovarianceModel& sigma, const Vector& mu, Index n,
                                const Distribution& distribution, Rng& rng);

/// Columns i.i.d. with mean mu and covariance Sigma. Student-t innovations are
/// scaled by sqrt((df - 2)/df) to unit variance.
ReturnsMatrix generate_returns(const CovarianceModel& sigma, const Vector& mu, Index n,
                               const Distribution& distribution, Rng& rng);

struct EstimatorSamples {
  EstimatorKind kind = EstimatorKind::kTraditional;
  /// Relative loss per repetition, indexed by repetition.
  std::vector<double> loss;
  /// Shrinkage intensity per repetition (shrinkage estimators only).
  std::vector<double> alpha;
  /// Estimated target relative loss per repetition (bona fide only).
  std::vector<double> r_hat;

  double mean_loss() const { return mean(loss); }
  Ecdf ecdf() const { return Ecdf(loss); }
};

struct CellReport {
  CellSize size;
  /// Relative loss of the target under the generating Sigma, per repetition
  /// (constant unless redraw_sigma is set).
  std::vector<double> target_loss;
  std::vector<EstimatorSamples> estimators;

  /// Throws ConfigError when `kind` was not part of the run.
  const EstimatorSamples& at(EstimatorKind kind) const;
};

struct MonteCarloReport {
  SimulationConfig config;
  std::vector<CellReport> cells;

  const CellReport& cell(CellSize size) const;
};

/// Runs every (cell, repetition) pair. Deterministic given config.seed,
/// independent of config.threads.
MonteCarloReport run_monte_carlo(const SimulationConfig& config);

}  // namespace gmvshrink::simulation
