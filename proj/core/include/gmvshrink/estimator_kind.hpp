#pragma once

#include <array>
#include <string>
#include <string_view>

namespace gmvshrink {

/// Estimators the simulation and backtest engines can evaluate. The oracle
/// kinds need the population covariance and are only available in simulations.
enum class EstimatorKind {
  kTraditional,
  kBonaFide,
  kFrahmMemmel,
  kOracleShrinkage,
  kOracleTraditional,
};

inline constexpr std::array kAllEstimatorKinds{
    EstimatorKind::kTraditional, EstimatorKind::kBonaFide, EstimatorKind::kFrahmMemmel,
    EstimatorKind::kOracleShrinkage, EstimatorKind::kOracleTraditional};

std::string_view to_string(EstimatorKind kind) noexcept;

/// Parses the snake_case name; throws ConfigError on unknown names.
EstimatorKind parse_estimator_kind(std::string_view name);

constexpr bool is_oracle(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::kOracleShrinkage || kind == EstimatorKind::kOracleTraditional;
}

}  // namespace gmvshrink
