#include "gmvshrink/estimator_kind.hpp"

#include "gmvshrink/error.hpp"

namespace gmvshrink {

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::kTraditional: return "traditional";
    case EstimatorKind::kBonaFide: return "bona_fide";
    case EstimatorKind::kFrahmMemmel: return "frahm_memmel";
    case EstimatorKind::kOracleShrinkage: return "oracle_shrinkage";
    case EstimatorKind::kOracleTraditional: return "oracle_traditional";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  for (EstimatorKind kind : kAllEstimatorKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown estimator '" + std::string(name) +
                    "' (expected traditional, bona_fide, frahm_memmel, oracle_shrinkage or "
                    "oracle_traditional)");
}

}  // namespace gmvshrink
