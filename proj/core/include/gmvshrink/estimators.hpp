#pragma once

#include <string>

#include "gmvshrink/linalg.hpp"

namespace gmvshrink {

/// Portfolio weights satisfying the budget constraint w^T 1 = 1.
///
/// The check is |w^T 1 - 1| <= 1e-10 * max(1, ||w||_1); the scale factor only
/// matters for the large long-short positions the traditional estimator
/// produces close to p = n.
class WeightVector {
 public:
  explicit WeightVector(Vector weights);

  const Vector& values() const noexcept { return weights_; }
  Index size() const noexcept { return weights_.size(); }
  double operator()(Index i) const { return weights_(i); }

 private:
  Vector weights_;
};

/// Fixed target b the shrinkage estimators pull toward.
struct TargetPortfolio {
  WeightVector weights;
  std::string label;

  /// Equally weighted portfolio 1/p.
  static TargetPortfolio naive(Index p);
  static TargetPortfolio from_weights(Vector w, std::string label = "custom");
};

enum class Regime { kSubCritical, kSuperCritical };

const char* to_string(Regime regime) noexcept;

/// p/n < 1 is sub-critical; p = n routes to the super-critical branch.
Regime regime_for(Index p, Index n) noexcept;

struct ShrinkageEstimate {
  WeightVector weights;
  /// Sample GMV portfolio S^+ 1 / (1^T S^+ 1) the estimate shrinks from.
  WeightVector traditional;
  /// Intensity after clamping to [0, 1].
  double alpha_hat = 0.0;
  /// Intensity before clamping; differs from alpha_hat when r_hat_b < 0.
  double alpha_raw = 0.0;
  double r_hat_b = 0.0;
  double c_ratio = 0.0;
  Regime regime = Regime::kSubCritical;
};

/// Sample covariance together with its pseudo-inverse, computed once and
/// shared by every estimator evaluated on the same window.
struct SampleMoments {
  SymmetricMatrix covariance;
  SymmetricMatrix pinv;
  Index p = 0;
  Index n = 0;

  double c_ratio() const noexcept { return static_cast<double>(p) / static_cast<double>(n); }
};

/// S, and S^+ with rank capped at min(p, n - 1). At p = n this drops the
/// smallest eigenvalue, which centering makes numerically zero.
SampleMoments sample_moments(const ReturnsMatrix& returns);

/// S_inv 1 / (1^T S_inv 1). S_inv may be an inverse, the pseudo-inverse, or
/// the oracle generalized inverse.
WeightVector traditional_gmv(const SymmetricMatrix& s_inv);

/// Relative loss (w^T Sigma w - sigma_GMV^2) / sigma_GMV^2.
double out_of_sample_loss(const WeightVector& w, const CovarianceModel& sigma);

/// Oracle optimal intensity (b - w)^T Sigma b / (b - w)^T Sigma (b - w) with
/// w the traditional weights from s_generalized_inv. Not clamped.
double oracle_alpha(const SymmetricMatrix& s_generalized_inv, const CovarianceModel& sigma,
                    const TargetPortfolio& b);

/// alpha * traditional(s_inv) + (1 - alpha) * b with the oracle alpha.
WeightVector oracle_shrinkage(const SymmetricMatrix& s_inv, const CovarianceModel& sigma,
                              const TargetPortfolio& b);

/// Consistent estimator of the target's relative loss:
///   p/n < 1:  (1 - p/n) b^T S b 1^T S^{-1} 1 - 1
///   p/n >= 1: (p/n)(p/n - 1) b^T S b 1^T S^+ 1 - 1
/// Negative values are legitimate finite-sample outcomes.
double estimate_relative_loss(const SymmetricMatrix& s, const SymmetricMatrix& s_pinv,
                              const TargetPortfolio& b, Index p, Index n);

/// Shrinkage intensity from an estimated target loss, branching on c = p/n.
double shrinkage_intensity(double r_hat_b, double c_ratio) noexcept;

/// Bona fide optimal shrinkage estimator of the GMV portfolio; valid for any
/// p/n (Moore-Penrose inverse for p >= n).
ShrinkageEstimate bona_fide_shrinkage(const ReturnsMatrix& returns, const TargetPortfolio& b);
ShrinkageEstimate bona_fide_shrinkage(const SampleMoments& moments, const TargetPortfolio& b);

/// Frahm-Memmel dominating estimator (1 - k) traditional + k naive, with
/// k = (p - 3)/(n - p + 2) / R_hat clamped to [0, 1]. Only defined for p < n.
WeightVector frahm_memmel(const ReturnsMatrix& returns);
WeightVector frahm_memmel(const SampleMoments& moments);

}  // namespace gmvshrink
