#include "gmvshrink/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmvshrink/error.hpp"

namespace gmvshrink {

namespace {

void require_size(Index actual, Index expected, const char* what) {
  if (actual != expected) {
    throw DataError(std::string(what) + ": dimension mismatch (" + std::to_string(actual) +
                    " vs " + std::to_string(expected) + ")");
  }
}

}  // namespace

WeightVector::WeightVector(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1) throw DataError("weights: empty vector");
  if (!weights_.allFinite()) throw DataError("weights: non-finite entries");
  const double tol = 1e-10 * std::max(1.0, weights_.lpNorm<1>());
  if (std::abs(weights_.sum() - 1.0) > tol) {
    throw DataError("weights: entries must sum to 1, got " + std::to_string(weights_.sum()));
  }
}

TargetPortfolio TargetPortfolio::naive(Index p) {
  if (p < 1) throw ConfigError("naive target: dimension must be positive");
  return {WeightVector(Vector::Constant(p, 1.0 / static_cast<double>(p))), "naive"};
}

TargetPortfolio TargetPortfolio::from_weights(Vector w, std::string label) {
  return {WeightVector(std::move(w)), std::move(label)};
}

const char* to_string(Regime regime) noexcept {
  return regime == Regime::kSubCritical ? "sub-critical" : "super-critical";
}

Regime regime_for(Index p, Index n) noexcept {
  return p < n ? Regime::kSubCritical : Regime::kSuperCritical;
}

SampleMoments sample_moments(const ReturnsMatrix& returns) {
  const Index p = returns.assets();
  const Index n = returns.observations();
  SymmetricMatrix s = sample_covariance(returns);
  SymmetricMatrix s_pinv = pseudo_inverse(s, std::nullopt, std::min(p, n - 1));
  return {std::move(s), std::move(s_pinv), p, n};
}

WeightVector traditional_gmv(const SymmetricMatrix& s_inv) {
  const Vector row_sums = s_inv.data().rowwise().sum();
  const double denom = row_sums.sum();
  if (!(std::abs(denom) > 0.0) || std::abs(denom) < 1e-12 * s_inv.data().norm()) {
    throw DegenerateError("traditional_gmv: 1^T S^+ 1 is numerically zero");
  }
  return WeightVector(row_sums / denom);
}

double out_of_sample_loss(const WeightVector& w, const CovarianceModel& sigma) {
  require_size(w.size(), sigma.dim(), "out_of_sample_loss");
  const double gmv = sigma.gmv_variance();
  return (sigma.variance(w.values()) - gmv) / gmv;
}

double oracle_alpha(const SymmetricMatrix& s_generalized_inv, const CovarianceModel& sigma,
                    const TargetPortfolio& b) {
  require_size(s_generalized_inv.dim(), sigma.dim(), "oracle_alpha");
  require_size(b.weights.size(), sigma.dim(), "oracle_alpha");
  const WeightVector w = traditional_gmv(s_generalized_inv);
  const Vector diff = b.weights.values() - w.values();
  const Vector sigma_diff = sigma.matrix() * diff;
  const double denom = diff.dot(sigma_diff);
  if (diff.isZero(0.0) || !(denom > 0.0)) {
    throw DegenerateError("oracle_alpha: target coincides with the traditional portfolio");
  }
  return sigma_diff.dot(b.weights.values()) / denom;
}

WeightVector oracle_shrinkage(const SymmetricMatrix& s_inv, const CovarianceModel& sigma,
                              const TargetPortfolio& b) {
  const double alpha = oracle_alpha(s_inv, sigma, b);
  const WeightVector w = traditional_gmv(s_inv);
  return WeightVector(alpha * w.values() + (1.0 - alpha) * b.weights.values());
}

double estimate_relative_loss(const SymmetricMatrix& s, const SymmetricMatrix& s_pinv,
                              const TargetPortfolio& b, Index p, Index n) {
  if (p < 2 || n < 2) throw DataError("estimate_relative_loss: need p >= 2 and n >= 2");
  require_size(s.dim(), p, "estimate_relative_loss");
  require_size(s_pinv.dim(), p, "estimate_relative_loss");
  require_size(b.weights.size(), p, "estimate_relative_loss");

  const double c = static_cast<double>(p) / static_cast<double>(n);
  const Vector& bw = b.weights.values();
  const double target_var = bw.dot(s.data() * bw);
  const double inv_sum = s_pinv.data().sum();
  const double factor = p < n ? (1.0 - c) : c * (c - 1.0);
  return factor * target_var * inv_sum - 1.0;
}

double shrinkage_intensity(double r_hat_b, double c_ratio) noexcept {
  const double c = c_ratio;
  if (c < 1.0) return (1.0 - c) * r_hat_b / (c + (1.0 - c) * r_hat_b);
  return (c - 1.0) * r_hat_b / ((c - 1.0) * (c - 1.0) + c + (c - 1.0) * r_hat_b);
}

ShrinkageEstimate bona_fide_shrinkage(const SampleMoments& moments, const TargetPortfolio& b) {
  const Index p = moments.p;
  const Index n = moments.n;
  if (p < 2 || n < 2) throw DataError("bona_fide_shrinkage: need p >= 2 and n >= 2");
  require_size(b.weights.size(), p, "bona_fide_shrinkage");

  WeightVector traditional = traditional_gmv(moments.pinv);
  const double r_hat = estimate_relative_loss(moments.covariance, moments.pinv, b, p, n);
  const Regime regime = regime_for(p, n);
  const double c = moments.c_ratio();
  const double alpha_raw = shrinkage_intensity(r_hat, c);
  const double alpha = std::clamp(alpha_raw, 0.0, 1.0);

  WeightVector weights(alpha * traditional.values() + (1.0 - alpha) * b.weights.values());
  return {std::move(weights), std::move(traditional), alpha, alpha_raw, r_hat, c, regime};
}

ShrinkageEstimate bona_fide_shrinkage(const ReturnsMatrix& returns, const TargetPortfolio& b) {
  return bona_fide_shrinkage(sample_moments(returns), b);
}

WeightVector frahm_memmel(const SampleMoments& moments) {
  const Index p = moments.p;
  const Index n = moments.n;
  if (p >= n) {
    throw ConfigError("frahm_memmel: requires p/n < 1, got p=" + std::to_string(p) +
                      ", n=" + std::to_string(n));
  }
  const WeightVector traditional = traditional_gmv(moments.pinv);
  const double pd = static_cast<double>(p);

  double k = 0.0;
  if (p > 3) {
    const double gmv_var = 1.0 / moments.pinv.data().sum();
    const double naive_var = moments.covariance.data().sum() / (pd * pd);
    const double r_naive = (naive_var - gmv_var) / gmv_var;
    if (!(r_naive > 1e-14)) {
      throw DegenerateError("frahm_memmel: estimated relative loss of the naive portfolio is zero");
    }
    k = (pd - 3.0) / (static_cast<double>(n) - pd + 2.0) / r_naive;
    k = std::clamp(k, 0.0, 1.0);
  }
  return WeightVector((1.0 - k) * traditional.values() +
                      k * Vector::Constant(p, 1.0 / pd));
}

WeightVector frahm_memmel(const ReturnsMatrix& returns) {
  return frahm_memmel(sample_moments(returns));
}

}  // namespace gmvshrink
