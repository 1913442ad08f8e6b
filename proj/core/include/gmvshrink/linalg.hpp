#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "gmvshrink/random.hpp"

namespace gmvshrink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// p x n panel of asset returns; column t is the cross-section observed at
/// time t. Entries must be finite and there must be at least two columns.
class ReturnsMatrix {
 public:
  explicit ReturnsMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Index assets() const noexcept { return data_.rows(); }
  Index observations() const noexcept { return data_.cols(); }
  double concentration() const noexcept {
    return static_cast<double>(assets()) / static_cast<double>(observations());
  }

 private:
  Matrix data_;
};

/// Real symmetric matrix. Construction checks |M_ij - M_ji| <= 1e-12 max|M|.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(Matrix data);

  /// Replaces M by (M + M^T) / 2 without checking; for results of products
  /// that are symmetric up to rounding.
  static SymmetricMatrix symmetrized(const Matrix& data);

  const Matrix& data() const noexcept { return data_; }
  Index dim() const noexcept { return data_.rows(); }

 private:
  struct Unchecked {};
  SymmetricMatrix(Matrix data, Unchecked) : data_(std::move(data)) {}
  Matrix data_;
};

/// Population covariance in spectral form, Sigma = V diag(lambda) V^T.
///
/// The dense matrix, its inverse and both square roots are formed once at
/// construction so the hot loops of the simulation engine only do products.
class CovarianceModel {
 public:
  CovarianceModel(Vector eigenvalues, Matrix eigenvectors);

  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  Index dim() const noexcept { return eigenvalues_.size(); }

  const Matrix& matrix() const noexcept { return sigma_; }
  const Matrix& inverse() const noexcept { return sigma_inv_; }
  const Matrix& sqrt() const noexcept { return sigma_sqrt_; }
  const Matrix& inverse_sqrt() const noexcept { return sigma_inv_sqrt_; }

  /// Population GMV weights Sigma^{-1} 1 / (1^T Sigma^{-1} 1).
  const Vector& gmv_weights() const noexcept { return gmv_weights_; }
  /// Population GMV variance 1 / (1^T Sigma^{-1} 1).
  double gmv_variance() const noexcept { return gmv_variance_; }

  /// Variance w^T Sigma w of an arbitrary portfolio.
  double variance(const Vector& w) const;

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Matrix sigma_;
  Matrix sigma_inv_;
  Matrix sigma_sqrt_;
  Matrix sigma_inv_sqrt_;
  Vector gmv_weights_;
  double gmv_variance_ = 0.0;
};

/// Centered sample covariance (1/n) Y (I - 11^T/n) Y^T.
///
/// The divisor is n, not n - 1. The shrinkage formulas are written for this
/// normalization; swapping in an unbiased estimator shifts every finite-sample
/// relative-loss estimate.
SymmetricMatrix sample_covariance(const ReturnsMatrix& returns);

/// Default relative eigenvalue cutoff for pseudo_inverse: machine epsilon x p.
double default_pinv_tolerance(Index dim);

/// Moore-Penrose pseudo-inverse through the symmetric eigendecomposition.
///
/// Eigenvalues lambda > rel_tol * lambda_max are inverted, the rest are set to
/// zero. When max_rank is given, only the max_rank largest eigenvalues are
/// eligible; a sample covariance built from n observations has rank at most
/// n - 1, and capping the rank keeps rounding-level eigenvalues of the null
/// space from being inverted.
SymmetricMatrix pseudo_inverse(const SymmetricMatrix& m,
                               std::optional<double> rel_tol = std::nullopt,
                               std::optional<Index> max_rank = std::nullopt);

/// Oracle reflexive generalized inverse Sigma^{-1/2} (X X^T / n)^+ Sigma^{-1/2}
/// of S = (1/n) Sigma^{1/2} X X^T Sigma^{1/2}.
///
/// Satisfies S* S S* = S* and S S* S = S but, unless Sigma is proportional to
/// the identity, not the two symmetry conditions of the Moore-Penrose inverse.
/// Pass X already centered to obtain a generalized inverse of the centered
/// sample covariance.
/// max_rank plays the same role as in pseudo_inverse (centered X has rank at
/// most n - 1).
SymmetricMatrix oracle_generalized_inverse(const CovarianceModel& sigma, const Matrix& x,
                                           std::optional<Index> max_rank = std::nullopt);

/// Haar-distributed p x p orthogonal matrix: QR of a standard Gaussian matrix
/// with the columns of Q multiplied by sign(diag(R)).
Matrix haar_orthogonal(Index p, Rng& rng);

/// Sigma = V diag(spectrum) V^T. V must be orthogonal to 1e-10 and every
/// spectrum entry positive.
CovarianceModel build_covariance(const Vector& spectrum, const Matrix& v);

/// Largest |A_ij|.
double max_abs(const Matrix& a);

}  // namespace gmvshrink
