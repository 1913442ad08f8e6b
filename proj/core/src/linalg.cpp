#include "gmvshrink/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gmvshrink/error.hpp"

namespace gmvshrink {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw DataError(std::string(what) + ": matrix contains non-finite entries");
  }
}

// Inverts the eligible eigenvalues of a symmetric eigendecomposition and
// reassembles V diag(f(lambda)) V^T.
Matrix spectral_pinv(const Eigen::SelfAdjointEigenSolver<Matrix>& eig, double rel_tol,
                     std::optional<Index> max_rank) {
  const Vector& lambda = eig.eigenvalues();
  const Matrix& v = eig.eigenvectors();
  const Index p = lambda.size();

  const double scale = lambda.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(p);
  if (scale > 0.0) {
    // Eigen returns eigenvalues in increasing order; rank by magnitude.
    std::vector<Index> order(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });
    const Index cap = max_rank ? std::clamp<Index>(*max_rank, 0, p) : p;
    for (Index k = 0; k < cap; ++k) {
      const Index i = order[static_cast<std::size_t>(k)];
      if (std::abs(lambda(i)) > rel_tol * scale) inv(i) = 1.0 / lambda(i);
    }
  }
  Matrix out = v * inv.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

ReturnsMatrix::ReturnsMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) throw DataError("returns: need at least one asset");
  if (data_.cols() < 2) {
    throw DataError("returns: need at least two observations, got " +
                    std::to_string(data_.cols()));
  }
  require_finite(data_, "returns");
}

SymmetricMatrix::SymmetricMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols()) {
    throw DataError("symmetric matrix: expected square matrix, got " +
                    std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()));
  }
  require_finite(data_, "symmetric matrix");
  const double tol = 1e-12 * max_abs(data_);
  if (max_abs(data_ - data_.transpose()) > tol) {
    throw DataError("symmetric matrix: input is not symmetric");
  }
}

SymmetricMatrix SymmetricMatrix::symmetrized(const Matrix& data) {
  if (data.rows() != data.cols()) throw DataError("symmetrized: expected square matrix");
  return SymmetricMatrix(0.5 * (data + data.transpose()), Unchecked{});
}

CovarianceModel::CovarianceModel(Vector eigenvalues, Matrix eigenvectors)
    : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
  const Index p = eigenvalues_.size();
  if (p < 1) throw ConfigError("covariance model: empty spectrum");
  if (eigenvectors_.rows() != p || eigenvectors_.cols() != p) {
    throw DataError("covariance model: spectrum has length " + std::to_string(p) +
                    " but eigenvector matrix is " + std::to_string(eigenvectors_.rows()) +
                    "x" + std::to_string(eigenvectors_.cols()));
  }
  if (!eigenvalues_.allFinite() || (eigenvalues_.array() <= 0.0).any()) {
    throw ConfigError("covariance model: eigenvalues must be finite and positive");
  }
  require_finite(eigenvectors_, "covariance model");
  const Matrix gram = eigenvectors_.transpose() * eigenvectors_;
  if (max_abs(gram - Matrix::Identity(p, p)) > 1e-10) {
    throw DataError("covariance model: eigenvectors are not orthonormal");
  }

  const Matrix& v = eigenvectors_;
  auto assemble = [&](const Vector& d) {
    Matrix m = v * d.asDiagonal() * v.transpose();
    return Matrix(0.5 * (m + m.transpose()));
  };
  sigma_ = assemble(eigenvalues_);
  sigma_inv_ = assemble(eigenvalues_.cwiseInverse());
  sigma_sqrt_ = assemble(eigenvalues_.cwiseSqrt());
  sigma_inv_sqrt_ = assemble(eigenvalues_.cwiseSqrt().cwiseInverse());

  const Vector inv_one = sigma_inv_ * Vector::Ones(p);
  const double denom = inv_one.sum();
  gmv_variance_ = 1.0 / denom;
  gmv_weights_ = inv_one / denom;
}

double CovarianceModel::variance(const Vector& w) const {
  if (w.size() != dim()) {
    throw DataError("portfolio has " + std::to_string(w.size()) + " weights, covariance is " +
                    std::to_string(dim()) + "-dimensional");
  }
  const Vector proj = eigenvalues_.cwiseSqrt().asDiagonal() * (eigenvectors_.transpose() * w);
  return proj.squaredNorm();
}

SymmetricMatrix sample_covariance(const ReturnsMatrix& returns) {
  const Matrix& y = returns.data();
  const double n = static_cast<double>(y.cols());
  const Vector mean = y.rowwise().mean();
  const Matrix centered = y.colwise() - mean;
  Matrix s = Matrix::Zero(y.rows(), y.rows());
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / n);
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SymmetricMatrix::symmetrized(s);
}

double default_pinv_tolerance(Index dim) {
  return std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<Index>(dim, 1));
}

SymmetricMatrix pseudo_inverse(const SymmetricMatrix& m, std::optional<double> rel_tol,
                               std::optional<Index> max_rank) {
  const double tol = rel_tol.value_or(default_pinv_tolerance(m.dim()));
  if (!(tol >= 0.0)) throw ConfigError("pseudo_inverse: rel_tol must be non-negative");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.data());
  if (eig.info() != Eigen::Success) {
    throw DegenerateError("pseudo_inverse: eigendecomposition did not converge");
  }
  return SymmetricMatrix::symmetrized(spectral_pinv(eig, tol, max_rank));
}

SymmetricMatrix oracle_generalized_inverse(const CovarianceModel& sigma, const Matrix& x,
                                           std::optional<Index> max_rank) {
  if (x.rows() != sigma.dim()) {
    throw DataError("oracle_generalized_inverse: X has " + std::to_string(x.rows()) +
                    " rows, covariance is " + std::to_string(sigma.dim()) + "-dimensional");
  }
  if (x.cols() < 1) throw DataError("oracle_generalized_inverse: X has no columns");
  require_finite(x, "oracle_generalized_inverse");

  // (X X^T / n)^+ = n U diag(1/s^2) U^T from the thin SVD of X; this avoids
  // squaring the condition number before deciding the numerical rank.
  const double n = static_cast<double>(x.cols());
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const Index k = s.size();
  const double tol = std::numeric_limits<double>::epsilon() *
                     static_cast<double>(std::max(x.rows(), x.cols())) * (k > 0 ? s(0) : 0.0);
  const Index cap = max_rank ? std::clamp<Index>(*max_rank, 0, k) : k;
  Vector inv = Vector::Zero(k);
  for (Index i = 0; i < cap; ++i) {
    if (s(i) > tol) inv(i) = n / (s(i) * s(i));
  }
  const Matrix& u = svd.matrixU();
  const Matrix core = u * inv.asDiagonal() * u.transpose();
  const Matrix& w = sigma.inverse_sqrt();
  return SymmetricMatrix::symmetrized(w * core * w);
}

Matrix haar_orthogonal(Index p, Rng& rng) {
  if (p < 1) throw ConfigError("haar_orthogonal: dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(p, p);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

CovarianceModel build_covariance(const Vector& spectrum, const Matrix& v) {
  return CovarianceModel(spectrum, v);
}

}  // namespace gmvshrink
