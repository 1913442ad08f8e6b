#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gmvshrink {

/// Right-continuous empirical CDF F(x) = #{s_i <= x} / N.
class Ecdf {
 public:
  /// Throws DataError on empty or NaN input.
  explicit Ecdf(std::span<const double> samples);

  double operator()(double x) const noexcept;

  /// Distinct sample values with F evaluated at each, ascending.
  std::vector<std::pair<double, double>> steps() const;

  /// Smallest sample value v with F(v) >= q, for q in (0, 1].
  double quantile(double q) const;

  const std::vector<double>& sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

double mean(std::span<const double> xs);
/// Unbiased sample variance (divisor N - 1); 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

}  // namespace gmvshrink
