#include "gmvshrink/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmvshrink/error.hpp"

namespace gmvshrink {

Ecdf::Ecdf(std::span<const double> samples) : sorted_(samples.begin(), samples.end()) {
  if (sorted_.empty()) throw DataError("ecdf: empty sample");
  if (std::any_of(sorted_.begin(), sorted_.end(), [](double v) { return std::isnan(v); })) {
    throw DataError("ecdf: NaN in sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const noexcept {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

std::vector<std::pair<double, double>> Ecdf::steps() const {
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
    out.emplace_back(sorted_[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

double Ecdf::quantile(double q) const {
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("ecdf quantile: q must lie in (0, 1]");
  const double n = static_cast<double>(sorted_.size());
  auto k = static_cast<std::size_t>(std::ceil(q * n));
  k = std::clamp<std::size_t>(k, 1, sorted_.size());
  return sorted_[k - 1];
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double v : xs) acc += (v - m) * (v - m);
  return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace gmvshrink
