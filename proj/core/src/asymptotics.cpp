#include "gmvshrink/asymptotics.hpp"

#include <cmath>
#include <string>

#include "gmvshrink/error.hpp"

namespace gmvshrink::asymptotics {

namespace {

void require_finite_positive(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("concentration ratio must be positive and finite, got " + std::to_string(c));
  }
}

void require_r_b(double r_b) {
  if (!(r_b >= 0.0) || !std::isfinite(r_b)) {
    throw ConfigError("R_b must be finite and non-negative, got " + std::to_string(r_b));
  }
}

void require_below_one(double c, const char* what) {
  require_finite_positive(c);
  if (!(c < 1.0)) throw ConfigError(std::string(what) + ": requires 0 < c < 1");
}

void require_above_one(double c, const char* what) {
  require_finite_positive(c);
  if (!(c > 1.0)) throw ConfigError(std::string(what) + ": requires c > 1");
}

void require_not_one(double c, const char* what) {
  require_finite_positive(c);
  if (c == 1.0) throw ConfigError(std::string(what) + ": undefined at c = 1");
}

}  // namespace

double alpha_star_limit(const LimitInputs& in) {
  require_below_one(in.c, "alpha_star_limit");
  require_r_b(in.r_b);
  const double c = in.c;
  return (1.0 - c) * in.r_b / (c + (1.0 - c) * in.r_b);
}

double alpha_plus_limit(const LimitInputs& in) {
  require_above_one(in.c, "alpha_plus_limit");
  require_r_b(in.r_b);
  const double c = in.c;
  return (c - 1.0) * in.r_b / ((c - 1.0) * (c - 1.0) + c + (c - 1.0) * in.r_b);
}

double rel_loss_traditional(double c) {
  require_below_one(c, "rel_loss_traditional");
  return c / (1.0 - c);
}

double rel_loss_traditional_super(double c) {
  require_above_one(c, "rel_loss_traditional_super");
  return (c * c - c + 1.0) / (c - 1.0);
}

double rel_loss_gse_limit(const LimitInputs& in) {
  require_not_one(in.c, "rel_loss_gse_limit");
  if (in.c < 1.0) {
    const double a = alpha_star_limit(in);
    return a * a * rel_loss_traditional(in.c) + (1.0 - a) * (1.0 - a) * in.r_b;
  }
  const double a = alpha_plus_limit(in);
  return a * a * rel_loss_traditional_super(in.c) + (1.0 - a) * (1.0 - a) * in.r_b;
}

double variance_ratio_traditional(double c) {
  require_not_one(c, "variance_ratio_traditional");
  return c < 1.0 ? 1.0 / (1.0 - c) : c * c / (c - 1.0);
}

std::complex<double> stieltjes_x(std::complex<double> z, double c) {
  require_finite_positive(c);
  using C = std::complex<double>;
  const C b = 1.0 - c + z;
  const C disc = b * b - 4.0 * z;
  const bool on_real_axis = z.imag() == 0.0;

  if (on_real_axis) {
    const double d = disc.real();
    if (d < 0.0) {
      throw DataError("stieltjes_x: real z = " + std::to_string(z.real()) +
                      " lies on the branch cut (negative discriminant)");
    }
    // x_{1,2} = (b +/- sqrt(d)) / 2 with x_1 x_2 = z; take the large-magnitude
    // root directly and recover the other from the product.
    const double br = b.real();
    const double sq = std::sqrt(d);
    const double big = 0.5 * (br + std::copysign(sq, br));
    if (big == 0.0) return C(0.0, 0.0);
    const double small = z.real() / big;
    // "+" root: (b + sqrt d)/2. It is the large one when b >= 0.
    return C(br >= 0.0 ? big : small, 0.0);
  }

  C sq = std::sqrt(disc);
  // Align sq with b so that b + sq does not cancel.
  if ((std::conj(b) * sq).real() < 0.0) sq = -sq;
  const C big = 0.5 * (b + sq);
  const C small = (std::abs(big) > 0.0) ? z / big : 0.5 * (b - sq);
  const C candidate = big.imag() > 0.0 ? big : small;
  if (z.imag() > 0.0) return candidate;
  // Lower half plane: conjugate symmetry x(conj z) = conj x(z).
  return std::conj(stieltjes_x(std::conj(z), c));
}

std::complex<double> stieltjes_residual(std::complex<double> x, std::complex<double> z,
                                        double c) {
  return (1.0 - x) / x - c / (x - z);
}

double theta(double z, double c) {
  const double x = stieltjes_x({z, 0.0}, c).real();
  return z / (x - z);
}

ThetaDerivatives theta_derivatives(double c) {
  require_above_one(c, "theta_derivatives");
  const double cm1 = c - 1.0;
  return {-cm1 / c, 1.0 / (c * cm1), 2.0 / (cm1 * cm1 * cm1)};
}

}  // namespace gmvshrink::asymptotics
