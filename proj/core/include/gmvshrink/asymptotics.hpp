#pragma once

#include <complex>

namespace gmvshrink::asymptotics {

/// Concentration ratio c = lim p/n and limiting relative loss R_b of the
/// target. c = 1 is outside every limit formula's domain.
struct LimitInputs {
  double c = 0.5;
  double r_b = 0.0;
};

/// Limit of the oracle intensity for c < 1: (1-c) R_b / (c + (1-c) R_b).
double alpha_star_limit(const LimitInputs& in);

/// Limit of the oracle intensity for c > 1:
/// (c-1) R_b / ((c-1)^2 + c + (c-1) R_b).
double alpha_plus_limit(const LimitInputs& in);

/// Relative loss of the traditional estimator, c < 1: c / (1 - c).
double rel_loss_traditional(double c);

/// Relative loss of the oracle traditional estimator, c > 1:
/// (c^2 - c + 1) / (c - 1). Minimized at c = 2 with value 3.
double rel_loss_traditional_super(double c);

/// Relative loss of the oracle optimal shrinkage estimator on either side of
/// c = 1: alpha^2 R_trad(c) + (1 - alpha)^2 R_b.
double rel_loss_gse_limit(const LimitInputs& in);

/// Ratio of the traditional estimator's out-of-sample variance to the GMV
/// variance: 1/(1-c) for c < 1, c^2/(c-1) for c > 1.
///
/// Note this is not 1 + rel_loss_traditional_super for c > 1; at c = 2 the
/// ratio is 4 while the relative loss is 3.
double variance_ratio_traditional(double c);

/// Deterministic equivalent x(z) = (1 - c + z + sqrt((1 - c + z)^2 - 4z)) / 2,
/// the root of (1 - x)/x = c/(x - z).
///
/// For Im z > 0 the root with positive imaginary part is returned. For real z
/// the principal real square root is used, matching the right limit z -> 0+;
/// a negative discriminant on the real axis is a branch-cut error. Roots are
/// formed without cancellation so x(z) stays accurate as z -> 0 for c > 1.
std::complex<double> stieltjes_x(std::complex<double> z, double c);

/// Residual (1 - x)/x - c/(x - z) of the defining equation.
std::complex<double> stieltjes_residual(std::complex<double> x, std::complex<double> z, double c);

/// theta(z) = z / (x(z) - z) on the real axis.
double theta(double z, double c);

struct ThetaDerivatives {
  double theta0;
  double theta1;
  double theta2;
};

/// Closed-form theta(0), theta'(0), theta''(0) for c > 1:
/// (-(c-1)/c, 1/(c(c-1)), 2/(c-1)^3).
ThetaDerivatives theta_derivatives(double c);

}  // namespace gmvshrink::asymptotics
