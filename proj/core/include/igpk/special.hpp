#pragma once

#include <utility>

namespace igpk {

/// Standard normal cumulative distribution function.
double std_normal_cdf(double x);

/// Confluent hypergeometric function of the first kind, 1F1(a; b; x).
///
/// Ascending series for |x| <= 30 (through Kummer's transformation
/// 1F1(a;b;x) = e^x 1F1(b-a;b;-x) when x < 0, so that every term is of one
/// sign), and the large-argument asymptotic expansion for x < -30.
/// Throws DomainError when b is a nonpositive integer and NumericError if the
/// series has not converged after 1e5 terms.
double kummer_1f1(double a, double b, double x);

/// Sill-free surrogate of a unit-sill variogram value: rho * g / (1 - g).
double surrogate_transform(double base_gamma, double rho);
/// Inverse of surrogate_transform: (ghat / rho) / (1 + ghat / rho).
double surrogate_inverse(double surrogate_gamma, double rho);
/// Returns (surrogate value, base value recovered from it).
std::pair<double, double> surrogate_and_inverse(double base_gamma, double rho);

/// Variogram of Brownian motion smoothed by an isotropic normal kernel with
/// standard deviation r, computed by adaptive quadrature of the increment
/// variance rather than from a closed form. With W ~ N(0, 2 r^2 I_dim),
///
///     gamma(d) = c * (E|d + W| - E|W|),   c = sigma2 / 2 (dim 1), sigma2 (dim 2),
///
/// which is the scaling under which the closed forms in VariogramModel hold.
/// Used as a validation oracle; throws NumericError if quadrature does not
/// reach its tolerance.
double convolved_variogram_oracle(double sigma2, double r, int dim, double d);

}  // namespace igpk
