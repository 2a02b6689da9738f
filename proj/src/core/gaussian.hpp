// Scalar Gaussian helpers: density, distribution, quantile, and the closed-form
// partial moments of a zero-mean normal over an interval. These are the building
// blocks for quantizer design and for the analytic Bussgang moments; everything
// is expressed through erfc so no numeric quadrature is involved.
#pragma once

namespace cqmimo::gauss {

// Standard normal density and distribution function.
double pdf(double x);
double cdf(double x);

// Inverse of cdf on (0, 1). Bisection followed by Newton polish; accurate to
// a few ulps, which is more than the level initialization it serves needs.
double quantile(double p);

// Partial moments of N(0, sigma^2) over the interval (a, b); the bounds may be
// +/- infinity. interval_prob integrates the density, interval_mean_mass
// integrates u * density, interval_power_mass integrates u^2 * density.
double interval_prob(double a, double b, double sigma);
double interval_mean_mass(double a, double b, double sigma);
double interval_power_mass(double a, double b, double sigma);

}  // namespace cqmimo::gauss
