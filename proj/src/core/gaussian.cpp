#include "core/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cqmimo::gauss {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
constexpr double kInvSqrt2 = 0.7071067811865475244;    // 1/sqrt(2)
}  // namespace

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: p must lie in (0, 1)");
  double lo = -12.0, hi = 12.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {
    const double d = pdf(x);
    if (d <= 0.0) break;
    x -= (cdf(x) - p) / d;
  }
  return x;
}

double interval_prob(double a, double b, double sigma) {
  const double ca = std::isinf(a) ? (a < 0 ? 0.0 : 1.0) : cdf(a / sigma);
  const double cb = std::isinf(b) ? (b < 0 ? 0.0 : 1.0) : cdf(b / sigma);
  return cb - ca;
}

double interval_mean_mass(double a, double b, double sigma) {
  const double fa = std::isinf(a) ? 0.0 : pdf(a / sigma);
  const double fb = std::isinf(b) ? 0.0 : pdf(b / sigma);
  return sigma * (fa - fb);
}

double interval_power_mass(double a, double b, double sigma) {
  const double ta = std::isinf(a) ? 0.0 : (a / sigma) * pdf(a / sigma);
  const double tb = std::isinf(b) ? 0.0 : (b / sigma) * pdf(b / sigma);
  return sigma * sigma * (interval_prob(a, b, sigma) + ta - tb);
}

}  // namespace cqmimo::gauss
