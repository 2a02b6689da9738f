#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "core/gaussian.hpp"

namespace g = cqmimo::gauss;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

TEST_CASE("standard normal density") {
  CHECK(g::pdf(0.0) == Catch::Approx(kInvSqrt2Pi).epsilon(1e-14));
  CHECK(g::pdf(1.0) == Catch::Approx(0.24197072451914337).epsilon(1e-14));
  CHECK(g::pdf(-2.5) == Catch::Approx(g::pdf(2.5)).epsilon(1e-14));
}

TEST_CASE("standard normal distribution function") {
  CHECK(g::cdf(0.0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(g::cdf(1.0) == Catch::Approx(0.8413447460685429).epsilon(1e-13));
  CHECK(g::cdf(1.96) == Catch::Approx(0.9750021048517795).epsilon(1e-13));
  CHECK(g::cdf(-1.0) == Catch::Approx(1.0 - g::cdf(1.0)).epsilon(1e-13));
  CHECK(g::cdf(-40.0) == 0.0);
  CHECK(g::cdf(40.0) == 1.0);
}

TEST_CASE("quantile inverts the distribution function") {
  for (double p : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-6}) {
    const double x = g::quantile(p);
    CHECK(g::cdf(x) == Catch::Approx(p).epsilon(1e-11).margin(1e-13));
  }
  CHECK(g::quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
  CHECK(g::quantile(0.975) == Catch::Approx(1.9599639845400545).epsilon(1e-10));
  CHECK_THROWS_AS(g::quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(g::quantile(1.0), std::invalid_argument);
  CHECK_THROWS_AS(g::quantile(-0.3), std::invalid_argument);
}

TEST_CASE("interval probability mass") {
  CHECK(g::interval_prob(-kInf, kInf, 1.0) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(g::interval_prob(0.0, kInf, 1.0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(g::interval_prob(-1.0, 1.0, 1.0) == Catch::Approx(0.6826894921370859).epsilon(1e-13));
  // Sigma scaling: mass over (a, b) at sigma equals mass over (a/s, b/s) at 1.
  CHECK(g::interval_prob(-0.5, 2.0, 2.0) ==
        Catch::Approx(g::interval_prob(-0.25, 1.0, 1.0)).epsilon(1e-13));
}

TEST_CASE("interval first-moment mass") {
  // E[X 1{X in (0, inf)}] = sigma * phi(0).
  CHECK(g::interval_mean_mass(0.0, kInf, 1.0) == Catch::Approx(kInvSqrt2Pi).epsilon(1e-13));
  CHECK(g::interval_mean_mass(0.0, kInf, 3.0) ==
        Catch::Approx(3.0 * kInvSqrt2Pi).epsilon(1e-13));
  CHECK(g::interval_mean_mass(-kInf, kInf, 1.0) == Catch::Approx(0.0).margin(1e-14));
  // Centroid of the right tail is the inverse Mills ratio phi(t)/(1 - Phi(t)).
  const double t = 1.3;
  const double centroid = g::interval_mean_mass(t, kInf, 1.0) / g::interval_prob(t, kInf, 1.0);
  CHECK(centroid == Catch::Approx(g::pdf(t) / (1.0 - g::cdf(t))).epsilon(1e-12));
}

TEST_CASE("interval second-moment mass") {
  CHECK(g::interval_power_mass(-kInf, kInf, 1.0) == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(g::interval_power_mass(-kInf, kInf, 2.0) == Catch::Approx(4.0).epsilon(1e-13));
  CHECK(g::interval_power_mass(0.0, kInf, 1.0) == Catch::Approx(0.5).epsilon(1e-13));
  // Var over (-1, 1) for a unit normal: P - 2*phi(1) (integration by parts).
  CHECK(g::interval_power_mass(-1.0, 1.0, 1.0) ==
        Catch::Approx(0.6826894921370859 - 2.0 * g::pdf(1.0)).epsilon(1e-12));
}

TEST_CASE("moment masses partition across adjacent intervals") {
  const double sigma = 1.7;
  const double cuts[] = {-kInf, -0.9, 0.3, 2.1, kInf};
  double p = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    p += g::interval_prob(cuts[i], cuts[i + 1], sigma);
    m1 += g::interval_mean_mass(cuts[i], cuts[i + 1], sigma);
    m2 += g::interval_power_mass(cuts[i], cuts[i + 1], sigma);
  }
  CHECK(p == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(m1 == Catch::Approx(0.0).margin(1e-14));
  CHECK(m2 == Catch::Approx(sigma * sigma).epsilon(1e-13));
}
