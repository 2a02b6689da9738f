// Black-box tests of the shared-library C interface; no core headers included.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "cqmimo/cqmimo.h"

namespace {

struct QuantizerHandle {
  cqm_quantizer* q = nullptr;
  ~QuantizerHandle() { cqm_quantizer_free(q); }
};

struct SystemHandle {
  cqm_system* sys = nullptr;
  ~SystemHandle() { cqm_system_free(sys); }
};

}  // namespace

TEST_CASE("library identity and status strings") {
  CHECK(std::string(cqm_version()) == "0.1.0");
  CHECK(std::string(cqm_status_str(CQM_OK)) == "ok");
  CHECK(!std::string(cqm_status_str(CQM_ERR_INVALID_ARGUMENT)).empty());
  CHECK(!std::string(cqm_status_str(CQM_ERR_NUMERICAL)).empty());
  CHECK(!std::string(cqm_status_str(CQM_ERR_ALLOC)).empty());
}

TEST_CASE("quantizer design round trip") {
  QuantizerHandle h;
  REQUIRE(cqm_quantizer_design(2, CQM_FAMILY_OPTIMAL, &h.q) == CQM_OK);
  REQUIRE(h.q != nullptr);

  int bits = 0;
  REQUIRE(cqm_quantizer_bits(h.q, &bits) == CQM_OK);
  CHECK(bits == 2);

  double levels[4] = {0};
  REQUIRE(cqm_quantizer_levels(h.q, levels, 4) == CQM_OK);
  CHECK(levels[0] == Catch::Approx(-1.5104).margin(5e-4));
  CHECK(levels[1] == Catch::Approx(-0.4528).margin(5e-4));
  CHECK(levels[2] == Catch::Approx(0.4528).margin(5e-4));
  CHECK(levels[3] == Catch::Approx(1.5104).margin(5e-4));

  double thresholds[3] = {0};
  REQUIRE(cqm_quantizer_thresholds(h.q, thresholds, 3) == CQM_OK);
  CHECK(thresholds[0] == Catch::Approx(-0.9816).margin(5e-4));
  CHECK(thresholds[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(thresholds[2] == Catch::Approx(0.9816).margin(5e-4));

  double mse = 0.0;
  REQUIRE(cqm_quantizer_mse(h.q, &mse) == CQM_OK);
  CHECK(mse == Catch::Approx(0.1174818478).margin(1e-8));
}

TEST_CASE("scalar quantization through the interface") {
  QuantizerHandle one;
  REQUIRE(cqm_quantizer_design(1, CQM_FAMILY_OPTIMAL, &one.q) == CQM_OK);
  double out = 0.0;
  REQUIRE(cqm_quantize(one.q, 0.3, 1.0, &out) == CQM_OK);
  CHECK(out == Catch::Approx(std::sqrt(2.0 / 3.14159265358979323846)).epsilon(1e-12));

  QuantizerHandle two;
  REQUIRE(cqm_quantizer_design(2, CQM_FAMILY_OPTIMAL, &two.q) == CQM_OK);
  REQUIRE(cqm_quantize(two.q, 1.0, 1.0, &out) == CQM_OK);
  CHECK(out == Catch::Approx(1.5104).margin(5e-4));
  REQUIRE(cqm_quantize(two.q, -0.2, 4.0, &out) == CQM_OK);
  CHECK(out == Catch::Approx(-0.4528).margin(5e-4));
}

TEST_CASE("linear-model statistics through the interface") {
  QuantizerHandle h;
  REQUIRE(cqm_quantizer_design(3, CQM_FAMILY_OPTIMAL, &h.q) == CQM_OK);
  double rho = 0.0, err_var = 0.0, q_mse = 0.0, input_power = 0.0;
  REQUIRE(cqm_bussgang(h.q, 0.0, 1.0, &rho, &err_var, &q_mse, &input_power) == CQM_OK);
  CHECK(q_mse == Catch::Approx(0.03576).margin(5e-5));
  CHECK(rho > 0.0);
  CHECK(rho <= 1.0);
  CHECK(err_var == Catch::Approx(rho * rho * q_mse).epsilon(1e-12));
  CHECK(input_power == Catch::Approx(1.0).epsilon(1e-12));

  // Any output pointer may be omitted.
  REQUIRE(cqm_bussgang(h.q, 0.0, 2.0, nullptr, nullptr, &q_mse, nullptr) == CQM_OK);
  CHECK(q_mse == Catch::Approx(2.0 * 0.03576).margin(1e-4));

  double q3 = 0.0;
  REQUIRE(cqm_matched_distortion(3, 2.0, &q3) == CQM_OK);
  CHECK(q3 == Catch::Approx(q_mse).epsilon(1e-12));
  double q0 = 1.0;
  REQUIRE(cqm_matched_distortion(0, 2.0, &q0) == CQM_OK);
  CHECK(q0 == 0.0);
}

TEST_CASE("interface error reporting") {
  CHECK(cqm_quantizer_design(9, CQM_FAMILY_OPTIMAL, nullptr) == CQM_ERR_INVALID_ARGUMENT);
  QuantizerHandle h;
  CHECK(cqm_quantizer_design(9, CQM_FAMILY_OPTIMAL, &h.q) == CQM_ERR_INVALID_ARGUMENT);
  CHECK(h.q == nullptr);
  CHECK(std::string(cqm_last_error()).length() > 0);

  REQUIRE(cqm_quantizer_design(3, CQM_FAMILY_OPTIMAL, &h.q) == CQM_OK);
  CHECK(std::string(cqm_last_error()).empty());  // success clears the message

  double small[2] = {0};
  CHECK(cqm_quantizer_levels(h.q, small, 2) == CQM_ERR_INVALID_ARGUMENT);
  CHECK(cqm_quantizer_levels(nullptr, small, 2) == CQM_ERR_INVALID_ARGUMENT);
  CHECK(cqm_quantize(h.q, 0.0, -1.0, small) == CQM_ERR_INVALID_ARGUMENT);
  CHECK(cqm_quantizer_bits(h.q, nullptr) == CQM_ERR_INVALID_ARGUMENT);

  cqm_quantizer_free(nullptr);  // must be a safe no-op
  cqm_system_free(nullptr);

  cqm_system* sys = nullptr;
  CHECK(cqm_system_create_uniform(0, 1, 1, 1, 8, 0.0, 1.0, &sys) ==
        CQM_ERR_INVALID_ARGUMENT);
  CHECK(sys == nullptr);
  const double beta[2] = {1.0, 1.0};
  const double bad_pdp[4] = {0.9, 0.2, 0.5, 0.5};  // first user's profile sums to 1.1
  CHECK(cqm_system_create(4, 2, 2, 1, 16, beta, bad_pdp, 1.0, &sys) ==
        CQM_ERR_INVALID_ARGUMENT);
  CHECK(sys == nullptr);
}

TEST_CASE("system description through the interface") {
  SystemHandle h;
  REQUIRE(cqm_system_create_uniform(16, 5, 8, 1, 64, -10.0, 1.0, &h.sys) == CQM_OK);
  double prx = 0.0;
  REQUIRE(cqm_system_received_power(h.sys, &prx) == CQM_OK);
  CHECK(prx == Catch::Approx(1.5).epsilon(1e-12));

  double violation = 1.0;
  REQUIRE(cqm_pilot_violation(5, 4, 2, &violation) == CQM_OK);
  CHECK(violation < 1e-9);

  double c[5] = {0};
  REQUIRE(cqm_estimation_variance(h.sys, 0.0, c, 5) == CQM_OK);
  for (double v : c) CHECK(v == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(cqm_estimation_variance(h.sys, 0.0, c, 4) == CQM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("closed-form rates through the interface") {
  const double beta[5] = {0.3, 0.3, 0.3, 0.3, 0.3};
  std::vector<double> pdp(5 * 8, 1.0 / 8.0);
  SystemHandle h;
  REQUIRE(cqm_system_create(100, 5, 8, 1, 64, beta, pdp.data(), 1.0, &h.sys) == CQM_OK);

  double c[5] = {0};
  REQUIRE(cqm_estimation_variance(h.sys, 0.0, c, 5) == CQM_OK);
  REQUIRE(c[0] == Catch::Approx(0.6).epsilon(1e-12));

  cqm_rate_report reports[5];
  REQUIRE(cqm_analytic_rate(h.sys, CQM_COMBINER_ZF, 0.0, c, reports, 5) == CQM_OK);
  CHECK(reports[0].rate == Catch::Approx(3.55).margin(0.005));
  const double denom = reports[0].gain_uncertainty + reports[0].interference +
                       reports[0].est_error + reports[0].noise + reports[0].quantization;
  CHECK(reports[0].rate ==
        Catch::Approx(std::log2(1.0 + reports[0].signal / denom)).epsilon(1e-12));

  // The resolution-indexed convenience wrapper must agree with manual composition.
  double q3 = 0.0, prx = 0.0;
  REQUIRE(cqm_system_received_power(h.sys, &prx) == CQM_OK);
  REQUIRE(cqm_matched_distortion(3, prx, &q3) == CQM_OK);
  double c3[5] = {0};
  REQUIRE(cqm_estimation_variance(h.sys, q3, c3, 5) == CQM_OK);
  cqm_rate_report manual[5], wrapped[5];
  REQUIRE(cqm_analytic_rate(h.sys, CQM_COMBINER_ZF, q3, c3, manual, 5) == CQM_OK);
  REQUIRE(cqm_analytic_rate_bits(h.sys, CQM_COMBINER_ZF, 3, wrapped, 5) == CQM_OK);
  CHECK(wrapped[0].rate == Catch::Approx(manual[0].rate).epsilon(1e-14));
  CHECK(wrapped[0].quantization == Catch::Approx(manual[0].quantization).epsilon(1e-14));

  double moment_rate = 0.0;
  REQUIRE(cqm_rate_from_moments(std::sqrt(0.9), 0.0, 1.0, &moment_rate) == CQM_OK);
  CHECK(moment_rate == Catch::Approx(std::log2(10.0)).epsilon(1e-12));
  CHECK(cqm_rate_from_moments(1.1, 0.0, 1.0, &moment_rate) == CQM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("near-far and operating-point search through the interface") {
  SystemHandle h;
  REQUIRE(cqm_system_create_uniform(100, 5, 8, 1, 64, -5.0, 1.0, &h.sys) == CQM_OK);
  double weak = 0.0;
  REQUIRE(cqm_near_far_rate(h.sys, CQM_COMBINER_ZF, 0, 10.0, &weak) == CQM_OK);
  CHECK(weak == Catch::Approx(2.959334546).margin(1e-6));

  SystemHandle op;
  REQUIRE(cqm_system_create_uniform(100, 5, 8, 1, 64, 0.0, 1.0, &op.sys) == CQM_OK);
  double snr = 0.0;
  REQUIRE(cqm_snr_for_rate(op.sys, CQM_COMBINER_ZF, 3.5, -30.0, 10.0, 0.001, &snr) == CQM_OK);
  CHECK(std::pow(10.0, snr / 10.0) == Catch::Approx(0.2916).margin(0.002));
  CHECK(cqm_snr_for_rate(op.sys, CQM_COMBINER_ZF, 3.5, 10.0, -30.0, 0.001, &snr) ==
        CQM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("simulation through the interface") {
  SystemHandle h;
  REQUIRE(cqm_system_create_uniform(8, 2, 4, 1, 32, 0.0, 1.0, &h.sys) == CQM_OK);

  cqm_sim_user a[2], b[2];
  REQUIRE(cqm_run_trials(h.sys, CQM_COMBINER_ZF, 3, 30, 42, a, 2) == CQM_OK);
  REQUIRE(cqm_run_trials(h.sys, CQM_COMBINER_ZF, 3, 30, 42, b, 2) == CQM_OK);
  CHECK(std::memcmp(a, b, sizeof(a)) == 0);
  for (const auto& u : a) {
    CHECK(u.rate > 0.0);
    CHECK(u.second_moment > 0.0);
    CHECK(u.corr_se > 0.0);
  }
  CHECK(cqm_run_trials(h.sys, CQM_COMBINER_ZF, 3, 30, 42, a, 1) ==
        CQM_ERR_INVALID_ARGUMENT);

  double mean = 0.0, se = 0.0;
  REQUIRE(cqm_mc_estimation_variance(h.sys, 0, 150, 7, &mean, &se) == CQM_OK);
  double c[2] = {0};
  REQUIRE(cqm_estimation_variance(h.sys, 0.0, c, 2) == CQM_OK);
  CHECK(std::abs(mean - c[0]) < 3.0 * se);
  REQUIRE(cqm_mc_estimation_variance(h.sys, 0, 150, 7, &mean, nullptr) == CQM_OK);
}
