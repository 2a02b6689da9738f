// Closed-form achievable rates for maximum-ratio and zero-forcing combining in
// the large-delay-spread limit, with the per-user SINR decomposed into named
// power terms, plus the general moment form shared with the simulator and the
// near-far scenario where one strong user inflates the quantization floor.
#pragma once

#include <complex>
#include <vector>

#include "core/airlink.hpp"

namespace cqmimo {

enum class CombinerKind { MaximumRatio, ZeroForcing };

// Array gain G and interference constant I: (M, 1) for maximum-ratio and
// (M - K, 0) for zero-forcing.
struct SinrTerms {
  double signal = 0.0;            // beta_k P_k c_k G
  double gain_uncertainty = 0.0;  // beta_k P_k c_k I, self term from the random combiner gain
  double interference = 0.0;      // sum_{k' != k} beta_k' P_k' c_k' I
  double est_error = 0.0;         // sum_k' beta_k' P_k' (1 - c_k'), estimation-error leakage
  double noise = 0.0;             // N_0
  double quantization = 0.0;      // Q
  double denominator() const {
    return gain_uncertainty + interference + est_error + noise + quantization;
  }
};

struct RateReport {
  double rate = 0.0;  // bpcu
  SinrTerms terms;
};

// Per-user large-L rate log2(1 + signal / denominator) with the denominator
// assembled exactly from the five non-signal terms.
std::vector<RateReport> analytic_rate(const SystemConfig& cfg, CombinerKind kind, double q_mse,
                                      const std::vector<double>& c);

// R = log2(1 + |corr|^2 / (second_moment - |corr|^2)); the single code path for
// turning first/second moments of a linear estimate into a rate.
double general_rate_from_moments(cplx corr, double second_moment);

struct SweepPoint {
  double snr_db = 0.0;
  int bits = 0;  // 0 means unquantized
  double rate = 0.0;
};

// For each (bits, snr): equal per-user power at snr_db, distortion from the
// matched-AGC Bussgang decomposition of a minimum-MSE quantizer, estimation
// variance from the closed form, then analytic_rate. Rate of user 0 (all users
// are symmetric here).
std::vector<SweepPoint> rate_sweep(const SystemConfig& cfg_template, CombinerKind kind,
                                   const std::vector<int>& bits_list,
                                   const std::vector<double>& snr_db_list);

// Weak-user rate when user 0 transmits strong_extra_db above the common level.
// The distortion Q is re-derived at the inflated received power (matched AGC),
// and every residual estimation-error term is evaluated at the weak user's
// estimation variance — the conservative floor the reference degradation
// levels correspond to. bits = 0 means unquantized.
RateReport near_far_rate(const SystemConfig& cfg, CombinerKind kind, int bits,
                         double strong_extra_db);

// SNR (dB) at which the unquantized rate of the given combiner reaches
// target_bpcu, found by bisection to tol_bpcu.
double find_snr_for_rate(const SystemConfig& cfg_template, CombinerKind kind, double target_bpcu,
                         double lo_db, double hi_db, double tol_bpcu = 0.01);

}  // namespace cqmimo
