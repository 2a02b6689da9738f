// Symbol-level end-to-end simulation: draw a multipath channel, send pilots
// through the AGC'd quantizer, estimate the channel, send Gaussian data, combine
// with weights built from the estimates, and accumulate the first and second
// moments of the combiner output against the sent symbols. Rates come out of
// the same moment formula the analytic path uses, so the two are directly
// comparable. Everything is deterministic in (cfg, seed): each trial attempt
// derives its own substreams, and accumulation is in fixed trial order.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "core/airlink.hpp"
#include "core/matrix.hpp"
#include "core/rate.hpp"

namespace cqmimo {

// Zero-forcing weight construction found the estimated channel matrix at some
// subcarrier numerically rank-deficient (degenerate draw).
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimUser {
  cplx corr;                    // empirical E[conj(xhat) * x]
  double second_moment = 0.0;   // empirical E[|xhat|^2]
  double corr_se = 0.0;         // standard error of corr over trials (components combined)
  double second_moment_se = 0.0;
  double rate = 0.0;            // bpcu, through general_rate_from_moments only
};

struct SimResult {
  std::vector<SimUser> users;
  int n_trials = 0;
  int n_subcarriers = 0;
  int rejected_trials = 0;
};

// Full pilot + data pipeline; bits = 0 runs unquantized. Rejected trials are
// resampled with fresh derived streams; more than 0.1% rejections aborts.
SimResult run_trials(const SystemConfig& cfg, CombinerKind kind, int bits, int n_trials,
                     std::uint64_t seed);

// Same pipeline with the estimates replaced by the true frequency responses
// (no pilot phase); isolates the combining stage for oracle checks.
SimResult run_trials_perfect_csi(const SystemConfig& cfg, CombinerKind kind, int bits,
                                 int n_trials, std::uint64_t seed);

// Combining weights for one subcarrier's M x K estimate matrix, each column
// normalized to unit norm. MaximumRatio: the normalized estimate columns (an
// all-zero column yields an all-zero weight). ZeroForcing: columns of
// est * (est^H est)^{-1}, normalized; throws RankDeficientError if the
// Cholesky factorization of est^H est collapses.
CMat combiner_weights(const CMat& est_slice, CombinerKind kind);

struct CaveatReport {
  SimResult sim;
  double empirical_rate = 0.0;  // user 0
  double analytic_rate = 0.0;   // large-delay-spread closed form, same config
};

// Runs the maximum-ratio pipeline and pairs the empirical rate of user 0 with
// the closed-form prediction. At L = 1 with coarse quantization and a dominant
// user the closed form is knowingly optimistic (the distortion no longer
// averages out across delay taps); the gap closes as L grows.
CaveatReport flat_channel_caveat(const SystemConfig& cfg, int bits, int n_trials,
                                 std::uint64_t seed);

// Cross-moments between the non-signal terms of the combiner-output expansion
// for user 0: 1 = self-gain fluctuation, 2 = cross-user interference,
// 3 = estimation-error leakage, 4 = thermal noise, 5 = quantization distortion.
struct TermCross {
  int first = 0;
  int second = 0;
  cplx mean;        // empirical E[T_first * conj(T_second)]
  double se = 0.0;  // standard error over trials (components combined)
};

struct InstrumentedResult {
  SimResult sim;
  std::vector<TermCross> cross;          // all 10 unordered pairs
  double quant_term_power = 0.0;         // empirical E|T5|^2, approaches q_mse for large L
  double quant_term_power_se = 0.0;
  double reconstruction_residual = 0.0;  // max |xhat - sum of expansion terms| observed
};

// Two-pass instrumented run (the first pass estimates the mean combiner gain
// that centers the self-gain term). bits must be >= 1.
InstrumentedResult run_trials_instrumented(const SystemConfig& cfg, CombinerKind kind, int bits,
                                           int n_trials, std::uint64_t seed);

struct EstVarMc {
  double mean = 0.0;        // empirical per-subcarrier E|est|^2 for user 0
  double se = 0.0;          // standard error over realizations
  cplx err_cross;           // empirical E[est * conj(est - truth)], orthogonality check
  double err_cross_se = 0.0;
  int n_samples = 0;        // independent (antenna, realization) pairs
};

// Pilot-phase-only campaign estimating the frequency-domain estimate variance,
// for cross-validation against the closed-form c_k.
EstVarMc mc_estimation_variance(const SystemConfig& cfg, int bits, int n_realizations,
                                std::uint64_t seed);

}  // namespace cqmimo
