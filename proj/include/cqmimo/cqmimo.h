/* cqmimo — coarsely quantized massive-MIMO uplink analysis.
 *
 * C API for the shared library. All functions return a cqm_status unless
 * documented otherwise; on failure cqm_last_error() carries a thread-local
 * message describing what went wrong. Handles are opaque and must be released
 * with the matching *_free call.
 */
#ifndef CQMIMO_CQMIMO_H
#define CQMIMO_CQMIMO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CQM_BUILD)
#define CQM_API __declspec(dllexport)
#else
#define CQM_API __declspec(dllimport)
#endif
#else
#define CQM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cqm_status {
  CQM_OK = 0,
  CQM_ERR_INVALID_ARGUMENT = 1,
  CQM_ERR_NUMERICAL = 2,
  CQM_ERR_ALLOC = 3
} cqm_status;

typedef enum cqm_family {
  CQM_FAMILY_OPTIMAL = 0, /* Lloyd-Max, Gaussian-matched */
  CQM_FAMILY_UNIFORM = 1  /* best uniform step for a unit Gaussian */
} cqm_family;

typedef enum cqm_combiner {
  CQM_COMBINER_MR = 0, /* maximum ratio */
  CQM_COMBINER_ZF = 1  /* zero forcing */
} cqm_combiner;

typedef struct cqm_quantizer cqm_quantizer; /* opaque */
typedef struct cqm_system cqm_system;       /* opaque */

/* Library version as "major.minor.patch". */
CQM_API const char* cqm_version(void);

/* Human-readable name for a status code. */
CQM_API const char* cqm_status_str(cqm_status status);

/* Message for the most recent failure on this thread ("" if none). */
CQM_API const char* cqm_last_error(void);

/* ---- Quantizer design and Bussgang statistics ---------------------------- */

/* Design a scalar quantizer for a unit-variance Gaussian; 1 <= bits <= 8. */
CQM_API cqm_status cqm_quantizer_design(int bits, cqm_family family,
                                        cqm_quantizer** out);
CQM_API void cqm_quantizer_free(cqm_quantizer* q);

CQM_API cqm_status cqm_quantizer_bits(const cqm_quantizer* q, int* out);
/* Copies the 2^bits reconstruction levels (ascending). */
CQM_API cqm_status cqm_quantizer_levels(const cqm_quantizer* q, double* out,
                                        size_t capacity);
/* Copies the 2^bits - 1 decision thresholds (ascending). */
CQM_API cqm_status cqm_quantizer_thresholds(const cqm_quantizer* q, double* out,
                                            size_t capacity);
/* Mean-squared error of the design against a unit Gaussian. */
CQM_API cqm_status cqm_quantizer_mse(const cqm_quantizer* q, double* out);

/* Quantize one real sample observed under the given linear gain. */
CQM_API cqm_status cqm_quantize(const cqm_quantizer* q, double sample, double gain,
                                double* out);

/* Linear-plus-distortion statistics for a complex Gaussian input of power
 * rx_power under the automatic gain control setting agc_gain_db.
 * Outputs (any pointer may be NULL): rho — linear gain of the equivalent
 * model; err_var — distortion power; q_mse — distortion referred to the
 * quantizer input, err_var / rho^2; input_power — power at the quantizer. */
CQM_API cqm_status cqm_bussgang(const cqm_quantizer* q, double agc_gain_db,
                                double rx_power, double* rho, double* err_var,
                                double* q_mse, double* input_power);

/* Input-referred distortion for a Lloyd-Max design at its matched gain;
 * bits = 0 means no quantization (returns 0). */
CQM_API cqm_status cqm_matched_distortion(int bits, double rx_power, double* out);

/* ---- System description --------------------------------------------------- */

/* Equal-power uplink: every user at beta*p = noise_power * 10^(snr_db/10),
 * uniform power-delay profile of l_taps taps. */
CQM_API cqm_status cqm_system_create_uniform(int m_antennas, int k_users, int l_taps,
                                             int pilot_excess, int n_data,
                                             double snr_db, double noise_power,
                                             cqm_system** out);

/* Fully specified uplink: beta_p has k_users entries (received power per
 * user), pdp has k_users * l_taps entries laid out user-major, each user's
 * profile summing to 1. */
CQM_API cqm_status cqm_system_create(int m_antennas, int k_users, int l_taps,
                                     int pilot_excess, int n_data,
                                     const double* beta_p, const double* pdp,
                                     double noise_power, cqm_system** out);
CQM_API void cqm_system_free(cqm_system* sys);

/* Total received power per antenna: sum of beta*p plus noise. */
CQM_API cqm_status cqm_system_received_power(const cqm_system* sys, double* out);

/* Worst-case deviation of the pilot correlations from the identity pattern
 * over all user pairs and tap lags. */
CQM_API cqm_status cqm_pilot_violation(int k_users, int l_taps, int pilot_excess,
                                       double* out);

/* ---- Channel estimation --------------------------------------------------- */

/* Per-user channel-estimation quality c_k in [0, 1] for a given distortion
 * power q_mse; out has k_users entries. */
CQM_API cqm_status cqm_estimation_variance(const cqm_system* sys, double q_mse,
                                           double* out, size_t capacity);

/* ---- Achievable rates ----------------------------------------------------- */

typedef struct cqm_rate_report {
  double rate;             /* bits per channel use */
  double signal;           /* numerator of the effective SINR */
  double gain_uncertainty; /* combiner-gain fluctuation */
  double interference;     /* other-user interference */
  double est_error;        /* channel-estimation-error leakage */
  double noise;            /* thermal noise */
  double quantization;     /* quantizer distortion */
} cqm_rate_report;

/* Closed-form rate for every user at a given distortion power and estimation
 * quality (c has k_users entries); out has k_users entries. */
CQM_API cqm_status cqm_analytic_rate(const cqm_system* sys, cqm_combiner combiner,
                                     double q_mse, const double* c,
                                     cqm_rate_report* out, size_t capacity);

/* Convenience wrapper: distortion and estimation quality both derived from a
 * Lloyd-Max quantizer with the given resolution (bits = 0: unquantized). */
CQM_API cqm_status cqm_analytic_rate_bits(const cqm_system* sys,
                                          cqm_combiner combiner, int bits,
                                          cqm_rate_report* out, size_t capacity);

/* Near-far stress: user 0 transmits strong_extra_db above the weakest user;
 * reports the weak user's rate under a conservative estimation floor. */
CQM_API cqm_status cqm_near_far_rate(const cqm_system* sys, cqm_combiner combiner,
                                     int bits, double strong_extra_db, double* out);

/* Rate implied by measured first and second moments of a symbol estimate:
 * corr = E[conj(xhat) x], second_moment = E[|xhat|^2] with unit symbols. */
CQM_API cqm_status cqm_rate_from_moments(double corr_re, double corr_im,
                                         double second_moment, double* out);

/* Smallest per-user SNR (dB) at which the unquantized rate reaches target;
 * bisection over [lo_db, hi_db] to tol_bpcu. */
CQM_API cqm_status cqm_snr_for_rate(const cqm_system* sys, cqm_combiner combiner,
                                    double target_rate, double lo_db, double hi_db,
                                    double tol_bpcu, double* out);

/* ---- Symbol-level simulation ---------------------------------------------- */

typedef struct cqm_sim_user {
  double corr_re;           /* Re E[conj(xhat) x] */
  double corr_im;           /* Im E[conj(xhat) x] */
  double second_moment;     /* E[|xhat|^2] */
  double corr_se;           /* standard error of corr */
  double second_moment_se;  /* standard error of the second moment */
  double rate;              /* bits per channel use from the moments */
} cqm_sim_user;

/* End-to-end Monte Carlo over channel, pilots, symbols, and noise. bits = 0
 * runs unquantized. Deterministic for a fixed seed. out has k_users entries. */
CQM_API cqm_status cqm_run_trials(const cqm_system* sys, cqm_combiner combiner,
                                  int bits, int n_trials, uint64_t seed,
                                  cqm_sim_user* out, size_t capacity);

/* Monte Carlo estimate of the channel-estimation quality for user 0:
 * mean/se of the per-subcarrier E|est|^2, directly comparable to the
 * closed-form c_k (either pointer may be NULL). */
CQM_API cqm_status cqm_mc_estimation_variance(const cqm_system* sys, int bits,
                                              int n_realizations, uint64_t seed,
                                              double* mean, double* se);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CQMIMO_CQMIMO_H */
