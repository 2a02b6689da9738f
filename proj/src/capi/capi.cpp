#include "cqmimo/cqmimo.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "core/airlink.hpp"
#include "core/estimation.hpp"
#include "core/montecarlo.hpp"
#include "core/quantizer.hpp"
#include "core/rate.hpp"

namespace {

thread_local std::string g_last_error;

cqm_status fail(cqm_status st, const char* msg) {
  g_last_error = msg;
  return st;
}

// Runs the body and maps exceptions onto status codes at the boundary.
template <typename Fn>
cqm_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CQM_OK;
  } catch (const std::invalid_argument& e) {
    return fail(CQM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CQM_ERR_ALLOC, "out of memory");
  } catch (const std::exception& e) {
    return fail(CQM_ERR_NUMERICAL, e.what());
  }
}

cqmimo::CombinerKind to_kind(cqm_combiner c) {
  return c == CQM_COMBINER_ZF ? cqmimo::CombinerKind::ZeroForcing
                              : cqmimo::CombinerKind::MaximumRatio;
}

}  // namespace

struct cqm_quantizer {
  cqmimo::QuantizerSpec spec;
};

struct cqm_system {
  cqmimo::SystemConfig cfg;
};

extern "C" {

const char* cqm_version(void) { return "0.1.0"; }

const char* cqm_status_str(cqm_status status) {
  switch (status) {
    case CQM_OK:
      return "ok";
    case CQM_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case CQM_ERR_NUMERICAL:
      return "numerical failure";
    case CQM_ERR_ALLOC:
      return "allocation failure";
  }
  return "unknown status";
}

const char* cqm_last_error(void) { return g_last_error.c_str(); }

cqm_status cqm_quantizer_design(int bits, cqm_family family, cqm_quantizer** out) {
  if (out == nullptr) return fail(CQM_ERR_INVALID_ARGUMENT, "out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    auto q = new cqm_quantizer;
    try {
      q->spec = (family == CQM_FAMILY_UNIFORM) ? cqmimo::design_uniform(bits)
                                               : cqmimo::design_lloyd_max(bits);
    } catch (...) {
      delete q;
      throw;
    }
    *out = q;
  });
}

void cqm_quantizer_free(cqm_quantizer* q) { delete q; }

cqm_status cqm_quantizer_bits(const cqm_quantizer* q, int* out) {
  if (q == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = q->spec.bits;
  return CQM_OK;
}

cqm_status cqm_quantizer_levels(const cqm_quantizer* q, double* out, size_t capacity) {
  if (q == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  if (capacity < q->spec.levels.size())
    return fail(CQM_ERR_INVALID_ARGUMENT, "levels buffer too small");
  std::memcpy(out, q->spec.levels.data(), q->spec.levels.size() * sizeof(double));
  return CQM_OK;
}

cqm_status cqm_quantizer_thresholds(const cqm_quantizer* q, double* out,
                                    size_t capacity) {
  if (q == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  if (capacity < q->spec.thresholds.size())
    return fail(CQM_ERR_INVALID_ARGUMENT, "thresholds buffer too small");
  std::memcpy(out, q->spec.thresholds.data(),
              q->spec.thresholds.size() * sizeof(double));
  return CQM_OK;
}

cqm_status cqm_quantizer_mse(const cqm_quantizer* q, double* out) {
  if (q == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = cqmimo::gaussian_mse(q->spec.levels, q->spec.thresholds); });
}

cqm_status cqm_quantize(const cqm_quantizer* q, double sample, double gain,
                        double* out) {
  if (q == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = cqmimo::quantize({sample, 0.0}, gain, q->spec).real(); });
}

cqm_status cqm_bussgang(const cqm_quantizer* q, double agc_gain_db, double rx_power,
                        double* rho, double* err_var, double* q_mse,
                        double* input_power) {
  if (q == nullptr) return fail(CQM_ERR_INVALID_ARGUMENT, "NULL quantizer");
  return guarded([&] {
    const cqmimo::BussgangStats bs =
        cqmimo::bussgang_decompose(q->spec, agc_gain_db, rx_power);
    if (rho != nullptr) *rho = bs.rho;
    if (err_var != nullptr) *err_var = bs.err_var;
    if (q_mse != nullptr) *q_mse = bs.q_mse;
    if (input_power != nullptr) *input_power = bs.input_power;
  });
}

cqm_status cqm_matched_distortion(int bits, double rx_power, double* out) {
  if (out == nullptr) return fail(CQM_ERR_INVALID_ARGUMENT, "out must not be NULL");
  return guarded([&] { *out = cqmimo::matched_distortion(bits, rx_power); });
}

cqm_status cqm_system_create_uniform(int m_antennas, int k_users, int l_taps,
                                     int pilot_excess, int n_data, double snr_db,
                                     double noise_power, cqm_system** out) {
  if (out == nullptr) return fail(CQM_ERR_INVALID_ARGUMENT, "out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    auto sys = new cqm_system;
    try {
      sys->cfg = cqmimo::make_uniform_config(m_antennas, k_users, l_taps, pilot_excess,
                                             n_data, snr_db, noise_power);
    } catch (...) {
      delete sys;
      throw;
    }
    *out = sys;
  });
}

cqm_status cqm_system_create(int m_antennas, int k_users, int l_taps, int pilot_excess,
                             int n_data, const double* beta_p, const double* pdp,
                             double noise_power, cqm_system** out) {
  if (out == nullptr || beta_p == nullptr || pdp == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    if (k_users < 1 || l_taps < 1)
      throw std::invalid_argument("k_users and l_taps must be >= 1");
    auto sys = new cqm_system;
    try {
      cqmimo::SystemConfig& cfg = sys->cfg;
      cfg.m_antennas = m_antennas;
      cfg.k_users = k_users;
      cfg.l_taps = l_taps;
      cfg.pilot_excess = pilot_excess;
      cfg.n_data = n_data;
      cfg.noise_power = noise_power;
      cfg.beta_p.assign(beta_p, beta_p + k_users);
      cfg.pdp.resize(k_users);
      for (int k = 0; k < k_users; ++k)
        cfg.pdp[k].assign(pdp + static_cast<size_t>(k) * l_taps,
                          pdp + static_cast<size_t>(k + 1) * l_taps);
      cfg.validate();
    } catch (...) {
      delete sys;
      throw;
    }
    *out = sys;
  });
}

void cqm_system_free(cqm_system* sys) { delete sys; }

cqm_status cqm_system_received_power(const cqm_system* sys, double* out) {
  if (sys == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = sys->cfg.received_power();
  return CQM_OK;
}

cqm_status cqm_pilot_violation(int k_users, int l_taps, int pilot_excess, double* out) {
  if (out == nullptr) return fail(CQM_ERR_INVALID_ARGUMENT, "out must not be NULL");
  return guarded([&] {
    const cqmimo::PilotBook book = cqmimo::build_pilots(k_users, l_taps, pilot_excess);
    *out = cqmimo::verify_pilots(book, l_taps);
  });
}

cqm_status cqm_estimation_variance(const cqm_system* sys, double q_mse, double* out,
                                   size_t capacity) {
  if (sys == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  if (capacity < static_cast<size_t>(sys->cfg.k_users))
    return fail(CQM_ERR_INVALID_ARGUMENT, "output buffer too small");
  return guarded([&] {
    const std::vector<double> c = cqmimo::estimation_variance(sys->cfg, q_mse);
    std::memcpy(out, c.data(), c.size() * sizeof(double));
  });
}

namespace {

void fill_reports(const std::vector<cqmimo::RateReport>& reports, cqm_rate_report* out) {
  for (size_t k = 0; k < reports.size(); ++k) {
    const cqmimo::RateReport& r = reports[k];
    out[k].rate = r.rate;
    out[k].signal = r.terms.signal;
    out[k].gain_uncertainty = r.terms.gain_uncertainty;
    out[k].interference = r.terms.interference;
    out[k].est_error = r.terms.est_error;
    out[k].noise = r.terms.noise;
    out[k].quantization = r.terms.quantization;
  }
}

}  // namespace

cqm_status cqm_analytic_rate(const cqm_system* sys, cqm_combiner combiner, double q_mse,
                             const double* c, cqm_rate_report* out, size_t capacity) {
  if (sys == nullptr || c == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  if (capacity < static_cast<size_t>(sys->cfg.k_users))
    return fail(CQM_ERR_INVALID_ARGUMENT, "output buffer too small");
  return guarded([&] {
    const std::vector<double> cv(c, c + sys->cfg.k_users);
    fill_reports(cqmimo::analytic_rate(sys->cfg, to_kind(combiner), q_mse, cv), out);
  });
}

cqm_status cqm_analytic_rate_bits(const cqm_system* sys, cqm_combiner combiner, int bits,
                                  cqm_rate_report* out, size_t capacity) {
  if (sys == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  if (capacity < static_cast<size_t>(sys->cfg.k_users))
    return fail(CQM_ERR_INVALID_ARGUMENT, "output buffer too small");
  return guarded([&] {
    const double q = cqmimo::matched_distortion(bits, sys->cfg.received_power());
    const std::vector<double> c = cqmimo::estimation_variance(sys->cfg, q);
    fill_reports(cqmimo::analytic_rate(sys->cfg, to_kind(combiner), q, c), out);
  });
}

cqm_status cqm_near_far_rate(const cqm_system* sys, cqm_combiner combiner, int bits,
                             double strong_extra_db, double* out) {
  if (sys == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    *out = cqmimo::near_far_rate(sys->cfg, to_kind(combiner), bits, strong_extra_db).rate;
  });
}

cqm_status cqm_rate_from_moments(double corr_re, double corr_im, double second_moment,
                                 double* out) {
  if (out == nullptr) return fail(CQM_ERR_INVALID_ARGUMENT, "out must not be NULL");
  return guarded([&] {
    *out = cqmimo::general_rate_from_moments({corr_re, corr_im}, second_moment);
  });
}

cqm_status cqm_snr_for_rate(const cqm_system* sys, cqm_combiner combiner,
                            double target_rate, double lo_db, double hi_db,
                            double tol_bpcu, double* out) {
  if (sys == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    *out = cqmimo::find_snr_for_rate(sys->cfg, to_kind(combiner), target_rate, lo_db,
                                     hi_db, tol_bpcu);
  });
}

cqm_status cqm_run_trials(const cqm_system* sys, cqm_combiner combiner, int bits,
                          int n_trials, uint64_t seed, cqm_sim_user* out,
                          size_t capacity) {
  if (sys == nullptr || out == nullptr)
    return fail(CQM_ERR_INVALID_ARGUMENT, "NULL argument");
  if (capacity < static_cast<size_t>(sys->cfg.k_users))
    return fail(CQM_ERR_INVALID_ARGUMENT, "output buffer too small");
  return guarded([&] {
    const cqmimo::SimResult res =
        cqmimo::run_trials(sys->cfg, to_kind(combiner), bits, n_trials, seed);
    for (size_t k = 0; k < res.users.size(); ++k) {
      const cqmimo::SimUser& u = res.users[k];
      out[k].corr_re = u.corr.real();
      out[k].corr_im = u.corr.imag();
      out[k].second_moment = u.second_moment;
      out[k].corr_se = u.corr_se;
      out[k].second_moment_se = u.second_moment_se;
      out[k].rate = u.rate;
    }
  });
}

cqm_status cqm_mc_estimation_variance(const cqm_system* sys, int bits,
                                      int n_realizations, uint64_t seed, double* mean,
                                      double* se) {
  if (sys == nullptr) return fail(CQM_ERR_INVALID_ARGUMENT, "NULL system");
  return guarded([&] {
    const cqmimo::EstVarMc res =
        cqmimo::mc_estimation_variance(sys->cfg, bits, n_realizations, seed);
    if (mean != nullptr) *mean = res.mean;
    if (se != nullptr) *se = res.se;
  });
}

}  // extern "C"
