#include "core/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "core/fft.hpp"

namespace cqmimo {

std::vector<cplx> correlate(const CMat& quantized_pilot_rx, const PilotBook& book, int l_taps,
                            double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("correlate: rho must be positive");
  if (l_taps < 1) throw std::invalid_argument("correlate: l_taps must be >= 1");
  if (quantized_pilot_rx.cols() != book.n_p)
    throw std::invalid_argument("correlate: received block length must equal the pilot length");
  const int m_antennas = quantized_pilot_rx.rows();
  const int n_p = book.n_p;
  const double scale = 1.0 / (rho * std::sqrt(static_cast<double>(n_p)));

  std::vector<cplx> obs(static_cast<std::size_t>(m_antennas) * book.k_users * l_taps);
  for (int m = 0; m < m_antennas; ++m) {
    const cplx* q = quantized_pilot_rx.row(m);
    for (int k = 0; k < book.k_users; ++k) {
      for (int l = 0; l < l_taps; ++l) {
        cplx acc{0.0, 0.0};
        // Lag runs against the convolution direction so that the delayed tap
        // h[l] lines up with the pilot's unit autocorrelation peak.
        for (int n = 0; n < n_p; ++n) acc += q[n] * std::conj(book.pilots(k, (n - l + n_p) % n_p));
        obs[(static_cast<std::size_t>(m) * book.k_users + k) * l_taps + l] = scale * acc;
      }
    }
  }
  return obs;
}

EstimationReport lmmse_estimate(const std::vector<cplx>& obs, const SystemConfig& cfg,
                                double q_mse, int block_len) {
  cfg.validate();
  if (!(q_mse >= 0.0)) throw std::invalid_argument("lmmse_estimate: q_mse must be >= 0");
  if (block_len < cfg.l_taps) throw std::invalid_argument("lmmse_estimate: block_len must be >= L");
  if (obs.size() != static_cast<std::size_t>(cfg.m_antennas) * cfg.k_users * cfg.l_taps)
    throw std::invalid_argument("lmmse_estimate: observation size must be M*K*L");

  const double n_p = static_cast<double>(cfg.pilot_len());
  EstimationReport rep;
  rep.m_antennas = cfg.m_antennas;
  rep.k_users = cfg.k_users;
  rep.block_len = block_len;
  rep.est_freq.resize(static_cast<std::size_t>(block_len) * cfg.m_antennas * cfg.k_users);
  rep.c = estimation_variance(cfg, q_mse);

  // Per-user, per-tap Wiener weights.
  std::vector<std::vector<double>> w(cfg.k_users, std::vector<double>(cfg.l_taps, 0.0));
  for (int k = 0; k < cfg.k_users; ++k) {
    const double bp_np = cfg.beta_p[k] * n_p;
    for (int l = 0; l < cfg.l_taps; ++l) {
      const double num = std::sqrt(bp_np) * cfg.pdp[k][l];
      const double den = cfg.pdp[k][l] * bp_np + q_mse + cfg.noise_power;
      w[k][l] = (num > 0.0 && den > 0.0) ? num / den : 0.0;
    }
  }

  std::vector<cplx> padded(block_len);
  for (int m = 0; m < cfg.m_antennas; ++m) {
    for (int k = 0; k < cfg.k_users; ++k) {
      std::fill(padded.begin(), padded.end(), cplx{0.0, 0.0});
      const std::size_t base = (static_cast<std::size_t>(m) * cfg.k_users + k) * cfg.l_taps;
      for (int l = 0; l < cfg.l_taps; ++l) padded[l] = w[k][l] * obs[base + l];
      dft_row_unscaled(padded.data(), block_len);
      for (int v = 0; v < block_len; ++v)
        rep.est_freq[(static_cast<std::size_t>(v) * cfg.m_antennas + m) * cfg.k_users + k] =
            padded[v];
    }
  }
  return rep;
}

std::vector<double> estimation_variance(const SystemConfig& cfg, double q_mse) {
  cfg.validate();
  if (!(q_mse >= 0.0)) throw std::invalid_argument("estimation_variance: q_mse must be >= 0");
  const double n_p = static_cast<double>(cfg.pilot_len());
  std::vector<double> c(cfg.k_users, 0.0);
  for (int k = 0; k < cfg.k_users; ++k) {
    const double bp_np = cfg.beta_p[k] * n_p;
    for (int l = 0; l < cfg.l_taps; ++l) {
      const double s = cfg.pdp[k][l];
      const double den = s * bp_np + q_mse + cfg.noise_power;
      if (den > 0.0) c[k] += s * s * bp_np / den;
    }
  }
  return c;
}

}  // namespace cqmimo
