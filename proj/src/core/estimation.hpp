// Pilot-domain channel observation and LMMSE estimation. The quantized pilot
// block is correlated against each user's pilot at each delay, producing one
// noisy observation per tap; a per-tap scalar Wiener weight then yields the
// minimum-MSE estimate, and its frequency response is formed by the tap DFT.
// c_k is the closed-form variance of that frequency-domain estimate (equal to
// E|est|^2 per subcarrier); 1 - c_k is the estimation-error variance.
#pragma once

#include <vector>

#include "core/airlink.hpp"
#include "core/matrix.hpp"

namespace cqmimo {

struct EstimationReport {
  int m_antennas = 0;
  int k_users = 0;
  int block_len = 0;
  std::vector<cplx> est_freq;  // indexed (v*M + m)*K + k, like ChannelRealization::freq
  std::vector<double> c;       // per-user estimation variance, in [0, 1]

  cplx est(int m, int k, int v) const {
    return est_freq[(static_cast<std::size_t>(v) * m_antennas + m) * k_users + k];
  }
};

// r_mk[l] = (1/(rho*sqrt(N_p))) * sum_n q_m[n] * conj(x_k[n-l]), cyclic in n,
// so the delayed tap h[l] lines up with the pilot's unit autocorrelation peak.
// With rho = 1 and no noise or quantization this returns sqrt(beta_k P_k N_p)
// times the true taps exactly, by pilot orthogonality. Output indexed (m*K+k)*L+l.
std::vector<cplx> correlate(const CMat& quantized_pilot_rx, const PilotBook& book, int l_taps,
                            double rho);

// Applies the per-tap Wiener weight
//   w_kl = sqrt(beta_k P_k N_p) * s_kl / (beta_k P_k N_p * s_kl + q_mse + N_0),
// where s_kl is the PDP entry, then transforms taps to a length-block_len
// frequency grid. The weight makes E[est * conj(obs)] / E|obs|^2 exact, so the
// estimate and its error are uncorrelated and E|est|^2 = c_k per subcarrier.
EstimationReport lmmse_estimate(const std::vector<cplx>& obs, const SystemConfig& cfg,
                                double q_mse, int block_len);

// Closed form c_k = sum_l s_kl^2 beta_k P_k N_p / (s_kl beta_k P_k N_p + q_mse + N_0).
std::vector<double> estimation_variance(const SystemConfig& cfg, double q_mse);

}  // namespace cqmimo
