// Uplink air interface: system configuration, i.i.d. Rayleigh multipath
// channels, constant-amplitude pilot sequences with exact cyclic orthogonality,
// and the received-signal model (circular convolution plus white noise).
#pragma once

#include <cstdint>
#include <vector>

#include "core/matrix.hpp"

namespace cqmimo {

struct SystemConfig {
  int m_antennas = 0;   // M
  int k_users = 0;      // K
  int l_taps = 0;       // L
  int pilot_excess = 0; // pilot length as a multiple of K*L
  int n_data = 0;       // data block length per coherence interval
  std::vector<double> beta_p;           // per-user received power beta_k * P_k (linear)
  double noise_power = 1.0;             // N_0 (linear)
  std::vector<std::vector<double>> pdp; // per-user power delay profile, each sums to 1

  int pilot_len() const { return pilot_excess * k_users * l_taps; }
  double received_power() const;  // sum of beta_p plus noise_power
  void validate() const;          // throws std::invalid_argument on any violation
};

// Equal-power users with a uniform power delay profile; snr_db is the per-user
// beta*P relative to the noise power, in dB.
SystemConfig make_uniform_config(int m_antennas, int k_users, int l_taps, int pilot_excess,
                                 int n_data, double snr_db, double noise_power = 1.0);

struct ChannelRealization {
  int m_antennas = 0;
  int k_users = 0;
  int l_taps = 0;
  int block_len = 0;
  std::vector<cplx> taps;  // indexed (m*K + k)*L + l
  std::vector<cplx> freq;  // indexed (v*M + m)*K + k, per-subcarrier responses

  cplx tap(int m, int k, int l) const {
    return taps[(static_cast<std::size_t>(m) * k_users + k) * l_taps + l];
  }
  cplx freq_at(int m, int k, int v) const {
    return freq[(static_cast<std::size_t>(v) * m_antennas + m) * k_users + k];
  }
};

// Independent circularly-symmetric taps with per-delay variance from the PDP;
// frequency responses are the plain tap DFT sums over a length-block_len grid.
ChannelRealization draw_channel(const SystemConfig& cfg, int block_len, std::uint64_t seed);

struct PilotBook {
  int k_users = 0;
  int n_p = 0;
  CMat pilots;  // K x N_p unit-modulus symbols
};

// Quadratic-phase base sequence with perfect cyclic autocorrelation; user k is
// assigned the cyclic shift k*L*pilot_excess, so all self lags 1..L-1 and all
// cross-user lags 0..L-1 correlate to exactly zero.
PilotBook build_pilots(int k_users, int l_taps, int pilot_excess);

// Maximum absolute deviation from the required correlation values over every
// (user, user, lag) combination in the orthogonality condition.
double verify_pilots(const PilotBook& book, int l_taps);

// Circular convolution of the per-user transmit rows with the channel taps,
// scaled by sqrt(beta_k * P_k), plus white complex Gaussian noise of variance
// noise_power per sample (one substream per antenna). If noise_out is given it
// receives the noise block alone (same draws).
CMat receive_block(const SystemConfig& cfg, const ChannelRealization& chan, const CMat& tx,
                   std::uint64_t seed, CMat* noise_out = nullptr);

}  // namespace cqmimo
