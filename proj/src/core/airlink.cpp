#include "core/airlink.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/fft.hpp"
#include "core/rng.hpp"

namespace cqmimo {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double SystemConfig::received_power() const {
  double p = noise_power;
  for (const double bp : beta_p) p += bp;
  return p;
}

void SystemConfig::validate() const {
  if (m_antennas < 1 || k_users < 1 || l_taps < 1 || pilot_excess < 1)
    throw std::invalid_argument("SystemConfig: M, K, L, and the pilot excess must all be >= 1");
  if (n_data < 1) throw std::invalid_argument("SystemConfig: n_data must be >= 1");
  if (static_cast<int>(beta_p.size()) != k_users)
    throw std::invalid_argument("SystemConfig: beta_p must have one entry per user");
  for (const double bp : beta_p)
    if (!(bp >= 0.0)) throw std::invalid_argument("SystemConfig: beta_p entries must be >= 0");
  if (!(noise_power >= 0.0)) throw std::invalid_argument("SystemConfig: noise_power must be >= 0");
  if (static_cast<int>(pdp.size()) != k_users)
    throw std::invalid_argument("SystemConfig: pdp must have one profile per user");
  for (const auto& profile : pdp) {
    if (static_cast<int>(profile.size()) != l_taps)
      throw std::invalid_argument("SystemConfig: each pdp profile must have L entries");
    double sum = 0.0;
    for (const double v : profile) {
      if (!(v >= 0.0)) throw std::invalid_argument("SystemConfig: pdp entries must be >= 0");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("SystemConfig: each pdp profile must sum to 1 within 1e-12");
  }
}

SystemConfig make_uniform_config(int m_antennas, int k_users, int l_taps, int pilot_excess,
                                 int n_data, double snr_db, double noise_power) {
  SystemConfig cfg;
  cfg.m_antennas = m_antennas;
  cfg.k_users = k_users;
  cfg.l_taps = l_taps;
  cfg.pilot_excess = pilot_excess;
  cfg.n_data = n_data;
  cfg.noise_power = noise_power;
  cfg.beta_p.assign(k_users, noise_power * std::pow(10.0, snr_db / 10.0));
  cfg.pdp.assign(k_users, std::vector<double>(l_taps, 1.0 / l_taps));
  cfg.validate();
  return cfg;
}

ChannelRealization draw_channel(const SystemConfig& cfg, int block_len, std::uint64_t seed) {
  cfg.validate();
  if (block_len < cfg.l_taps)
    throw std::invalid_argument("draw_channel: block_len must be >= L");

  ChannelRealization chan;
  chan.m_antennas = cfg.m_antennas;
  chan.k_users = cfg.k_users;
  chan.l_taps = cfg.l_taps;
  chan.block_len = block_len;
  chan.taps.resize(static_cast<std::size_t>(cfg.m_antennas) * cfg.k_users * cfg.l_taps);
  chan.freq.resize(static_cast<std::size_t>(block_len) * cfg.m_antennas * cfg.k_users);

  Rng rng(seed);
  std::vector<cplx> padded(block_len);
  std::size_t t = 0;
  for (int m = 0; m < cfg.m_antennas; ++m) {
    for (int k = 0; k < cfg.k_users; ++k) {
      for (int l = 0; l < cfg.l_taps; ++l)
        chan.taps[t + l] = std::sqrt(cfg.pdp[k][l]) * rng.next_cnormal();
      // Frequency response: unscaled DFT of the zero-padded tap vector.
      std::fill(padded.begin(), padded.end(), cplx{0.0, 0.0});
      for (int l = 0; l < cfg.l_taps; ++l) padded[l] = chan.taps[t + l];
      dft_row_unscaled(padded.data(), block_len);
      for (int v = 0; v < block_len; ++v)
        chan.freq[(static_cast<std::size_t>(v) * cfg.m_antennas + m) * cfg.k_users + k] = padded[v];
      t += cfg.l_taps;
    }
  }
  return chan;
}

namespace {

// Cyclic shifts assigned to the users within the pilot block. Any set of
// distinct shifts with cyclic gaps >= L keeps the correlation condition exact
// (the quadratic-phase base has a delta cyclic autocorrelation), but the
// choice still matters: with pilot excess the block is longer than the K*L
// channel dimensions, so some cross-sample correlation in the received block
// is unavoidable, and evenly spaced shifts stack it coherently at a few lags
// where a coarse quantizer's distortion then correlates instead of averaging
// down like white noise. Spreading that energy thinly keeps the white-noise
// distortion model accurate, so the shifts are chosen by a deterministic
// hill-climb that minimizes the quartic lag-energy
//   F = sum_d |D_L(d)|^4 * A(d)^2,
// where D_L is the L-point Dirichlet kernel and A(d) the squared magnitude of
// the shift set's array factor. With no excess the gap constraints force the
// uniform grid and the search is a no-op (that block is exactly white).
std::vector<int> pilot_shifts(int k_users, int l_taps, int n_p) {
  std::vector<int> taus(k_users);
  for (int k = 0; k < k_users; ++k) taus[k] = k * (n_p / k_users);
  if (k_users == 1) return taus;

  std::vector<double> w4(n_p, 0.0);  // |D_L(d)|^4
  for (int d = 1; d < n_p; ++d) {
    const double dl = std::sin(kPi * l_taps * d / n_p) / std::sin(kPi * d / n_p);
    w4[d] = dl * dl * dl * dl;
  }
  // Array-factor partial sums E[d] = sum_k exp(-2*pi*i*d*tau_k / n_p).
  auto unit = [&](long long d, long long tau) {
    return std::polar(1.0, -2.0 * kPi * static_cast<double>(d * tau % n_p) / n_p);
  };
  std::vector<cplx> e_sum(n_p, cplx{0.0, 0.0});
  for (int d = 0; d < n_p; ++d)
    for (int k = 0; k < k_users; ++k) e_sum[d] += unit(d, taus[k]);

  auto score = [&](const std::vector<cplx>& e) {
    double tot = 0.0;
    for (int d = 1; d < n_p; ++d) {
      const double a = std::norm(e[d]);
      tot += w4[d] * a * a;
    }
    return tot;
  };
  auto gaps_ok = [&](const std::vector<int>& ts) {
    std::vector<int> s(ts);
    std::sort(s.begin(), s.end());
    for (int k = 0; k < k_users; ++k) {
      const int gap = (s[(k + 1) % k_users] - s[k] + n_p) % n_p;
      if (gap < l_taps) return false;  // also rejects duplicate shifts
    }
    return true;
  };

  double best = score(e_sum);
  std::vector<cplx> trial(n_p);
  bool improved = true;
  for (int round = 0; improved && round < 40; ++round) {
    improved = false;
    for (int k = 1; k < k_users; ++k) {
      for (int delta = -l_taps; delta <= l_taps; ++delta) {
        if (delta == 0) continue;
        const int moved = ((taus[k] + delta) % n_p + n_p) % n_p;
        std::vector<int> cand(taus);
        cand[k] = moved;
        if (!gaps_ok(cand)) continue;
        for (int d = 0; d < n_p; ++d)
          trial[d] = e_sum[d] - unit(d, taus[k]) + unit(d, moved);
        const double v = score(trial);
        if (v < best - 1e-9) {
          best = v;
          taus[k] = moved;
          e_sum.swap(trial);
          improved = true;
        }
      }
    }
  }
  return taus;
}

}  // namespace

PilotBook build_pilots(int k_users, int l_taps, int pilot_excess) {
  if (k_users < 1 || l_taps < 1 || pilot_excess < 1)
    throw std::invalid_argument("build_pilots: all parameters must be >= 1");
  const int n_p = pilot_excess * k_users * l_taps;

  // Quadratic-phase (Zadoff-Chu, root 1) base sequence; the phase form depends
  // on the parity of the length so that the cyclic autocorrelation is an exact
  // delta. Users take cyclic shifts chosen by pilot_shifts() above.
  std::vector<cplx> base(n_p);
  for (int n = 0; n < n_p; ++n) {
    const double num = (n_p % 2 == 0) ? static_cast<double>(n) * n
                                      : static_cast<double>(n) * (n + 1);
    base[n] = std::polar(1.0, -kPi * num / n_p);
  }

  const std::vector<int> taus = pilot_shifts(k_users, l_taps, n_p);
  PilotBook book;
  book.k_users = k_users;
  book.n_p = n_p;
  book.pilots = CMat(k_users, n_p);
  for (int k = 0; k < k_users; ++k)
    for (int n = 0; n < n_p; ++n)
      book.pilots(k, n) = base[(n + taus[k]) % n_p];
  return book;
}

double verify_pilots(const PilotBook& book, int l_taps) {
  const int n_p = book.n_p;
  double worst = 0.0;
  for (int k = 0; k < book.k_users; ++k) {
    for (int kp = 0; kp < book.k_users; ++kp) {
      for (int lag = 0; lag < l_taps; ++lag) {
        cplx corr{0.0, 0.0};
        for (int n = 0; n < n_p; ++n)
          corr += book.pilots(k, n) * std::conj(book.pilots(kp, (n + lag) % n_p));
        const double target = (k == kp && lag == 0) ? static_cast<double>(n_p) : 0.0;
        worst = std::max(worst, std::abs(corr - cplx{target, 0.0}));
      }
    }
  }
  return worst;
}

CMat receive_block(const SystemConfig& cfg, const ChannelRealization& chan, const CMat& tx,
                   std::uint64_t seed, CMat* noise_out) {
  cfg.validate();
  if (tx.rows() != cfg.k_users) throw std::invalid_argument("receive_block: tx must have K rows");
  if (tx.cols() < 1) throw std::invalid_argument("receive_block: tx must be nonempty");
  if (chan.m_antennas != cfg.m_antennas || chan.k_users != cfg.k_users ||
      chan.l_taps != cfg.l_taps)
    throw std::invalid_argument("receive_block: channel does not match the configuration");

  const int n = tx.cols();
  CMat y(cfg.m_antennas, n);
  if (noise_out != nullptr) *noise_out = CMat(cfg.m_antennas, n);
  const double noise_std = std::sqrt(cfg.noise_power);

  for (int m = 0; m < cfg.m_antennas; ++m) {
    cplx* out = y.row(m);
    for (int k = 0; k < cfg.k_users; ++k) {
      const double amp = std::sqrt(cfg.beta_p[k]);
      if (amp == 0.0) continue;
      const cplx* x = tx.row(k);
      for (int l = 0; l < cfg.l_taps; ++l) {
        const cplx h = amp * chan.tap(m, k, l);
        // Circular shift by l (cyclic-prefix block model).
        for (int i = 0; i < n; ++i) out[i] += h * x[((i - l) % n + n) % n];
      }
    }
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(m));
    for (int i = 0; i < n; ++i) {
      const cplx z = noise_std * rng.next_cnormal();
      out[i] += z;
      if (noise_out != nullptr) (*noise_out)(m, i) = z;
    }
  }
  return y;
}

}  // namespace cqmimo
