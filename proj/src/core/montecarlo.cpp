#include "core/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "core/estimation.hpp"
#include "core/fft.hpp"
#include "core/quantizer.hpp"
#include "core/rng.hpp"

namespace cqmimo {

namespace {

constexpr double kLevelScale = 0.7071067811865475244;  // per-dimension 1/sqrt(2)

// Quantize a block per real dimension with the complex-design level scaling;
// inner_gain pre-compensates the scale so quantize() sees canonical levels.
void quantize_block(CMat& block, const QuantizerSpec& spec, double inner_gain) {
  for (auto& v : block.data()) v = kLevelScale * quantize(v, inner_gain, spec);
}

// Sum/sum-of-squares accumulator for per-trial means.
struct MeanVar {
  double sum = 0.0, sumsq = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double var_of_mean() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sumsq - n * m * m) / (n - 1)) / n;
  }
};

struct ComplexMeanVar {
  MeanVar re, im;
  void add(cplx v) {
    re.add(v.real());
    im.add(v.imag());
  }
  cplx mean() const { return {re.mean(), im.mean()}; }
  double se() const { return std::sqrt(re.var_of_mean() + im.var_of_mean()); }
};

// Index of the unordered pair (i, j), 1 <= i < j <= 5, into 0..9.
int pair_index(int i, int j) {
  static const int base[6] = {0, 0, 4, 7, 9, 10};
  return base[i] + (j - i - 1);
}

struct EngineOptions {
  bool perfect_csi = false;
  bool instrument = false;
  const cplx* abar = nullptr;  // pass-2 centering constant for the self-gain term
};

struct EngineAccum {
  std::vector<cplx> corr_sum;    // per user, summed over (trial, subcarrier)
  std::vector<double> m2_sum;
  std::vector<ComplexMeanVar> corr_tr;  // per-trial means, for standard errors
  std::vector<MeanVar> m2_tr;
  cplx a_sum{0.0, 0.0};  // combiner gain w^H est for user 0, pass-1 average
  std::size_t a_count = 0;
  ComplexMeanVar cross_tr[10];
  MeanVar t5_tr;
  double recon_residual = 0.0;
  int rejected = 0;
  int n_subcarriers = 0;
};

void run_engine(const SystemConfig& cfg, CombinerKind kind, int bits, int n_trials,
                std::uint64_t seed, const EngineOptions& opts, EngineAccum& acc) {
  cfg.validate();
  if (n_trials < 1) throw std::invalid_argument("run_trials: n_trials must be >= 1");
  if (bits < 0 || bits > kMaxBits)
    throw std::invalid_argument("run_trials: bits must lie in 0..8 (0 = unquantized)");
  if (cfg.n_data < cfg.l_taps)
    throw std::invalid_argument("run_trials: data block length must be >= L");
  if (kind == CombinerKind::ZeroForcing && cfg.m_antennas < cfg.k_users)
    throw std::invalid_argument("run_trials: zero-forcing needs M >= K");

  const int m_ant = cfg.m_antennas, k_usr = cfg.k_users, n_u = cfg.n_data;
  const double prx = cfg.received_power();

  QuantizerSpec spec;
  double rho = 1.0, q_mse = 0.0, inner_gain = 0.0;
  if (bits > 0) {
    if (!(prx > 0.0))
      throw std::invalid_argument("run_trials: quantized runs need positive received power");
    spec = design_lloyd_max(bits);
    const BussgangStats bs = bussgang_decompose(spec, 0.0, prx);
    rho = bs.rho;
    q_mse = bs.q_mse;
    // quantize() applies sqrt(gain) then canonical levels; fold in the matched
    // AGC 1/prx and the 1/sqrt(2) level scale.
    inner_gain = (1.0 / prx) / (kLevelScale * kLevelScale);
  }
  const double inv_rho = 1.0 / rho;

  PilotBook book;
  if (!opts.perfect_csi) book = build_pilots(k_usr, cfg.l_taps, cfg.pilot_excess);

  std::vector<double> amp(k_usr);
  for (int k = 0; k < k_usr; ++k) amp[k] = std::sqrt(cfg.beta_p[k]);

  acc.corr_sum.assign(k_usr, cplx{0.0, 0.0});
  acc.m2_sum.assign(k_usr, 0.0);
  acc.corr_tr.assign(k_usr, {});
  acc.m2_tr.assign(k_usr, {});
  acc.n_subcarriers = n_u;

  CMat est_slice(m_ant, k_usr);
  std::vector<cplx> trial_corr(k_usr);
  std::vector<double> trial_m2(k_usr);
  std::vector<cplx> xhat(k_usr), w_eps(k_usr);
  cplx trial_cross[10];
  const std::size_t slice_bytes = sizeof(cplx) * static_cast<std::size_t>(m_ant) * k_usr;

  int accepted = 0;
  std::uint64_t attempt = 0;
  while (accepted < n_trials) {
    if (acc.rejected > 0.001 * n_trials)
      throw RankDeficientError(
          "run_trials: more than 0.1% of trials rejected as rank-deficient");
    const std::uint64_t s = attempt * 4;
    ++attempt;

    const ChannelRealization chan = draw_channel(cfg, n_u, Rng::derive_seed(seed, s));

    // Pilot phase -> channel estimates (skipped when the truth is handed over).
    EstimationReport rep;
    if (!opts.perfect_csi) {
      CMat pilot_rx = receive_block(cfg, chan, book.pilots, Rng::derive_seed(seed, s + 1));
      if (bits > 0) quantize_block(pilot_rx, spec, inner_gain);
      const std::vector<cplx> obs = correlate(pilot_rx, book, cfg.l_taps, rho);
      rep = lmmse_estimate(obs, cfg, q_mse, n_u);
    }
    const std::vector<cplx>& est = opts.perfect_csi ? chan.freq : rep.est_freq;

    // Data phase.
    CMat tx(k_usr, n_u);
    {
      Rng rng = Rng::derive(seed, s + 2);
      for (auto& v : tx.data()) v = rng.next_cnormal();
    }
    CMat noise;
    CMat rx = receive_block(cfg, chan, tx, Rng::derive_seed(seed, s + 3),
                            opts.instrument ? &noise : nullptr);
    CMat q_rx = rx;
    if (bits > 0) quantize_block(q_rx, spec, inner_gain);

    const CMat q_f = to_frequency(q_rx);
    const CMat x_f = to_frequency(tx);
    CMat y_f, z_f;
    if (opts.instrument) {
      y_f = to_frequency(rx);
      z_f = to_frequency(noise);
    }

    std::fill(trial_corr.begin(), trial_corr.end(), cplx{0.0, 0.0});
    std::fill(trial_m2.begin(), trial_m2.end(), 0.0);
    std::fill(std::begin(trial_cross), std::end(trial_cross), cplx{0.0, 0.0});
    double trial_t5 = 0.0;
    cplx trial_a{0.0, 0.0};
    double trial_recon = 0.0;

    bool deficient = false;
    for (int v = 0; v < n_u; ++v) {
      std::memcpy(est_slice.data().data(),
                  est.data() + static_cast<std::size_t>(v) * m_ant * k_usr, slice_bytes);
      CMat weights;
      try {
        weights = combiner_weights(est_slice, kind);
      } catch (const RankDeficientError&) {
        deficient = true;
        break;
      }

      for (int k = 0; k < k_usr; ++k) {
        cplx acc_q{0.0, 0.0};
        for (int m = 0; m < m_ant; ++m) acc_q += std::conj(weights(m, k)) * q_f(m, v);
        xhat[k] = inv_rho * acc_q;
        trial_corr[k] += std::conj(xhat[k]) * x_f(k, v);
        trial_m2[k] += std::norm(xhat[k]);
      }

      if (opts.instrument) {
        // Expansion of xhat for user 0 into mean-gain signal plus five
        // zero-mean terms; est = truth + error ties them together exactly.
        cplx a{0.0, 0.0};
        for (int m = 0; m < m_ant; ++m) a += std::conj(weights(m, 0)) * est_slice(m, 0);
        trial_a += a;
        if (opts.abar != nullptr) {
          cplx t2{0.0, 0.0}, t3{0.0, 0.0}, t4{0.0, 0.0}, t5{0.0, 0.0};
          for (int kp = 0; kp < k_usr; ++kp) {
            cplx w_est{0.0, 0.0}, w_err{0.0, 0.0};
            for (int m = 0; m < m_ant; ++m) {
              const cplx truth =
                  chan.freq[(static_cast<std::size_t>(v) * m_ant + m) * k_usr + kp];
              const cplx wh = std::conj(weights(m, 0));
              w_est += wh * est_slice(m, kp);
              w_err += wh * (est_slice(m, kp) - truth);
            }
            if (kp != 0) t2 += amp[kp] * w_est * x_f(kp, v);
            t3 -= amp[kp] * w_err * x_f(kp, v);
            w_eps[kp] = w_err;
          }
          for (int m = 0; m < m_ant; ++m) {
            const cplx wh = std::conj(weights(m, 0));
            t4 += wh * z_f(m, v);
            t5 += wh * (q_f(m, v) - rho * y_f(m, v));
          }
          t5 *= inv_rho;
          const cplx t1 = (a - *opts.abar) * amp[0] * x_f(0, v);
          const cplx t0 = *opts.abar * amp[0] * x_f(0, v);
          trial_recon = std::max(trial_recon,
                                 std::abs(t0 + t1 + t2 + t3 + t4 + t5 - xhat[0]));
          const cplx terms[6] = {cplx{0.0, 0.0}, t1, t2, t3, t4, t5};
          for (int i = 1; i <= 5; ++i)
            for (int j = i + 1; j <= 5; ++j)
              trial_cross[pair_index(i, j)] += terms[i] * std::conj(terms[j]);
          trial_t5 += std::norm(t5);
        }
      }
    }
    if (deficient) {
      ++acc.rejected;
      continue;
    }

    // Commit the accepted trial in order (deterministic accumulation).
    const double inv_nu = 1.0 / n_u;
    for (int k = 0; k < k_usr; ++k) {
      acc.corr_sum[k] += trial_corr[k];
      acc.m2_sum[k] += trial_m2[k];
      acc.corr_tr[k].add(trial_corr[k] * inv_nu);
      acc.m2_tr[k].add(trial_m2[k] * inv_nu);
    }
    if (opts.instrument) {
      acc.a_sum += trial_a;
      acc.a_count += static_cast<std::size_t>(n_u);
      if (opts.abar != nullptr) {
        for (int p = 0; p < 10; ++p) acc.cross_tr[p].add(trial_cross[p] * inv_nu);
        acc.t5_tr.add(trial_t5 * inv_nu);
        acc.recon_residual = std::max(acc.recon_residual, trial_recon);
      }
    }
    ++accepted;
  }
}

SimResult result_from(const EngineAccum& acc, int n_trials) {
  SimResult res;
  res.n_trials = n_trials;
  res.n_subcarriers = acc.n_subcarriers;
  res.rejected_trials = acc.rejected;
  const double n = static_cast<double>(n_trials) * acc.n_subcarriers;
  res.users.resize(acc.corr_sum.size());
  for (std::size_t k = 0; k < acc.corr_sum.size(); ++k) {
    SimUser& u = res.users[k];
    u.corr = acc.corr_sum[k] / n;
    u.second_moment = acc.m2_sum[k] / n;
    u.corr_se = acc.corr_tr[k].se();
    u.second_moment_se = std::sqrt(acc.m2_tr[k].var_of_mean());
    u.rate = general_rate_from_moments(u.corr, u.second_moment);
  }
  return res;
}

}  // namespace

SimResult run_trials(const SystemConfig& cfg, CombinerKind kind, int bits, int n_trials,
                     std::uint64_t seed) {
  EngineAccum acc;
  run_engine(cfg, kind, bits, n_trials, seed, {}, acc);
  return result_from(acc, n_trials);
}

SimResult run_trials_perfect_csi(const SystemConfig& cfg, CombinerKind kind, int bits,
                                 int n_trials, std::uint64_t seed) {
  EngineAccum acc;
  EngineOptions opts;
  opts.perfect_csi = true;
  run_engine(cfg, kind, bits, n_trials, seed, opts, acc);
  return result_from(acc, n_trials);
}

CMat combiner_weights(const CMat& est_slice, CombinerKind kind) {
  const int m_ant = est_slice.rows(), k_usr = est_slice.cols();
  if (m_ant < 1 || k_usr < 1) throw std::invalid_argument("combiner_weights: empty estimate");
  CMat w(m_ant, k_usr);

  if (kind == CombinerKind::MaximumRatio) {
    for (int k = 0; k < k_usr; ++k) {
      double nrm = 0.0;
      for (int m = 0; m < m_ant; ++m) nrm += std::norm(est_slice(m, k));
      nrm = std::sqrt(nrm);
      if (nrm > 0.0)
        for (int m = 0; m < m_ant; ++m) w(m, k) = est_slice(m, k) / nrm;
    }
    return w;
  }

  if (m_ant < k_usr)
    throw RankDeficientError("combiner_weights: fewer antennas than users");

  // Gram matrix G = est^H est, then W = est * G^{-1} via Cholesky. Before
  // normalization the columns satisfy W^H est = I, hence the zero-forcing
  // property; per-column normalization preserves the zeros.
  std::vector<cplx> gram(static_cast<std::size_t>(k_usr) * k_usr);
  auto g = [&](int i, int j) -> cplx& { return gram[static_cast<std::size_t>(i) * k_usr + j]; };
  double trace = 0.0;
  for (int i = 0; i < k_usr; ++i) {
    for (int j = i; j < k_usr; ++j) {
      cplx acc{0.0, 0.0};
      for (int m = 0; m < m_ant; ++m) acc += std::conj(est_slice(m, i)) * est_slice(m, j);
      g(i, j) = acc;
      g(j, i) = std::conj(acc);
    }
    trace += g(i, i).real();
  }
  const double pivot_floor = trace / k_usr * 1e-13;
  if (!(trace > 0.0)) throw RankDeficientError("combiner_weights: zero estimate matrix");

  // In-place lower Cholesky of the Gram matrix.
  std::vector<cplx> chol = gram;
  auto l = [&](int i, int j) -> cplx& { return chol[static_cast<std::size_t>(i) * k_usr + j]; };
  for (int j = 0; j < k_usr; ++j) {
    double d = l(j, j).real();
    for (int p = 0; p < j; ++p) d -= std::norm(l(j, p));
    if (!(d > pivot_floor))
      throw RankDeficientError("combiner_weights: rank-deficient estimate matrix");
    const double root = std::sqrt(d);
    l(j, j) = root;
    for (int i = j + 1; i < k_usr; ++i) {
      cplx acc = l(i, j);
      for (int p = 0; p < j; ++p) acc -= l(i, p) * std::conj(l(j, p));
      l(i, j) = acc / root;
    }
  }

  // Solve G X = I column by column; X is Hermitian but solving plainly is cheap.
  std::vector<cplx> inv(static_cast<std::size_t>(k_usr) * k_usr);
  auto x = [&](int i, int j) -> cplx& { return inv[static_cast<std::size_t>(i) * k_usr + j]; };
  std::vector<cplx> col(k_usr);
  for (int rhs = 0; rhs < k_usr; ++rhs) {
    for (int i = 0; i < k_usr; ++i) {
      cplx acc = (i == rhs) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
      for (int p = 0; p < i; ++p) acc -= l(i, p) * col[p];
      col[i] = acc / l(i, i).real();
    }
    for (int i = k_usr - 1; i >= 0; --i) {
      cplx acc = col[i];
      for (int p = i + 1; p < k_usr; ++p) acc -= std::conj(l(p, i)) * col[p];
      col[i] = acc / l(i, i).real();
      x(i, rhs) = col[i];
    }
  }

  for (int k = 0; k < k_usr; ++k) {
    double nrm = 0.0;
    for (int m = 0; m < m_ant; ++m) {
      cplx acc{0.0, 0.0};
      for (int p = 0; p < k_usr; ++p) acc += est_slice(m, p) * x(p, k);
      w(m, k) = acc;
      nrm += std::norm(acc);
    }
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0)) throw RankDeficientError("combiner_weights: zero weight column");
    for (int m = 0; m < m_ant; ++m) w(m, k) /= nrm;
  }
  return w;
}

CaveatReport flat_channel_caveat(const SystemConfig& cfg, int bits, int n_trials,
                                 std::uint64_t seed) {
  CaveatReport rep;
  rep.sim = run_trials(cfg, CombinerKind::MaximumRatio, bits, n_trials, seed);
  const double q = matched_distortion(bits, cfg.received_power());
  rep.analytic_rate =
      analytic_rate(cfg, CombinerKind::MaximumRatio, q, estimation_variance(cfg, q))
          .front()
          .rate;
  rep.empirical_rate = rep.sim.users.front().rate;
  return rep;
}

InstrumentedResult run_trials_instrumented(const SystemConfig& cfg, CombinerKind kind, int bits,
                                           int n_trials, std::uint64_t seed) {
  if (bits < 1) throw std::invalid_argument("run_trials_instrumented: bits must be >= 1");
  // Pass 1 measures the mean combiner gain; pass 2 (same seed, same draws)
  // centers the self-gain term with it and accumulates the cross-moments.
  EngineOptions opts;
  opts.instrument = true;
  EngineAccum first;
  run_engine(cfg, kind, bits, n_trials, seed, opts, first);
  const cplx abar = first.a_sum / static_cast<double>(first.a_count);

  opts.abar = &abar;
  EngineAccum acc;
  run_engine(cfg, kind, bits, n_trials, seed, opts, acc);

  InstrumentedResult out;
  out.sim = result_from(acc, n_trials);
  for (int i = 1; i <= 5; ++i) {
    for (int j = i + 1; j <= 5; ++j) {
      const auto& mv = acc.cross_tr[pair_index(i, j)];
      out.cross.push_back({i, j, mv.mean(), mv.se()});
    }
  }
  out.quant_term_power = acc.t5_tr.mean();
  out.quant_term_power_se = std::sqrt(acc.t5_tr.var_of_mean());
  out.reconstruction_residual = acc.recon_residual;
  return out;
}

EstVarMc mc_estimation_variance(const SystemConfig& cfg, int bits, int n_realizations,
                                std::uint64_t seed) {
  cfg.validate();
  if (bits < 0 || bits > kMaxBits)
    throw std::invalid_argument("mc_estimation_variance: bits must lie in 0..8");
  if (n_realizations < 2)
    throw std::invalid_argument("mc_estimation_variance: need at least 2 realizations");

  const double prx = cfg.received_power();
  QuantizerSpec spec;
  double rho = 1.0, q_mse = 0.0, inner_gain = 0.0;
  if (bits > 0) {
    if (!(prx > 0.0))
      throw std::invalid_argument("mc_estimation_variance: quantized runs need positive power");
    spec = design_lloyd_max(bits);
    const BussgangStats bs = bussgang_decompose(spec, 0.0, prx);
    rho = bs.rho;
    q_mse = bs.q_mse;
    inner_gain = (1.0 / prx) / (kLevelScale * kLevelScale);
  }

  const PilotBook book = build_pilots(cfg.k_users, cfg.l_taps, cfg.pilot_excess);
  const int grid = 2 * cfg.l_taps;  // any grid >= L works; E|est|^2 is flat across it
  MeanVar var_acc;
  ComplexMeanVar cross_acc;

  for (int r = 0; r < n_realizations; ++r) {
    const ChannelRealization chan =
        draw_channel(cfg, grid, Rng::derive_seed(seed, 2 * static_cast<std::uint64_t>(r)));
    CMat pilot_rx =
        receive_block(cfg, chan, book.pilots, Rng::derive_seed(seed, 2 * static_cast<std::uint64_t>(r) + 1));
    if (bits > 0) quantize_block(pilot_rx, spec, inner_gain);
    const std::vector<cplx> obs = correlate(pilot_rx, book, cfg.l_taps, rho);
    const EstimationReport rep = lmmse_estimate(obs, cfg, q_mse, grid);

    double pwr = 0.0;
    cplx cross{0.0, 0.0};
    for (int m = 0; m < cfg.m_antennas; ++m) {
      for (int v = 0; v < grid; ++v) {
        const cplx e = rep.est(m, 0, v);
        pwr += std::norm(e);
        cross += e * std::conj(e - chan.freq_at(m, 0, v));
      }
    }
    const double inv = 1.0 / (static_cast<double>(cfg.m_antennas) * grid);
    var_acc.add(pwr * inv);
    cross_acc.add(cross * inv);
  }

  EstVarMc out;
  out.mean = var_acc.mean();
  out.se = std::sqrt(var_acc.var_of_mean());
  out.err_cross = cross_acc.mean();
  out.err_cross_se = cross_acc.se();
  out.n_samples = n_realizations * cfg.m_antennas;
  return out;
}

}  // namespace cqmimo
