#include "core/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "core/gaussian.hpp"
#include "core/rng.hpp"

namespace cqmimo {

namespace {

// The level design runs in extended precision: the Newton system below is as
// ill-conditioned as a discrete Laplacian (condition ~ 4^bits), so double
// residuals would stall the iteration above the default 1e-12 tolerance at
// bits = 8. Long double keeps the attainable floor well under it.
using real = long double;
constexpr real kInvSqrt2PiL = 0.398942280401432677939946L;

real pdf_l(real x) { return kInvSqrt2PiL * std::exp(-0.5L * x * x); }
real cdf_l(real x) { return 0.5L * std::erfc(-x * 0.707106781186547524401L); }

// Conditional mean and probability of N(0,1) over (a, b); bounds may be infinite.
struct Cell {
  real centroid;
  real prob;
};

Cell cell_stats(real a, real b) {
  const real fa = std::isinf(static_cast<double>(a)) ? 0.0L : pdf_l(a);
  const real fb = std::isinf(static_cast<double>(b)) ? 0.0L : pdf_l(b);
  const real ca = std::isinf(static_cast<double>(a)) ? (a < 0 ? 0.0L : 1.0L) : cdf_l(a);
  const real cb = std::isinf(static_cast<double>(b)) ? (b < 0 ? 0.0L : 1.0L) : cdf_l(b);
  const real p = cb - ca;
  return {(fa - fb) / p, p};
}

void check_bits(int bits) {
  if (bits < 1 || bits > kMaxBits) throw std::invalid_argument("quantizer: bits must lie in 1..8");
}

QuantizerSpec finalize(int bits, LevelFamily family, const std::vector<real>& lv) {
  const int n = 1 << bits;
  QuantizerSpec spec;
  spec.bits = bits;
  spec.family = family;
  spec.levels.resize(n);
  spec.thresholds.resize(n - 1);
  // Fold to exact symmetry before rounding to double so that the symmetric
  // invariant holds bit-for-bit.
  std::vector<real> sym(n);
  for (int i = 0; i < n; ++i) sym[i] = 0.5L * (lv[i] - lv[n - 1 - i]);
  for (int i = 0; i < n; ++i) spec.levels[i] = static_cast<double>(sym[i]);
  for (int i = 0; i + 1 < n; ++i)
    spec.thresholds[i] = static_cast<double>(0.5L * (sym[i] + sym[i + 1]));
  for (int i = 0; i + 1 < n; ++i)
    if (!(spec.levels[i] < spec.levels[i + 1]))
      throw std::runtime_error("quantizer: designed levels are not strictly increasing");
  return spec;
}

}  // namespace

QuantizerSpec design_lloyd_max(int bits, double tol) {
  check_bits(bits);
  if (!(tol > 0.0)) throw std::invalid_argument("design_lloyd_max: tol must be positive");
  const int n = 1 << bits;
  const real inf = std::numeric_limits<real>::infinity();

  // Start from the Gaussian quantiles of the cell midpoints: symmetric, ordered,
  // and close enough that plain centroid/midpoint sweeps enter the Newton basin.
  std::vector<real> lv(n);
  for (int i = 0; i < n; ++i)
    lv[i] = static_cast<real>(gauss::quantile((2.0 * i + 1.0) / (2.0 * n)));

  std::vector<real> edge(n + 1), next(n);
  int iterations = 0;
  auto fill_edges = [&] {
    edge[0] = -inf;
    edge[n] = inf;
    for (int i = 0; i + 1 < n; ++i) edge[i + 1] = 0.5L * (lv[i] + lv[i + 1]);
  };

  // Stage 1: fixed-point sweeps until the update is small.
  for (; iterations < kDesignIterationCap; ++iterations) {
    fill_edges();
    real delta = 0.0L;
    for (int i = 0; i < n; ++i) {
      next[i] = cell_stats(edge[i], edge[i + 1]).centroid;
      delta = std::max(delta, std::fabs(next[i] - lv[i]));
    }
    lv.swap(next);
    if (delta < 1e-3L) break;
  }

  // Stage 2: Newton on the stationarity residual F_i = centroid_i - l_i with its
  // tridiagonal Jacobian (each centroid depends on the two neighbouring
  // midpoints), solved by the Thomas recurrence. Quadratic convergence takes
  // the update below tol in a handful of steps.
  std::vector<real> F(n), lo(n), dg(n), up(n), cp(n), dp(n), delta(n);
  bool converged = false;
  for (; iterations < kDesignIterationCap; ++iterations) {
    fill_edges();
    for (int i = 0; i < n; ++i) {
      const real a = edge[i], b = edge[i + 1];
      const Cell cell = cell_stats(a, b);
      F[i] = cell.centroid - lv[i];
      lo[i] = up[i] = 0.0L;
      dg[i] = -1.0L;
      if (i > 0) {
        lo[i] = pdf_l(a) * (cell.centroid - a) / (2.0L * cell.prob);
        dg[i] += lo[i];
      }
      if (i + 1 < n) {
        up[i] = pdf_l(b) * (b - cell.centroid) / (2.0L * cell.prob);
        dg[i] += up[i];
      }
    }
    // Thomas forward sweep and back-substitution for J * delta = -F.
    cp[0] = up[0] / dg[0];
    dp[0] = -F[0] / dg[0];
    for (int i = 1; i < n; ++i) {
      const real m = dg[i] - lo[i] * cp[i - 1];
      cp[i] = up[i] / m;
      dp[i] = (-F[i] - lo[i] * dp[i - 1]) / m;
    }
    delta[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) delta[i] = dp[i] - cp[i] * delta[i + 1];

    real step = 0.0L;
    for (int i = 0; i < n; ++i) {
      step = std::max(step, std::fabs(delta[i]));
      lv[i] += delta[i];
    }
    if (step < static_cast<real>(tol)) {
      converged = true;
      ++iterations;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("design_lloyd_max: no convergence within the iteration cap");
  return finalize(bits, LevelFamily::OptimalLevels, lv);
}

QuantizerSpec design_uniform(int bits, double tol) {
  check_bits(bits);
  if (!(tol > 0.0)) throw std::invalid_argument("design_uniform: tol must be positive");
  const int n = 1 << bits;

  auto mse_for_step = [n](real step) {
    // Levels (i - (n-1)/2) * step, thresholds at multiples of step.
    real d = 0.0L;
    const real inf = std::numeric_limits<real>::infinity();
    for (int i = 0; i < n; ++i) {
      const real level = (i - 0.5L * (n - 1)) * step;
      const real a = (i == 0) ? -inf : (i - 0.5L * n) * step;
      const real b = (i == n - 1) ? inf : (i + 1 - 0.5L * n) * step;
      const real fa = std::isinf(static_cast<double>(a)) ? 0.0L : pdf_l(a);
      const real fb = std::isinf(static_cast<double>(b)) ? 0.0L : pdf_l(b);
      const real ca = std::isinf(static_cast<double>(a)) ? 0.0L : cdf_l(a);
      const real cb = std::isinf(static_cast<double>(b)) ? 1.0L : cdf_l(b);
      const real p = cb - ca;
      const real m1 = fa - fb;
      const real ta = std::isinf(static_cast<double>(a)) ? 0.0L : a * fa;
      const real tb = std::isinf(static_cast<double>(b)) ? 0.0L : b * fb;
      const real m2 = p + ta - tb;
      d += m2 - 2.0L * level * m1 + level * level * p;
    }
    return d;
  };

  // The MSE is unimodal in the step over this bracket for every bits <= 8
  // (diverges as step -> 0 and as step -> large), so golden-section applies.
  const real invphi = 0.6180339887498948482L;
  real a = 1e-3L, b = 4.0L;
  real c = b - invphi * (b - a);
  real d = a + invphi * (b - a);
  real fc = mse_for_step(c), fd = mse_for_step(d);
  while (b - a > static_cast<real>(tol)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = mse_for_step(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = mse_for_step(d);
    }
  }
  const real step = 0.5L * (a + b);

  std::vector<real> lv(n);
  for (int i = 0; i < n; ++i) lv[i] = (i - 0.5L * (n - 1)) * step;
  return finalize(bits, LevelFamily::UniformLevels, lv);
}

double gaussian_mse(const std::vector<double>& levels, const std::vector<double>& thresholds) {
  if (levels.empty() || thresholds.size() + 1 != levels.size())
    throw std::invalid_argument("gaussian_mse: need n levels and n-1 thresholds");
  const double inf = std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double a = (i == 0) ? -inf : thresholds[i - 1];
    const double b = (i == levels.size() - 1) ? inf : thresholds[i];
    d += gauss::interval_power_mass(a, b, 1.0) - 2.0 * levels[i] * gauss::interval_mean_mass(a, b, 1.0) +
         levels[i] * levels[i] * gauss::interval_prob(a, b, 1.0);
  }
  return d;
}

std::complex<double> quantize(std::complex<double> sample, double gain, const QuantizerSpec& spec) {
  if (!(gain > 0.0)) throw std::invalid_argument("quantize: gain must be positive");
  const double root_gain = std::sqrt(gain);
  auto one_dim = [&](double u) {
    // First threshold strictly greater than u: a sample exactly on a threshold
    // therefore maps to the higher-indexed level.
    const auto it = std::upper_bound(spec.thresholds.begin(), spec.thresholds.end(), u * root_gain);
    return spec.levels[static_cast<std::size_t>(it - spec.thresholds.begin())];
  };
  return {one_dim(sample.real()), one_dim(sample.imag())};
}

BussgangStats bussgang_decompose(const QuantizerSpec& spec, double agc_gain_db, double rx_power) {
  if (!(rx_power > 0.0)) throw std::invalid_argument("bussgang_decompose: rx_power must be positive");
  if (spec.levels.empty()) throw std::invalid_argument("bussgang_decompose: empty quantizer");
  const double g = std::pow(10.0, agc_gain_db / 10.0);  // A * rx_power
  const double gain = g / rx_power;                     // the AGC value A itself
  const double sigma_d = std::sqrt(0.5 * g);            // per-dimension std of sqrt(A)*y
  const double scale = 0.7071067811865475244;           // per-dimension level scale 1/sqrt(2)
  const double inf = std::numeric_limits<double>::infinity();

  // Per-dimension moments of the quantizer output against the scaled input:
  // m1 = E[q_I * u], m2 = E[q_I^2] with u ~ N(0, sigma_d^2).
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    const double a = (i == 0) ? -inf : scale * spec.thresholds[i - 1];
    const double b = (i + 1 == spec.levels.size()) ? inf : scale * spec.thresholds[i];
    const double level = scale * spec.levels[i];
    m1 += level * gauss::interval_mean_mass(a, b, sigma_d);
    m2 += level * level * gauss::interval_prob(a, b, sigma_d);
  }

  const double corr = 2.0 * m1 / std::sqrt(gain);  // E[q y*], real by symmetry
  const double qpow = 2.0 * m2;                    // E[|q|^2]

  BussgangStats out;
  out.rho = corr / rx_power;
  out.err_var = qpow - corr * corr / rx_power;
  out.q_mse = out.err_var / (out.rho * out.rho);
  out.input_power = g;
  return out;
}

double matched_distortion(int bits, double rx_power) {
  if (bits == 0) return 0.0;
  if (bits < 0 || bits > kMaxBits)
    throw std::invalid_argument("matched_distortion: bits must lie in 0..8 (0 = unquantized)");
  static const std::vector<QuantizerSpec> cache = [] {
    std::vector<QuantizerSpec> specs(kMaxBits + 1);
    for (int b = 1; b <= kMaxBits; ++b) specs[b] = design_lloyd_max(b);
    return specs;
  }();
  return bussgang_decompose(cache[bits], 0.0, rx_power).q_mse;
}

std::vector<AgcPoint> agc_sweep(const QuantizerSpec& spec, const std::vector<double>& db_range,
                                double rx_power) {
  if (db_range.empty()) throw std::invalid_argument("agc_sweep: empty range");
  std::vector<AgcPoint> out;
  out.reserve(db_range.size());
  for (const double db : db_range)
    out.push_back({db, bussgang_decompose(spec, db, rx_power).q_mse});
  return out;
}

McBussgangStats mc_bussgang_oracle(const QuantizerSpec& spec, double agc_gain_db, double rx_power,
                                   std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 100000) throw std::invalid_argument("mc_bussgang_oracle: need at least 1e5 samples");
  if (!(rx_power > 0.0)) throw std::invalid_argument("mc_bussgang_oracle: rx_power must be positive");
  const double g = std::pow(10.0, agc_gain_db / 10.0);
  const double gain = g / rx_power;
  const double scale = 0.7071067811865475244;
  // quantize() applies canonical levels; the complex design uses levels scaled
  // by 1/sqrt(2), so feed it gain/scale^2 and rescale the output.
  const double inner_gain = gain / (scale * scale);

  Rng rng(seed);
  const int n_batches = 50;
  const std::size_t batch = n_samples / n_batches;
  double sum_qy = 0.0, sum_qq = 0.0, sum_yy = 0.0;
  double q_batches[50];
  for (int ib = 0; ib < n_batches; ++ib) {
    double b_qy = 0.0, b_qq = 0.0, b_yy = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      const std::complex<double> y = std::sqrt(rx_power) * rng.next_cnormal();
      const std::complex<double> q = scale * quantize(y, inner_gain, spec);
      // E[q y*] is real by symmetry; accumulate only the real part.
      b_qy += q.real() * y.real() + q.imag() * y.imag();
      b_qq += std::norm(q);
      b_yy += std::norm(y);
    }
    q_batches[ib] = rx_power * (b_qq * b_yy / (b_qy * b_qy) - 1.0);
    sum_qy += b_qy;
    sum_qq += b_qq;
    sum_yy += b_yy;
  }
  const double n = static_cast<double>(batch * n_batches);
  const double corr = sum_qy / n;
  const double m_y = sum_yy / n;
  const double m_q = sum_qq / n;

  McBussgangStats out;
  out.stats.rho = corr / m_y;
  out.stats.err_var = m_q - corr * corr / m_y;
  out.stats.q_mse = rx_power * (m_q * m_y / (corr * corr) - 1.0);
  out.stats.input_power = g;
  double mean = 0.0, var = 0.0;
  for (const double q : q_batches) mean += q;
  mean /= n_batches;
  for (const double q : q_batches) var += (q - mean) * (q - mean);
  var /= (n_batches - 1);
  out.q_mse_se = std::sqrt(var / n_batches);
  return out;
}

}  // namespace cqmimo
