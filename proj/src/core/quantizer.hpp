// Symmetric scalar quantizers for unit-variance Gaussian input and their
// Bussgang decomposition. A complex sample is quantized per real dimension
// against the same level set (scaled by 1/sqrt(2) so that the pair of
// dimensions matches a unit-power complex design). The decomposition splits
// the quantizer output into a correlated replica rho*y of the input plus an
// uncorrelated distortion; q_mse = err_var / rho^2 is the additive-noise
// equivalent used throughout the rate formulas.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cqmimo {

enum class LevelFamily { OptimalLevels, UniformLevels };

struct QuantizerSpec {
  int bits = 0;
  LevelFamily family = LevelFamily::OptimalLevels;
  std::vector<double> levels;      // 2^bits values, strictly increasing, symmetric about 0
  std::vector<double> thresholds;  // 2^bits - 1 decision boundaries, midpoints of levels
};

inline constexpr int kMaxBits = 8;
inline constexpr int kDesignIterationCap = 10000;

// Minimum-MSE (Lloyd-Max) levels for a unit-variance real Gaussian. Iterates
// centroid/midpoint updates with a Newton polish; stops once the largest level
// update falls below tol. Throws std::runtime_error if the iteration cap is hit.
QuantizerSpec design_lloyd_max(int bits, double tol = 1e-12);

// Uniformly spaced levels (i - 1/2)*step with the step chosen by golden-section
// minimization of the Gaussian MSE; tol is the bracket width at termination.
QuantizerSpec design_uniform(int bits, double tol = 1e-12);

// E[(y - q(y))^2] for y ~ N(0,1), in closed form from interval moments.
double gaussian_mse(const std::vector<double>& levels, const std::vector<double>& thresholds);

// Nearest level to sqrt(gain) * sample, per real dimension. A sample exactly on
// a threshold maps to the higher (more positive) level.
std::complex<double> quantize(std::complex<double> sample, double gain, const QuantizerSpec& spec);

struct BussgangStats {
  double rho = 0.0;          // correlation gain between input and quantized output
  double err_var = 0.0;      // variance of the uncorrelated distortion
  double q_mse = 0.0;        // err_var / rho^2
  double input_power = 0.0;  // A * rx_power presented to the quantizer
};

// Closed-form decomposition for a circularly-symmetric Gaussian input of power
// rx_power, with the AGC set agc_gain_db away from its matched value 1/rx_power.
BussgangStats bussgang_decompose(const QuantizerSpec& spec, double agc_gain_db, double rx_power);

// Matched-AGC distortion of the minimum-MSE design at the given received power;
// bits = 0 means no quantization (returns 0). Designs are cached process-wide.
double matched_distortion(int bits, double rx_power);

struct AgcPoint {
  double gain_db = 0.0;
  double q_mse = 0.0;
};

// bussgang_decompose mapped over a list of AGC offsets.
std::vector<AgcPoint> agc_sweep(const QuantizerSpec& spec, const std::vector<double>& db_range,
                                double rx_power);

struct McBussgangStats {
  BussgangStats stats;
  double q_mse_se = 0.0;  // batch-means standard error of q_mse
};

// Sampling estimate of the same moments, for cross-checking the closed form.
McBussgangStats mc_bussgang_oracle(const QuantizerSpec& spec, double agc_gain_db,
                                   double rx_power, std::size_t n_samples, std::uint64_t seed);

}  // namespace cqmimo
