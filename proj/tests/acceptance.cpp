// Acceptance gate: runs the ten release criteria and prints one PASS/FAIL
// line per criterion with the measured values. Exits nonzero if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/airlink.hpp"
#include "core/estimation.hpp"
#include "core/montecarlo.hpp"
#include "core/quantizer.hpp"
#include "core/rate.hpp"

using cqmimo::CombinerKind;
using cqmimo::LevelFamily;
using cqmimo::QuantizerSpec;
using cqmimo::SystemConfig;

namespace {

bool g_all_ok = true;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!ok) g_all_ok = false;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double matched_q(const QuantizerSpec& spec) {
  return cqmimo::bussgang_decompose(spec, 0.0, 1.0).q_mse;
}

// ---- criterion 1: distortion table ------------------------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double optimal[5] = {0.5708, 0.1331, 0.03576, 0.009573, 0.002492};
  const double uniform[5] = {0.5708, 0.1349, 0.03889, 0.01166, 0.003506};
  double worst = 0.0;
  for (int b = 1; b <= 5; ++b) {
    worst = std::max(worst, std::abs(matched_q(cqmimo::design_lloyd_max(b)) - optimal[b - 1]));
    worst = std::max(worst, std::abs(matched_q(cqmimo::design_uniform(b)) - uniform[b - 1]));
  }
  const double dt = seconds_since(t0);
  report(1, worst < 5e-5 && dt < 1.0,
         "ten distortion table values, worst |err| = " + fmt(worst) + " (tol 5e-5), " +
             fmt(dt) + " s (budget 1 s)");
}

// ---- criterion 2: one-bit identity -------------------------------------------

void criterion_2() {
  const QuantizerSpec one = cqmimo::design_lloyd_max(1);
  const double target = 3.14159265358979323846 / 2.0 - 1.0;
  double worst = 0.0;
  for (double prx : {1.0, 2.5}) {
    for (int i = -40; i <= 40; ++i) {
      const double db = 0.25 * i;
      const double q = cqmimo::bussgang_decompose(one, db, prx).q_mse / prx;
      worst = std::max(worst, std::abs(q - target));
    }
  }
  report(2, worst < 1e-10,
         "one-bit distortion = pi/2 - 1 across [-10, +10] dB, worst |err| = " + fmt(worst) +
             " (tol 1e-10)");
}

// ---- criterion 3: gain-mismatch anchors ---------------------------------------

void criterion_3() {
  const QuantizerSpec four = cqmimo::design_lloyd_max(4);
  const struct {
    double db, expected;
  } anchors[] = {{-8.0, 0.036781}, {-1.0, 0.010142}, {0.0, 0.009573},
                 {5.0, 0.038561},  {10.0, 0.14168}};
  double worst = 0.0;
  for (const auto& a : anchors)
    worst = std::max(worst,
                     std::abs(cqmimo::bussgang_decompose(four, a.db, 1.0).q_mse - a.expected));

  // Qualitative claim: the four-bit distortion stays below the three-bit
  // optimum over the stated mismatch range. The published -8 and +5 dB anchor
  // values themselves sit just above the line, so the crossings are bracketed
  // at the endpoints and the interior grid is checked strictly.
  const double line = 0.03576 + 5e-4;
  bool interior_ok = true;
  for (int db = -7; db <= 4; ++db)
    interior_ok = interior_ok && cqmimo::bussgang_decompose(four, db, 1.0).q_mse < line;
  const bool bracket_ok = cqmimo::bussgang_decompose(four, -8.0, 1.0).q_mse > line &&
                          cqmimo::bussgang_decompose(four, 5.0, 1.0).q_mse > line;
  report(3, worst < 5e-4 && interior_ok && bracket_ok,
         "four-bit mismatch anchors worst |err| = " + fmt(worst) +
             " (tol 5e-4); below three-bit line on [-7, +4] dB with crossings bracketed at "
             "-8 and +5 dB");
}

// ---- criterion 4: pilot orthogonality -----------------------------------------

void criterion_4() {
  double worst = 0.0;
  int grids = 0;
  for (int k = 1; k <= 8; ++k) {
    for (int l : {1, 2, 3, 4, 5, 8, 16, 32}) {
      for (int mu = 1; mu <= 4; ++mu) {
        if (mu * k * l > 512) continue;
        worst = std::max(worst, cqmimo::verify_pilots(cqmimo::build_pilots(k, l, mu), l));
        ++grids;
      }
    }
  }
  report(4, worst < 1e-9,
         "pilot correlation violation over " + std::to_string(grids) +
             " (K, L, mu) grids, worst = " + fmt(worst) + " (tol 1e-9)");
}

// ---- criterion 5: estimation-variance cross-validation -------------------------

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_z = 0.0;
  int cells = 0;
  int min_samples = 1 << 30;
  for (int bits : {0, 1, 3}) {
    for (double snr : {-10.0, 0.0, 10.0}) {
      for (int mu : {1, 2}) {
        const SystemConfig cfg = cqmimo::make_uniform_config(16, 4, 8, mu, 16, snr);
        const double q =
            bits == 0 ? 0.0 : cqmimo::matched_distortion(bits, cfg.received_power());
        const double c = cqmimo::estimation_variance(cfg, q)[0];
        const cqmimo::EstVarMc mc = cqmimo::mc_estimation_variance(
            cfg, bits, 1250, 47000 + 1000 * bits + 10 * mu + static_cast<int>(snr) + 10);
        min_samples = std::min(min_samples, mc.n_samples);
        worst_z = std::max(worst_z, std::abs(mc.mean - c) / mc.se);
        ++cells;
      }
    }
  }
  const double dt = seconds_since(t0);
  report(5, worst_z < 3.0 && min_samples >= 20000 && dt < 60.0,
         "closed-form estimation variance vs simulation over " + std::to_string(cells) +
             " cells (>= " + std::to_string(min_samples) + " samples each), worst deviation " +
             fmt(worst_z) + " standard errors (limit 3), " + fmt(dt) + " s (budget 60 s)");
}

// ---- criterion 6: rate-formula validation ---------------------------------------

void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const SystemConfig cfg = cqmimo::make_uniform_config(32, 4, 16, 1, 256, 0.0);
  double worst = 0.0;
  for (CombinerKind kind : {CombinerKind::MaximumRatio, CombinerKind::ZeroForcing}) {
    for (int bits : {0, 1, 3}) {
      const double q =
          bits == 0 ? 0.0 : cqmimo::matched_distortion(bits, cfg.received_power());
      const double analytic =
          cqmimo::analytic_rate(cfg, kind, q, cqmimo::estimation_variance(cfg, q))[0].rate;
      const cqmimo::SimResult sim = cqmimo::run_trials(cfg, kind, bits, 400, 42);
      worst = std::max(worst, std::abs(sim.users[0].rate - analytic) / analytic);
    }
  }
  const double dt = seconds_since(t0);
  report(6, worst < 0.10 && dt < 180.0,
         "simulated rate vs closed form over 6 cells, worst relative error " +
             fmt(100.0 * worst) + "% (limit 10%), " + fmt(dt) + " s (budget 180 s)");
}

// ---- criterion 7: quantization loss at the 3.5 bpcu operating point --------------

void criterion_7() {
  const SystemConfig tmpl = cqmimo::make_uniform_config(100, 5, 8, 1, 64, 0.0);
  const double snr =
      cqmimo::find_snr_for_rate(tmpl, CombinerKind::ZeroForcing, 3.5, -30.0, 10.0, 0.01);
  const SystemConfig cfg = cqmimo::make_uniform_config(100, 5, 8, 1, 64, snr);
  auto rate_bits = [&](int bits) {
    const double q = bits == 0 ? 0.0 : cqmimo::matched_distortion(bits, cfg.received_power());
    return cqmimo::analytic_rate(cfg, CombinerKind::ZeroForcing, q,
                                 cqmimo::estimation_variance(cfg, q))[0]
        .rate;
  };
  const double r0 = rate_bits(0);
  const double loss3 = 100.0 * (1.0 - rate_bits(3) / r0);
  const double loss1 = 100.0 * (1.0 - rate_bits(1) / r0);
  report(7,
         std::abs(r0 - 3.5) < 0.02 && std::abs(loss3 - 4.0) <= 2.0 &&
             std::abs(loss1 - 40.0) <= 5.0,
         "at the 3.5 bpcu operating point (snr " + fmt(snr) + " dB): three-bit loss " +
             fmt(loss3) + "% (4 +/- 2), one-bit loss " + fmt(loss1) + "% (40 +/- 5)");
}

// ---- criterion 8: near-far degradation -------------------------------------------

void criterion_8() {
  const SystemConfig cfg = cqmimo::make_uniform_config(100, 5, 8, 1, 64, -5.0);
  auto degradation = [&](int bits) {
    const double r0 = cqmimo::near_far_rate(cfg, CombinerKind::ZeroForcing, bits, 0.0).rate;
    const double r10 = cqmimo::near_far_rate(cfg, CombinerKind::ZeroForcing, bits, 10.0).rate;
    return 100.0 * (1.0 - r10 / r0);
  };
  const double d0 = degradation(0);
  const double d1 = degradation(1);
  report(8, std::abs(d0 - 15.0) <= 4.0 && std::abs(d1 - 50.0) <= 6.0,
         "weak-user degradation under a +10 dB neighbor: unquantized " + fmt(d0) +
             "% (15 +/- 4), one-bit " + fmt(d1) + "% (50 +/- 6)");
}

// ---- criterion 9: frequency-flat caveat -------------------------------------------

void criterion_9() {
  // The shortfall is signed: in the flat channel the closed form over-predicts
  // the simulated rate; that optimism shrinks monotonically with delay spread
  // (and may slightly overshoot past zero once the channel is rich).
  std::vector<double> gap;
  double emp1 = 0.0, ana1 = 0.0;
  for (int l : {1, 4, 16}) {
    const SystemConfig cfg = cqmimo::make_uniform_config(32, 1, l, 1, 64, 20.0);
    const cqmimo::CaveatReport rep = cqmimo::flat_channel_caveat(cfg, 1, 800, 31);
    gap.push_back((rep.analytic_rate - rep.empirical_rate) / rep.analytic_rate);
    if (l == 1) {
      emp1 = rep.empirical_rate;
      ana1 = rep.analytic_rate;
    }
  }
  const bool detected = emp1 < 0.8 * ana1;
  const bool monotone = gap[0] > gap[1] && gap[1] > gap[2];
  report(9, detected && monotone && std::abs(gap[2]) < 0.15,
         "flat-channel failure detected (empirical " + fmt(emp1) + " < 0.8 x analytic " +
             fmt(ana1) + "); prediction shortfall " + fmt(gap[0]) + " -> " + fmt(gap[1]) +
             " -> " + fmt(gap[2]) + " over L in {1, 4, 16} (final magnitude limit 0.15)");
}

// ---- criterion 10: property suite ---------------------------------------------------

bool lloyd_local_minimality() {
  for (int b = 1; b <= 5; ++b) {
    const QuantizerSpec spec = cqmimo::design_lloyd_max(b);
    const double base = cqmimo::gaussian_mse(spec.levels, spec.thresholds);
    for (std::size_t i = 0; i < spec.levels.size(); ++i) {
      for (double scale : {0.99, 1.01}) {
        std::vector<double> levels = spec.levels;
        levels[i] *= scale;
        std::sort(levels.begin(), levels.end());
        std::vector<double> thresholds(levels.size() - 1);
        for (std::size_t t = 0; t < thresholds.size(); ++t)
          thresholds[t] = 0.5 * (levels[t] + levels[t + 1]);
        if (cqmimo::gaussian_mse(levels, thresholds) < base - 1e-12) return false;
      }
    }
  }
  return true;
}

bool optimal_beats_uniform() {
  for (int b = 1; b <= 8; ++b)
    if (matched_q(cqmimo::design_lloyd_max(b)) > matched_q(cqmimo::design_uniform(b)) + 1e-12)
      return false;
  return true;
}

bool rate_monotonicity() {
  const SystemConfig cfg = cqmimo::make_uniform_config(100, 5, 8, 1, 64, 0.0);
  std::vector<double> by_bits;
  for (int b : {1, 2, 3, 4, 5, 0}) {
    const double q = b == 0 ? 0.0 : cqmimo::matched_distortion(b, cfg.received_power());
    by_bits.push_back(cqmimo::analytic_rate(cfg, CombinerKind::ZeroForcing, q,
                                            cqmimo::estimation_variance(cfg, q))[0]
                          .rate);
  }
  for (std::size_t i = 1; i < by_bits.size(); ++i)
    if (by_bits[i] <= by_bits[i - 1]) return false;

  double prev = -1.0;
  for (int s = -10; s <= 10; s += 2) {
    const SystemConfig at = cqmimo::make_uniform_config(100, 5, 8, 1, 64, s);
    const double q = cqmimo::matched_distortion(3, at.received_power());
    const double r = cqmimo::analytic_rate(at, CombinerKind::ZeroForcing, q,
                                           cqmimo::estimation_variance(at, q))[0]
                         .rate;
    if (r <= prev) return false;
    prev = r;
  }
  return true;
}

bool csv_determinism() {
  const std::string base = std::string(CQMIMO_CLI_PATH) +
                           " validate --kinds zf --bits 1 --m-antennas 8 --k-users 2"
                           " --l-taps 4 --trials 5 --n-data 16 --seed 11 --out ";
  const std::string pa = "/tmp/cqmimo_acceptance_a.csv";
  const std::string pb = "/tmp/cqmimo_acceptance_b.csv";
  if (std::system((base + pa).c_str()) != 0) return false;
  if (std::system((base + pb).c_str()) != 0) return false;
  std::ifstream fa(pa, std::ios::binary), fb(pb, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  std::remove(pa.c_str());
  std::remove(pb.c_str());
  return fa.good() && fb.good() && sa.str() == sb.str() && !sa.str().empty();
}

bool variance_halving() {
  const SystemConfig cfg = cqmimo::make_uniform_config(8, 2, 8, 1, 32, 0.0);
  const cqmimo::SimResult small = cqmimo::run_trials(cfg, CombinerKind::MaximumRatio, 2, 150, 51);
  const cqmimo::SimResult big = cqmimo::run_trials(cfg, CombinerKind::MaximumRatio, 2, 300, 51);
  for (int k = 0; k < 2; ++k) {
    const double rc = std::pow(small.users[k].corr_se / big.users[k].corr_se, 2);
    const double rm =
        std::pow(small.users[k].second_moment_se / big.users[k].second_moment_se, 2);
    if (rc <= 1.0 || rc >= 4.0 || rm <= 1.0 || rm >= 4.0) return false;
  }
  return true;
}

void criterion_10() {
  const bool a = lloyd_local_minimality();
  const bool b = optimal_beats_uniform();
  const bool c = rate_monotonicity();
  const bool d = csv_determinism();
  const bool e = variance_halving();
  std::string detail = "properties: level-placement local minimality ";
  detail += a ? "ok" : "VIOLATED";
  detail += ", optimal <= uniform distortion ";
  detail += b ? "ok" : "VIOLATED";
  detail += ", rate monotone in resolution and snr ";
  detail += c ? "ok" : "VIOLATED";
  detail += ", byte-identical csv ";
  detail += d ? "ok" : "VIOLATED";
  detail += ", moment-variance halving ";
  detail += e ? "ok" : "VIOLATED";
  report(10, a && b && c && d && e, detail);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  struct {
    int n;
    void (*fn)();
  } criteria[] = {{1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
                  {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
                  {9, criterion_9}, {10, criterion_10}};
  for (const auto& c : criteria) {
    try {
      c.fn();
    } catch (const std::exception& e) {
      report(c.n, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%s in %.1f s\n", g_all_ok ? "ALL CRITERIA PASSED" : "CRITERIA FAILED",
              seconds_since(t0));
  return g_all_ok ? 0 : 1;
}
