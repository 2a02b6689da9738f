// Command-line front end for the cqmimo shared library. Every subcommand
// emits CSV: `#` comment lines carrying the tool version, subcommand, and the
// full effective parameter set, then a header row, then data rows with 10
// significant digits. Output is byte-identical for identical invocation and
// seed.
#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cqmimo/cqmimo.h"

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Throws with the library's diagnostic on any non-OK status.
void check(cqm_status st) {
  if (st != CQM_OK) {
    std::string msg = cqm_status_str(st);
    const char* detail = cqm_last_error();
    if (detail != nullptr && detail[0] != '\0') msg += std::string(": ") + detail;
    throw std::runtime_error(msg);
  }
}

struct QuantizerHandle {
  cqm_quantizer* q = nullptr;
  QuantizerHandle(int bits, cqm_family family) { check(cqm_quantizer_design(bits, family, &q)); }
  ~QuantizerHandle() { cqm_quantizer_free(q); }
  QuantizerHandle(const QuantizerHandle&) = delete;
  QuantizerHandle& operator=(const QuantizerHandle&) = delete;
};

struct SystemHandle {
  cqm_system* sys = nullptr;
  SystemHandle(int m, int k, int l, int mu, int n_data, double snr_db) {
    check(cqm_system_create_uniform(m, k, l, mu, n_data, snr_db, 1.0, &sys));
  }
  ~SystemHandle() { cqm_system_free(sys); }
  SystemHandle(const SystemHandle&) = delete;
  SystemHandle& operator=(const SystemHandle&) = delete;
};

class CsvOut {
 public:
  CsvOut(const std::string& path, const std::string& subcommand, std::uint64_t seed) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
    }
    comment(std::string("cqmimo_cli ") + cqm_version());
    comment("subcommand: " + subcommand);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%" PRIu64, seed);
    comment(std::string("seed: ") + buf);
  }

  void param(const std::string& key, const std::string& value) {
    comment(key + ": " + value);
  }
  void param(const std::string& key, double value) { param(key, fmt(value)); }
  void param(const std::string& key, int value) { param(key, std::to_string(value)); }

  void comment(const std::string& line) { stream() << "# " << line << "\n"; }

  void row(const std::vector<std::string>& cells) {
    std::ostream& os = stream();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i != 0) os << ',';
      os << cells[i];
    }
    os << '\n';
  }

 private:
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  std::ofstream file_;
};

std::string bits_label(int bits) {
  return bits == 0 ? "none" : std::to_string(bits) + "bit";
}

std::vector<int> parse_bits_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "none") {
      out.push_back(0);
    } else {
      std::size_t pos = 0;
      int b = 0;
      try {
        b = std::stoi(tok, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != tok.size() || b < 1 || b > 8)
        throw std::runtime_error("bad bits entry '" + tok + "' (use none or 1..8)");
      out.push_back(b);
    }
  }
  if (out.empty()) throw std::runtime_error("empty bits list");
  return out;
}

std::vector<cqm_combiner> parse_kind_list(const std::string& text) {
  std::vector<cqm_combiner> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "mr" || tok == "mrc")
      out.push_back(CQM_COMBINER_MR);
    else if (tok == "zf")
      out.push_back(CQM_COMBINER_ZF);
    else
      throw std::runtime_error("bad combiner '" + tok + "' (use mr, mrc, or zf)");
  }
  if (out.empty()) throw std::runtime_error("empty combiner list");
  return out;
}

cqm_combiner parse_kind(const std::string& text) {
  const std::vector<cqm_combiner> v = parse_kind_list(text);
  if (v.size() != 1) throw std::runtime_error("expected a single combiner");
  return v.front();
}

std::string kind_label(cqm_combiner kind) {
  return kind == CQM_COMBINER_ZF ? "zf" : "mrc";
}

std::vector<double> db_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::runtime_error("step must be positive");
  if (hi < lo) throw std::runtime_error("range is empty (max < min)");
  std::vector<double> grid;
  // Integer-indexed grid so accumulated rounding cannot drop the endpoint.
  const int n = static_cast<int>((hi - lo) / step + 1e-9);
  for (int i = 0; i <= n; ++i) grid.push_back(lo + i * step);
  return grid;
}

double normalized_q_mse(int bits, cqm_family family) {
  QuantizerHandle q(bits, family);
  double q_mse = 0.0;
  check(cqm_bussgang(q.q, 0.0, 1.0, nullptr, nullptr, &q_mse, nullptr));
  return q_mse;
}

double to_db(double x) { return 10.0 * std::log10(x); }

// ---- Subcommand parameter blocks -------------------------------------------

struct QmseArgs {};

struct AgcArgs {
  int bits = 4;
  std::string family = "optimal";
  double db_min = -10.0, db_max = 10.0, step = 1.0;
};

struct EstvarArgs {
  std::string mode = "snr_sweep";
  int k_users = 5, l_taps = 8, mu = 1;
  double snr_db = -10.0;  // fixed SNR for mu_sweep
  double snr_min = -20.0, snr_max = 20.0, snr_step = 1.0;
  int mu_min = 1, mu_max = 20, mu_step = 1;
  std::string bits = "none,1,2,3";
};

struct RatesArgs {
  std::string kind = "zf";
  int m_antennas = 100, k_users = 5, l_taps = 8, mu = 1;
  double snr_min = -10.0, snr_max = 10.0, snr_step = 1.0;
  std::string bits = "none,1,2,3,4,5";
};

struct NearfarArgs {
  std::string kind = "zf";
  int m_antennas = 100, k_users = 5, l_taps = 8, mu = 1;
  double snr_db = -5.0;
  double extra_min = 0.0, extra_max = 15.0, extra_step = 1.0;
  std::string bits = "none,1,2,3";
};

struct ValidateArgs {
  std::string kinds = "mrc,zf";
  std::string bits = "none,1,3";
  int m_antennas = 32, k_users = 4, l_taps = 16, mu = 1;
  double snr_db = 0.0;
  int trials = 400, n_data = 256;
};

// ---- Subcommand bodies ------------------------------------------------------

void run_qmse(const std::string& out, std::uint64_t seed) {
  CsvOut csv(out, "qmse", seed);
  csv.row({"bits", "family", "normalized_q_mse"});
  for (int bits = 1; bits <= 5; ++bits) {
    csv.row({std::to_string(bits), "optimal", fmt(normalized_q_mse(bits, CQM_FAMILY_OPTIMAL))});
    csv.row({std::to_string(bits), "uniform", fmt(normalized_q_mse(bits, CQM_FAMILY_UNIFORM))});
  }
}

void run_agc(const AgcArgs& a, const std::string& out, std::uint64_t seed) {
  cqm_family family;
  if (a.family == "optimal")
    family = CQM_FAMILY_OPTIMAL;
  else if (a.family == "uniform")
    family = CQM_FAMILY_UNIFORM;
  else
    throw std::runtime_error("bad family '" + a.family + "' (use optimal or uniform)");

  const std::vector<double> grid = db_grid(a.db_min, a.db_max, a.step);
  CsvOut csv(out, "agc", seed);
  csv.param("bits", a.bits);
  csv.param("family", a.family);
  csv.param("db_min", a.db_min);
  csv.param("db_max", a.db_max);
  csv.param("step", a.step);

  QuantizerHandle q(a.bits, family);
  const double reference = normalized_q_mse(3, CQM_FAMILY_OPTIMAL);
  csv.row({"gain_db", "normalized_q_mse", "opt_3bit_reference"});
  for (double db : grid) {
    double q_mse = 0.0;
    check(cqm_bussgang(q.q, db, 1.0, nullptr, nullptr, &q_mse, nullptr));
    csv.row({fmt(db), fmt(q_mse), fmt(reference)});
  }
}

void run_estvar(const EstvarArgs& a, const std::string& out, std::uint64_t seed) {
  const std::vector<int> bits_list = parse_bits_list(a.bits);
  CsvOut csv(out, "estvar", seed);
  csv.param("mode", a.mode);
  csv.param("k_users", a.k_users);
  csv.param("l_taps", a.l_taps);
  csv.param("bits", a.bits);

  // c depends on the load and pilot excess only, so one antenna suffices.
  auto c_db = [&](int mu, double snr_db, int bits) {
    SystemHandle sys(1, a.k_users, a.l_taps, mu, a.l_taps, snr_db);
    double prx = 0.0;
    check(cqm_system_received_power(sys.sys, &prx));
    double q = 0.0;
    check(cqm_matched_distortion(bits, prx, &q));
    std::vector<double> c(a.k_users);
    check(cqm_estimation_variance(sys.sys, q, c.data(), c.size()));
    return to_db(c.front());
  };

  std::vector<std::string> header;
  for (int b : bits_list) header.push_back("c_db_" + bits_label(b));

  if (a.mode == "snr_sweep") {
    csv.param("mu", a.mu);
    csv.param("snr_min", a.snr_min);
    csv.param("snr_max", a.snr_max);
    csv.param("snr_step", a.snr_step);
    header.insert(header.begin(), "snr_db");
    csv.row(header);
    for (double snr : db_grid(a.snr_min, a.snr_max, a.snr_step)) {
      std::vector<std::string> cells{fmt(snr)};
      for (int b : bits_list) cells.push_back(fmt(c_db(a.mu, snr, b)));
      csv.row(cells);
    }
  } else if (a.mode == "mu_sweep") {
    csv.param("snr_db", a.snr_db);
    csv.param("mu_min", a.mu_min);
    csv.param("mu_max", a.mu_max);
    csv.param("mu_step", a.mu_step);
    if (a.mu_min < 1 || a.mu_step < 1 || a.mu_max < a.mu_min)
      throw std::runtime_error("bad mu range");
    header.insert(header.begin(), "mu");
    csv.row(header);
    for (int mu = a.mu_min; mu <= a.mu_max; mu += a.mu_step) {
      std::vector<std::string> cells{std::to_string(mu)};
      for (int b : bits_list) cells.push_back(fmt(c_db(mu, a.snr_db, b)));
      csv.row(cells);
    }
  } else {
    throw std::runtime_error("bad mode '" + a.mode + "' (use snr_sweep or mu_sweep)");
  }
}

void run_rates(const RatesArgs& a, const std::string& out, std::uint64_t seed) {
  const cqm_combiner kind = parse_kind(a.kind);
  const std::vector<int> bits_list = parse_bits_list(a.bits);
  CsvOut csv(out, "rates", seed);
  csv.param("kind", kind_label(kind));
  csv.param("m_antennas", a.m_antennas);
  csv.param("k_users", a.k_users);
  csv.param("l_taps", a.l_taps);
  csv.param("mu", a.mu);
  csv.param("snr_min", a.snr_min);
  csv.param("snr_max", a.snr_max);
  csv.param("snr_step", a.snr_step);
  csv.param("bits", a.bits);

  std::vector<std::string> header{"snr_db"};
  for (int b : bits_list) header.push_back("rate_" + bits_label(b));
  csv.row(header);

  std::vector<cqm_rate_report> rep(a.k_users);
  for (double snr : db_grid(a.snr_min, a.snr_max, a.snr_step)) {
    SystemHandle sys(a.m_antennas, a.k_users, a.l_taps, a.mu, a.l_taps, snr);
    std::vector<std::string> cells{fmt(snr)};
    for (int b : bits_list) {
      check(cqm_analytic_rate_bits(sys.sys, kind, b, rep.data(), rep.size()));
      cells.push_back(fmt(rep.front().rate));
    }
    csv.row(cells);
  }
}

void run_nearfar(const NearfarArgs& a, const std::string& out, std::uint64_t seed) {
  const cqm_combiner kind = parse_kind(a.kind);
  const std::vector<int> bits_list = parse_bits_list(a.bits);
  CsvOut csv(out, "nearfar", seed);
  csv.param("kind", kind_label(kind));
  csv.param("m_antennas", a.m_antennas);
  csv.param("k_users", a.k_users);
  csv.param("l_taps", a.l_taps);
  csv.param("mu", a.mu);
  csv.param("snr_db", a.snr_db);
  csv.param("extra_min", a.extra_min);
  csv.param("extra_max", a.extra_max);
  csv.param("extra_step", a.extra_step);
  csv.param("bits", a.bits);

  SystemHandle sys(a.m_antennas, a.k_users, a.l_taps, a.mu, a.l_taps, a.snr_db);
  std::vector<std::string> header{"strong_extra_db"};
  for (int b : bits_list) header.push_back("weak_rate_" + bits_label(b));
  csv.row(header);

  for (double extra : db_grid(a.extra_min, a.extra_max, a.extra_step)) {
    std::vector<std::string> cells{fmt(extra)};
    for (int b : bits_list) {
      double rate = 0.0;
      check(cqm_near_far_rate(sys.sys, kind, b, extra, &rate));
      cells.push_back(fmt(rate));
    }
    csv.row(cells);
  }
}

void run_validate(const ValidateArgs& a, const std::string& out, std::uint64_t seed) {
  const std::vector<cqm_combiner> kinds = parse_kind_list(a.kinds);
  const std::vector<int> bits_list = parse_bits_list(a.bits);
  CsvOut csv(out, "validate", seed);
  csv.param("kinds", a.kinds);
  csv.param("bits", a.bits);
  csv.param("m_antennas", a.m_antennas);
  csv.param("k_users", a.k_users);
  csv.param("l_taps", a.l_taps);
  csv.param("mu", a.mu);
  csv.param("snr_db", a.snr_db);
  csv.param("trials", a.trials);
  csv.param("n_data", a.n_data);

  SystemHandle sys(a.m_antennas, a.k_users, a.l_taps, a.mu, a.n_data, a.snr_db);
  csv.row({"combiner", "bits", "analytic_rate", "empirical_rate", "corr_se",
           "second_moment_se"});

  std::vector<cqm_rate_report> rep(a.k_users);
  std::vector<cqm_sim_user> users(a.k_users);
  for (cqm_combiner kind : kinds) {
    for (int b : bits_list) {
      check(cqm_analytic_rate_bits(sys.sys, kind, b, rep.data(), rep.size()));
      check(cqm_run_trials(sys.sys, kind, b, a.trials, seed, users.data(), users.size()));
      csv.row({kind_label(kind), bits_label(b), fmt(rep.front().rate),
               fmt(users.front().rate), fmt(users.front().corr_se),
               fmt(users.front().second_moment_se)});
    }
  }
}

// ---- Config-file merge --------------------------------------------------------

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat key=value file; `#` comments and blank lines allowed. Keys are long
// option names without the leading dashes. Flags given on the command line
// win over file values; unknown keys are errors.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               " is not key=value: " + t);
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized massive-MIMO uplink analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  std::string out_path, config_path;
  app.add_option("--seed", seed, "Random seed for stochastic subcommands");
  app.add_option("--out", out_path, "Output CSV path (stdout when absent)");
  app.add_option("--config", config_path,
                 "Flat key=value file with defaults; flags override it");

  QmseArgs qmse;
  CLI::App* sub_qmse =
      app.add_subcommand("qmse", "Normalized distortion of matched designs, 1..5 bits");

  AgcArgs agc;
  CLI::App* sub_agc = app.add_subcommand("agc", "Distortion vs gain-control mismatch");
  sub_agc->add_option("--bits", agc.bits, "Quantizer resolution");
  sub_agc->add_option("--family", agc.family, "optimal or uniform");
  sub_agc->add_option("--db-min", agc.db_min, "Lowest gain offset in dB");
  sub_agc->add_option("--db-max", agc.db_max, "Highest gain offset in dB");
  sub_agc->add_option("--step", agc.step, "Gain grid step in dB");

  EstvarArgs estvar;
  CLI::App* sub_estvar =
      app.add_subcommand("estvar", "Channel-estimation quality sweeps");
  sub_estvar->add_option("--mode", estvar.mode, "snr_sweep or mu_sweep");
  sub_estvar->add_option("--k-users", estvar.k_users, "Number of users");
  sub_estvar->add_option("--l-taps", estvar.l_taps, "Channel taps");
  sub_estvar->add_option("--mu", estvar.mu, "Pilot excess (snr_sweep)");
  sub_estvar->add_option("--snr-db", estvar.snr_db, "Fixed SNR in dB (mu_sweep)");
  sub_estvar->add_option("--snr-min", estvar.snr_min, "Sweep start in dB");
  sub_estvar->add_option("--snr-max", estvar.snr_max, "Sweep end in dB");
  sub_estvar->add_option("--snr-step", estvar.snr_step, "Sweep step in dB");
  sub_estvar->add_option("--mu-min", estvar.mu_min, "Pilot-excess sweep start");
  sub_estvar->add_option("--mu-max", estvar.mu_max, "Pilot-excess sweep end");
  sub_estvar->add_option("--mu-step", estvar.mu_step, "Pilot-excess sweep step");
  sub_estvar->add_option("--bits", estvar.bits, "Comma list: none or 1..8");

  RatesArgs rates;
  CLI::App* sub_rates = app.add_subcommand("rates", "Closed-form rate vs SNR");
  sub_rates->add_option("--kind", rates.kind, "Combiner: mr, mrc, or zf");
  sub_rates->add_option("--m-antennas", rates.m_antennas, "Base-station antennas");
  sub_rates->add_option("--k-users", rates.k_users, "Number of users");
  sub_rates->add_option("--l-taps", rates.l_taps, "Channel taps");
  sub_rates->add_option("--mu", rates.mu, "Pilot excess");
  sub_rates->add_option("--snr-min", rates.snr_min, "Sweep start in dB");
  sub_rates->add_option("--snr-max", rates.snr_max, "Sweep end in dB");
  sub_rates->add_option("--snr-step", rates.snr_step, "Sweep step in dB");
  sub_rates->add_option("--bits", rates.bits, "Comma list: none or 1..8");

  NearfarArgs nearfar;
  CLI::App* sub_nearfar =
      app.add_subcommand("nearfar", "Weak-user rate under a strong interferer");
  sub_nearfar->add_option("--kind", nearfar.kind, "Combiner: mr, mrc, or zf");
  sub_nearfar->add_option("--m-antennas", nearfar.m_antennas, "Base-station antennas");
  sub_nearfar->add_option("--k-users", nearfar.k_users, "Number of users");
  sub_nearfar->add_option("--l-taps", nearfar.l_taps, "Channel taps");
  sub_nearfar->add_option("--mu", nearfar.mu, "Pilot excess");
  sub_nearfar->add_option("--snr-db", nearfar.snr_db, "Weak-user SNR in dB");
  sub_nearfar->add_option("--extra-min", nearfar.extra_min, "Power offset start in dB");
  sub_nearfar->add_option("--extra-max", nearfar.extra_max, "Power offset end in dB");
  sub_nearfar->add_option("--extra-step", nearfar.extra_step, "Power offset step in dB");
  sub_nearfar->add_option("--bits", nearfar.bits, "Comma list: none or 1..8");

  ValidateArgs validate;
  CLI::App* sub_validate =
      app.add_subcommand("validate", "Monte Carlo vs closed-form rate campaign");
  sub_validate->add_option("--kinds", validate.kinds, "Comma list of combiners");
  sub_validate->add_option("--bits", validate.bits, "Comma list: none or 1..8");
  sub_validate->add_option("--m-antennas", validate.m_antennas, "Base-station antennas");
  sub_validate->add_option("--k-users", validate.k_users, "Number of users");
  sub_validate->add_option("--l-taps", validate.l_taps, "Channel taps");
  sub_validate->add_option("--mu", validate.mu, "Pilot excess");
  sub_validate->add_option("--snr-db", validate.snr_db, "Per-user SNR in dB");
  sub_validate->add_option("--trials", validate.trials, "Monte Carlo trials per cell");
  sub_validate->add_option("--n-data", validate.n_data, "Data block length");

  // Merge the config file (if any) by appending synthesized flags for keys the
  // user did not pass explicitly. Done before the real parse so CLI11 applies
  // its normal validation to file values too.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string cfg_path;
    std::string sub_name;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size())
        cfg_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        cfg_path = args[i].substr(9);
      else if (sub_name.empty() && !args[i].empty() && args[i][0] != '-')
        sub_name = args[i];
    }
    if (!cfg_path.empty()) {
      CLI::App* sub = sub_name.empty() ? nullptr : app.get_subcommand_no_throw(sub_name);
      std::vector<std::string> passed;
      for (const std::string& a : args)
        if (a.rfind("--", 0) == 0) passed.push_back(a.substr(0, a.find('=')));
      for (const auto& [key, value] : load_config(cfg_path)) {
        if (key == "config")
          throw std::runtime_error("config key cannot be set from a config file");
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub != nullptr ? sub->get_option_no_throw(flag) : nullptr;
        if (opt == nullptr) opt = app.get_option_no_throw(flag);
        if (opt == nullptr) throw std::runtime_error("unknown config key: " + key);
        if (std::find(passed.begin(), passed.end(), flag) != passed.end()) continue;
        args.push_back(flag);
        args.push_back(value);
      }
    }

    std::vector<const char*> cargv;
    cargv.push_back(argv[0]);
    for (const std::string& a : args) cargv.push_back(a.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());

    if (sub_qmse->parsed()) {
      (void)qmse;
      run_qmse(out_path, seed);
    } else if (sub_agc->parsed()) {
      run_agc(agc, out_path, seed);
    } else if (sub_estvar->parsed()) {
      run_estvar(estvar, out_path, seed);
    } else if (sub_rates->parsed()) {
      run_rates(rates, out_path, seed);
    } else if (sub_nearfar->parsed()) {
      run_nearfar(nearfar, out_path, seed);
    } else if (sub_validate->parsed()) {
      run_validate(validate, out_path, seed);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
