/**
 * @file experiments.hpp
 * @brief Scenario configuration, Monte Carlo batch driver, baseline network
 *        architectures and result persistence.
 *
 * A scenario is a flat key=value config describing one network setup. The
 * driver runs seeded trials for each requested beamforming strategy, with
 * three architectures (cell-free, one co-located array, single-connection)
 * and two duplex modes (full duplex, half duplex with the cross-interference
 * channels removed and SE/EE halved after solving).
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fdcf/channel.hpp"
#include "fdcf/metrics.hpp"
#include "fdcf/optimizer.hpp"
#include "fdcf/units.hpp"

namespace fdcf {

enum class Duplex { kFd, kHd };
enum class Architecture { kCf, kCoMmimo, kScMimo };

inline const char* to_string(Duplex d) { return d == Duplex::kFd ? "FD" : "HD"; }

inline const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::kCf: return "CF";
    case Architecture::kCoMmimo: return "CO_MMIMO";
    case Architecture::kScMimo: return "SC_MIMO";
  }
  return "unknown";
}

inline Duplex parse_duplex(const std::string& s) {
  if (s == "FD") return Duplex::kFd;
  if (s == "HD") return Duplex::kHd;
  throw std::invalid_argument("unknown duplex mode: " + s);
}

inline Architecture parse_architecture(const std::string& s) {
  if (s == "CF") return Architecture::kCf;
  if (s == "CO_MMIMO") return Architecture::kCoMmimo;
  if (s == "SC_MIMO") return Architecture::kScMimo;
  throw std::invalid_argument("unknown architecture: " + s);
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "ZF") return Strategy::kZf;
  if (s == "ONB_ZF") return Strategy::kOnbZf;
  if (s == "IZF") return Strategy::kIzf;
  if (s == "MRT_MRC") return Strategy::kMrtMrc;
  throw std::invalid_argument("unknown strategy: " + s);
}

struct ScenarioConfig {
  std::string scenario_id = "base";
  int m_aps = 64;
  int k_dl = 10;
  int l_ul = 10;
  int n_per_ap = 2;
  double radius_km = 1.0;
  double bandwidth_hz = 10e6;
  double rho_rsi_db = -110.0;
  double noise_dbm = -104.0;
  double sigma_sh_db = 8.0;
  double rician_db = 5.0;
  double d0_m = 10.0;
  double d1_m = 50.0;
  double nu_ap = 0.39;
  double nu_ue = 0.3;
  double p_bh_w_per_gbps = 0.25;
  double p_bb_dl_w = 0.1;
  double p_bb_ul_w = 0.1;
  double p_active_w = 10.0;
  double p_sleep_w = 2.0;
  double p_ap_cir_w = 1.0;
  double p_dlue_cir_w = 0.1;
  double p_ulue_cir_w = 0.1;
  double p_ap_total_dbm = 43.0;  // network-wide radiated budget, split equally
  double p_ap_max_w = -1.0;      // > 0: explicit per-AP budget override
  double p_ue_max_dbm = 23.0;
  double r_dl_bits_hz = 0.5;
  double r_ul_bits_hz = 0.5;
  int tau = 0;    // training length; 0 disables the overhead factor
  int tau_c = 200;
  double eta = 0.0;
  double varpi = -1.0;  // association threshold; negative -> 0.1% of 1/M
  double delta = 0.99;
  bool ap_selection = true;
  std::vector<Strategy> strategies = {Strategy::kZf};
  Duplex duplex = Duplex::kFd;
  Architecture arch = Architecture::kCf;
  int trials = 10;
  std::uint64_t seed = 1;
};

/// Numeric config keys shared by the file parser and the sweep driver.
/// "kl" sets the downlink and uplink user counts together.
inline const std::map<std::string, std::function<void(ScenarioConfig&, double)>>&
numeric_config_keys() {
  static const std::map<std::string, std::function<void(ScenarioConfig&, double)>> keys = {
      {"m_aps", [](ScenarioConfig& c, double v) { c.m_aps = static_cast<int>(v); }},
      {"k_dl", [](ScenarioConfig& c, double v) { c.k_dl = static_cast<int>(v); }},
      {"l_ul", [](ScenarioConfig& c, double v) { c.l_ul = static_cast<int>(v); }},
      {"kl",
       [](ScenarioConfig& c, double v) {
         c.k_dl = static_cast<int>(v);
         c.l_ul = static_cast<int>(v);
       }},
      {"n_per_ap", [](ScenarioConfig& c, double v) { c.n_per_ap = static_cast<int>(v); }},
      {"radius_km", [](ScenarioConfig& c, double v) { c.radius_km = v; }},
      {"bandwidth_hz", [](ScenarioConfig& c, double v) { c.bandwidth_hz = v; }},
      {"rho_rsi_db", [](ScenarioConfig& c, double v) { c.rho_rsi_db = v; }},
      {"noise_dbm", [](ScenarioConfig& c, double v) { c.noise_dbm = v; }},
      {"sigma_sh_db", [](ScenarioConfig& c, double v) { c.sigma_sh_db = v; }},
      {"rician_db", [](ScenarioConfig& c, double v) { c.rician_db = v; }},
      {"d0_m", [](ScenarioConfig& c, double v) { c.d0_m = v; }},
      {"d1_m", [](ScenarioConfig& c, double v) { c.d1_m = v; }},
      {"nu_ap", [](ScenarioConfig& c, double v) { c.nu_ap = v; }},
      {"nu_ue", [](ScenarioConfig& c, double v) { c.nu_ue = v; }},
      {"p_bh_w_per_gbps", [](ScenarioConfig& c, double v) { c.p_bh_w_per_gbps = v; }},
      {"p_bb_dl_w", [](ScenarioConfig& c, double v) { c.p_bb_dl_w = v; }},
      {"p_bb_ul_w", [](ScenarioConfig& c, double v) { c.p_bb_ul_w = v; }},
      {"p_active_w", [](ScenarioConfig& c, double v) { c.p_active_w = v; }},
      {"p_sleep_w", [](ScenarioConfig& c, double v) { c.p_sleep_w = v; }},
      {"p_ap_cir_w", [](ScenarioConfig& c, double v) { c.p_ap_cir_w = v; }},
      {"p_dlue_cir_w", [](ScenarioConfig& c, double v) { c.p_dlue_cir_w = v; }},
      {"p_ulue_cir_w", [](ScenarioConfig& c, double v) { c.p_ulue_cir_w = v; }},
      {"p_ap_total_dbm", [](ScenarioConfig& c, double v) { c.p_ap_total_dbm = v; }},
      {"p_ap_max_w", [](ScenarioConfig& c, double v) { c.p_ap_max_w = v; }},
      {"p_ue_max_dbm", [](ScenarioConfig& c, double v) { c.p_ue_max_dbm = v; }},
      {"r_dl_bits_hz", [](ScenarioConfig& c, double v) { c.r_dl_bits_hz = v; }},
      {"r_ul_bits_hz", [](ScenarioConfig& c, double v) { c.r_ul_bits_hz = v; }},
      {"tau", [](ScenarioConfig& c, double v) { c.tau = static_cast<int>(v); }},
      {"tau_c", [](ScenarioConfig& c, double v) { c.tau_c = static_cast<int>(v); }},
      {"eta", [](ScenarioConfig& c, double v) { c.eta = v; }},
      {"varpi", [](ScenarioConfig& c, double v) { c.varpi = v; }},
      {"delta", [](ScenarioConfig& c, double v) { c.delta = v; }},
      {"ap_selection", [](ScenarioConfig& c, double v) { c.ap_selection = v != 0.0; }},
      {"trials", [](ScenarioConfig& c, double v) { c.trials = static_cast<int>(v); }},
  };
  return keys;
}

inline void apply_config_key(ScenarioConfig& cfg, const std::string& key,
                             const std::string& value) {
  auto parse_double = [&](const std::string& v) {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: bad numeric value '" + v + "'");
    return d;
  };
  if (key == "scenario_id") {
    cfg.scenario_id = value;
    return;
  }
  if (key == "seed") {
    cfg.seed = std::stoull(value);
    return;
  }
  if (key == "duplex") {
    cfg.duplex = parse_duplex(value);
    return;
  }
  if (key == "arch") {
    cfg.arch = parse_architecture(value);
    return;
  }
  if (key == "strategies") {
    cfg.strategies.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      auto b = tok.find_first_not_of(" \t");
      auto e = tok.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      cfg.strategies.push_back(parse_strategy(tok.substr(b, e - b + 1)));
    }
    if (cfg.strategies.empty()) throw std::invalid_argument("config: empty strategy list");
    return;
  }
  auto it = numeric_config_keys().find(key);
  if (it == numeric_config_keys().end()) {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  it->second(cfg, parse_double(value));
}

inline void validate_config(const ScenarioConfig& cfg) {
  if (cfg.m_aps < 1 || cfg.k_dl < 1 || cfg.l_ul < 1 || cfg.n_per_ap < 1) {
    throw std::invalid_argument("config: counts must be positive");
  }
  if (!(cfg.radius_km > 0.0) || !(cfg.bandwidth_hz > 0.0)) {
    throw std::invalid_argument("config: radius and bandwidth must be positive");
  }
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) throw std::invalid_argument("config: eta in [0,1]");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw std::invalid_argument("config: delta in (0,1]");
  if (cfg.tau < 0 || (cfg.tau > 0 && 2 * cfg.tau >= cfg.tau_c)) {
    throw std::invalid_argument("config: training must fit the coherence block");
  }
  if (cfg.rho_rsi_db >= 0.0) throw std::invalid_argument("config: rho_rsi_db must be negative");
}

/// Parses `key = value` lines; '#' starts a comment, blank lines ignored.
inline ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    auto e = s.find_last_not_of(ws);
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate_config(cfg);
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  return parse_config(in);
}

struct TrialRecord {
  std::uint64_t seed = 0;
  std::string scenario_id;
  std::string strategy;
  std::string duplex;
  std::string arch;
  std::string status;  // optimal | infeasible | failure
  double se_bits_hz = std::numeric_limits<double>::quiet_NaN();
  double ee_bits_joule = std::numeric_limits<double>::quiet_NaN();
  double p_total_w = std::numeric_limits<double>::quiet_NaN();
  int active_aps = -1;
  int iters = 0;
  double ms = 0.0;
};

namespace exp_detail {

struct TrialSetup {
  ChannelSet channels;
  double p_ap_max_w = 0.0;           // per-AP budget after the architecture transform
  std::optional<Eigen::MatrixXi> alpha_fixed;
  std::function<StrategyArtifacts(const ChannelSet&, const std::vector<int>&)> builder;
};

// Greedy strongest-link association with per-AP capacity N_m - 1 per
// direction; returns assigned AP per user.
inline std::vector<int> strongest_assignment(const Eigen::MatrixXd& beta_user_by_ap,
                                             const std::vector<int>& antennas) {
  const int users = static_cast<int>(beta_user_by_ap.rows());
  const int m_aps = static_cast<int>(beta_user_by_ap.cols());
  std::vector<std::pair<double, std::pair<int, int>>> edges;
  edges.reserve(static_cast<std::size_t>(users) * m_aps);
  for (int u = 0; u < users; ++u)
    for (int m = 0; m < m_aps; ++m) edges.push_back({beta_user_by_ap(u, m), {u, m}});
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> cap(m_aps), assigned(users, -1);
  for (int m = 0; m < m_aps; ++m) cap[m] = std::max(1, antennas[m] - 1);
  int placed = 0;
  for (const auto& e : edges) {
    int u = e.second.first, m = e.second.second;
    if (assigned[u] >= 0 || cap[m] == 0) continue;
    assigned[u] = m;
    --cap[m];
    if (++placed == users) break;
  }
  for (int u = 0; u < users; ++u) {
    if (assigned[u] < 0) {
      throw std::runtime_error("single-connection association: no AP capacity left for user " +
                               std::to_string(u + 1));
    }
  }
  return assigned;
}

// Per-AP zero-forcing artifacts for a fixed single-connection assignment
// (assignments indexed by original AP id; `active` maps reduced positions).
inline StrategyArtifacts per_ap_artifacts(const ChannelSet& ch, const std::vector<int>& active,
                                          const std::vector<int>& dl_ap,
                                          const std::vector<int>& ul_ap) {
  const int K = ch.k_dl, L = ch.l_ul;
  StrategyArtifacts art;
  art.basis.basis = Eigen::MatrixXcd::Zero(ch.n_total, K);
  art.basis.label = PrecoderLabel::kZf;
  art.receivers.rows = Eigen::MatrixXcd::Zero(L, ch.n_total);
  art.receivers.label = ReceiverLabel::kZf;
  for (int i = 0; i < static_cast<int>(active.size()); ++i) {
    int src = active[i];
    std::vector<int> dls, uls;
    for (int k = 0; k < K; ++k)
      if (dl_ap[k] == src) dls.push_back(k);
    for (int l = 0; l < L; ++l)
      if (ul_ap[l] == src) uls.push_back(l);
    int off = ch.offsets[i], na = ch.antennas[i];
    if (!dls.empty()) {
      Eigen::MatrixXcd h(static_cast<int>(dls.size()), na);
      for (std::size_t r = 0; r < dls.size(); ++r) h.row(static_cast<int>(r)) =
          ch.H_d.block(dls[r], off, 1, na);
      Eigen::MatrixXcd w = zf_precoder(h);  // na x |dls|, local channel inverted
      for (std::size_t r = 0; r < dls.size(); ++r)
        art.basis.basis.block(off, dls[r], na, 1) = w.col(static_cast<int>(r));
    }
    if (!uls.empty()) {
      Eigen::MatrixXcd h(na, static_cast<int>(uls.size()));
      for (std::size_t r = 0; r < uls.size(); ++r) h.col(static_cast<int>(r)) =
          ch.H_u.block(off, uls[r], na, 1);
      Eigen::MatrixXcd a = zf_receiver(h);  // |uls| x na
      for (std::size_t r = 0; r < uls.size(); ++r)
        art.receivers.rows.block(uls[r], off, 1, na) = a.row(static_cast<int>(r));
    }
  }
  return art;
}

inline TrialSetup make_trial_setup(const ScenarioConfig& cfg, std::uint64_t trial_seed) {
  TrialSetup setup;
  FadingParams fading;
  fading.d0_km = cfg.d0_m / 1000.0;
  fading.d1_km = cfg.d1_m / 1000.0;
  fading.sigma_sh_db = cfg.sigma_sh_db;
  fading.rician_factor_db = cfg.rician_db;
  fading.rho_rsi = db_to_linear(cfg.rho_rsi_db);
  double noise_w = dbm_to_watt(cfg.noise_dbm);
  double total_budget_w = cfg.p_ap_max_w > 0.0 ? cfg.p_ap_max_w * cfg.m_aps
                                               : dbm_to_watt(cfg.p_ap_total_dbm);

  if (cfg.arch == Architecture::kCoMmimo) {
    // One central array holding every antenna and the whole budget.
    std::vector<int> antennas = {cfg.m_aps * cfg.n_per_ap};
    Topology topo = generate_topology(trial_seed, 1, cfg.k_dl, cfg.l_ul, cfg.radius_km, antennas);
    topo.ap_xy[0] = {0.0, 0.0};
    setup.channels = assemble_channels(topo, fading, noise_w, noise_w, trial_seed);
    setup.p_ap_max_w = total_budget_w;
  } else {
    std::vector<int> antennas(cfg.m_aps, cfg.n_per_ap);
    Topology topo =
        generate_topology(trial_seed, cfg.m_aps, cfg.k_dl, cfg.l_ul, cfg.radius_km, antennas);
    setup.channels = assemble_channels(topo, fading, noise_w, noise_w, trial_seed);
    setup.p_ap_max_w = total_budget_w / cfg.m_aps;
  }

  if (cfg.duplex == Duplex::kHd) {
    // Half duplex separates the directions in time: no cross-link channels.
    setup.channels.G_cci.setZero();
    setup.channels.G_aa.setZero();
    setup.channels.beta_cci.setZero();
    setup.channels.beta_aa.setIdentity();
  }

  if (cfg.arch == Architecture::kScMimo) {
    const ChannelSet& ch = setup.channels;
    std::vector<int> dl_ap = strongest_assignment(ch.beta_d, ch.antennas);
    std::vector<int> ul_ap = strongest_assignment(ch.beta_u.transpose(), ch.antennas);
    Eigen::MatrixXi alpha = Eigen::MatrixXi::Zero(cfg.k_dl, cfg.m_aps);
    for (int k = 0; k < cfg.k_dl; ++k) alpha(k, dl_ap[k]) = 1;
    setup.alpha_fixed = alpha;
    setup.builder = [dl_ap, ul_ap](const ChannelSet& c, const std::vector<int>& active) {
      return per_ap_artifacts(c, active, dl_ap, ul_ap);
    };
  }
  return setup;
}

inline OptimizerConfig make_optimizer_config(const ScenarioConfig& cfg, double p_ap_max_w) {
  OptimizerConfig oc;
  oc.eta = cfg.eta;
  oc.varpi = cfg.varpi;
  oc.delta_pca = cfg.delta;
  oc.ap_selection = cfg.ap_selection;
  oc.p_ap_max_w = p_ap_max_w;
  oc.p_ue_max_w = Eigen::VectorXd::Constant(cfg.l_ul, dbm_to_watt(cfg.p_ue_max_dbm));
  return oc;
}

inline PowerModelParams make_power_params(const ScenarioConfig& cfg) {
  PowerModelParams pm;
  pm.nu_ap = cfg.nu_ap;
  pm.nu_ue = cfg.nu_ue;
  pm.p_bh_w_per_gbps = cfg.p_bh_w_per_gbps;
  pm.p_bb_dl_w = cfg.p_bb_dl_w;
  pm.p_bb_ul_w = cfg.p_bb_ul_w;
  pm.p_active_w = cfg.p_active_w;
  pm.p_sleep_w = cfg.p_sleep_w;
  pm.p_ap_cir_w = cfg.p_ap_cir_w;
  pm.p_dlue_cir_w = cfg.p_dlue_cir_w;
  pm.p_ulue_cir_w = cfg.p_ulue_cir_w;
  pm.bandwidth_hz = cfg.bandwidth_hz;
  return pm;
}

}  // namespace exp_detail

/// One seeded trial of one strategy. Failures never escape: they come back as
/// status = "failure" records.
inline TrialRecord run_single_trial(const ScenarioConfig& cfg, Strategy strategy, int trial) {
  TrialRecord rec;
  rec.scenario_id = cfg.scenario_id;
  rec.strategy = to_string(strategy);
  rec.duplex = to_string(cfg.duplex);
  rec.arch = to_string(cfg.arch);
  rec.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(trial));
  auto start = std::chrono::steady_clock::now();
  try {
    exp_detail::TrialSetup setup = exp_detail::make_trial_setup(cfg, rec.seed);
    OptimizerConfig oc = exp_detail::make_optimizer_config(cfg, setup.p_ap_max_w);
    PowerModelParams pm = exp_detail::make_power_params(cfg);
    QosThresholds qos{Eigen::VectorXd::Constant(cfg.k_dl, bits_to_nats(cfg.r_dl_bits_hz)),
                      Eigen::VectorXd::Constant(cfg.l_ul, bits_to_nats(cfg.r_ul_bits_hz))};
    SolveResult sol = solve_se_ee(setup.channels, strategy, qos, pm, oc, setup.alpha_fixed,
                                  setup.builder);
    rec.status = to_string(sol.status);
    rec.iters = sol.iters;
    if (sol.status == SolveStatus::kConverged) {
      double se_nats = sol.se;
      if (cfg.tau > 0) {
        int tau_t = cfg.duplex == Duplex::kFd ? 2 * cfg.tau : cfg.tau;
        se_nats = effective_se_with_training(se_nats, tau_t, cfg.tau_c);
      }
      double halve = cfg.duplex == Duplex::kHd ? 0.5 : 1.0;
      rec.se_bits_hz = nats_to_bits(se_nats) * halve;
      rec.ee_bits_joule = nats_to_bits(cfg.bandwidth_hz * se_nats / sol.p_total) * halve;
      rec.p_total_w = sol.p_total;
      rec.active_aps = sol.binary.mu.sum();
    }
  } catch (const std::exception&) {
    rec.status = "failure";
  }
  auto end = std::chrono::steady_clock::now();
  rec.ms = std::chrono::duration<double, std::milli>(end - start).count();
  return rec;
}

/// All trials for one scenario, dispatched to a worker pool. Records come
/// back ordered by (trial, strategy) regardless of completion order.
inline std::vector<TrialRecord> run_scenario(const ScenarioConfig& cfg, int max_workers = 0) {
  validate_config(cfg);
  struct Task {
    int trial;
    Strategy strategy;
  };
  std::vector<Task> tasks;
  for (int t = 0; t < cfg.trials; ++t)
    for (Strategy s : cfg.strategies) tasks.push_back({t, s});
  std::vector<TrialRecord> records(tasks.size());
  unsigned workers = max_workers > 0 ? static_cast<unsigned>(max_workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      records[i] = run_single_trial(cfg, tasks[i].strategy, tasks[i].trial);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return records;
}

/// Expands a base config along one numeric key ("kl" pairs the user counts).
inline std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& base, const std::string& key,
                                                const std::vector<double>& values) {
  if (numeric_config_keys().find(key) == numeric_config_keys().end()) {
    throw std::invalid_argument("sweep: unknown numeric key '" + key + "'");
  }
  std::vector<ScenarioConfig> out;
  for (double v : values) {
    ScenarioConfig c = base;
    numeric_config_keys().at(key)(c, v);
    std::ostringstream id;
    id << key << "=" << v;
    c.scenario_id = id.str();
    validate_config(c);
    out.push_back(std::move(c));
  }
  return out;
}

namespace exp_detail {

inline std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct Aggregate {
  int n = 0, optimal = 0, infeasible = 0, failure = 0;
  double se_sum = 0, se_sq = 0, ee_sum = 0, ee_sq = 0, p_sum = 0, ap_sum = 0;

  void add(const TrialRecord& r) {
    ++n;
    if (r.status == "optimal") {
      ++optimal;
      se_sum += r.se_bits_hz;
      se_sq += r.se_bits_hz * r.se_bits_hz;
      ee_sum += r.ee_bits_joule;
      ee_sq += r.ee_bits_joule * r.ee_bits_joule;
      p_sum += r.p_total_w;
      ap_sum += r.active_aps;
    } else if (r.status == "infeasible") {
      ++infeasible;
    } else {
      ++failure;
    }
  }
  double mean(double sum) const { return optimal > 0 ? sum / optimal : 0.0; }
  double stderr_of(double sum, double sq) const {
    if (optimal < 2) return 0.0;
    double m = sum / optimal;
    double var = std::max(0.0, sq / optimal - m * m) * optimal / (optimal - 1);
    return std::sqrt(var / optimal);
  }
};

}  // namespace exp_detail

/// records.csv + summary.json + sweep.csv under `out_dir`.
inline void emit_results(const std::vector<TrialRecord>& records, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream csv(fs::path(out_dir) / "records.csv");
    csv << "scenario_id,trial,strategy,duplex,arch,status,se_bits_hz,ee_bits_joule,p_total_w,"
           "active_aps,iters,ms\n";
    std::map<std::string, int> trial_counter;  // per (scenario, strategy) running index
    for (const auto& r : records) {
      std::string key = r.scenario_id + "|" + r.strategy + "|" + r.duplex + "|" + r.arch;
      int trial = trial_counter[key]++;
      csv << r.scenario_id << ',' << trial << ',' << r.strategy << ',' << r.duplex << ',' << r.arch
          << ',' << r.status << ',' << exp_detail::csv_num(r.se_bits_hz) << ','
          << exp_detail::csv_num(r.ee_bits_joule) << ',' << exp_detail::csv_num(r.p_total_w) << ','
          << (r.active_aps >= 0 ? std::to_string(r.active_aps) : std::string()) << ',' << r.iters
          << ',' << exp_detail::csv_num(r.ms) << '\n';
    }
  }

  // Group by (scenario, strategy, duplex, arch) for both summaries.
  std::map<std::tuple<std::string, std::string, std::string, std::string>, exp_detail::Aggregate>
      groups;
  for (const auto& r : records) groups[{r.scenario_id, r.strategy, r.duplex, r.arch}].add(r);

  {
    nlohmann::json j;
    j["groups"] = nlohmann::json::array();
    for (const auto& [key, agg] : groups) {
      nlohmann::json g;
      g["scenario_id"] = std::get<0>(key);
      g["strategy"] = std::get<1>(key);
      g["duplex"] = std::get<2>(key);
      g["arch"] = std::get<3>(key);
      g["trials"] = agg.n;
      g["optimal"] = agg.optimal;
      g["infeasible"] = agg.infeasible;
      g["failure"] = agg.failure;
      g["feasibility_rate"] = agg.n > 0 ? static_cast<double>(agg.optimal) / agg.n : 0.0;
      g["se_mean_bits_hz"] = agg.mean(agg.se_sum);
      g["se_stderr"] = agg.stderr_of(agg.se_sum, agg.se_sq);
      g["ee_mean_bits_joule"] = agg.mean(agg.ee_sum);
      g["ee_stderr"] = agg.stderr_of(agg.ee_sum, agg.ee_sq);
      g["p_total_mean_w"] = agg.mean(agg.p_sum);
      g["active_aps_mean"] = agg.mean(agg.ap_sum);
      j["groups"].push_back(std::move(g));
    }
    std::ofstream js(fs::path(out_dir) / "summary.json");
    js << j.dump(2) << '\n';
  }

  {
    std::ofstream csv(fs::path(out_dir) / "sweep.csv");
    csv << "scenario_id,strategy,duplex,arch,trials,feasibility_rate,se_mean_bits_hz,se_stderr,"
           "ee_mean_bits_joule,ee_stderr\n";
    for (const auto& [key, agg] : groups) {
      csv << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
          << std::get<3>(key) << ',' << agg.n << ','
          << (agg.n > 0 ? static_cast<double>(agg.optimal) / agg.n : 0.0) << ','
          << agg.mean(agg.se_sum) << ',' << agg.stderr_of(agg.se_sum, agg.se_sq) << ','
          << agg.mean(agg.ee_sum) << ',' << agg.stderr_of(agg.ee_sum, agg.ee_sq) << '\n';
    }
  }
}

}  // namespace fdcf
