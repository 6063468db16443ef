// Acceptance gate: one line per criterion, exit code = number of failures.
//
// Criteria cover the pinned reference behaviours of the library: the greedy
// pilot-assignment walk, path-loss anchors, the zero-forcing identity suite,
// interference-subspace suppression, surrogate-bound validity, optimizer
// convergence and its fixed-point residual, channel-estimation statistics,
// qualitative performance orderings, the pilot oracle sandwich, and the
// binary recovery round trip.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fdcf/experiments.hpp"
#include "fdcf/pilot.hpp"

using namespace fdcf;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

MatrixXcd random_cmatrix(Rng& rng, int rows, int cols) {
  MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.cnormal();
  return m;
}

double offdiag_relative_mass(const MatrixXcd& prod) {
  double off = 0.0;
  for (int i = 0; i < prod.rows(); ++i)
    for (int j = 0; j < prod.cols(); ++j)
      if (i != j) off += std::norm(prod(i, j));
  double total = prod.squaredNorm();
  return total > 0.0 ? off / total : 0.0;
}

// ---------------------------------------------------------------------------
// 1. Greedy pilot assignment reproduces the pinned ten-user reference walk.
// ---------------------------------------------------------------------------
Outcome criterion1() {
  VectorXd load(10);
  load << 0.0107, 0.0881, 0.1384, 0.0309, 0.0798, 0.0531, 0.0130, 0.0765, 0.0109, 0.0102;
  PilotAssignment warm = heap_pilot_assignment(load, 4);  // warm the code path
  (void)warm;
  auto t0 = std::chrono::steady_clock::now();
  PilotAssignment pa = heap_pilot_assignment(load, 4);
  auto t1 = std::chrono::steady_clock::now();
  double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  std::vector<double> ref{0.0905, 0.1074, 0.1412, 0.1036, 0.1145};
  if (pa.prc_updates.size() < ref.size()) return {false, "walk too short"};
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (std::abs(pa.prc_updates[i] - ref[i]) > 2e-4) {
      std::ostringstream os;
      os << "update " << i << " = " << pa.prc_updates[i] << ", want " << ref[i] << " +- 2e-4";
      return {false, os.str()};
    }
  }
  auto group = [&](int pilot) {
    std::vector<int> g;
    for (int j = 0; j < 10; ++j)
      if (pa.upsilon(pilot, j) == 1) g.push_back(j + 1);
    return g;
  };
  if (group(0) != std::vector<int>({1, 5, 7, 9})) return {false, "pilot 1 grouping"};
  if (group(1) != std::vector<int>({2, 6})) return {false, "pilot 2 grouping"};
  if (group(2) != std::vector<int>({3})) return {false, "pilot 3 grouping"};
  if (group(3) != std::vector<int>({4, 8, 10})) return {false, "pilot 4 grouping"};
  if (ms >= 1.0) {
    std::ostringstream os;
    os << "took " << ms << " ms, budget 1 ms";
    return {false, os.str()};
  }
  std::ostringstream os;
  os << "trace and grouping match, " << ms << " ms";
  return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 2. Path-loss anchor points.
// ---------------------------------------------------------------------------
Outcome criterion2() {
  double far = path_loss_db(1.0, 0.01, 0.05);
  if (far != -140.7) {
    std::ostringstream os;
    os << "PL(1 km) = " << far << ", want -140.7 exactly";
    return {false, os.str()};
  }
  double nearby = path_loss_db(0.005, 0.01, 0.05);
  if (std::abs(nearby - (-81.185)) > 1e-3) {
    std::ostringstream os;
    os << "PL(5 m) = " << nearby << ", want -81.185 +- 0.001";
    return {false, os.str()};
  }
  return {true, "both anchors hit"};
}

// ---------------------------------------------------------------------------
// 3. Zero-forcing family identities over 100 random instances.
// ---------------------------------------------------------------------------
Outcome criterion3() {
  Rng rng(3001);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 10 + static_cast<int>(rng.uniform() * 22.999);
    int k = 2 + static_cast<int>(rng.uniform() * 6.999);
    int l = 2 + static_cast<int>(rng.uniform() * 6.999);
    MatrixXcd hd = random_cmatrix(rng, k, n);
    MatrixXcd hu = random_cmatrix(rng, n, l);

    MatrixXcd wzf = zf_precoder(hd);
    double inv_err = (hd * wzf - MatrixXcd::Identity(k, k)).norm();
    if (inv_err > 1e-8 * k) {
      std::ostringstream os;
      os << "trial " << trial << ": ||H W - I|| = " << inv_err;
      return {false, os.str()};
    }

    PrecoderBasis onb = onb_zf_basis(hd);
    double off = offdiag_relative_mass(hd * onb.basis);
    if (off > 1e-10) {
      std::ostringstream os;
      os << "trial " << trial << ": orthonormal-basis off-diagonal mass " << off;
      return {false, os.str()};
    }

    auto [t, q] = lq_decompose(hd);
    MatrixXcd tt = ttilde_inverse(t);
    MatrixXcd want = MatrixXcd::Zero(k, k);
    for (int i = 0; i < k; ++i) want(i, i) = t(i, i);
    double tri_err = (t * tt - want).norm() / want.norm();
    if (tri_err > 1e-12) {
      std::ostringstream os;
      os << "trial " << trial << ": triangular inverse error " << tri_err;
      return {false, os.str()};
    }

    ReceiverSet sic = zf_sic_receivers(hu);
    for (int i = 0; i < l; ++i)
      for (int j = i + 1; j < l; ++j) {
        double cross = std::abs((sic.rows.row(i) * hu.col(j))(0));
        if (cross > 1e-8) {
          std::ostringstream os;
          os << "trial " << trial << ": cancellation leak " << cross;
          return {false, os.str()};
        }
      }
  }
  return {true, "100 instances clean"};
}

// ---------------------------------------------------------------------------
// 4. Dominant-subspace suppression on synthetic low-rank interference.
// ---------------------------------------------------------------------------
Outcome criterion4() {
  Rng rng(4001);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 8 + static_cast<int>(rng.uniform() * 8.999);
    int k = 2 + static_cast<int>(rng.uniform() * 2.999);
    int rmax = n - k - 1;
    int r = 1 + static_cast<int>(rng.uniform() * (rmax - 0.001));
    r = std::min(r, rmax);

    auto orth = [&](int rows, int cols) {
      MatrixXcd a = random_cmatrix(rng, rows, cols);
      Eigen::HouseholderQR<MatrixXcd> qr(a);
      return MatrixXcd(qr.householderQ() * MatrixXcd::Identity(rows, cols));
    };
    MatrixXcd g = orth(n, r) * orth(n, r).adjoint();  // exact rank r, unit spectrum
    MatrixXcd hd = random_cmatrix(rng, k, n);

    PrecoderBasis pb = onb_zf_pca_basis(hd, g, 0.99);
    if (pb.pca_rank != r) {
      std::ostringstream os;
      os << "trial " << trial << ": suppressed rank " << pb.pca_rank << ", want " << r;
      return {false, os.str()};
    }
    double leak = (g * pb.basis).norm() / (g.norm() * pb.basis.norm());
    if (leak > 1e-8) {
      std::ostringstream os;
      os << "trial " << trial << ": interference leak " << leak;
      return {false, os.str()};
    }
    double off = offdiag_relative_mass(hd * pb.basis);
    if (off > 1e-10) {
      std::ostringstream os;
      os << "trial " << trial << ": off-diagonal mass " << off;
      return {false, os.str()};
    }
  }
  return {true, "50 constructions clean"};
}

// ---------------------------------------------------------------------------
// 5. Surrogate bounds: never above the true functions, tight at the base.
// ---------------------------------------------------------------------------
Outcome criterion5() {
  Rng rng(5001);
  for (int i = 0; i < 100000; ++i) {
    double x = 0.1 + 2.0 * rng.uniform();
    double y = 0.1 + 2.0 * rng.uniform();
    double x0 = 0.1 + 2.0 * rng.uniform();
    double y0 = 0.1 + 2.0 * rng.uniform();
    if (h_fr_bound(x, y, x0, y0) > x * x / y + 1e-12) {
      return {false, "fractional bound exceeded its function"};
    }
    double at_base = h_fr_bound(x0, y0, x0, y0);
    if (std::abs(at_base - x0 * x0 / y0) > 1e-12 * std::abs(x0 * x0 / y0)) {
      return {false, "fractional bound not tight at the base point"};
    }
    double z = 5.0 * rng.uniform();
    double z0 = 5.0 * rng.uniform();
    if (h_qu_bound(z, z0) > z * z + 1e-12) {
      return {false, "quadratic bound exceeded its function"};
    }
    if (std::abs(h_qu_bound(z0, z0) - z0 * z0) > 1e-12 * std::max(1.0, z0 * z0)) {
      return {false, "quadratic bound not tight at the base point"};
    }
  }
  return {true, "100000 samples clean"};
}

// ---------------------------------------------------------------------------
// 6 / 7 / 11 share a batch of small-network solves.
// ---------------------------------------------------------------------------
struct SmallRun {
  SolveResult res;
  double seconds = 0.0;
};

std::vector<SmallRun> small_runs;

void run_small_batch() {
  if (!small_runs.empty()) return;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Topology topo = generate_topology(seed, 8, 3, 3, 1.0, std::vector<int>(8, 2));
    FadingParams fp;  // residual self-interference at 1e-11
    double noise = dbm_to_watt(-104.0);
    ChannelSet ch = assemble_channels(topo, fp, noise, noise, seed + 500);
    QosThresholds qos{VectorXd::Constant(3, bits_to_nats(0.5)),
                      VectorXd::Constant(3, bits_to_nats(0.5))};
    PowerModelParams pm;
    OptimizerConfig cfg;
    cfg.eta = 0.0;
    cfg.p_ap_max_w = dbm_to_watt(43.0) / 8.0;
    cfg.p_ue_max_w = VectorXd::Constant(3, dbm_to_watt(23.0));
    auto t0 = std::chrono::steady_clock::now();
    SolveResult res = solve_se_ee(ch, Strategy::kZf, qos, pm, cfg);
    auto t1 = std::chrono::steady_clock::now();
    small_runs.push_back({std::move(res), std::chrono::duration<double>(t1 - t0).count()});
  }
}

Outcome criterion6() {
  run_small_batch();
  int feasible = 0, converged = 0;
  for (const auto& run : small_runs) {
    if (run.seconds >= 60.0) {
      std::ostringstream os;
      os << "a trial took " << run.seconds << " s, budget 60 s";
      return {false, os.str()};
    }
    if (run.res.status == SolveStatus::kInfeasible) continue;
    ++feasible;
    if (run.res.status != SolveStatus::kConverged) continue;
    const std::vector<double>& tr = run.res.phase1_trace;
    bool monotone = true;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      if (tr[i] < tr[i - 1] - 1e-6 * std::max(1.0, std::abs(tr[i - 1]))) {
        monotone = false;
        break;
      }
    }
    if (!monotone) continue;
    // The objective must settle (relative step below 1e-4) within the first
    // 50 iterations; the solve may keep polishing the ratio residual past
    // that point before it terminates.
    int settle = -1;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      if (std::abs(tr[i] - tr[i - 1]) <= 1e-4 * std::max(std::abs(tr[i - 1]), 1e-12)) {
        settle = static_cast<int>(i);
        break;
      }
    }
    if (settle < 0 || settle > 50) continue;
    ++converged;
  }
  if (feasible == 0) return {false, "no feasible trials"};
  double rate = static_cast<double>(converged) / feasible;
  std::ostringstream os;
  os << converged << "/" << feasible << " feasible trials converged";
  if (rate < 0.95) return {false, os.str() + " (< 95%)"};
  return {true, os.str()};
}

Outcome criterion7() {
  run_small_batch();
  int checked = 0;
  for (const auto& run : small_runs) {
    if (run.res.status != SolveStatus::kConverged) continue;
    ++checked;
    double t_fin = run.res.phase1_trace.back();
    if (!run.res.phase2_trace.empty()) t_fin = std::max(t_fin, run.res.phase2_trace.back());
    if (run.res.dinkelbach_residual > 1e-5 * std::max(1.0, t_fin)) {
      std::ostringstream os;
      os << "residual " << run.res.dinkelbach_residual << " vs ratio " << t_fin;
      return {false, os.str()};
    }
  }
  if (checked == 0) return {false, "no converged trials to check"};
  std::ostringstream os;
  os << "residual within tolerance on " << checked << " solves";
  return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 8. Channel-estimation error statistics.
// ---------------------------------------------------------------------------
Outcome criterion8() {
  const int users = 4, tau = 2;
  MatrixXd betas(2, users);
  betas << 1.1, 0.6, 1.7, 0.4,
           0.5, 1.3, 0.7, 1.0;
  std::vector<int> rx_of_row{0, 0, 1, 1};  // two APs with two antennas each
  VectorXd p(users);
  p << 0.9, 1.1, 0.7, 1.3;
  double noise = 0.2;
  VectorXd load = beta_tilde(betas, {2, 2}, tau, p);
  PilotAssignment pa = heap_pilot_assignment(load, tau);
  MatrixXd eps = estimation_error_variance(pa.upsilon, betas, p, tau, noise);

  Rng rng(8001);
  MatrixXd acc = MatrixXd::Zero(2, users);  // pooled over each AP's antennas
  const int draws = 100000;
  std::vector<int> pilot_of(users);
  for (int j = 0; j < users; ++j) {
    int i = 0;
    while (pa.upsilon(i, j) == 0) ++i;
    pilot_of[j] = i;
  }
  for (int d = 0; d < draws; ++d) {
    MatrixXcd h(4, users);
    for (int r = 0; r < 4; ++r)
      for (int j = 0; j < users; ++j)
        h(r, j) = std::sqrt(betas(rx_of_row[r], j)) * rng.cnormal();
    MatrixXcd y(4, tau);
    for (int r = 0; r < 4; ++r)
      for (int i = 0; i < tau; ++i) y(r, i) = std::sqrt(noise) * rng.cnormal();
    for (int j = 0; j < users; ++j)
      y.col(pilot_of[j]) += std::sqrt(static_cast<double>(tau) * p(j)) * h.col(j);
    MatrixXcd est = lmmse_estimate(y, pa.upsilon, betas, rx_of_row, p, tau, noise);
    MatrixXd err = (est - h).cwiseAbs2();
    for (int r = 0; r < 4; ++r) acc.row(rx_of_row[r]) += err.row(r);
  }
  acc /= 2.0 * draws;  // two antennas per AP pooled
  for (int r = 0; r < 2; ++r)
    for (int j = 0; j < users; ++j) {
      double rel = std::abs(acc(r, j) - eps(r, j)) / eps(r, j);
      if (rel > 0.03) {
        std::ostringstream os;
        os << "link (" << r << "," << j << "): empirical " << acc(r, j) << " vs closed form "
           << eps(r, j);
        return {false, os.str()};
      }
    }
  return {true, "empirical error variance within 3% on every link"};
}

// ---------------------------------------------------------------------------
// 9. Qualitative orderings on a 16-AP network, paired across 20 seeds.
// ---------------------------------------------------------------------------
ScenarioConfig trend_base() {
  ScenarioConfig cfg;
  cfg.m_aps = 16;
  cfg.k_dl = 4;
  cfg.l_ul = 4;
  cfg.n_per_ap = 2;
  cfg.trials = 20;
  cfg.seed = 9009;
  cfg.tau = 0;
  return cfg;
}

struct PairedMean {
  double diff = 0.0;
  int pairs = 0;
};

PairedMean paired_mean_diff(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b,
                            bool use_ee) {
  PairedMean out;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].status != "optimal" || b[i].status != "optimal") continue;
    double va = use_ee ? a[i].ee_bits_joule : a[i].se_bits_hz;
    double vb = use_ee ? b[i].ee_bits_joule : b[i].se_bits_hz;
    out.diff += va - vb;
    ++out.pairs;
  }
  if (out.pairs > 0) out.diff /= out.pairs;
  return out;
}

std::vector<TrialRecord> filter_strategy(const std::vector<TrialRecord>& recs,
                                         const std::string& name) {
  std::vector<TrialRecord> out;
  for (const auto& r : recs)
    if (r.strategy == name) out.push_back(r);
  return out;
}

Outcome criterion9() {
  // (a) spectral-efficiency ordering of the precoding strategies.
  ScenarioConfig a = trend_base();
  a.eta = 1.0;
  a.r_dl_bits_hz = 0.0;
  a.r_ul_bits_hz = 0.0;
  a.delta = 0.8;
  a.strategies = {Strategy::kIzf, Strategy::kOnbZf, Strategy::kMrtMrc};
  std::vector<TrialRecord> recs = run_scenario(a);
  std::vector<TrialRecord> izf = filter_strategy(recs, "IZF");
  std::vector<TrialRecord> onb = filter_strategy(recs, "ONB_ZF");
  std::vector<TrialRecord> mrt = filter_strategy(recs, "MRT_MRC");
  PairedMean izf_vs_onb = paired_mean_diff(izf, onb, false);
  PairedMean onb_vs_mrt = paired_mean_diff(onb, mrt, false);
  if (izf_vs_onb.pairs < 5 || onb_vs_mrt.pairs < 5) {
    std::ostringstream os;
    os << "too few optimal pairs for the rate ordering (" << izf_vs_onb.pairs << ", "
       << onb_vs_mrt.pairs << ")";
    return {false, os.str()};
  }
  if (izf_vs_onb.diff < -1e-12) {
    std::ostringstream os;
    os << "interference-suppressing basis lost to the orthonormal one by " << -izf_vs_onb.diff;
    return {false, os.str()};
  }
  if (onb_vs_mrt.diff < -1e-12) {
    std::ostringstream os;
    os << "orthonormal basis lost to conjugate processing by " << -onb_vs_mrt.diff;
    return {false, os.str()};
  }

  // (b) energy efficiency with and without AP selection.
  ScenarioConfig b_on = trend_base();
  b_on.eta = 0.0;
  b_on.strategies = {Strategy::kZf};
  ScenarioConfig b_off = b_on;
  b_off.ap_selection = false;
  std::vector<TrialRecord> sel = run_scenario(b_on);
  std::vector<TrialRecord> all_on = run_scenario(b_off);
  PairedMean ee_gain = paired_mean_diff(sel, all_on, true);
  if (ee_gain.pairs < 5) {
    std::ostringstream os;
    os << "too few optimal pairs for the selection comparison (" << ee_gain.pairs << ")";
    return {false, os.str()};
  }
  if (ee_gain.diff < -1e-12) {
    std::ostringstream os;
    os << "AP selection reduced mean energy efficiency by " << -ee_gain.diff;
    return {false, os.str()};
  }

  // (c) full duplex beats half duplex when self-interference is negligible.
  ScenarioConfig c_fd = trend_base();
  c_fd.eta = 1.0;
  c_fd.rho_rsi_db = -150.0;
  c_fd.strategies = {Strategy::kZf};
  ScenarioConfig c_hd = c_fd;
  c_hd.duplex = Duplex::kHd;
  std::vector<TrialRecord> fd = run_scenario(c_fd);
  std::vector<TrialRecord> hd = run_scenario(c_hd);
  PairedMean duplex_gain = paired_mean_diff(fd, hd, false);
  if (duplex_gain.pairs < 5) {
    std::ostringstream os;
    os << "too few optimal pairs for the duplex comparison (" << duplex_gain.pairs << ")";
    return {false, os.str()};
  }
  if (!(duplex_gain.diff > 0.0)) {
    std::ostringstream os;
    os << "full duplex did not out-rate half duplex (diff " << duplex_gain.diff << ")";
    return {false, os.str()};
  }

  std::ostringstream os;
  os << "rate ordering +" << izf_vs_onb.diff << "/+" << onb_vs_mrt.diff << " bits, selection +"
     << ee_gain.diff << " bits/J, duplex +" << duplex_gain.diff << " bits";
  return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 10. Pilot oracle sandwich and heap-order property.
// ---------------------------------------------------------------------------
Outcome criterion10() {
  Rng rng(10001);
  int draws = 0;
  auto check_pair = [&](int tau, int users) -> std::optional<std::string> {
    VectorXd load(users);
    for (int j = 0; j < users; ++j) load(j) = 0.01 + rng.uniform();
    PilotAssignment greedy = heap_pilot_assignment(load, tau);
    auto [ups, opt] = brute_force_assignment(load, tau);
    (void)ups;
    double g = greedy.prc.maxCoeff();
    ++draws;
    if (opt > g + 1e-12) {
      std::ostringstream os;
      os << "tau=" << tau << " U=" << users << ": oracle " << opt << " above greedy " << g;
      return os.str();
    }
    if (g > load.sum() + 1e-12) {
      std::ostringstream os;
      os << "tau=" << tau << " U=" << users << ": greedy above the single-pilot bound";
      return os.str();
    }
    return std::nullopt;
  };

  for (int tau = 1; tau <= 6; ++tau) {
    int u_max = tau == 1 ? 16 : static_cast<int>(std::floor(std::log(1e5) / std::log(tau)));
    for (int users = tau; users <= u_max; ++users) {
      for (int rep = 0; rep < 2; ++rep) {
        if (auto err = check_pair(tau, users)) return {false, *err};
      }
    }
  }
  while (draws < 100) {
    if (auto err = check_pair(3, 7)) return {false, *err};
  }

  const int n = 10000;
  std::vector<double> keys(n);
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) {
    keys[i] = rng.uniform();
    ids[i] = i;
  }
  auto heap = Heap<int>::generate(keys, ids, HeapKind::kMin);
  std::vector<double> sorted_keys = keys;
  std::sort(sorted_keys.begin(), sorted_keys.end());
  for (int i = 0; i < n; ++i) {
    if (heap.extract().key != sorted_keys[i]) {
      return {false, "heap extraction diverged from sorted order"};
    }
  }
  std::ostringstream os;
  os << draws << " sandwich draws and the heap-order sweep clean";
  return {true, os.str()};
}

// ---------------------------------------------------------------------------
// 11. Binary recovery round trip on every converged solve.
// ---------------------------------------------------------------------------
Outcome criterion11() {
  run_small_batch();
  int checked = 0;
  double varpi = 0.001 / 8.0;
  for (const auto& run : small_runs) {
    if (run.res.status != SolveStatus::kConverged) continue;
    ++checked;
    const SolveResult& res = run.res;
    for (int k = 0; k < res.binary.alpha.rows(); ++k)
      for (int m = 0; m < res.binary.alpha.cols(); ++m) {
        int want = res.assoc_ratios(k, m) > varpi ? 1 : 0;
        if (res.binary.alpha(k, m) != want) {
          std::ostringstream os;
          os << "association (" << k << "," << m << ") disagrees with its stored ratio";
          return {false, os.str()};
        }
        if (res.binary.mu(m) == 0 && res.binary.alpha(k, m) == 1) {
          std::ostringstream os;
          os << "user " << k << " associated to sleeping AP " << m;
          return {false, os.str()};
        }
      }
  }
  if (checked == 0) return {false, "no converged solves to check"};
  std::ostringstream os;
  os << "round trip consistent on " << checked << " solves";
  return {true, os.str()};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "greedy pilot assignment reference walk", criterion1},
      {2, "path-loss anchor points", criterion2},
      {3, "zero-forcing family identities", criterion3},
      {4, "interference-subspace suppression", criterion4},
      {5, "surrogate bound validity", criterion5},
      {6, "small-network solver convergence", criterion6},
      {7, "ratio fixed-point residual", criterion7},
      {8, "channel-estimation error statistics", criterion8},
      {9, "qualitative performance orderings", criterion9},
      {10, "pilot oracle sandwich", criterion10},
      {11, "binary recovery round trip", criterion11},
  };
  int fails = 0;
  for (const Entry& e : entries) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    auto t1 = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(t1 - t0).count();
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << e.id << ": " << e.label
              << " - " << out.detail << " (" << s << " s)\n";
    if (!out.pass) ++fails;
  }
  std::cout << (11 - fails) << " of 11 criteria passed\n";
  return fails;
}
