/**
 * @file optimizer.hpp
 * @brief Joint power control, AP-user association and AP on/off selection.
 *
 * The mixed-binary utility maximisation is handled in two phases. Phase 1
 * relaxes the binaries (all APs active, weights free), and alternates inner
 * convex approximations of the weighted SINR constraints with a Dinkelbach
 * update of the energy-efficiency ratio; each subproblem is a small conic
 * program (affine + second-order-cone + log constraints). The association and
 * sleep binaries are then recovered by thresholding per-AP signal-power
 * ratios. Phase 2 re-runs the same loop on the active-AP subnetwork with the
 * binaries frozen, and the final allocation is evaluated with the general
 * (association-gated) SINR expressions.
 */
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "fdcf/channel.hpp"
#include "fdcf/conic.hpp"
#include "fdcf/metrics.hpp"
#include "fdcf/precoding.hpp"

namespace fdcf {

enum class Strategy { kZf, kOnbZf, kIzf, kMrtMrc };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kZf: return "ZF";
    case Strategy::kOnbZf: return "ONB_ZF";
    case Strategy::kIzf: return "IZF";
    case Strategy::kMrtMrc: return "MRT_MRC";
  }
  return "unknown";
}

enum class SolveStatus { kConverged, kInfeasible, kFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kFailure: return "failure";
  }
  return "unknown";
}

struct BinaryState {
  Eigen::MatrixXi alpha;  // K x M association
  Eigen::VectorXi mu;     // M active/sleep
};

struct OptimizerConfig {
  double eta = 0.0;        // utility mix: 1 -> spectral efficiency, 0 -> energy efficiency
  double varpi = -1.0;     // association threshold; negative -> 0.1% of 1/M
  double delta_pca = 0.99; // energy-ratio level of the interference-suppressing basis
  // Hard cap on main-loop iterations. The objective trace typically settles
  // (relative change below rel_tol) within a few dozen iterations; the loop
  // then keeps polishing until the ratio-update residual also clears, which
  // rides a slower geometric tail and needs the larger budget.
  int max_iters = 200;
  double rel_tol = 1e-4;         // relative change of the objective trace
  double dinkelbach_tol = 1e-5;  // |F_se - t*phi| <= tol * max(1, t)
  int max_init_iters = 30;
  double qos_slack_tol = 1e-5;   // initialization counts as feasible above -tol
  bool ap_selection = true;
  double p_ap_max_w = 0.0;       // per-AP radiated budget, watts
  Eigen::VectorXd p_ue_max_w;    // per-UL-user budget, watts
  SolverOptions conic = {.feas_tol = 1e-8, .gap_tol = 1e-8, .max_newton_per_phase = 400};
};

struct StrategyArtifacts {
  PrecoderBasis basis;
  ReceiverSet receivers;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kFailure;
  WeightAllocation alloc;        // final weights (phase-2 system)
  Eigen::MatrixXcd W;            // final full-size precoder, association-gated
  BinaryState binary;
  Eigen::MatrixXd assoc_ratios;  // K x M per-AP signal-power ratios used for recovery
  double se = 0.0;               // nats/s/Hz, general-form evaluation
  double ee = 0.0;               // nats/joule
  double p_total = 0.0;          // watts
  double objective = 0.0;        // eta * se + (1 - eta) * ee
  std::vector<double> phase1_trace;  // objective ratio per iteration
  std::vector<double> phase2_trace;
  int iters = 0;
  double dinkelbach_residual = 0.0;
};

// ---------------------------------------------------------------------------
// Surrogate bounds
// ---------------------------------------------------------------------------

/// Affine minorant of x^2 / y around (x0, y0); tight at the expansion point.
inline double h_fr_bound(double x, double y, double x0, double y0) {
  return (2.0 * x0 / y0) * x - (x0 * x0 / (y0 * y0)) * y;
}

/// Affine minorant of z^2 around z0; tight at z0.
inline double h_qu_bound(double z, double z0) { return 2.0 * z0 * z - z0 * z0; }

/// Per-AP share of a user's received signal power:
/// |c1 . x1|^2 / (|c2 . x2|^2 + eps).
inline double signal_power_ratio(const Eigen::VectorXcd& x1, const Eigen::RowVectorXcd& c1,
                                 const Eigen::VectorXcd& x2, const Eigen::RowVectorXcd& c2,
                                 double eps) {
  double num = std::norm((c1 * x1)(0));
  double den = std::norm((c2 * x2)(0)) + eps;
  return num / den;
}

/// Scale-aware floor for the signal-power ratio denominators.
inline double ratio_epsilon(const ChannelSet& ch, double p_ap_max_w) {
  double gmax = 0.0;
  for (int m = 0; m < ch.m_aps; ++m) {
    for (int k = 0; k < ch.k_dl; ++k) {
      gmax = std::max(gmax, ch.H_d.block(k, ch.offsets[m], 1, ch.antennas[m]).squaredNorm());
    }
    for (int l = 0; l < ch.l_ul; ++l) {
      gmax = std::max(gmax, ch.H_u.block(ch.offsets[m], l, ch.antennas[m], 1).squaredNorm());
    }
  }
  return 1e-12 * p_ap_max_w * gmax;
}

/// Association recovery: alpha_km = 1 iff AP m contributes more than the
/// threshold share of user k's signal power under weights W. Also returns the
/// raw ratios for round-trip checks.
inline std::pair<Eigen::MatrixXi, Eigen::MatrixXd> recover_alpha(const Eigen::MatrixXcd& w,
                                                                 const ChannelSet& ch, double varpi,
                                                                 double eps) {
  Eigen::MatrixXi alpha(ch.k_dl, ch.m_aps);
  Eigen::MatrixXd ratios(ch.k_dl, ch.m_aps);
  for (int k = 0; k < ch.k_dl; ++k) {
    Eigen::RowVectorXcd hk = ch.H_d.row(k);
    Eigen::VectorXcd wk = w.col(k);
    for (int m = 0; m < ch.m_aps; ++m) {
      Eigen::RowVectorXcd hkm = hk.segment(ch.offsets[m], ch.antennas[m]);
      Eigen::VectorXcd wkm = wk.segment(ch.offsets[m], ch.antennas[m]);
      ratios(k, m) = signal_power_ratio(wkm, hkm, wk, hk, eps);
      alpha(k, m) = ratios(k, m) > varpi ? 1 : 0;
    }
  }
  return {alpha, ratios};
}

/// Sleep rule: an AP stays active iff it carries a non-negligible share of at
/// least one downlink or uplink user's signal.
inline Eigen::VectorXi update_mu(const Eigen::MatrixXcd& w, const Eigen::VectorXd& p,
                                 const ReceiverSet& rec, const ChannelSet& ch, double varpi,
                                 double eps) {
  Eigen::VectorXi mu = Eigen::VectorXi::Zero(ch.m_aps);
  auto [alpha, ratios] = recover_alpha(w, ch, varpi, eps);
  for (int m = 0; m < ch.m_aps; ++m) {
    if ((alpha.col(m).array() == 1).any()) {
      mu(m) = 1;
      continue;
    }
    for (int l = 0; l < ch.l_ul; ++l) {
      Eigen::RowVectorXcd al = rec.rows.row(l);
      Eigen::VectorXcd hl = ch.H_u.col(l);
      Eigen::RowVectorXcd alm = al.segment(ch.offsets[m], ch.antennas[m]);
      Eigen::VectorXcd hlm = hl.segment(ch.offsets[m], ch.antennas[m]);
      double sp = std::sqrt(p(l));
      double r = signal_power_ratio(sp * hlm, alm, sp * hl, al, eps);
      if (r > varpi) {
        mu(m) = 1;
        break;
      }
    }
  }
  return mu;
}

inline StrategyArtifacts build_strategy(Strategy strategy, const ChannelSet& ch, double delta_pca) {
  switch (strategy) {
    case Strategy::kZf:
      return {zf_precoder_basis(ch.H_d), zf_receiver_set(ch.H_u)};
    case Strategy::kOnbZf:
      return {onb_zf_basis(ch.H_d), zf_receiver_set(ch.H_u)};
    case Strategy::kIzf:
      return {onb_zf_pca_basis(ch.H_d, ch.G_aa, delta_pca), zf_sic_receivers(ch.H_u)};
    case Strategy::kMrtMrc:
      return {mrt_basis(ch.H_d), mrc_receiver(ch.H_u)};
  }
  throw std::invalid_argument("build_strategy: unknown strategy");
}

/// Channel subset on the active APs (mu == 1), with the active original AP
/// indices reported alongside.
inline std::pair<ChannelSet, std::vector<int>> reduce_channels(const ChannelSet& ch,
                                                               const Eigen::VectorXi& mu) {
  std::vector<int> active;
  for (int m = 0; m < ch.m_aps; ++m)
    if (mu(m) == 1) active.push_back(m);
  ChannelSet r;
  r.m_aps = static_cast<int>(active.size());
  r.k_dl = ch.k_dl;
  r.l_ul = ch.l_ul;
  r.noise_dl = ch.noise_dl;
  r.noise_ap = ch.noise_ap;
  int n = 0;
  for (int m : active) {
    r.antennas.push_back(ch.antennas[m]);
    r.offsets.push_back(n);
    n += ch.antennas[m];
  }
  r.n_total = n;
  std::vector<int> cols;
  for (int m : active)
    for (int a = 0; a < ch.antennas[m]; ++a) cols.push_back(ch.offsets[m] + a);
  r.H_d.resize(ch.k_dl, n);
  r.H_u.resize(n, ch.l_ul);
  r.G_aa.resize(n, n);
  for (int i = 0; i < n; ++i) {
    r.H_d.col(i) = ch.H_d.col(cols[i]);
    r.H_u.row(i) = ch.H_u.row(cols[i]);
    for (int j = 0; j < n; ++j) r.G_aa(i, j) = ch.G_aa(cols[i], cols[j]);
  }
  r.G_cci = ch.G_cci;
  r.beta_d.resize(ch.k_dl, r.m_aps);
  r.beta_u.resize(r.m_aps, ch.l_ul);
  r.beta_aa.resize(r.m_aps, r.m_aps);
  for (int i = 0; i < r.m_aps; ++i) {
    r.beta_d.col(i) = ch.beta_d.col(active[i]);
    r.beta_u.row(i) = ch.beta_u.row(active[i]);
    for (int j = 0; j < r.m_aps; ++j) r.beta_aa(i, j) = ch.beta_aa(active[i], active[j]);
  }
  r.beta_cci = ch.beta_cci;
  return {r, active};
}

namespace opt_detail {

// Variable layout of one conic subproblem. Order:
// omega(K) p(L) lamd(K) lamu(L) psid(K) psiu(L) sd(K) su(L) qd(K) qu(L) xi phi
// [thetad(K) thetau(L) in initialization mode].
struct Layout {
  int K = 0, L = 0;
  bool init_mode = false;
  int omega(int k) const { return k; }
  int p(int l) const { return K + l; }
  int lamd(int k) const { return K + L + k; }
  int lamu(int l) const { return 2 * K + L + l; }
  int psid(int k) const { return 2 * K + 2 * L + k; }
  int psiu(int l) const { return 3 * K + 2 * L + l; }
  int sd(int k) const { return 3 * K + 3 * L + k; }
  int su(int l) const { return 4 * K + 3 * L + l; }
  int qd(int k) const { return 4 * K + 4 * L + k; }
  int qu(int l) const { return 5 * K + 4 * L + l; }
  int xi() const { return 5 * K + 5 * L; }
  int phi() const { return 5 * K + 5 * L + 1; }
  int thetad(int k) const { return 5 * K + 5 * L + 2 + k; }
  int thetau(int l) const { return 6 * K + 5 * L + 2 + l; }
  int size() const { return 5 * K + 5 * L + 2 + (init_mode ? K + L : 0); }
};

// Everything that stays fixed across the iterations of one optimisation
// phase: the system (possibly reduced to active APs), SINR coefficients,
// per-AP power coefficients and the constant part of the power model.
struct InnerSystem {
  const ChannelSet* ch = nullptr;
  StrategyArtifacts art;
  WeightedCoeffs coeffs;
  Eigen::MatrixXd rho;   // M x K: ||basis block (m, k)||^2
  Eigen::MatrixXd g_km;  // M x K: |h_km . basis block (m, k)|^2
  double p_ap_max = 0.0;
  Eigen::VectorXd p_ue_max;
  const PowerModelParams* power = nullptr;
  double eps = 0.0;
  // Power model bookkeeping over the full network.
  double fixed_const = 0.0;       // everything independent of (omega, p, s)
  bool rsp_baseband = false;      // phase 1: DL baseband power follows the signal-share ratios
  double bb_dl_const = 0.0;       // phase 2: frozen DL baseband power
  Eigen::VectorXd r_dl, r_ul;     // QoS thresholds, nats
};

inline InnerSystem make_inner(const ChannelSet& ch, StrategyArtifacts art,
                              const PowerModelParams& power, const QosThresholds& qos,
                              const OptimizerConfig& cfg, const Eigen::VectorXi& mu_full,
                              int m_full, const std::optional<Eigen::MatrixXi>& alpha_fixed,
                              double eps) {
  InnerSystem sys;
  sys.ch = &ch;
  sys.art = std::move(art);
  sys.coeffs = weighted_coeffs(sys.art.basis, sys.art.receivers, ch);
  const int M = ch.m_aps, K = ch.k_dl, L = ch.l_ul;
  sys.rho.resize(M, K);
  sys.g_km.resize(M, K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXcd bkm = sys.art.basis.basis.block(ch.offsets[m], k, ch.antennas[m], 1);
      sys.rho(m, k) = bkm.squaredNorm();
      Eigen::RowVectorXcd hkm = ch.H_d.block(k, ch.offsets[m], 1, ch.antennas[m]);
      sys.g_km(m, k) = std::norm((hkm * bkm)(0));
    }
  }
  sys.p_ap_max = cfg.p_ap_max_w;
  sys.p_ue_max = cfg.p_ue_max_w;
  sys.power = &power;
  sys.eps = eps;
  sys.r_dl = qos.r_dl;
  sys.r_ul = qos.r_ul;

  // Fixed power: active/sleep split over the full network, unconditional
  // circuit terms, and the uplink-side baseband load of active APs.
  int active = mu_full.sum();
  sys.fixed_const = active * power.p_active_w + (m_full - active) * power.p_sleep_w +
                    m_full * power.p_ap_cir_w + K * power.p_dlue_cir_w + L * power.p_ulue_cir_w +
                    static_cast<double>(L) * active * power.p_bb_ul_w;
  if (alpha_fixed.has_value()) {
    sys.rsp_baseband = false;
    // Count only associations at active APs; columns of alpha_fixed follow
    // full-network indexing.
    double cnt = 0.0;
    for (int m = 0; m < m_full; ++m)
      if (mu_full(m) == 1) cnt += alpha_fixed->col(m).sum();
    sys.bb_dl_const = power.p_bb_dl_w * cnt;
  } else {
    sys.rsp_baseband = true;
    sys.bb_dl_const = 0.0;
  }
  return sys;
}

// Affine total-power expression over the subproblem variables:
// P = omega_coef . omega + sum(p) / nu_ue + s_coef * sum(s) + cst.
struct PowerExpr {
  Eigen::VectorXd omega_coef;  // K
  double p_coef = 0.0;
  double s_coef = 0.0;
  double cst = 0.0;

  double eval(const Eigen::VectorXd& omega, const Eigen::VectorXd& p, double se_soft) const {
    return omega_coef.dot(omega) + p_coef * p.sum() + s_coef * se_soft + cst;
  }
};

inline PowerExpr make_power_expr(const InnerSystem& sys, const Eigen::VectorXd& omega0) {
  const int M = sys.ch->m_aps, K = sys.ch->k_dl;
  PowerExpr pe;
  pe.omega_coef = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k) pe.omega_coef(k) = sys.rho.col(k).sum() / sys.power->nu_ap;
  if (sys.rsp_baseband) {
    // Share ratios are linear in omega_k once the denominator is frozen at
    // the expansion point.
    for (int k = 0; k < K; ++k) {
      double den = omega0(k) * sys.coeffs.gdl(k) + sys.eps;
      for (int m = 0; m < M; ++m) {
        pe.omega_coef(k) += sys.power->p_bb_dl_w * sys.g_km(m, k) / den;
      }
    }
  }
  pe.p_coef = 1.0 / sys.power->nu_ue;
  pe.s_coef = sys.power->p_bh_w_per_gbps * sys.power->bandwidth_hz / (kLn2 * 1e9);
  pe.cst = sys.fixed_const + sys.bb_dl_const;
  return pe;
}

struct Iterate {
  Eigen::VectorXd omega, p;
  Eigen::VectorXd psid, psiu;
  Eigen::VectorXd lamd, lamu;
  double xi = 0.0, phi = 1.0;
  double se_soft = 0.0;  // sum log(1 + lambda)
  double p_bar = 0.0;
  double ratio() const { return se_soft / phi; }
};

// Tight denominator ratios for the weighted SINR constraints.
inline void tight_psi(const InnerSystem& sys, const Eigen::VectorXd& omega, const Eigen::VectorXd& p,
                      Eigen::VectorXd& psid, Eigen::VectorXd& psiu) {
  const int K = sys.ch->k_dl, L = sys.ch->l_ul;
  psid.resize(K);
  psiu.resize(L);
  for (int k = 0; k < K; ++k) {
    double den = sys.coeffs.mui_dl.row(k).dot(omega.transpose()) +
                 sys.coeffs.cci.row(k).dot(p.transpose()) + sys.ch->noise_dl(k);
    psid(k) = den / sys.coeffs.gdl(k);
  }
  for (int l = 0; l < L; ++l) {
    double den = sys.coeffs.mui_ul.row(l).dot(p.transpose()) +
                 sys.coeffs.iai.row(l).dot(omega.transpose()) +
                 sys.ch->noise_ap * sys.coeffs.a_norm2(l);
    psiu(l) = den / sys.coeffs.gul(l);
  }
}

// Re-tightens every derived quantity at (omega, p): psi to the exact
// denominator ratios, lambda to omega/psi, xi to sqrt(P), and phi to the
// largest of the solver value and the hyperbolic floor xi^2/u. Keeping the
// iterate tight makes every linearisation exact at the expansion point.
inline Iterate canonicalize(const InnerSystem& sys, const Eigen::VectorXd& omega,
                            const Eigen::VectorXd& p, double eta, double phi_solver) {
  Iterate it;
  it.omega = omega.cwiseMax(0.0);
  it.p = p.cwiseMax(0.0);
  tight_psi(sys, it.omega, it.p, it.psid, it.psiu);
  it.lamd = it.omega.cwiseQuotient(it.psid);
  it.lamu = it.p.cwiseQuotient(it.psiu);
  it.se_soft = 0.0;
  for (int k = 0; k < it.lamd.size(); ++k) it.se_soft += std::log1p(it.lamd(k));
  for (int l = 0; l < it.lamu.size(); ++l) it.se_soft += std::log1p(it.lamu(l));
  PowerExpr pe = make_power_expr(sys, it.omega);
  it.p_bar = pe.eval(it.omega, it.p, it.se_soft);
  it.xi = std::sqrt(it.p_bar);
  double u = eta * it.p_bar + 1.0 - eta;
  double phi_floor = it.p_bar / u;  // equals xi^2 / u
  it.phi = std::isfinite(phi_solver) ? std::max(phi_solver, phi_floor) : phi_floor;
  return it;
}

// Every rate slack lives comfortably inside this window; the bounds keep the
// barrier sublevel sets compact in all solver phases.
constexpr double kRateSlackLo = -1.0;
constexpr double kRateSlackHi = 60.0;

inline Eigen::VectorXd pack_warm_start(const Layout& lay, const Iterate& it,
                                       const InnerSystem& sys) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.size());
  for (int k = 0; k < lay.K; ++k) {
    x(lay.omega(k)) = it.omega(k);
    x(lay.lamd(k)) = it.lamd(k);
    x(lay.psid(k)) = it.psid(k);
    x(lay.sd(k)) = lay.init_mode ? 0.0 : std::log1p(it.lamd(k));
    x(lay.qd(k)) = std::sqrt(it.omega(k));
    if (lay.init_mode) x(lay.thetad(k)) = std::min(0.0, it.lamd(k) + 1.0 - std::exp(sys.r_dl(k)));
  }
  for (int l = 0; l < lay.L; ++l) {
    x(lay.p(l)) = it.p(l);
    x(lay.lamu(l)) = it.lamu(l);
    x(lay.psiu(l)) = it.psiu(l);
    x(lay.su(l)) = lay.init_mode ? 0.0 : std::log1p(it.lamu(l));
    x(lay.qu(l)) = std::sqrt(it.p(l));
    if (lay.init_mode) x(lay.thetau(l)) = std::min(0.0, it.lamu(l) + 1.0 - std::exp(sys.r_ul(l)));
  }
  x(lay.xi()) = it.xi;
  x(lay.phi()) = it.phi;
  return x;
}

/// One inner convex approximation subproblem around `it`. In init mode the
/// QoS thresholds are replaced by maximised slack variables theta <= 0 and
/// the power chain is dropped; in main mode the objective is the
/// Dinkelbach-shifted soft SE. `include_power_chain = false` in main mode
/// pins the ratio machinery, leaving a pure soft-SE maximisation.
///
/// Unused variables are pinned by equality rows and every remaining variable
/// is boxed, directly or through the constraints, so that all solver phases
/// work over compact sublevel sets.
inline ConicProgram build_subproblem(const InnerSystem& sys, const Iterate& it, double t,
                                     double eta, bool init_mode, bool include_power_chain = true) {
  const int K = sys.ch->k_dl, L = sys.ch->l_ul, M = sys.ch->m_aps;
  const bool chain = !init_mode && include_power_chain;
  Layout lay{K, L, init_mode};
  ConicProgram prog = ConicProgram::make(lay.size());
  PowerExpr pe = make_power_expr(sys, it.omega);

  // Objective.
  if (init_mode) {
    for (int k = 0; k < K; ++k) prog.maximize(lay.thetad(k)) = 1.0;
    for (int l = 0; l < L; ++l) prog.maximize(lay.thetau(l)) = 1.0;
  } else {
    for (int k = 0; k < K; ++k) prog.maximize(lay.sd(k)) = 1.0;
    for (int l = 0; l < L; ++l) prog.maximize(lay.su(l)) = 1.0;
    if (chain) prog.maximize(lay.phi()) = -t;
  }

  // Bounds.
  for (int k = 0; k < K; ++k) {
    prog.lower(lay.omega(k)) = 0.0;
    prog.lower(lay.psid(k)) = 0.0;
    prog.lower(lay.qd(k)) = 0.0;
    prog.lower(lay.lamd(k)) = init_mode ? 0.0 : std::max(0.0, std::exp(sys.r_dl(k)) - 1.0);
    if (!init_mode) {
      prog.lower(lay.sd(k)) = kRateSlackLo;
      prog.upper(lay.sd(k)) = kRateSlackHi;
    }
    if (init_mode) {
      prog.lower(lay.thetad(k)) = -std::exp(sys.r_dl(k));
      prog.upper(lay.thetad(k)) = 0.0;
    }
  }
  for (int l = 0; l < L; ++l) {
    prog.lower(lay.p(l)) = 0.0;
    prog.upper(lay.p(l)) = sys.p_ue_max(l);
    prog.lower(lay.psiu(l)) = 0.0;
    prog.lower(lay.qu(l)) = 0.0;
    prog.lower(lay.lamu(l)) = init_mode ? 0.0 : std::max(0.0, std::exp(sys.r_ul(l)) - 1.0);
    if (!init_mode) {
      prog.lower(lay.su(l)) = kRateSlackLo;
      prog.upper(lay.su(l)) = kRateSlackHi;
    }
    if (init_mode) {
      prog.lower(lay.thetau(l)) = -std::exp(sys.r_ul(l));
      prog.upper(lay.thetau(l)) = 0.0;
    }
  }
  if (chain) {
    // Conservative caps keep xi and phi boxed: evaluate the affine power
    // expression at the loosest per-variable limits.
    Eigen::VectorXd omega_cap(K);
    for (int k = 0; k < K; ++k) {
      double rho_max = sys.rho.col(k).maxCoeff();
      omega_cap(k) = sys.p_ap_max / std::max(rho_max, 1e-300);
    }
    double p_cap = pe.eval(omega_cap, sys.p_ue_max, (K + L) * kRateSlackHi);
    prog.lower(lay.xi()) = 0.0;
    prog.upper(lay.xi()) = 10.0 * std::sqrt(std::max(1.0, p_cap));
    prog.lower(lay.phi()) = 1e-12;
    prog.upper(lay.phi()) = 10.0 * std::max(1.0, p_cap);
  }

  auto add_row = [&](const Eigen::VectorXd& a, double b) { prog.rows.push_back({a, b, false}); };
  auto pin = [&](int idx, double value) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
    a(idx) = 1.0;
    prog.rows.push_back({a, value, true});
  };

  // Pin whatever plays no role in this mode so the reduction drops it.
  if (init_mode) {
    for (int k = 0; k < K; ++k) pin(lay.sd(k), 0.0);
    for (int l = 0; l < L; ++l) pin(lay.su(l), 0.0);
  }
  if (!chain) {
    pin(lay.xi(), std::max(it.xi, 1.0));
    pin(lay.phi(), std::max(it.phi, 1.0));
  }

  // Per-AP radiated power budgets.
  for (int m = 0; m < M; ++m) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
    for (int k = 0; k < K; ++k) a(lay.omega(k)) = sys.rho(m, k);
    add_row(a, sys.p_ap_max);
  }

  // Downlink denominator ratios: gdl_k * psid_k >= MUI + CCI + noise.
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
    a(lay.psid(k)) = -sys.coeffs.gdl(k);
    for (int kp = 0; kp < K; ++kp)
      if (kp != k) a(lay.omega(kp)) = sys.coeffs.mui_dl(k, kp);
    for (int l = 0; l < L; ++l) a(lay.p(l)) = sys.coeffs.cci(k, l);
    add_row(a, -sys.ch->noise_dl(k));
  }

  // Uplink denominator ratios: gul_l * psiu_l >= MUI + AP-to-AP + noise.
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
    a(lay.psiu(l)) = -sys.coeffs.gul(l);
    for (int lp = 0; lp < L; ++lp)
      if (lp != l) a(lay.p(lp)) = sys.coeffs.mui_ul(l, lp);
    for (int k = 0; k < K; ++k) a(lay.omega(k)) = sys.coeffs.iai(l, k);
    add_row(a, -sys.ch->noise_ap * sys.coeffs.a_norm2(l));
  }

  // SINR minorants: lambda <= (2 x0/y0) q - (x0/y0)^2 psi, expanded at
  // (sqrt(omega0), psid0) and (sqrt(p0), psiu0).
  for (int k = 0; k < K; ++k) {
    double x0 = std::sqrt(std::max(it.omega(k), 1e-300));
    double y0 = it.psid(k);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
    a(lay.lamd(k)) = 1.0;
    a(lay.qd(k)) = -2.0 * x0 / y0;
    a(lay.psid(k)) = x0 * x0 / (y0 * y0);
    add_row(a, 0.0);
  }
  for (int l = 0; l < L; ++l) {
    double x0 = std::sqrt(std::max(it.p(l), 1e-300));
    double y0 = it.psiu(l);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
    a(lay.lamu(l)) = 1.0;
    a(lay.qu(l)) = -2.0 * x0 / y0;
    a(lay.psiu(l)) = x0 * x0 / (y0 * y0);
    add_row(a, 0.0);
  }

  if (init_mode) {
    // theta_k <= lambda_k + 1 - exp(r_k).
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
      a(lay.thetad(k)) = 1.0;
      a(lay.lamd(k)) = -1.0;
      add_row(a, 1.0 - std::exp(sys.r_dl(k)));
    }
    for (int l = 0; l < L; ++l) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
      a(lay.thetau(l)) = 1.0;
      a(lay.lamu(l)) = -1.0;
      add_row(a, 1.0 - std::exp(sys.r_ul(l)));
    }
  }

  if (chain) {
    // Total power under the quadratic minorant of xi^2:
    // P(omega, p, s) <= 2 xi0 xi - xi0^2.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.size());
    for (int k = 0; k < K; ++k) {
      a(lay.omega(k)) = pe.omega_coef(k);
      a(lay.sd(k)) = pe.s_coef;
    }
    for (int l = 0; l < L; ++l) {
      a(lay.p(l)) = pe.p_coef;
      a(lay.su(l)) = pe.s_coef;
    }
    a(lay.xi()) = -2.0 * it.xi;
    add_row(a, -pe.cst - it.xi * it.xi);

    // xi^2 <= phi * (eta P + 1 - eta) as a rotated cone:
    // ||[2 xi, phi - u]|| <= phi + u with u affine.
    Eigen::VectorXd u_lin = Eigen::VectorXd::Zero(lay.size());
    double u_cst = eta * pe.cst + 1.0 - eta;
    for (int k = 0; k < K; ++k) {
      u_lin(lay.omega(k)) = eta * pe.omega_coef(k);
      u_lin(lay.sd(k)) = eta * pe.s_coef;
    }
    for (int l = 0; l < L; ++l) {
      u_lin(lay.p(l)) = eta * pe.p_coef;
      u_lin(lay.su(l)) = eta * pe.s_coef;
    }
    SocBlock soc;
    soc.A = Eigen::MatrixXd::Zero(2, lay.size());
    soc.A(0, lay.xi()) = 2.0;
    soc.A.row(1) = -u_lin.transpose();
    soc.A(1, lay.phi()) += 1.0;
    soc.b = Eigen::VectorXd::Zero(2);
    soc.b(1) = -u_cst;
    soc.c = u_lin;
    soc.c(lay.phi()) += 1.0;
    soc.d = u_cst;
    prog.socs.push_back(std::move(soc));
  }

  // q^2 <= omega and q^2 <= p as rotated cones. Dividing by a reference level
  // c from the expansion point, ||[2q/sqrt(c), v/c - 1]|| <= v/c + 1, keeps
  // the cone data O(1) even when the power variables live many orders of
  // magnitude below the constants.
  auto add_sqrt_cone = [&](int q_idx, int v_idx, double ref) {
    double c = std::max(ref, 1e-300);
    SocBlock soc;
    soc.A = Eigen::MatrixXd::Zero(2, lay.size());
    soc.A(0, q_idx) = 2.0 / std::sqrt(c);
    soc.A(1, v_idx) = 1.0 / c;
    soc.b = Eigen::VectorXd::Zero(2);
    soc.b(1) = -1.0;
    soc.c = Eigen::VectorXd::Zero(lay.size());
    soc.c(v_idx) = 1.0 / c;
    soc.d = 1.0;
    prog.socs.push_back(std::move(soc));
  };
  for (int k = 0; k < K; ++k) add_sqrt_cone(lay.qd(k), lay.omega(k), it.omega(k));
  for (int l = 0; l < L; ++l) add_sqrt_cone(lay.qu(l), lay.p(l), it.p(l));

  // Rate hypographs: s <= ln(1 + lambda). The init problem works on the
  // SINR targets directly and skips them.
  if (!init_mode) {
    for (int k = 0; k < K; ++k) {
      ExpBlock e;
      e.f = Eigen::VectorXd::Zero(lay.size());
      e.f(lay.sd(k)) = 1.0;
      e.h = Eigen::VectorXd::Zero(lay.size());
      e.h(lay.lamd(k)) = 1.0;
      e.k = 1.0;
      prog.exps.push_back(std::move(e));
    }
    for (int l = 0; l < L; ++l) {
      ExpBlock e;
      e.f = Eigen::VectorXd::Zero(lay.size());
      e.f(lay.su(l)) = 1.0;
      e.h = Eigen::VectorXd::Zero(lay.size());
      e.h(lay.lamu(l)) = 1.0;
      e.k = 1.0;
      prog.exps.push_back(std::move(e));
    }
  }

  prog.warm_start = pack_warm_start(lay, it, sys);
  return prog;
}

/// First expansion point: an even downlink power split sized against the
/// strongest basis column, half uplink budget, everything else tight.
inline Iterate initial_iterate(const InnerSystem& sys, double eta) {
  const int K = sys.ch->k_dl, M = sys.ch->m_aps;
  double colmax = 0.0;
  for (int k = 0; k < K; ++k) colmax = std::max(colmax, sys.rho.col(k).sum());
  double total_budget = M * sys.p_ap_max;
  Eigen::VectorXd omega =
      Eigen::VectorXd::Constant(K, total_budget / (2.0 * K * std::max(colmax, 1e-300)));
  // Respect every per-AP budget at the start.
  double worst = 0.0;
  for (int m = 0; m < M; ++m) worst = std::max(worst, sys.rho.row(m).dot(omega.transpose()));
  if (worst > sys.p_ap_max) omega *= 0.9 * sys.p_ap_max / worst;
  Eigen::VectorXd p = sys.p_ue_max * 0.5;
  return canonicalize(sys, omega, p, eta, std::numeric_limits<double>::quiet_NaN());
}

struct PhaseOutcome {
  bool feasible = false;
  bool converged = false;
  Iterate iterate;
  std::vector<double> trace;
  int iters = 0;
  double residual = 0.0;
  ConicStatus last_status = ConicStatus::kOptimal;
};

/// Initialization: maximise the total QoS slack until it clears -tol.
inline PhaseOutcome find_initial_point(const InnerSystem& sys, const OptimizerConfig& cfg) {
  PhaseOutcome out;
  Layout lay{sys.ch->k_dl, sys.ch->l_ul, true};
  Iterate it = initial_iterate(sys, cfg.eta);
  double theta_prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_init_iters; ++iter) {
    ConicProgram prog = build_subproblem(sys, it, 0.0, cfg.eta, true);
    ConicSolution sol = solve(prog, cfg.conic);
    if (sol.status != ConicStatus::kOptimal) {
      SolverOptions relaxed = cfg.conic;
      relaxed.gap_tol = 1e-7;
      relaxed.feas_tol = 1e-7;
      sol = solve(prog, relaxed);
    }
    ++out.iters;
    if (sol.status != ConicStatus::kOptimal) {
      out.last_status = sol.status;
      return out;  // cannot certify feasibility
    }
    Eigen::VectorXd omega(lay.K), p(lay.L);
    for (int k = 0; k < lay.K; ++k) omega(k) = sol.x(lay.omega(k));
    for (int l = 0; l < lay.L; ++l) p(l) = sol.x(lay.p(l));
    it = canonicalize(sys, omega, p, cfg.eta, std::numeric_limits<double>::quiet_NaN());
    double theta = 0.0;
    for (int k = 0; k < lay.K; ++k)
      theta += std::min(0.0, it.lamd(k) + 1.0 - std::exp(sys.r_dl(k)));
    for (int l = 0; l < lay.L; ++l)
      theta += std::min(0.0, it.lamu(l) + 1.0 - std::exp(sys.r_ul(l)));
    out.trace.push_back(theta);
    if (theta >= -cfg.qos_slack_tol) {
      out.feasible = true;
      out.iterate = it;
      return out;
    }
    if (theta - theta_prev <= std::max(1e-9, 1e-3 * std::abs(theta))) break;  // stagnated short of 0
    theta_prev = theta;
  }
  out.iterate = it;
  return out;  // infeasible
}

/// Main loop: alternate the convex subproblem with the ratio update until the
/// trace settles and the Dinkelbach residual clears.
inline PhaseOutcome run_phase(const InnerSystem& sys, const OptimizerConfig& cfg, Iterate it) {
  PhaseOutcome out;
  out.feasible = true;
  Layout lay{sys.ch->k_dl, sys.ch->l_ul, false};
  double t = it.ratio();
  out.trace.push_back(t);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    ConicProgram prog = build_subproblem(sys, it, t, cfg.eta, false);
    ConicSolution sol = solve(prog, cfg.conic);
    if (sol.status != ConicStatus::kOptimal) {
      SolverOptions relaxed = cfg.conic;
      relaxed.gap_tol = 1e-7;
      relaxed.feas_tol = 1e-7;
      sol = solve(prog, relaxed);
    }
    ++out.iters;
    if (sol.status != ConicStatus::kOptimal) {
      out.last_status = sol.status;
      out.iterate = it;
      return out;  // best-so-far iterate, not converged
    }
    Eigen::VectorXd omega(lay.K), p(lay.L);
    for (int k = 0; k < lay.K; ++k) omega(k) = sol.x(lay.omega(k));
    for (int l = 0; l < lay.L; ++l) p(l) = sol.x(lay.p(l));
    it = canonicalize(sys, omega, p, cfg.eta, sol.x(lay.phi()));
    double t_new = it.ratio();
    out.trace.push_back(t_new);
    out.residual = std::abs(it.se_soft - t * it.phi);
    bool trace_settled = std::abs(t_new - t) <= cfg.rel_tol * std::max(std::abs(t), 1e-12);
    bool dinkelbach_ok = out.residual <= cfg.dinkelbach_tol * std::max(1.0, t_new);
    t = t_new;
    if (trace_settled && dinkelbach_ok) {
      out.converged = true;
      break;
    }
  }
  out.iterate = it;
  return out;
}

}  // namespace opt_detail

/// Full two-phase solve. `alpha_fixed` freezes the association (single-AP
/// architectures); `builder` overrides how precoder/receiver artifacts are
/// constructed on a (possibly reduced) channel set.
inline SolveResult solve_se_ee(
    const ChannelSet& ch, Strategy strategy, const QosThresholds& qos,
    const PowerModelParams& power, const OptimizerConfig& cfg,
    std::optional<Eigen::MatrixXi> alpha_fixed = std::nullopt,
    std::function<StrategyArtifacts(const ChannelSet&, const std::vector<int>&)> builder = {}) {
  using namespace opt_detail;
  const int M = ch.m_aps, K = ch.k_dl, L = ch.l_ul;
  if (qos.r_dl.size() != K || qos.r_ul.size() != L) {
    throw std::invalid_argument("solve_se_ee: QoS vectors must match user counts");
  }
  if (!(cfg.p_ap_max_w > 0.0) || cfg.p_ue_max_w.size() != L) {
    throw std::invalid_argument("solve_se_ee: power budgets not configured");
  }
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) {
    throw std::invalid_argument("solve_se_ee: eta must lie in [0, 1]");
  }
  double varpi = cfg.varpi > 0.0 ? cfg.varpi : 0.001 / M;
  double eps = ratio_epsilon(ch, cfg.p_ap_max_w);

  SolveResult res;
  std::vector<int> all_aps(M);
  for (int m = 0; m < M; ++m) all_aps[m] = m;
  auto make_artifacts = [&](const ChannelSet& c, const std::vector<int>& active) {
    return builder ? builder(c, active) : build_strategy(strategy, c, cfg.delta_pca);
  };

  // ---- Phase 1: all APs active --------------------------------------------
  Eigen::VectorXi mu_ones = Eigen::VectorXi::Ones(M);
  InnerSystem sys1 =
      make_inner(ch, make_artifacts(ch, all_aps), power, qos, cfg, mu_ones, M, alpha_fixed, eps);
  PhaseOutcome init1 = find_initial_point(sys1, cfg);
  res.iters += init1.iters;
  if (!init1.feasible) {
    res.status = init1.last_status == ConicStatus::kOptimal ? SolveStatus::kInfeasible
                                                            : SolveStatus::kFailure;
    return res;
  }
  PhaseOutcome phase1 = run_phase(sys1, cfg, init1.iterate);
  res.iters += phase1.iters;
  res.phase1_trace = phase1.trace;
  res.dinkelbach_residual = phase1.residual;
  if (!phase1.converged) {
    res.status = SolveStatus::kFailure;
    return res;
  }

  // ---- Binary recovery -----------------------------------------------------
  Eigen::MatrixXcd w1 = make_precoder_matrix(sys1.art.basis.basis, phase1.iterate.omega);
  auto [alpha_rec, ratios] = recover_alpha(w1, ch, varpi, eps);
  res.assoc_ratios = ratios;
  Eigen::MatrixXi alpha = alpha_fixed.value_or(alpha_rec);
  Eigen::VectorXi mu;
  if (cfg.ap_selection) {
    mu = update_mu(w1, phase1.iterate.p, sys1.art.receivers, ch, varpi, eps);
    if (alpha_fixed.has_value()) {
      // A frozen association pins its APs on.
      for (int m = 0; m < M; ++m)
        if ((alpha.col(m).array() == 1).any()) mu(m) = 1;
    }
  } else {
    mu = Eigen::VectorXi::Ones(M);
  }
  if (mu.sum() == 0) mu = update_mu(w1, phase1.iterate.p, sys1.art.receivers, ch, 0.0, eps);
  if (mu.sum() == 0) mu = Eigen::VectorXi::Ones(M);
  res.binary = {alpha, mu};

  // ---- Phase 2: frozen binaries on the active subnetwork -------------------
  InnerSystem phase2_sys;
  auto attempt_phase2 = [&](const ChannelSet& c,
                            const std::vector<int>& act) -> std::optional<PhaseOutcome> {
    InnerSystem sys2 = make_inner(c, make_artifacts(c, act), power, qos, cfg, mu, M, alpha, eps);
    PhaseOutcome init2 = find_initial_point(sys2, cfg);
    res.iters += init2.iters;
    if (!init2.feasible) return std::nullopt;
    PhaseOutcome ph2 = run_phase(sys2, cfg, init2.iterate);
    res.iters += ph2.iters;
    phase2_sys = std::move(sys2);
    return ph2;
  };

  auto [chr, active_used] = reduce_channels(ch, mu);
  std::optional<PhaseOutcome> phase2 = attempt_phase2(chr, active_used);
  if (!phase2.has_value() && mu.sum() < M) {
    // Rare guard: the reduced network cannot meet QoS. Keep every AP on.
    mu = Eigen::VectorXi::Ones(M);
    res.binary.mu = mu;
    std::tie(chr, active_used) = reduce_channels(ch, mu);
    phase2 = attempt_phase2(chr, active_used);
  }
  if (!phase2.has_value()) {
    res.status = SolveStatus::kFailure;
    return res;
  }
  res.phase2_trace = phase2->trace;
  if (!phase2->converged) {
    res.status = SolveStatus::kFailure;
    return res;
  }
  res.dinkelbach_residual = std::max(res.dinkelbach_residual, phase2->residual);

  // ---- Final evaluation with the general SINR forms ------------------------
  const Iterate& fin = phase2->iterate;
  Eigen::MatrixXcd w_red = make_precoder_matrix(phase2_sys.art.basis.basis, fin.omega);
  Eigen::MatrixXcd w_full = Eigen::MatrixXcd::Zero(ch.n_total, K);
  Eigen::MatrixXcd rec_full = Eigen::MatrixXcd::Zero(L, ch.n_total);
  for (int i = 0; i < chr.m_aps; ++i) {
    int src = active_used[i];
    w_full.middleRows(ch.offsets[src], ch.antennas[src]) =
        w_red.middleRows(chr.offsets[i], chr.antennas[i]);
    rec_full.middleCols(ch.offsets[src], ch.antennas[src]) =
        phase2_sys.art.receivers.rows.middleCols(chr.offsets[i], chr.antennas[i]);
  }
  // Zero the blocks of non-associated pairs so radiated power and
  // association agree.
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m)
      if (alpha(k, m) == 0) w_full.block(ch.offsets[m], k, ch.antennas[m], 1).setZero();
  ReceiverSet rec_eval{rec_full, phase2_sys.art.receivers.label};

  res.alloc = {fin.omega, fin.p};
  res.W = w_full;
  Eigen::VectorXd gd = dl_sinr_general(w_full, fin.p, alpha, ch);
  Eigen::VectorXd gu = ul_sinr_general(w_full, fin.p, alpha, rec_eval, ch);
  res.se = spectral_efficiency(gd, gu);
  ApSelector sel{ch.antennas, ch.offsets, ch.n_total};
  res.p_total = total_power(w_full, fin.p, alpha, mu, power.bandwidth_hz * res.se, power, sel);
  res.ee = energy_efficiency(res.se, res.p_total, power.bandwidth_hz);
  res.objective = cfg.eta * res.se + (1.0 - cfg.eta) * res.ee;
  res.status = SolveStatus::kConverged;
  return res;
}

}  // namespace fdcf
