/**
 * @file metrics.hpp
 * @brief SINR, spectral-efficiency and power/energy-efficiency evaluation.
 *
 * Two SINR views are provided. The general form takes an explicit weight
 * matrix W plus the binary AP-user association and evaluates the received
 * signal model directly (coherent combining across associated APs). The
 * weighted form takes a precoder basis and per-user weights (omega, p) and is
 * what the optimizer reasons about; for zero-forcing bases both views agree.
 */
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fdcf/channel.hpp"
#include "fdcf/precoding.hpp"
#include "fdcf/units.hpp"

namespace fdcf {

struct WeightAllocation {
  Eigen::VectorXd omega;  // K downlink power weights
  Eigen::VectorXd p;      // L uplink transmit powers, watts
};

struct QosThresholds {
  Eigen::VectorXd r_dl;  // per-DL-user minimum rate, nats/s/Hz
  Eigen::VectorXd r_ul;  // per-UL-user minimum rate, nats/s/Hz
};

struct PowerModelParams {
  double nu_ap = 0.39;           // AP amplifier efficiency
  double nu_ue = 0.3;            // uplink UE amplifier efficiency
  double p_bh_w_per_gbps = 0.25; // load-dependent backhaul power
  double p_bb_dl_w = 0.1;        // per active (AP, DL user) baseband power
  double p_bb_ul_w = 0.1;        // per active AP, per UL user baseband power
  double p_active_w = 10.0;      // fixed power of an active AP
  double p_sleep_w = 2.0;        // fixed power of a sleeping AP
  double p_ap_cir_w = 1.0;       // per-AP circuit power, unconditional
  double p_dlue_cir_w = 0.1;
  double p_ulue_cir_w = 0.1;
  double bandwidth_hz = 10e6;

  // Backhaul power for a throughput given in nats/s (converted to Gbits/s).
  double backhaul_power(double se_nats_per_s) const {
    return p_bh_w_per_gbps * se_nats_per_s / (kLn2 * 1e9);
  }
};

namespace detail {

inline void check_binary(const Eigen::MatrixXi& a, const char* what) {
  if (((a.array() != 0) && (a.array() != 1)).any()) {
    throw std::invalid_argument(std::string(what) + ": entries must be 0 or 1");
  }
}

// W with block (m, k) zeroed wherever alpha(k, m) == 0.
inline Eigen::MatrixXcd gate_by_association(const Eigen::MatrixXcd& w, const Eigen::MatrixXi& alpha,
                                            const ChannelSet& ch) {
  Eigen::MatrixXcd g = w;
  for (int k = 0; k < ch.k_dl; ++k)
    for (int m = 0; m < ch.m_aps; ++m)
      if (alpha(k, m) == 0) g.block(ch.offsets[m], k, ch.antennas[m], 1).setZero();
  return g;
}

}  // namespace detail

/// Downlink SINRs under explicit weights W (N x K) and association alpha
/// (K x M). Combining is coherent over each user's associated APs; the
/// interference from every other user's (associated) transmission is likewise
/// a coherent inner product.
inline Eigen::VectorXd dl_sinr_general(const Eigen::MatrixXcd& w, const Eigen::VectorXd& p,
                                       const Eigen::MatrixXi& alpha, const ChannelSet& ch) {
  detail::check_binary(alpha, "dl_sinr_general alpha");
  Eigen::MatrixXcd wg = detail::gate_by_association(w, alpha, ch);
  Eigen::MatrixXcd hw = ch.H_d * wg;  // K x K effective links
  Eigen::VectorXd cci = (ch.G_cci.cwiseAbs2() * p);
  Eigen::VectorXd out(ch.k_dl);
  for (int k = 0; k < ch.k_dl; ++k) {
    double num = std::norm(hw(k, k));
    double mui = 0.0;
    for (int kp = 0; kp < ch.k_dl; ++kp)
      if (kp != k) mui += std::norm(hw(k, kp));
    out(k) = num / (mui + cci(k) + ch.noise_dl(k));
  }
  return out;
}

/// Uplink SINRs under receive filters `rec` and uplink powers p. The
/// AP-to-AP term aggregates residual self-interference and inter-AP leakage
/// caused by the (association-gated) downlink transmission. Multi-user
/// interference honours the receiver type: successive cancellation removes
/// already-decoded users from the denominator.
inline Eigen::VectorXd ul_sinr_general(const Eigen::MatrixXcd& w, const Eigen::VectorXd& p,
                                       const Eigen::MatrixXi& alpha, const ReceiverSet& rec,
                                       const ChannelSet& ch) {
  detail::check_binary(alpha, "ul_sinr_general alpha");
  Eigen::MatrixXcd wg = detail::gate_by_association(w, alpha, ch);
  Eigen::MatrixXcd ah = rec.rows * ch.H_u;          // L x L effective links
  Eigen::MatrixXcd aw = rec.rows * (ch.G_aa * wg);  // L x K leakage terms
  Eigen::VectorXd out(ch.l_ul);
  for (int l = 0; l < ch.l_ul; ++l) {
    double num = p(l) * std::norm(ah(l, l));
    double mui = 0.0;
    for (int lp = 0; lp < ch.l_ul; ++lp) {
      if (lp == l) continue;
      if (rec.label == ReceiverLabel::kZfSic && lp < l) continue;  // cancelled
      mui += p(lp) * std::norm(ah(l, lp));
    }
    double iai = aw.row(l).cwiseAbs2().sum();
    double noise = ch.noise_ap * rec.rows.row(l).squaredNorm();
    out(l) = num / (mui + iai + noise);
  }
  return out;
}

/// Interference coefficients of the weighted SINR forms. All entries are
/// squared magnitudes of effective links; the optimizer consumes them as
/// affine constraint coefficients and weighted_sinrs evaluates them directly.
struct WeightedCoeffs {
  Eigen::VectorXd gdl;     // K: |h_k . basis_k|^2
  Eigen::MatrixXd mui_dl;  // K x K: |h_k . basis_k'|^2, zero diagonal
  Eigen::MatrixXd cci;     // K x L: |g_cci(k,l)|^2
  Eigen::VectorXd gul;     // L: |a_l . h_l|^2
  Eigen::MatrixXd mui_ul;  // L x L: residual |a_l . h_l'|^2 after receiver-type masking
  Eigen::MatrixXd iai;     // L x K: |a_l . G_aa . basis_k|^2
  Eigen::VectorXd a_norm2; // L: ||a_l||^2
};

inline WeightedCoeffs weighted_coeffs(const PrecoderBasis& basis, const ReceiverSet& rec,
                                      const ChannelSet& ch) {
  const int K = ch.k_dl, L = ch.l_ul;
  WeightedCoeffs c;
  Eigen::MatrixXcd hb = ch.H_d * basis.basis;  // K x K
  c.gdl = hb.diagonal().cwiseAbs2();
  c.mui_dl = hb.cwiseAbs2();
  c.mui_dl.diagonal().setZero();
  c.cci = ch.G_cci.cwiseAbs2();
  Eigen::MatrixXcd ah = rec.rows * ch.H_u;  // L x L
  c.gul = ah.diagonal().cwiseAbs2();
  c.mui_ul = ah.cwiseAbs2();
  c.mui_ul.diagonal().setZero();
  if (rec.label == ReceiverLabel::kZfSic) {
    for (int l = 0; l < L; ++l)
      for (int lp = 0; lp < l; ++lp) c.mui_ul(l, lp) = 0.0;  // removed by cancellation
  }
  c.iai = (rec.rows * (ch.G_aa * basis.basis)).cwiseAbs2();
  c.a_norm2.resize(L);
  for (int l = 0; l < L; ++l) c.a_norm2(l) = rec.rows.row(l).squaredNorm();
  (void)K;
  return c;
}

/// Weighted-form SINRs for W = basis * diag(sqrt(omega)) with all APs serving
/// all users. Equivalent to the general form with alpha = 1.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> weighted_sinrs(const PrecoderBasis& basis,
                                                                  const ReceiverSet& rec,
                                                                  const WeightAllocation& alloc,
                                                                  const ChannelSet& ch) {
  WeightedCoeffs c = weighted_coeffs(basis, rec, ch);
  Eigen::VectorXd gd(ch.k_dl), gu(ch.l_ul);
  for (int k = 0; k < ch.k_dl; ++k) {
    double den = c.mui_dl.row(k).dot(alloc.omega.transpose()) + c.cci.row(k).dot(alloc.p.transpose()) +
                 ch.noise_dl(k);
    gd(k) = alloc.omega(k) * c.gdl(k) / den;
  }
  for (int l = 0; l < ch.l_ul; ++l) {
    double den = c.mui_ul.row(l).dot(alloc.p.transpose()) + c.iai.row(l).dot(alloc.omega.transpose()) +
                 ch.noise_ap * c.a_norm2(l);
    gu(l) = alloc.p(l) * c.gul(l) / den;
  }
  return {gd, gu};
}

/// Sum spectral efficiency in nats/s/Hz.
inline double spectral_efficiency(const Eigen::VectorXd& sinr_dl, const Eigen::VectorXd& sinr_ul) {
  double se = 0.0;
  for (int k = 0; k < sinr_dl.size(); ++k) se += std::log1p(sinr_dl(k));
  for (int l = 0; l < sinr_ul.size(); ++l) se += std::log1p(sinr_ul(l));
  return se;
}

/// Total consumed power in watts. `se_nats_per_s` is the throughput feeding
/// the load-dependent backhaul term (pass bandwidth * SE).
inline double total_power(const Eigen::MatrixXcd& w, const Eigen::VectorXd& p,
                          const Eigen::MatrixXi& alpha, const Eigen::VectorXi& mu,
                          double se_nats_per_s, const PowerModelParams& params,
                          const ApSelector& sel) {
  detail::check_binary(alpha, "total_power alpha");
  detail::check_binary(mu, "total_power mu");
  const int M = sel.count();
  const int K = static_cast<int>(alpha.rows());
  const int L = static_cast<int>(p.size());
  double radiated = 0.0, baseband = 0.0, fixed = 0.0;
  for (int m = 0; m < M; ++m) {
    if (mu(m) == 1) {
      radiated += w.middleRows(sel.offsets[m], sel.antennas[m]).squaredNorm() / params.nu_ap;
      baseband += params.p_bb_dl_w * alpha.col(m).sum();
      baseband += params.p_bb_ul_w * L;
      fixed += params.p_active_w;
    } else {
      fixed += params.p_sleep_w;
    }
    fixed += params.p_ap_cir_w;
  }
  radiated += p.sum() / params.nu_ue;
  fixed += K * params.p_dlue_cir_w + L * params.p_ulue_cir_w;
  return radiated + params.backhaul_power(se_nats_per_s) + baseband + fixed;
}

/// Energy efficiency in nats/joule: bandwidth * SE / total power.
inline double energy_efficiency(double se_nats_hz, double p_total_w, double bandwidth_hz) {
  if (!(p_total_w > 0.0)) throw std::invalid_argument("energy_efficiency: total power must be positive");
  return bandwidth_hz * se_nats_hz / p_total_w;
}

/// Effective SE after spending tau_t of each tau_c-symbol coherence block on
/// training.
inline double effective_se_with_training(double se, int tau_t, int tau_c) {
  if (tau_c < 1 || tau_t < 0 || tau_t >= tau_c) {
    throw std::invalid_argument("effective_se_with_training: require 0 <= tau_t < tau_c");
  }
  return se * static_cast<double>(tau_c - tau_t) / static_cast<double>(tau_c);
}

struct SinrParts {
  double signal = 0.0;
  double interference = 0.0;  // includes noise
};

/// Imperfect-CSI guard: inflate each denominator by sum_j power_j * eps(i, j),
/// where eps holds channel-estimation error variances.
inline std::vector<double> robust_denominator_inflation(const std::vector<SinrParts>& parts,
                                                        const Eigen::VectorXd& tx_powers,
                                                        const Eigen::MatrixXd& eps) {
  if (eps.rows() != static_cast<Eigen::Index>(parts.size()) || eps.cols() != tx_powers.size()) {
    throw std::invalid_argument("robust_denominator_inflation: eps must be (#sinrs) x (#powers)");
  }
  std::vector<double> out(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    double extra = eps.row(static_cast<Eigen::Index>(i)).dot(tx_powers.transpose());
    out[i] = parts[i].signal / (parts[i].interference + extra);
  }
  return out;
}

}  // namespace fdcf
