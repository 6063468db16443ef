/**
 * @file channel.hpp
 * @brief Network geometry and channel synthesis for a cell-free network of
 *        full-duplex multi-antenna APs serving single-antenna downlink and
 *        uplink users on the same band.
 *
 * Large-scale fading follows a three-slope path-loss model with log-normal
 * shadowing; small-scale fading is i.i.d. complex normal. The aggregated
 * AP-to-AP matrix holds inter-AP interference links off the block diagonal
 * and residual self-interference (Rician small-scale, scaled by the
 * cancellation level rho_rsi) on it.
 */
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fdcf/rng.hpp"
#include "fdcf/units.hpp"

namespace fdcf {

// Minimum link distance in km. Guards the path-loss model against d -> 0 for
// co-located drops and AP pairs.
inline constexpr double kMinLinkDistanceKm = 1e-3;

struct Topology {
  int m_aps = 0;   // number of APs
  int k_dl = 0;    // downlink users
  int l_ul = 0;    // uplink users
  int n_total = 0; // total service antennas
  double radius_km = 0.0;
  std::vector<int> antennas;          // per-AP antenna count
  std::vector<int> offsets;           // antenna offset of each AP in [0, n_total)
  std::vector<std::pair<double, double>> ap_xy;
  std::vector<std::pair<double, double>> dl_xy;
  std::vector<std::pair<double, double>> ul_xy;
};

struct FadingParams {
  double d0_km = 0.01;
  double d1_km = 0.05;
  double sigma_sh_db = 8.0;
  double rician_factor_db = 5.0;
  double rho_rsi = 1e-11;  // residual self-interference level, linear in [0, 1)
};

struct ChannelSet {
  int m_aps = 0, k_dl = 0, l_ul = 0, n_total = 0;
  std::vector<int> antennas;
  std::vector<int> offsets;

  Eigen::MatrixXcd H_d;    // K x N, row k is the downlink channel of user k
  Eigen::MatrixXcd H_u;    // N x L, column l is the uplink channel of user l
  Eigen::MatrixXcd G_aa;   // N x N aggregated AP-to-AP matrix
  Eigen::MatrixXcd G_cci;  // K x L uplink-user-to-downlink-user cross links

  Eigen::MatrixXd beta_d;    // K x M
  Eigen::MatrixXd beta_u;    // M x L
  Eigen::MatrixXd beta_cci;  // K x L
  Eigen::MatrixXd beta_aa;   // M x M, diagonal fixed to 1 (self links are
                             // governed by rho_rsi, not path loss)

  Eigen::VectorXd noise_dl;  // per-DL-user noise power, watts
  double noise_ap = 0.0;     // per-antenna AP noise power, watts
};

inline double distance_km(const std::pair<double, double>& a, const std::pair<double, double>& b) {
  double dx = a.first - b.first;
  double dy = a.second - b.second;
  return std::max(std::sqrt(dx * dx + dy * dy), kMinLinkDistanceKm);
}

/// Three-slope path loss in dB at distance d (km). Breakpoints d0 < d1 turn
/// the extra slope terms on below their respective distances; exactly at a
/// breakpoint the term is off.
inline double path_loss_db(double d_km, double d0_km, double d1_km) {
  if (!(d_km > 0.0) || !(d0_km > 0.0) || !(d0_km < d1_km)) {
    throw std::invalid_argument("path_loss_db: require d > 0 and 0 < d0 < d1");
  }
  double c0 = d_km < d0_km ? 1.0 : 0.0;
  double c1 = d_km < d1_km ? 1.0 : 0.0;
  double pl = -140.7 - 35.0 * std::log10(d_km);
  pl += 20.0 * c0 * std::log10(d_km / d0_km);
  pl += 15.0 * c1 * std::log10(d_km / d1_km);
  return pl;
}

/// Linear large-scale gain from path loss (dB) and a standard-normal
/// shadowing draw z scaled by sigma_sh (dB).
inline double large_scale_fading(double pl_db, double z, double sigma_sh_db) {
  return std::pow(10.0, (pl_db + sigma_sh_db * z) / 10.0);
}

inline Topology generate_topology(std::uint64_t seed, int m_aps, int k_dl, int l_ul,
                                  double radius_km, const std::vector<int>& antennas) {
  if (m_aps < 1 || k_dl < 1 || l_ul < 1) {
    throw std::invalid_argument("generate_topology: need at least one AP and one user per direction");
  }
  if (static_cast<int>(antennas.size()) != m_aps) {
    throw std::invalid_argument("generate_topology: antennas list must have one entry per AP");
  }
  if (!(radius_km > 0.0)) {
    throw std::invalid_argument("generate_topology: radius must be positive");
  }
  Topology topo;
  topo.m_aps = m_aps;
  topo.k_dl = k_dl;
  topo.l_ul = l_ul;
  topo.radius_km = radius_km;
  topo.antennas = antennas;
  topo.offsets.resize(m_aps);
  int n = 0;
  for (int m = 0; m < m_aps; ++m) {
    if (antennas[m] < 1) throw std::invalid_argument("generate_topology: antennas must be positive");
    topo.offsets[m] = n;
    n += antennas[m];
  }
  topo.n_total = n;
  if (n <= std::max(k_dl, l_ul)) {
    throw std::invalid_argument(
        "generate_topology: total antennas must exceed max(K, L) for zero-forcing feasibility");
  }
  Rng rng = Rng(seed).derive(0x746f706fULL);
  topo.ap_xy.reserve(m_aps);
  for (int m = 0; m < m_aps; ++m) topo.ap_xy.push_back(rng.point_in_disc(radius_km));
  topo.dl_xy.reserve(k_dl);
  for (int k = 0; k < k_dl; ++k) topo.dl_xy.push_back(rng.point_in_disc(radius_km));
  topo.ul_xy.reserve(l_ul);
  for (int l = 0; l < l_ul; ++l) topo.ul_xy.push_back(rng.point_in_disc(radius_km));
  return topo;
}

/// Draws shadowing and small-scale fading for every link and assembles the
/// channel matrices. Identical (topology, params, noise, seed) inputs produce
/// bit-identical output; each matrix consumes its own derived stream.
inline ChannelSet assemble_channels(const Topology& topo, const FadingParams& params,
                                    double noise_dl_w, double noise_ap_w, std::uint64_t seed) {
  if (!(params.rho_rsi >= 0.0 && params.rho_rsi < 1.0)) {
    throw std::invalid_argument("assemble_channels: rho_rsi must lie in [0, 1)");
  }
  const int M = topo.m_aps, K = topo.k_dl, L = topo.l_ul, N = topo.n_total;
  ChannelSet ch;
  ch.m_aps = M; ch.k_dl = K; ch.l_ul = L; ch.n_total = N;
  ch.antennas = topo.antennas;
  ch.offsets = topo.offsets;
  ch.noise_dl = Eigen::VectorXd::Constant(K, noise_dl_w);
  ch.noise_ap = noise_ap_w;

  Rng base(seed);
  Rng sh = base.derive(1);

  auto link_beta = [&](double d_km) {
    return large_scale_fading(path_loss_db(d_km, params.d0_km, params.d1_km), sh.gaussian(),
                              params.sigma_sh_db);
  };

  ch.beta_d.resize(K, M);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) ch.beta_d(k, m) = link_beta(distance_km(topo.dl_xy[k], topo.ap_xy[m]));

  ch.beta_u.resize(M, L);
  for (int m = 0; m < M; ++m)
    for (int l = 0; l < L; ++l) ch.beta_u(m, l) = link_beta(distance_km(topo.ap_xy[m], topo.ul_xy[l]));

  ch.beta_cci.resize(K, L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) ch.beta_cci(k, l) = link_beta(distance_km(topo.dl_xy[k], topo.ul_xy[l]));

  // Inter-AP links share one large-scale draw per unordered pair.
  ch.beta_aa = Eigen::MatrixXd::Ones(M, M);
  for (int m = 0; m < M; ++m)
    for (int mp = m + 1; mp < M; ++mp) {
      double b = link_beta(distance_km(topo.ap_xy[m], topo.ap_xy[mp]));
      ch.beta_aa(m, mp) = b;
      ch.beta_aa(mp, m) = b;
    }

  Rng rd = base.derive(2);
  ch.H_d.resize(K, N);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) {
      double s = std::sqrt(ch.beta_d(k, m));
      for (int a = 0; a < topo.antennas[m]; ++a) ch.H_d(k, topo.offsets[m] + a) = s * rd.cnormal();
    }

  Rng ru = base.derive(3);
  ch.H_u.resize(N, L);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m) {
      double s = std::sqrt(ch.beta_u(m, l));
      for (int a = 0; a < topo.antennas[m]; ++a) ch.H_u(topo.offsets[m] + a, l) = s * ru.cnormal();
    }

  Rng rc = base.derive(4);
  ch.G_cci.resize(K, L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) ch.G_cci(k, l) = std::sqrt(ch.beta_cci(k, l)) * rc.cnormal();

  // AP-to-AP matrix: off-diagonal blocks are Rayleigh inter-AP links, the
  // diagonal blocks are Rician self-interference scaled by sqrt(rho_rsi).
  Rng ra = base.derive(5);
  double kf = db_to_linear(params.rician_factor_db);
  double los = std::sqrt(kf / (kf + 1.0));
  double nlos = std::sqrt(1.0 / (kf + 1.0));
  double si = std::sqrt(params.rho_rsi);
  ch.G_aa.resize(N, N);
  for (int m = 0; m < M; ++m) {
    for (int mp = 0; mp < M; ++mp) {
      int rows = topo.antennas[m], cols = topo.antennas[mp];
      int r0 = topo.offsets[m], c0 = topo.offsets[mp];
      if (m == mp) {
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j)
            ch.G_aa(r0 + i, c0 + j) = si * (los + nlos * ra.cnormal());
      } else {
        double s = std::sqrt(ch.beta_aa(m, mp));
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j) ch.G_aa(r0 + i, c0 + j) = s * ra.cnormal();
      }
    }
  }
  return ch;
}

}  // namespace fdcf
