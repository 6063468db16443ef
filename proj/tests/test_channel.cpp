#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "fdcf/channel.hpp"

using namespace fdcf;

TEST_CASE("three-slope path loss hits pinned reference points") {
  // On the far slope both breakpoint terms are off.
  CHECK(path_loss_db(1.0, 0.01, 0.05) == -140.7);

  // 5 m sits below both breakpoints, all three slopes contribute.
  double pl = path_loss_db(0.005, 0.01, 0.05);
  CHECK_THAT(pl, Catch::Matchers::WithinAbs(-81.1845, 1e-3));

  // Exactly at a breakpoint the corresponding term is off.
  double at_d1 = path_loss_db(0.05, 0.01, 0.05);
  CHECK_THAT(at_d1, Catch::Matchers::WithinAbs(-140.7 - 35.0 * std::log10(0.05), 1e-12));
}

TEST_CASE("path loss is flat below the near breakpoint and decreasing above it") {
  // Below d0 both slope-correction terms are active and cancel the distance
  // dependence, so the loss is constant there.
  double base = path_loss_db(0.002, 0.01, 0.05);
  CHECK_THAT(path_loss_db(0.005, 0.01, 0.05), Catch::Matchers::WithinAbs(base, 1e-12));
  CHECK_THAT(path_loss_db(0.009, 0.01, 0.05), Catch::Matchers::WithinAbs(base, 1e-12));

  double prev = path_loss_db(0.01, 0.01, 0.05);
  for (double d = 0.0137; d < 2.0; d *= 1.37) {
    double cur = path_loss_db(d, 0.01, 0.05);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("path loss validates its arguments") {
  CHECK_THROWS_AS(path_loss_db(0.0, 0.01, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(-1.0, 0.01, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(0.1, 0.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(0.1, 0.05, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(0.1, 0.06, 0.05), std::invalid_argument);
}

TEST_CASE("large-scale fading combines path loss and shadowing in dB") {
  CHECK_THAT(large_scale_fading(-100.0, 0.0, 8.0),
             Catch::Matchers::WithinRel(1e-10, 1e-12));
  CHECK_THAT(large_scale_fading(-100.0, 1.0, 8.0),
             Catch::Matchers::WithinRel(1e-10 * std::pow(10.0, 0.8), 1e-12));
  CHECK_THAT(large_scale_fading(-100.0, -2.0, 8.0),
             Catch::Matchers::WithinRel(1e-10 * std::pow(10.0, -1.6), 1e-12));
}

TEST_CASE("distance is clamped away from zero") {
  std::pair<double, double> p{0.3, -0.2};
  CHECK(distance_km(p, p) == kMinLinkDistanceKm);
  CHECK_THAT(distance_km({0.0, 0.0}, {0.003, 0.004}),
             Catch::Matchers::WithinRel(0.005, 1e-12));
}

TEST_CASE("topology generation validates inputs") {
  std::vector<int> ant4{2, 2, 2, 2};
  CHECK_THROWS_AS(generate_topology(1, 0, 2, 2, 1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(generate_topology(1, 4, 0, 2, 1.0, ant4), std::invalid_argument);
  CHECK_THROWS_AS(generate_topology(1, 4, 2, 0, 1.0, ant4), std::invalid_argument);
  CHECK_THROWS_AS(generate_topology(1, 4, 2, 2, 1.0, {2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(generate_topology(1, 4, 2, 2, 0.0, ant4), std::invalid_argument);
  CHECK_THROWS_AS(generate_topology(1, 4, 2, 2, 1.0, {2, 2, 0, 2}), std::invalid_argument);
  // 4 antennas total does not exceed max(K, L) = 4.
  CHECK_THROWS_AS(generate_topology(1, 4, 4, 2, 1.0, {1, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("topology places nodes inside the disc with consistent offsets") {
  std::vector<int> ant{2, 3, 1, 2};
  Topology topo = generate_topology(7, 4, 3, 2, 0.5, ant);
  REQUIRE(topo.m_aps == 4);
  REQUIRE(topo.n_total == 8);
  REQUIRE(topo.offsets == std::vector<int>({0, 2, 5, 6}));
  auto inside = [&](const std::pair<double, double>& p) {
    return std::hypot(p.first, p.second) <= 0.5 + 1e-12;
  };
  for (const auto& p : topo.ap_xy) CHECK(inside(p));
  for (const auto& p : topo.dl_xy) CHECK(inside(p));
  for (const auto& p : topo.ul_xy) CHECK(inside(p));

  Topology again = generate_topology(7, 4, 3, 2, 0.5, ant);
  CHECK(again.ap_xy == topo.ap_xy);
  CHECK(again.dl_xy == topo.dl_xy);
  CHECK(again.ul_xy == topo.ul_xy);

  Topology other = generate_topology(8, 4, 3, 2, 0.5, ant);
  CHECK(other.ap_xy != topo.ap_xy);
}

TEST_CASE("channel assembly produces consistent shapes and deterministic draws") {
  Topology topo = generate_topology(3, 3, 2, 2, 1.0, {2, 2, 2});
  FadingParams fp;
  ChannelSet ch = assemble_channels(topo, fp, 1e-13, 1e-13, 11);

  CHECK(ch.H_d.rows() == 2);
  CHECK(ch.H_d.cols() == 6);
  CHECK(ch.H_u.rows() == 6);
  CHECK(ch.H_u.cols() == 2);
  CHECK(ch.G_aa.rows() == 6);
  CHECK(ch.G_aa.cols() == 6);
  CHECK(ch.G_cci.rows() == 2);
  CHECK(ch.G_cci.cols() == 2);
  CHECK(ch.beta_d.rows() == 2);
  CHECK(ch.beta_d.cols() == 3);
  CHECK(ch.beta_u.rows() == 3);
  CHECK(ch.beta_u.cols() == 2);
  CHECK(ch.noise_dl.size() == 2);
  CHECK(ch.noise_dl(0) == 1e-13);
  CHECK(ch.noise_ap == 1e-13);

  ChannelSet again = assemble_channels(topo, fp, 1e-13, 1e-13, 11);
  CHECK(again.H_d == ch.H_d);
  CHECK(again.H_u == ch.H_u);
  CHECK(again.G_aa == ch.G_aa);
  CHECK(again.G_cci == ch.G_cci);
  CHECK(again.beta_d == ch.beta_d);

  ChannelSet other = assemble_channels(topo, fp, 1e-13, 1e-13, 12);
  CHECK(other.H_d != ch.H_d);
}

TEST_CASE("inter-AP large-scale matrix is symmetric with unit diagonal") {
  Topology topo = generate_topology(5, 6, 3, 3, 1.0, {2, 2, 2, 2, 2, 2});
  ChannelSet ch = assemble_channels(topo, FadingParams{}, 1e-13, 1e-13, 4);
  for (int m = 0; m < 6; ++m) {
    CHECK(ch.beta_aa(m, m) == 1.0);
    for (int mp = 0; mp < 6; ++mp) CHECK(ch.beta_aa(m, mp) == ch.beta_aa(mp, m));
  }
}

TEST_CASE("self-interference level is rejected outside [0, 1)") {
  Topology topo = generate_topology(1, 2, 1, 1, 1.0, {2, 2});
  FadingParams fp;
  fp.rho_rsi = 1.0;
  CHECK_THROWS_AS(assemble_channels(topo, fp, 1e-13, 1e-13, 1), std::invalid_argument);
  fp.rho_rsi = -0.1;
  CHECK_THROWS_AS(assemble_channels(topo, fp, 1e-13, 1e-13, 1), std::invalid_argument);
}

TEST_CASE("self-interference block power matches the cancellation level") {
  // One AP with many antennas gives a large sample of diagonal-block entries.
  Topology topo = generate_topology(2, 1, 8, 8, 1.0, {64});
  FadingParams fp;
  fp.rho_rsi = 1e-6;
  double acc = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ChannelSet ch = assemble_channels(topo, fp, 1e-13, 1e-13, 100 + seed);
    acc += ch.G_aa.squaredNorm();
    count += 64 * 64;
  }
  // Each entry is sqrt(rho) * (los + nlos * CN(0,1)) with |los|^2 + E|nlos CN|^2 = 1.
  double mean_power = acc / count;
  CHECK_THAT(mean_power, Catch::Matchers::WithinRel(fp.rho_rsi, 0.05));
}

TEST_CASE("small-scale fading has unit power relative to the link gain") {
  Topology topo = generate_topology(9, 4, 6, 6, 1.0, {8, 8, 8, 8});
  // Average |h|^2 / beta per link so every draw carries equal weight; a
  // beta-weighted ratio would be dominated by the strongest links.
  double acc = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    ChannelSet ch = assemble_channels(topo, FadingParams{}, 1e-13, 1e-13, 300 + seed);
    for (int k = 0; k < ch.k_dl; ++k)
      for (int m = 0; m < ch.m_aps; ++m)
        for (int a = 0; a < ch.antennas[m]; ++a) {
          acc += std::norm(ch.H_d(k, ch.offsets[m] + a)) / ch.beta_d(k, m);
          ++count;
        }
  }
  CHECK_THAT(acc / count, Catch::Matchers::WithinRel(1.0, 0.05));
}
