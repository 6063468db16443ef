// Deterministic random number generation. Every consumer derives its own
// stream from (seed, tag) so that draw order in one matrix never shifts the
// values of another, and trial i is reproducible regardless of scheduling.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>

namespace fdcf {

// SplitMix64 step; used to whiten and combine seed material.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= tag * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ULL);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  // Independent stream keyed by (construction seed, tag); unaffected by any
  // draws already made from this stream.
  Rng derive(std::uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }

  // Uniform on (0, 1]; never returns 0 so log() is always finite.
  double uniform() {
    std::uint64_t u = gen_();
    return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Single standard normal draw via Box-Muller. Two uniforms are consumed per
  // call (the sibling variate is discarded) to keep the stream position a
  // fixed function of the call count.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Circularly symmetric complex normal with unit variance: each component is
  // N(0, 1/2).
  std::complex<double> cnormal() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-std::log(u1));  // sqrt(-2 ln u) / sqrt(2)
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  // Uniform point in a disc of the given radius centred at the origin.
  std::pair<double, double> point_in_disc(double radius) {
    double r = radius * std::sqrt(uniform());
    double phi = 2.0 * M_PI * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace fdcf
