// Unit conversions shared across the library. All internal computation is in
// linear units: watts for power, nats for information. Decibel and dBm values
// only appear at configuration boundaries.
#pragma once

#include <cmath>

namespace fdcf {

inline constexpr double kLn2 = 0.6931471805599453;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

inline double nats_to_bits(double nats) { return nats / kLn2; }

inline double bits_to_nats(double bits) { return bits * kLn2; }

}  // namespace fdcf
