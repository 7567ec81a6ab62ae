#pragma once

namespace leofl {

// Physical constants used throughout the simulator. All internal math is SI.
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kEarthMu = 3.98e14;             // G_e * M, m^3/s^2
inline constexpr double kEarthRadius = 6371e3;          // mean radius, m
inline constexpr double kSiderealDay = 86164.1;         // s
inline constexpr double kBoltzmann = 1.38e-23;          // J/K
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// dB <-> linear conversions are centralized here; everything internal is linear.
double db_to_linear(double db);
double linear_to_db(double lin);
double dbm_to_watts(double dbm);
double watts_to_dbm(double w);

}  // namespace leofl
