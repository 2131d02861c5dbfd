#pragma once

#include <cmath>

namespace tcd {

// Physical constants (atomic units unless noted).
inline constexpr double kSpeedOfLight = 137.035999;            // c in a.u.
inline constexpr double kC2 = kSpeedOfLight * kSpeedOfLight;   // c^2 = rest energy of the electron
inline constexpr double kFmPerAu = 52917.7249;                 // 1 bohr in femtometers
inline constexpr double kAmuC2MeV = 931.494;                   // atomic mass unit rest energy, MeV

// Convert a projectile kinetic energy in MeV per nucleon into its lab speed (a.u.).
// Relativistic: gamma = 1 + E/(m_u c^2), v = c*sqrt(1 - 1/gamma^2).
inline double projectile_speed(double mev_per_u) {
  const double gamma = 1.0 + mev_per_u / kAmuC2MeV;
  return kSpeedOfLight * std::sqrt(1.0 - 1.0 / (gamma * gamma));
}

// Ground-state (1s) energy of a point-charge Dirac problem, rest energy subtracted.
inline double sommerfeld_1s(double z) {
  const double za = z / kSpeedOfLight;
  return kC2 * (std::sqrt(1.0 - za * za) - 1.0);
}

// Uniformly charged sphere radius used for U-238: R = sqrt(5/3) * R_rms.
inline constexpr double kUraniumRmsFm = 5.8569;
inline double uranium_sphere_radius_au() {
  return std::sqrt(5.0 / 3.0) * kUraniumRmsFm / kFmPerAu;
}

inline double fm_to_au(double fm) { return fm / kFmPerAu; }
inline double au_to_fm(double au) { return au * kFmPerAu; }

}  // namespace tcd
