// units.hpp: physical constants and unit conversions (hbar = 1 internally)

#pragma once

#include <numbers>

namespace qbm::units {

inline constexpr double kBoltzmann = 1.380649e-23;     // J/K
inline constexpr double kHbar = 1.054571817e-34;       // J s
/// k_B T / hbar per kelvin, in rad/s.
inline constexpr double kRadPerSecondPerKelvin = kBoltzmann / kHbar;

inline constexpr double kelvin_to_rad_per_s(double kelvin) { return kelvin * kRadPerSecondPerKelvin; }
inline constexpr double rad_per_s_to_kelvin(double kt) { return kt / kRadPerSecondPerKelvin; }
inline constexpr double hz_to_rad_per_s(double hz) { return 2.0 * std::numbers::pi * hz; }

}  // namespace qbm::units
