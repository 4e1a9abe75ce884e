#pragma once

#include <numbers>

// CODATA 2018 exact / recommended values, SI units.
namespace tlsnoise::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double hbar = planck / (2.0 * pi);        // J s
inline constexpr double boltzmann = 1.380649e-23;          // J/K
inline constexpr double elementary_charge = 1.602176634e-19;  // C, also J/eV
inline constexpr double speed_of_light = 299792458.0;      // m/s
inline constexpr double debye = 1e-21 / speed_of_light;    // C m
inline constexpr double lorenz_number = 2.44e-8;           // W Ohm / K^2

/// k_B/h, converts a temperature in kelvin to a frequency in hertz.
inline constexpr double kelvin_to_hz = boltzmann / planck;

inline constexpr double ev_to_joule(double ev) { return ev * elementary_charge; }
inline constexpr double hz_to_joule(double hz) { return hz * planck; }

}  // namespace tlsnoise::constants
