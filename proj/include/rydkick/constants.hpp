#ifndef RYDKICK_CONSTANTS_HPP
#define RYDKICK_CONSTANTS_HPP

#include <numbers>

namespace rydkick::constants {

// CODATA 2018, SI units.
inline constexpr double hbar = 1.054571817e-34;             // J s
inline constexpr double electron_mass = 9.1093837015e-31;   // kg
inline constexpr double bohr_radius = 5.29177210903e-11;    // m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Harmonic oscillator period in oscillator units (omega = 1).
inline constexpr double oscillator_period = two_pi;

}  // namespace rydkick::constants

#endif  // RYDKICK_CONSTANTS_HPP
