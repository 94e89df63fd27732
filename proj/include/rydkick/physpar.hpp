#ifndef RYDKICK_PHYSPAR_HPP
#define RYDKICK_PHYSPAR_HPP

// Dimensional hardware parameters and their reduction to oscillator units
// (hbar = mu = a_ho = 1, times in 1/omega).

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "rydkick/constants.hpp"

namespace rydkick {

enum class DipoleOrientation {
  Perpendicular,  ///< dipoles orthogonal to the axis, repulsive V+
  Parallel,       ///< dipoles along the axis, attractive V- = -2 V+
};

inline const char* to_string(DipoleOrientation o) {
  return o == DipoleOrientation::Perpendicular ? "perpendicular" : "parallel";
}

struct PhysicalConfig {
  double atom_mass = 0.0;          // kg
  double trap_freq = 0.0;          // rad/s
  double rydberg_trap_freq = 0.0;  // rad/s
  int n1 = 1, q1 = 0, n2 = 1, q2 = 0;
  double rabi_freq = 0.0;  // rad/s
  std::optional<double> lattice_wavelength;  // m

  static PhysicalConfig rubidium87_example() {
    PhysicalConfig cfg;
    cfg.atom_mass = 87.0 * constants::atomic_mass_unit;
    cfg.trap_freq = constants::two_pi * 100.0e3;
    cfg.rydberg_trap_freq = cfg.trap_freq;
    cfg.n1 = cfg.n2 = 50;
    cfg.q1 = cfg.q2 = 49;
    cfg.rabi_freq = constants::two_pi * 1.0e9;
    cfg.lattice_wavelength = 800.0e-9;
    return cfg;
  }

  void validate() const {
    auto check_level = [](int n, int q, const char* which) {
      if (n < 1 || q < 0 || q > n - 1)
        throw std::invalid_argument(std::string("rydberg quantum numbers ") + which +
                                    " must satisfy n >= 1 and 0 <= q <= n-1");
    };
    check_level(n1, q1, "(n1, q1)");
    check_level(n2, q2, "(n2, q2)");
    if (!(atom_mass > 0.0)) throw std::invalid_argument("atom_mass must be positive");
    if (!(trap_freq > 0.0)) throw std::invalid_argument("trap_freq must be positive");
    if (!(rydberg_trap_freq > 0.0))
      throw std::invalid_argument("rydberg_trap_freq must be positive");
    if (!(rabi_freq > 0.0)) throw std::invalid_argument("rabi_freq must be positive");
    if (lattice_wavelength && !(*lattice_wavelength > 0.0))
      throw std::invalid_argument("lattice_wavelength must be positive");
  }
};

struct DerivedScales {
  double reduced_mass = 0.0;  // kg
  double osc_length = 0.0;    // m
  double osc_period = constants::oscillator_period;
  double alpha_plus_sq = 0.0;
  /// (mu/m_e)/(a_ho/a0), the hardware-dependent factor of alpha_plus_sq.
  double mass_length_ratio = 0.0;
  /// Set when the Rydberg-state trap differs from omega by more than 50%;
  /// the propagator always uses omega' = omega.
  bool rydberg_trap_mismatch = false;
};

/// Rydberg dipole moment (3/2) n q in units of e a0.
inline double dipole_moment(int n, int q) {
  if (n < 1 || q < 0 || q > n - 1)
    throw std::invalid_argument("dipole_moment: requires n >= 1 and 0 <= q <= n-1");
  return 1.5 * static_cast<double>(n) * static_cast<double>(q);
}

inline DerivedScales derive_scales(const PhysicalConfig& cfg) {
  cfg.validate();
  DerivedScales s;
  s.reduced_mass = cfg.atom_mass / 2.0;
  s.osc_length = std::sqrt(constants::hbar / (s.reduced_mass * cfg.trap_freq));
  s.mass_length_ratio = (s.reduced_mass / constants::electron_mass) /
                        (s.osc_length / constants::bohr_radius);
  const double nq = static_cast<double>(cfg.n1) * cfg.q1 * static_cast<double>(cfg.n2) * cfg.q2;
  s.alpha_plus_sq = 2.25 * nq * s.mass_length_ratio;
  s.rydberg_trap_mismatch = std::abs(cfg.rydberg_trap_freq / cfg.trap_freq - 1.0) > 0.5;
  return s;
}

/// Inverse of derive_scales: trap frequency implied by a_ho and mu.
inline double trap_freq_from(const DerivedScales& s) {
  return constants::hbar / (s.reduced_mass * s.osc_length * s.osc_length);
}

inline double atom_mass_from(const DerivedScales& s) { return 2.0 * s.reduced_mass; }

/// Dipole-dipole energy in units of hbar omega at relative distance x (units of a_ho).
inline double dipole_potential(double x, double alpha_plus_sq, DipoleOrientation orient) {
  if (!(x > 0.0))
    throw std::domain_error("dipole_potential: relative coordinate must be positive");
  const double v_plus = alpha_plus_sq / (x * x * x);
  return orient == DipoleOrientation::Perpendicular ? v_plus : -2.0 * v_plus;
}

/// d/dx of dipole_potential.
inline double dipole_force_gradient(double x, double alpha_plus_sq, DipoleOrientation orient) {
  if (!(x > 0.0))
    throw std::domain_error("dipole_force_gradient: relative coordinate must be positive");
  const double dv_plus = -3.0 * alpha_plus_sq / (x * x * x * x);
  return orient == DipoleOrientation::Perpendicular ? dv_plus : -2.0 * dv_plus;
}

/// Omega / (2 alpha_+^2 / x0^3) with Omega given in units of the trap frequency.
/// Returns +inf when there is no dipole coupling at all.
inline double rabi_margin(double rabi_over_trap, double alpha_plus_sq, double x0) {
  if (!(x0 > 0.0)) throw std::domain_error("rabi_margin: x0 must be positive");
  if (alpha_plus_sq == 0.0) return std::numeric_limits<double>::infinity();
  return rabi_over_trap / (2.0 * alpha_plus_sq / (x0 * x0 * x0));
}

inline double rabi_margin(const PhysicalConfig& cfg, const DerivedScales& s, double x0) {
  return rabi_margin(cfg.rabi_freq / cfg.trap_freq, s.alpha_plus_sq, x0);
}

/// Neighbouring-site separation lambda/2 of a standing-wave lattice, in units of a_ho.
inline std::optional<double> lattice_separation(const PhysicalConfig& cfg,
                                                const DerivedScales& s) {
  if (!cfg.lattice_wavelength) return std::nullopt;
  return 0.5 * *cfg.lattice_wavelength / s.osc_length;
}

}  // namespace rydkick

#endif  // RYDKICK_PHYSPAR_HPP
