#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rydkick/constants.hpp"
#include "rydkick/physpar.hpp"

using namespace rydkick;

namespace {

// alpha_+^2 is the perpendicular dipole-dipole energy at one oscillator length,
// in units of hbar omega. Evaluated here directly from e, eps0 and SI lengths.
double alpha_plus_sq_si(const PhysicalConfig& cfg) {
  namespace c = constants;
  const double mu = cfg.atom_mass / 2.0;
  const double a_ho = std::sqrt(c::hbar / (mu * cfg.trap_freq));
  const double d1 = 1.5 * cfg.n1 * cfg.q1 * c::elementary_charge * c::bohr_radius;
  const double d2 = 1.5 * cfg.n2 * cfg.q2 * c::elementary_charge * c::bohr_radius;
  const double energy = d1 * d2 / (4.0 * c::pi * c::vacuum_permittivity * a_ho * a_ho * a_ho);
  return energy / (c::hbar * cfg.trap_freq);
}

}  // namespace

TEST(DipoleMoment, Values) {
  EXPECT_DOUBLE_EQ(dipole_moment(50, 49), 3675.0);
  EXPECT_DOUBLE_EQ(dipole_moment(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(dipole_moment(2, 1), 3.0);
}

TEST(DipoleMoment, RejectsBadQuantumNumbers) {
  EXPECT_THROW(dipole_moment(5, 5), std::invalid_argument);
  EXPECT_THROW(dipole_moment(5, -1), std::invalid_argument);
  EXPECT_THROW(dipole_moment(0, 0), std::invalid_argument);
}

TEST(DeriveScales, RubidiumExample) {
  const auto s = derive_scales(PhysicalConfig::rubidium87_example());
  EXPECT_NEAR(s.mass_length_ratio, 86.8, 0.005 * 86.8);
  EXPECT_NEAR(s.alpha_plus_sq, 1.2e9, 0.05 * 1.2e9);
  EXPECT_FALSE(s.rydberg_trap_mismatch);
  EXPECT_DOUBLE_EQ(s.osc_period, constants::two_pi);
}

TEST(DeriveScales, MatchesSiRecomputation) {
  auto cfg = PhysicalConfig::rubidium87_example();
  for (double scale : {1.0, 4.0, 0.25}) {
    cfg.trap_freq = constants::two_pi * 100e3 * scale;
    const auto s = derive_scales(cfg);
    EXPECT_NEAR(s.alpha_plus_sq / alpha_plus_sq_si(cfg), 1.0, 1e-8);
  }
}

TEST(DeriveScales, Scaling) {
  auto cfg = PhysicalConfig::rubidium87_example();
  const auto base = derive_scales(cfg);

  auto cfg4 = cfg;
  cfg4.n1 = 100;
  cfg4.q1 = 98;  // n1 q1 x4
  EXPECT_NEAR(derive_scales(cfg4).alpha_plus_sq / base.alpha_plus_sq, 4.0, 1e-12);

  auto fast = cfg;
  fast.trap_freq *= 4.0;
  const auto s = derive_scales(fast);
  EXPECT_NEAR(s.osc_length / base.osc_length, 0.5, 1e-12);
  EXPECT_NEAR(s.alpha_plus_sq / base.alpha_plus_sq, 2.0, 1e-12);
}

TEST(DeriveScales, RoundTripToSi) {
  const auto cfg = PhysicalConfig::rubidium87_example();
  const auto s = derive_scales(cfg);
  EXPECT_NEAR(trap_freq_from(s) / cfg.trap_freq, 1.0, 1e-12);
  EXPECT_NEAR(atom_mass_from(s) / cfg.atom_mass, 1.0, 1e-12);
}

TEST(DeriveScales, MonotoneInQuantumNumbersAndTrap) {
  const auto cfg = PhysicalConfig::rubidium87_example();
  const double base = derive_scales(cfg).alpha_plus_sq;
  auto with = [&](auto mutate) {
    auto c = cfg;
    mutate(c);
    return derive_scales(c).alpha_plus_sq;
  };
  EXPECT_GT(with([](PhysicalConfig& c) { c.n1 = 51; }), base);
  EXPECT_GT(with([](PhysicalConfig& c) { c.n2 = 51; }), base);
  auto c = cfg;
  c.n1 = c.n2 = 60;
  double prev = 0.0;
  for (int q = 1; q < 60; q += 7) {
    c.q1 = q;
    const double a = derive_scales(c).alpha_plus_sq;
    EXPECT_GT(a, prev);
    prev = a;
  }
  prev = 0.0;
  for (int q = 1; q < 60; q += 7) {
    c.q2 = q;
    const double a = derive_scales(c).alpha_plus_sq;
    EXPECT_GT(a, prev);
    prev = a;
  }
  prev = 0.0;
  for (double w : {1e5, 2e5, 5e5, 1e6}) {
    auto d = cfg;
    d.trap_freq = w;
    d.rydberg_trap_freq = w;
    const double a = derive_scales(d).alpha_plus_sq;
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(DeriveScales, FlagsRydbergTrapMismatch) {
  auto cfg = PhysicalConfig::rubidium87_example();
  cfg.rydberg_trap_freq = 1.6 * cfg.trap_freq;
  EXPECT_TRUE(derive_scales(cfg).rydberg_trap_mismatch);
  cfg.rydberg_trap_freq = 1.4 * cfg.trap_freq;
  EXPECT_FALSE(derive_scales(cfg).rydberg_trap_mismatch);
}

TEST(DeriveScales, RejectsInvalidConfig) {
  auto cfg = PhysicalConfig::rubidium87_example();
  cfg.q1 = 50;
  EXPECT_THROW(derive_scales(cfg), std::invalid_argument);
  cfg = PhysicalConfig::rubidium87_example();
  cfg.atom_mass = 0.0;
  EXPECT_THROW(derive_scales(cfg), std::invalid_argument);
  cfg = PhysicalConfig::rubidium87_example();
  cfg.rabi_freq = -1.0;
  EXPECT_THROW(derive_scales(cfg), std::invalid_argument);
}

TEST(DipolePotential, Values) {
  EXPECT_DOUBLE_EQ(dipole_potential(20.0, 8000.0, DipoleOrientation::Perpendicular), 1.0);
  EXPECT_DOUBLE_EQ(dipole_potential(3.0, 0.0, DipoleOrientation::Parallel), 0.0);
  for (double x = 0.5; x < 50.0; x += 0.37) {
    const double vp = dipole_potential(x, 1234.5, DipoleOrientation::Perpendicular);
    const double vm = dipole_potential(x, 1234.5, DipoleOrientation::Parallel);
    EXPECT_EQ(vm + 2.0 * vp, 0.0);
  }
}

TEST(DipolePotential, GradientMatchesFiniteDifference) {
  const double x = 17.0, h = 1e-5;
  for (auto o : {DipoleOrientation::Perpendicular, DipoleOrientation::Parallel}) {
    const double fd =
        (dipole_potential(x + h, 5e6, o) - dipole_potential(x - h, 5e6, o)) / (2.0 * h);
    EXPECT_NEAR(dipole_force_gradient(x, 5e6, o) / fd, 1.0, 1e-8);
  }
}

TEST(DipolePotential, RejectsNonPositiveSeparation) {
  EXPECT_THROW(dipole_potential(0.0, 1.0, DipoleOrientation::Perpendicular), std::domain_error);
  EXPECT_THROW(dipole_potential(-1.0, 1.0, DipoleOrientation::Parallel), std::domain_error);
}

TEST(RabiMargin, Values) {
  EXPECT_NEAR(rabi_margin(1e3, 1e6, 1e3), 5e5, 1e-6);
  EXPECT_TRUE(std::isinf(rabi_margin(1e3, 0.0, 10.0)));
  // 2 alpha^2 / x0^3 = 2 * 4 / 8 = 1
  EXPECT_DOUBLE_EQ(rabi_margin(1.0, 4.0, 2.0), 1.0);
}

TEST(RabiMargin, UsesRabiFrequencyInTrapUnits) {
  const auto cfg = PhysicalConfig::rubidium87_example();
  const auto s = derive_scales(cfg);
  const double expected = (cfg.rabi_freq / cfg.trap_freq) / (2.0 * s.alpha_plus_sq / (58.0 * 58.0 * 58.0));
  EXPECT_NEAR(rabi_margin(cfg, s, 58.0) / expected, 1.0, 1e-14);
}

TEST(LatticeSeparation, EightHundredNanometres) {
  const auto cfg = PhysicalConfig::rubidium87_example();
  const auto s = derive_scales(cfg);
  const auto x0 = lattice_separation(cfg, s);
  ASSERT_TRUE(x0.has_value());
  EXPECT_NEAR(*x0, 8.3, 0.05);
}
