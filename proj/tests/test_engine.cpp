#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rydkick/engine.hpp"

using namespace rydkick;
using std::numbers::pi;

namespace {

constexpr double kX0 = 30.0;

GridSpec default_grid() { return GridSpec::around(kX0); }

PotentialSpec harmonic() { return {true, 0.0, std::nullopt, kX0}; }

// D(alpha)|0> sampled analytically: exp(-(u - sqrt2 Re a)^2/2 + i sqrt2 Im a (u - Re a / sqrt2)).
WaveFunction coherent_state(complex alpha, const GridSpec& grid, double x0) {
  WaveFunction psi{grid, std::vector<complex>(grid.n_points)};
  const double q = std::sqrt(2.0) * alpha.real(), p = std::sqrt(2.0) * alpha.imag();
  const double c0 = std::pow(pi, -0.25);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double u = grid.position(i) - x0;
    psi.amplitudes[i] = c0 * std::exp(complex(-0.5 * (u - q) * (u - q), p * (u - 0.5 * q)));
  }
  return psi;
}

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    s += std::norm(a.amplitudes[i] - b.amplitudes[i]);
  return std::sqrt(s * a.grid.spacing());
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

TEST(GridSpec, Validation) {
  EXPECT_NO_THROW(default_grid().validate());
  EXPECT_THROW((GridSpec{0.0, 40.0, 2048}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{10.0, 50.0, 1000}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{10.0, 50.0, 128}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{10.0, 50.0, 256}.validate()), std::invalid_argument);  // dx > 0.1
  const auto close = GridSpec::around(8.0);
  EXPECT_GT(close.x_min, 0.0);
  EXPECT_NEAR(close.x_max - close.x_min, 2 * 0.9 * 8.0, 1e-12);
  const auto far = GridSpec::around(40.0);
  EXPECT_DOUBLE_EQ(far.x_min, 20.0);
  EXPECT_DOUBLE_EQ(far.x_max, 60.0);
  EXPECT_EQ(far.n_points, 2048u);
}

TEST(InitFock, GroundStateIsGaussian) {
  const auto grid = default_grid();
  const auto psi = init_fock_on_grid(0, grid, kX0);
  EXPECT_NEAR(psi.norm_sq(), 1.0, 1e-10);
  for (std::size_t i = 0; i < grid.n_points; i += 37) {
    const double u = grid.position(i) - kX0;
    EXPECT_NEAR(psi.amplitudes[i].real(), std::pow(pi, -0.25) * std::exp(-0.5 * u * u), 1e-12);
  }
  const PotentialSpec ctx = harmonic();
  EXPECT_NEAR(expectation(psi, Observable::Spread, ctx), 1.0 / std::sqrt(2.0), 1e-10);
}

TEST(InitFock, EnergiesAndOrthonormality) {
  const auto grid = default_grid();
  const PotentialSpec ctx = harmonic();
  std::vector<WaveFunction> states;
  for (std::size_t k = 0; k <= 10; ++k) {
    states.push_back(init_fock_on_grid(k, grid, kX0));
    EXPECT_NEAR(states.back().norm_sq(), 1.0, 1e-10);
    EXPECT_NEAR(expectation(states.back(), Observable::Energy, ctx), k + 0.5, 1e-6) << k;
  }
  for (std::size_t j = 0; j < states.size(); ++j)
    for (std::size_t k = 0; k < j; ++k)
      EXPECT_LT(std::abs(inner_product(states[j], states[k])), 1e-8) << j << "," << k;
}

TEST(InitFock, HighLevelsStayBounded) {
  const auto grid = GridSpec::around(40.0, 4096);
  const auto psi = init_fock_on_grid(100, grid, 40.0);
  EXPECT_NEAR(psi.norm_sq(), 1.0, 1e-10);
  const auto v = project_to_fock(psi, 100, 40.0);
  EXPECT_NEAR(std::abs(v.coeffs[100]), 1.0, 1e-8);
}

TEST(InitFock, RejectsLeakingLevel) {
  const GridSpec narrow{22.0, 38.0, 256};
  EXPECT_NO_THROW(init_fock_on_grid(0, narrow, kX0));
  EXPECT_THROW(init_fock_on_grid(30, narrow, kX0), std::invalid_argument);
}

TEST(SplitStep, CoherentStateRevivesAfterOnePeriod) {
  const auto grid = default_grid();
  const auto psi0 = coherent_state({1.2, -0.7}, grid, kX0);
  const auto psi = evolve_split_step(psi0, harmonic(), 2 * pi, grid.dt);
  const complex ov = inner_product(psi0, psi);
  EXPECT_GT(std::abs(ov), 1.0 - 1e-6);
  // Splitting error shifts the phase at O(dt^2).
  EXPECT_NEAR(std::abs(std::remainder(std::arg(ov) - pi, 2 * pi)), 0.0, 5e-5);
  EXPECT_FALSE(psi.boundary_warning);
}

TEST(SplitStep, FirstExcitedStatePhaseAfterOnePeriod) {
  const auto grid = default_grid();
  const auto psi0 = init_fock_on_grid(1, grid, kX0);
  const auto psi = evolve_split_step(psi0, harmonic(), 2 * pi, grid.dt);
  const complex ov = inner_product(psi0, psi);
  EXPECT_NEAR(ov.real(), -1.0, 1e-6);
  EXPECT_NEAR(ov.imag(), 0.0, 5e-5);
}

TEST(SplitStep, SecondOrderSelfConvergence) {
  // Anharmonic displaced Gaussian: no special cancellations.
  const auto grid = default_grid();
  const auto psi0 = coherent_state({1.0, 0.5}, grid, kX0);
  const PotentialSpec pot{true, 2e-3, std::nullopt, kX0};
  const double t = 1.0;
  const auto a = evolve_split_step(psi0, pot, t, 0.02);
  const auto b = evolve_split_step(psi0, pot, t, 0.01);
  const auto c = evolve_split_step(psi0, pot, t, 0.005);
  const double ratio = l2_distance(a, b) / l2_distance(b, c);
  EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(SplitStep, MatchesExactFockEvolution) {
  const auto grid = default_grid();
  FockVector v(6);
  v.coeffs = {{0.5, 0.0}, {0.1, 0.4}, {-0.3, 0.2}, {0.0, 0.0}, {0.25, -0.1}, {0.1, 0.1}, {0.0, 0.3}};
  const double n = std::sqrt(v.norm_sq());
  for (auto& c : v.coeffs) c /= n;
  const double t = 2.345;
  const auto psi = evolve_split_step(synthesize(v, grid, kX0), harmonic(), t, grid.dt);
  const auto exact = evolve_harmonic_fock(v, t);
  const auto got = project_to_fock(psi, 6, kX0);
  complex ov{0.0, 0.0};
  for (std::size_t k = 0; k <= 6; ++k) ov += std::conj(exact.coeffs[k]) * got.coeffs[k];
  EXPECT_GT(std::abs(ov), 1.0 - 1e-6);
  EXPECT_NEAR(std::arg(ov), 0.0, 1e-5);
}

TEST(SplitStep, KineticOnlyMatchesFreeSpreading) {
  // Exact free evolution of the unit Gaussian:
  // psi(u, t) = pi^{-1/4} (1 + i t)^{-1/2} exp(-u^2 / (2 (1 + i t))).
  const auto grid = default_grid();
  const auto psi0 = init_fock_on_grid(0, grid, kX0);
  const PotentialSpec none{false, 0.0, std::nullopt, kX0};
  const double t = 1.5;
  const auto psi = evolve_split_step(psi0, none, t, 0.5);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double u = grid.position(i) - kX0;
    const complex z(1.0, t);
    const complex exact = std::pow(pi, -0.25) / std::sqrt(z) * std::exp(-u * u / (2.0 * z));
    worst = std::max(worst, std::abs(psi.amplitudes[i] - exact));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(SplitStep, NormConservedOverManySteps) {
  const auto grid = default_grid();
  auto psi = coherent_state({0.3, 1.1}, grid, kX0);
  const double n0 = psi.norm_sq();
  const PotentialSpec pot{true, 1e-3, DipoleTerm{1e6, DipoleOrientation::Parallel}, kX0};
  SplitStepPropagator(grid).evolve(psi, pot, 1e4 * 1e-4, 1e-4);
  EXPECT_NEAR(psi.norm_sq(), n0, 1e-8);
}

TEST(SplitStep, HarmonicEnergyConservedOverOnePeriod) {
  const auto grid = default_grid();
  auto psi = coherent_state({1.5, 0.5}, grid, kX0);
  const PotentialSpec ctx = harmonic();
  const double e0 = expectation(psi, Observable::Energy, ctx);
  const SplitStepPropagator prop(grid);
  double worst = 0.0;
  for (int segment = 0; segment < 8; ++segment) {
    prop.evolve(psi, ctx, 2 * pi / 8, grid.dt);
    worst = std::max(worst, std::abs(expectation(psi, Observable::Energy, ctx) / e0 - 1.0));
  }
  EXPECT_LT(std::abs(expectation(psi, Observable::Energy, ctx) / e0 - 1.0), 1e-8);
  // Within the period <H0> breathes at O(dt^2): the stepper conserves a
  // modified Hamiltonian, not H0 itself.
  EXPECT_LT(worst, 1e-5);
}

TEST(SplitStep, FlagsBoundaryLeakage) {
  const GridSpec narrow{22.0, 38.0, 256};
  auto psi = init_fock_on_grid(0, narrow, kX0);
  const PotentialSpec none{false, 0.0, std::nullopt, kX0};
  SplitStepPropagator(narrow).evolve(psi, none, 5.0, 0.01);
  EXPECT_TRUE(psi.boundary_warning);
}

TEST(SplitStep, RejectsBadArguments) {
  const auto grid = default_grid();
  auto psi = init_fock_on_grid(0, grid, kX0);
  const SplitStepPropagator prop(grid);
  EXPECT_THROW(prop.evolve(psi, harmonic(), -1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(prop.evolve(psi, harmonic(), 1.0, 0.0), std::invalid_argument);
  PotentialSpec bad = harmonic();
  bad.lambda = -1.0;
  EXPECT_THROW(prop.evolve(psi, bad, 1.0, 0.1), std::invalid_argument);
  WaveFunction other{GridSpec::around(kX0, 4096), {}};
  other.amplitudes.resize(4096);
  EXPECT_THROW(prop.evolve(other, harmonic(), 1.0, 0.1), std::invalid_argument);
}

TEST(SplitStep, GridIndependentOverlap) {
  const complex alpha{0.8, -0.4};
  const double t = 1.7;
  double prev = 0.0;
  for (std::size_t n : {2048u, 4096u}) {
    const auto grid = GridSpec::around(kX0, n);
    const auto psi0 = coherent_state(alpha, grid, kX0);
    const PotentialSpec pot{true, 1e-3, std::nullopt, kX0};
    const auto psi = evolve_split_step(psi0, pot, t, grid.dt);
    const double f = std::abs(inner_product(psi0, psi));
    if (n == 4096u) {
      EXPECT_NEAR(f, prev, 1e-6);
    }
    prev = f;
  }
}

TEST(HarmonicFock, IdentityAndFullPeriod) {
  FockVector v(5);
  for (std::size_t k = 0; k <= 5; ++k) v.coeffs[k] = complex(0.1 * k, 0.3 - 0.05 * k);
  const auto same = evolve_harmonic_fock(v, 0.0);
  for (std::size_t k = 0; k <= 5; ++k) EXPECT_EQ(same.coeffs[k], v.coeffs[k]);
  const auto full = evolve_harmonic_fock(v, 2 * pi);
  for (std::size_t k = 0; k <= 5; ++k) EXPECT_LT(std::abs(full.coeffs[k] + v.coeffs[k]), 1e-14);
}

TEST(ProjectToFock, GroundState) {
  const auto grid = default_grid();
  const auto v = project_to_fock(init_fock_on_grid(0, grid, kX0), 25, kX0);
  EXPECT_NEAR(std::abs(v.coeffs[0]), 1.0, 1e-10);
  for (std::size_t k = 1; k <= 25; ++k) EXPECT_LT(std::abs(v.coeffs[k]), 1e-8);
  EXPECT_LT(v.truncation_loss(), 1e-10);
}

TEST(ProjectToFock, CoherentStateIsPoissonian) {
  const auto grid = default_grid();
  for (double p : {0.3, 1.0, 2.0}) {
    const complex alpha(0.0, p);
    const auto v = project_to_fock(coherent_state(alpha, grid, kX0), 30, kX0);
    for (int k = 0; k <= 12; ++k) {
      const double poisson = std::exp(-p * p) * std::pow(p, 2 * k) / factorial(k);
      EXPECT_NEAR(std::norm(v.coeffs[k]), poisson, 1e-6) << "p=" << p << " k=" << k;
    }
    EXPECT_LE(v.norm_sq(), 1.0 + 1e-8);
  }
}

TEST(ProjectToFock, BesselInequality) {
  const auto grid = default_grid();
  for (std::size_t n_max : {0u, 2u, 5u, 10u, 25u}) {
    const auto v = project_to_fock(coherent_state({1.5, -1.0}, grid, kX0), n_max, kX0);
    EXPECT_LE(v.norm_sq(), 1.0 + 1e-8);
    EXPECT_GE(v.truncation_loss(), 0.0);
  }
}

TEST(ApplyDisplacement, MatchesGridCoherentState) {
  const auto grid = default_grid();
  FockVector vac(50);
  vac.coeffs[0] = 1.0;
  const complex alpha(0.6, 1.3);
  const auto v = apply_displacement(vac, alpha);
  const auto ref = project_to_fock(coherent_state(alpha, grid, kX0), 50, kX0);
  for (std::size_t k = 0; k <= 50; ++k) EXPECT_LT(std::abs(v.coeffs[k] - ref.coeffs[k]), 1e-9);
}

TEST(Expectation, GroundState) {
  const auto grid = default_grid();
  const auto psi = init_fock_on_grid(0, grid, kX0);
  const PotentialSpec ctx = harmonic();
  EXPECT_NEAR(expectation(psi, Observable::Energy, ctx), 0.5, 1e-6);
  EXPECT_NEAR(expectation(psi, Observable::Position, ctx), kX0, 1e-10);
  EXPECT_NEAR(expectation(psi, Observable::Offset, ctx), 0.0, 1e-10);
  EXPECT_NEAR(expectation(psi, Observable::Spread, ctx), 1.0 / std::sqrt(2.0), 1e-10);
}

TEST(Expectation, CoherentState) {
  const auto grid = default_grid();
  const PotentialSpec ctx = harmonic();
  for (complex alpha : {complex(1.0, 0.0), complex(-0.7, 1.9), complex(0.0, -2.0)}) {
    const auto psi = coherent_state(alpha, grid, kX0);
    EXPECT_NEAR(expectation(psi, Observable::Energy, ctx), std::norm(alpha) + 0.5, 1e-6);
    EXPECT_NEAR(std::abs(expectation(psi, Observable::Offset, ctx)),
                std::sqrt(2.0) * std::abs(alpha.real()), 1e-10);
    EXPECT_NEAR(expectation(psi, Observable::Spread, ctx), 1.0 / std::sqrt(2.0), 1e-10);
  }
}

TEST(Expectation, DipoleEnergy) {
  const auto grid = default_grid();
  const auto psi = init_fock_on_grid(0, grid, kX0);
  PotentialSpec ctx = harmonic();
  EXPECT_THROW(expectation(psi, Observable::Dipole, ctx), std::invalid_argument);
  ctx.dipole = DipoleTerm{2.7e4, DipoleOrientation::Perpendicular};
  // <x^-3> for a narrow Gaussian: x0^-3 (1 + 6 <u^2>/x0^2 + ...), <u^2> = 1/2.
  const double approx = 2.7e4 / std::pow(kX0, 3) * (1.0 + 3.0 / (kX0 * kX0));
  EXPECT_NEAR(expectation(psi, Observable::Dipole, ctx) / approx, 1.0, 1e-4);
}

TEST(WaveFunctionCsv, HeaderAndRows) {
  const auto grid = default_grid();
  const auto psi = init_fock_on_grid(0, grid, kX0);
  std::ostringstream out;
  write_wavefunction_csv(psi, out);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("x,re,im\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), grid.n_points + 1);
}
