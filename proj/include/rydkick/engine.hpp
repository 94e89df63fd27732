#ifndef RYDKICK_ENGINE_HPP
#define RYDKICK_ENGINE_HPP

// 1D relative-motion propagator: wavefunctions on a uniform periodic grid,
// Strang split-operator stepping with a spectral kinetic term, and exact
// Fock-basis tools (free evolution, displacement, projection).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydkick/constants.hpp"
#include "rydkick/fft.hpp"
#include "rydkick/format.hpp"
#include "rydkick/physpar.hpp"

namespace rydkick {

using complex = std::complex<double>;

inline constexpr double edge_amplitude_limit = 1e-6;
/// Grid points on each side inspected for boundary leakage.
inline constexpr std::size_t edge_width = 8;

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_points = 0;
  double dt = 1e-3 * constants::oscillator_period;  ///< free-evolution step

  double spacing() const { return (x_max - x_min) / static_cast<double>(n_points); }
  double position(std::size_t i) const { return x_min + static_cast<double>(i) * spacing(); }

  void validate() const {
    if (!(x_min > 0.0 && x_max > x_min))
      throw std::invalid_argument("GridSpec: requires 0 < x_min < x_max");
    if (n_points < 256 || (n_points & (n_points - 1)) != 0)
      throw std::invalid_argument("GridSpec: n_points must be a power of two >= 256");
    if (spacing() > 0.1) throw std::invalid_argument("GridSpec: spacing exceeds 0.1");
    if (!(dt > 0.0)) throw std::invalid_argument("GridSpec: dt must be positive");
  }

  /// Default window of half-width min(20, 0.9 x0) around the well separation,
  /// 2048 points. The cap keeps x_min > 0 for close wells.
  static GridSpec around(double x0, std::size_t n_points = 2048) {
    if (!(x0 > 0.0)) throw std::invalid_argument("GridSpec::around: x0 must be positive");
    const double half = std::min(20.0, 0.9 * x0);
    return {x0 - half, x0 + half, n_points, 1e-3 * constants::oscillator_period};
  }
};

struct WaveFunction {
  GridSpec grid;
  std::vector<complex> amplitudes;
  bool boundary_warning = false;

  double norm_sq() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * grid.spacing();
  }

  double edge_amplitude() const {
    double m = 0.0;
    const std::size_t n = amplitudes.size();
    for (std::size_t i = 0; i < std::min(edge_width, n); ++i) {
      m = std::max(m, std::abs(amplitudes[i]));
      m = std::max(m, std::abs(amplitudes[n - 1 - i]));
    }
    return m;
  }

  void normalize() {
    const double s = 1.0 / std::sqrt(norm_sq());
    for (auto& a : amplitudes) a *= s;
  }
};

inline complex inner_product(const WaveFunction& a, const WaveFunction& b) {
  if (a.amplitudes.size() != b.amplitudes.size())
    throw std::invalid_argument("inner_product: grid mismatch");
  complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    s += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  return s * a.grid.spacing();
}

struct FockVector {
  std::vector<complex> coeffs;

  FockVector() = default;
  explicit FockVector(std::size_t n_max) : coeffs(n_max + 1) {}

  std::size_t n_max() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    return s;
  }

  double truncation_loss() const { return std::max(0.0, 1.0 - norm_sq()); }
};

struct DipoleTerm {
  double alpha_plus_sq = 0.0;
  DipoleOrientation orientation = DipoleOrientation::Perpendicular;
};

/// H = p^2/2 + [(x-x0)^2/2 if harmonic] - lambda (x-x0)^4 / 2 + V_dip(x).
struct PotentialSpec {
  bool harmonic = true;
  double lambda = 0.0;
  std::optional<DipoleTerm> dipole;
  double center = 0.0;

  void validate(const GridSpec& grid) const {
    if (lambda < 0.0) throw std::invalid_argument("PotentialSpec: lambda must be >= 0");
    if (dipole && !(grid.x_min > 0.0))
      throw std::invalid_argument("PotentialSpec: dipole term requires x_min > 0");
  }

  double operator()(double x) const {
    const double u = x - center;
    double v = 0.0;
    if (harmonic) v += 0.5 * u * u;
    if (lambda != 0.0) v -= 0.5 * lambda * u * u * u * u;
    if (dipole) v += dipole_potential(x, dipole->alpha_plus_sq, dipole->orientation);
    return v;
  }
};

/// Normalized Hermite functions psi_0..psi_{n_max} centred at x0, sampled on
/// the grid; rows indexed by level. Three-term recurrence, no factorials.
inline std::vector<std::vector<double>> hermite_functions(std::size_t n_max, const GridSpec& grid,
                                                          double x0) {
  const std::size_t n = grid.n_points;
  std::vector<std::vector<double>> table(n_max + 1, std::vector<double>(n));
  const double c0 = std::pow(constants::pi, -0.25);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = grid.position(i) - x0;
    double prev = c0 * std::exp(-0.5 * u * u);
    table[0][i] = prev;
    if (n_max == 0) continue;
    double cur = std::sqrt(2.0) * u * prev;
    table[1][i] = cur;
    for (std::size_t k = 2; k <= n_max; ++k) {
      const double kd = static_cast<double>(k);
      const double next = std::sqrt(2.0 / kd) * u * cur - std::sqrt((kd - 1.0) / kd) * prev;
      prev = cur;
      cur = next;
      table[k][i] = cur;
    }
  }
  return table;
}

inline WaveFunction init_fock_on_grid(std::size_t k, const GridSpec& grid, double x0) {
  grid.validate();
  const auto table = hermite_functions(k, grid, x0);
  WaveFunction psi{grid, std::vector<complex>(table[k].begin(), table[k].end())};
  psi.normalize();
  if (psi.edge_amplitude() > edge_amplitude_limit)
    throw std::invalid_argument("init_fock_on_grid: level " + std::to_string(k) +
                                " does not fit inside the grid");
  return psi;
}

/// Wavefunction with the given Fock-basis coefficients (centred at x0).
inline WaveFunction synthesize(const FockVector& v, const GridSpec& grid, double x0) {
  grid.validate();
  const auto table = hermite_functions(v.n_max(), grid, x0);
  WaveFunction psi{grid, std::vector<complex>(grid.n_points)};
  for (std::size_t k = 0; k < v.coeffs.size(); ++k)
    for (std::size_t i = 0; i < grid.n_points; ++i) psi.amplitudes[i] += v.coeffs[k] * table[k][i];
  return psi;
}

inline FockVector project_to_fock(const WaveFunction& psi, std::size_t n_max, double x0) {
  const auto table = hermite_functions(n_max, psi.grid, x0);
  const double dx = psi.grid.spacing();
  FockVector v(n_max);
  for (std::size_t k = 0; k <= n_max; ++k) {
    complex s{0.0, 0.0};
    for (std::size_t i = 0; i < psi.amplitudes.size(); ++i) s += table[k][i] * psi.amplitudes[i];
    v.coeffs[k] = s * dx;
  }
  return v;
}

/// Exact harmonic evolution c_k -> c_k exp(-i (k + 1/2) t).
inline FockVector evolve_harmonic_fock(FockVector v, double t) {
  for (std::size_t k = 0; k < v.coeffs.size(); ++k)
    v.coeffs[k] *= std::polar(1.0, -(static_cast<double>(k) + 0.5) * t);
  return v;
}

/// D(alpha) v within the truncated space, by a Taylor series of the
/// tridiagonal generator alpha a^dag - alpha^* a over short substeps.
/// Exact up to truncation effects near n_max; pad v if those matter.
inline FockVector apply_displacement(FockVector v, complex alpha) {
  const std::size_t n = v.coeffs.size();
  if (n == 0 || alpha == complex{}) return v;
  const double bound = 2.0 * std::abs(alpha) * std::sqrt(static_cast<double>(n));
  const int substeps = std::max(1, static_cast<int>(std::ceil(bound / 0.5)));
  const complex a = alpha / static_cast<double>(substeps);
  std::vector<complex> term(n), next(n);
  for (int s = 0; s < substeps; ++s) {
    term = v.coeffs;
    for (int order = 1; order < 60; ++order) {
      double mag = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        complex g{0.0, 0.0};
        if (k > 0) g += a * std::sqrt(static_cast<double>(k)) * term[k - 1];
        if (k + 1 < n) g -= std::conj(a) * std::sqrt(static_cast<double>(k + 1)) * term[k + 1];
        next[k] = g / static_cast<double>(order);
        mag = std::max(mag, std::abs(next[k]));
      }
      term.swap(next);
      for (std::size_t k = 0; k < n; ++k) v.coeffs[k] += term[k];
      if (mag < 1e-18) break;
    }
  }
  return v;
}

/// Strang split-operator stepper bound to one grid. Owns its FFT plan; one
/// instance per concurrent simulation.
class SplitStepPropagator {
 public:
  explicit SplitStepPropagator(const GridSpec& grid) : grid_(grid), fft_(grid.n_points) {
    grid_.validate();
    const std::size_t n = grid_.n_points;
    const double dk = constants::two_pi / (grid_.spacing() * static_cast<double>(n));
    k2_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double m = j < n / 2 ? static_cast<double>(j)
                                 : static_cast<double>(j) - static_cast<double>(n);
      k2_[j] = (m * dk) * (m * dk);
    }
  }

  const GridSpec& grid() const { return grid_; }

  /// Advances psi by t_total in steps no longer than dt (the last step count
  /// is rounded up so steps are equal). Sets psi.boundary_warning on leakage.
  void evolve(WaveFunction& psi, const PotentialSpec& pot, double t_total, double dt) const {
    if (psi.amplitudes.size() != grid_.n_points)
      throw std::invalid_argument("SplitStepPropagator: wavefunction/grid mismatch");
    if (t_total < 0.0 || !(dt > 0.0))
      throw std::invalid_argument("SplitStepPropagator: requires t_total >= 0 and dt > 0");
    pot.validate(grid_);
    if (t_total == 0.0) return;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_total / dt - 1e-9)));
    const double h = t_total / static_cast<double>(steps);
    const std::size_t n = grid_.n_points;

    std::vector<complex> half_v(n), full_v(n), kin(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = pot(grid_.position(i));
      half_v[i] = std::polar(1.0, -0.5 * v * h);
      full_v[i] = half_v[i] * half_v[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) kin[j] = std::polar(inv_n, -0.5 * k2_[j] * h);

    auto& a = psi.amplitudes;
    for (std::size_t i = 0; i < n; ++i) a[i] *= half_v[i];
    for (std::size_t s = 0; s < steps; ++s) {
      fft_.forward(a);
      for (std::size_t j = 0; j < n; ++j) a[j] *= kin[j];
      fft_.backward(a);
      const auto& v = (s + 1 == steps) ? half_v : full_v;
      for (std::size_t i = 0; i < n; ++i) a[i] *= v[i];
      if (psi.edge_amplitude() > edge_amplitude_limit) psi.boundary_warning = true;
    }
  }

  /// <p^2/2> via the spectral derivative.
  double kinetic_energy(const WaveFunction& psi) const {
    std::vector<complex> work = psi.amplitudes;
    fft_.forward(work);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < work.size(); ++j) {
      num += 0.5 * k2_[j] * std::norm(work[j]);
      den += std::norm(work[j]);
    }
    return num / den;
  }

 private:
  GridSpec grid_;
  FftPlan fft_;
  std::vector<double> k2_;
};

inline WaveFunction evolve_split_step(WaveFunction psi, const PotentialSpec& pot, double t_total,
                                      double dt) {
  SplitStepPropagator(psi.grid).evolve(psi, pot, t_total, dt);
  return psi;
}

enum class Observable {
  Energy,    ///< H0 = p^2/2 + (x - x0)^2/2
  Position,  ///< x
  Offset,    ///< x - x0
  Spread,    ///< sqrt(<x^2> - <x>^2)
  Dipole,    ///< V_dip(x), needs ctx.dipole
};

/// Expectation value of an observable; ctx supplies x0 and the dipole coupling.
inline double expectation(const WaveFunction& psi, Observable obs, const PotentialSpec& ctx) {
  const double norm = psi.norm_sq();
  const double dx = psi.grid.spacing();
  auto moment = [&](auto&& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.amplitudes.size(); ++i)
      s += f(psi.grid.position(i)) * std::norm(psi.amplitudes[i]);
    return s * dx / norm;
  };
  switch (obs) {
    case Observable::Energy: {
      const double pot = moment([&](double x) { return 0.5 * (x - ctx.center) * (x - ctx.center); });
      return SplitStepPropagator(psi.grid).kinetic_energy(psi) + pot;
    }
    case Observable::Position:
      return moment([](double x) { return x; });
    case Observable::Offset:
      return moment([&](double x) { return x - ctx.center; });
    case Observable::Spread: {
      const double m1 = moment([](double x) { return x; });
      const double m2 = moment([&](double x) { return (x - m1) * (x - m1); });
      return std::sqrt(m2);
    }
    case Observable::Dipole: {
      if (!ctx.dipole) throw std::invalid_argument("expectation: no dipole term supplied");
      if (!(psi.grid.x_min > 0.0))
        throw std::domain_error("expectation: wavefunction support reaches x <= 0");
      return moment([&](double x) {
        return dipole_potential(x, ctx.dipole->alpha_plus_sq, ctx.dipole->orientation);
      });
    }
  }
  throw std::logic_error("expectation: unknown observable");
}

/// CSV rows x,re,im.
inline void write_wavefunction_csv(const WaveFunction& psi, std::ostream& out) {
  out << "x,re,im\n";
  for (std::size_t i = 0; i < psi.amplitudes.size(); ++i)
    out << format_number(psi.grid.position(i)) << ',' << format_number(psi.amplitudes[i].real())
        << ',' << format_number(psi.amplitudes[i].imag()) << '\n';
}

}  // namespace rydkick

#endif  // RYDKICK_ENGINE_HPP
