#ifndef RYDKICK_GATE_HPP
#define RYDKICK_GATE_HPP

// Runs the kick protocol on relative-motion states and evaluates the gate
// quality metrics: per-level fidelity F_k, thermal fidelity, the N-cycle
// motional density with its entropy, and the approximation-validity margins.
//
// Phase convention: overlaps alpha_kk' are reported in the interaction picture
// of the trap, i.e. with the free factor exp(-i (k' + 1/2) tau) removed, so an
// ideal gate yields alpha_kk = exp(i phi).

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rydkick/constants.hpp"
#include "rydkick/engine.hpp"
#include "rydkick/parallel.hpp"
#include "rydkick/phasespace.hpp"
#include "rydkick/physpar.hpp"

namespace rydkick {

enum class KickModel {
  Full,   ///< kicks propagated under H0 + V_dip (+ quartic) on the grid
  Ideal,    ///< instantaneous linearized kicks, exact in the Fock basis
  Impulse,  ///< instantaneous kicks exp(-i V_dip(x) dt) with the full potential, on the grid
};

struct GateParams {
  double theta = 0.0;
  double x0 = 0.0;
  double phi_target = -constants::pi;
  /// Exactly one of dt1 / alpha_plus_sq is given; the other follows from the
  /// phase condition.
  std::optional<double> dt1;
  std::optional<double> alpha_plus_sq;
  double lambda = 0.0;
  std::optional<GridSpec> grid;
  std::size_t kick_steps = 200;
  std::size_t n_max = 25;
  KickModel kick_model = KickModel::Full;

  /// Reference design point: |phi| = pi, dt1 = 1e-4 T_ho, theta in units of T_ho.
  static GateParams reference_point(double theta_periods, double x0) {
    GateParams p;
    p.theta = theta_periods * constants::oscillator_period;
    p.x0 = x0;
    p.dt1 = 1e-4 * constants::oscillator_period;
    return p;
  }
};

struct ResolvedGate {
  double alpha_plus_sq = 0.0;
  Protocol protocol;
  PhaseBudget budget;
  GridSpec grid;
};

inline ResolvedGate resolve(const GateParams& p) {
  if (!(p.x0 > 0.0)) throw std::invalid_argument("GateParams: x0 must be positive");
  if (!(p.theta > 0.0 && p.theta <= constants::pi / 2))
    throw std::invalid_argument("GateParams: theta must lie in (0, pi/2]");
  if (p.lambda < 0.0) throw std::invalid_argument("GateParams: lambda must be >= 0");
  if (p.kick_steps == 0) throw std::invalid_argument("GateParams: kick_steps must be >= 1");
  if (p.kick_model != KickModel::Full && p.lambda != 0.0)
    throw std::invalid_argument("GateParams: instantaneous kick models are purely harmonic");
  if (p.dt1.has_value() == p.alpha_plus_sq.has_value())
    throw std::invalid_argument("GateParams: give exactly one of dt1 and alpha_plus_sq");

  ResolvedGate r;
  r.grid = p.grid.value_or(GridSpec::around(p.x0));
  r.grid.validate();
  if (realizable_phase(p.phi_target) == 0.0) {
    r.alpha_plus_sq = p.alpha_plus_sq.value_or(0.0);
    r.protocol = schedule_from_kick_time(p.phi_target, p.theta, p.x0, r.alpha_plus_sq, 0.0);
  } else if (p.dt1) {
    if (!(*p.dt1 > 0.0)) throw std::invalid_argument("GateParams: dt1 must be positive");
    r.alpha_plus_sq = kick_area(p.phi_target, p.theta, p.x0) / *p.dt1;
    r.protocol = schedule_from_kick_time(p.phi_target, p.theta, p.x0, r.alpha_plus_sq, *p.dt1);
  } else {
    r.alpha_plus_sq = *p.alpha_plus_sq;
    r.protocol = build_schedule(p.phi_target, p.theta, p.x0, r.alpha_plus_sq);
  }
  r.budget = phase_budget(r.protocol.schedule, r.alpha_plus_sq);
  return r;
}

struct GateOutcome {
  WaveFunction final_state;
  FockVector alpha_row;       ///< interaction-picture overlaps alpha_kk'
  complex alpha_kk{0.0, 0.0};
  double phi_kk = 0.0;
  double fidelity = 0.0;      ///< F_k
  std::size_t level = 0;
  complex lab_overlap{0.0, 0.0};  ///< <k|psi(tau)> without the frame change
  double gate_time = 0.0;
  double truncation_loss = 0.0;
  bool untrusted = false;
  ResolvedGate gate;
};

/// (1 + |alpha_kk| cos(phi - phi_kk)) / 2.
inline double fidelity_pure(complex alpha_kk, double phi_target) {
  return 0.5 * (1.0 + std::real(alpha_kk * std::polar(1.0, -phi_target)));
}

inline double fidelity_pure(const GateOutcome& o, double phi_target) {
  return fidelity_pure(o.alpha_kk, phi_target);
}

/// (1 + Re <psi_id|psi_num>) / 2.
inline double fidelity_state(const WaveFunction& num, const WaveFunction& ideal) {
  return 0.5 * (1.0 + std::real(inner_product(ideal, num)));
}

namespace detail {

inline constexpr std::size_t ideal_padding = 40;

inline void run_full(WaveFunction& psi, const GateParams& p, const ResolvedGate& g) {
  const SplitStepPropagator prop(g.grid);
  PotentialSpec free_pot{true, p.lambda, std::nullopt, p.x0};
  for (const auto& e : g.protocol.train.elements) {
    if (const auto* k = std::get_if<Kick>(&e)) {
      if (k->duration == 0.0) continue;
      PotentialSpec kick_pot = free_pot;
      kick_pot.dipole = DipoleTerm{g.alpha_plus_sq, k->orientation};
      prop.evolve(psi, kick_pot, k->duration, k->duration / static_cast<double>(p.kick_steps));
    } else {
      prop.evolve(psi, free_pot, std::get<FreeEvolution>(e).angle, g.grid.dt);
    }
  }
}

inline void run_ideal(WaveFunction& psi, const GateParams& p, const ResolvedGate& g) {
  FockVector v = project_to_fock(psi, p.n_max + ideal_padding, p.x0);
  for (const auto& e : g.protocol.train.elements) {
    if (const auto* k = std::get_if<Kick>(&e)) {
      if (k->duration == 0.0) continue;
      const double u = dipole_potential(p.x0, g.alpha_plus_sq, k->orientation);
      v = apply_displacement(std::move(v), complex(0.0, k->p));
      for (auto& c : v.coeffs) c *= std::polar(1.0, -u * k->duration);
    } else {
      v = evolve_harmonic_fock(std::move(v), std::get<FreeEvolution>(e).angle);
    }
  }
  const bool warn = psi.boundary_warning;
  psi = synthesize(v, g.grid, p.x0);
  psi.boundary_warning = warn || psi.edge_amplitude() > edge_amplitude_limit;
}

inline void run_impulse(WaveFunction& psi, const GateParams& p, const ResolvedGate& g) {
  const SplitStepPropagator prop(g.grid);
  const PotentialSpec free_pot{true, 0.0, std::nullopt, p.x0};
  for (const auto& e : g.protocol.train.elements) {
    if (const auto* k = std::get_if<Kick>(&e)) {
      for (std::size_t i = 0; i < psi.amplitudes.size(); ++i) {
        const double v = dipole_potential(g.grid.position(i), g.alpha_plus_sq, k->orientation);
        psi.amplitudes[i] *= std::polar(1.0, -v * k->duration);
      }
    } else {
      prop.evolve(psi, free_pot, std::get<FreeEvolution>(e).angle, g.grid.dt);
    }
  }
}

}  // namespace detail

/// Elapsed time of one gate: tau for finite kicks, 2 theta for instantaneous ones.
inline double elapsed_time(const GateParams& p, const ResolvedGate& g) {
  return p.kick_model == KickModel::Full ? g.budget.gate_time : 2.0 * g.protocol.schedule.theta;
}

/// Applies one gate to an arbitrary motional state; reference_level selects
/// which alpha_kk and F_k are reported.
inline GateOutcome run_gate(const GateParams& p, WaveFunction initial,
                            std::size_t reference_level = 0) {
  GateOutcome o;
  o.gate = resolve(p);
  if (initial.grid.n_points != o.gate.grid.n_points || initial.grid.x_min != o.gate.grid.x_min ||
      initial.grid.x_max != o.gate.grid.x_max)
    throw std::invalid_argument("run_gate: initial state lives on a different grid");
  if (reference_level > p.n_max) throw std::invalid_argument("run_gate: level exceeds n_max");
  o.level = reference_level;
  o.final_state = std::move(initial);
  switch (p.kick_model) {
    case KickModel::Full:
      detail::run_full(o.final_state, p, o.gate);
      break;
    case KickModel::Ideal:
      detail::run_ideal(o.final_state, p, o.gate);
      break;
    case KickModel::Impulse:
      detail::run_impulse(o.final_state, p, o.gate);
      break;
  }

  o.gate_time = elapsed_time(p, o.gate);
  const FockVector lab = project_to_fock(o.final_state, p.n_max, p.x0);
  o.alpha_row = evolve_harmonic_fock(lab, -o.gate_time);
  o.lab_overlap = lab.coeffs[reference_level];
  o.alpha_kk = o.alpha_row.coeffs[reference_level];
  o.phi_kk = std::arg(o.alpha_kk);
  o.fidelity = fidelity_pure(o.alpha_kk, p.phi_target);
  o.truncation_loss = o.alpha_row.truncation_loss();
  o.untrusted = o.final_state.boundary_warning;
  return o;
}

/// Starts from |k>. A level that does not fit the grid is still run, with the
/// outcome marked untrusted.
inline GateOutcome run_gate(const GateParams& p, std::size_t k) {
  const GridSpec grid = p.grid.value_or(GridSpec::around(p.x0));
  grid.validate();
  FockVector level(k);
  level.coeffs[k] = 1.0;
  WaveFunction psi = synthesize(level, grid, p.x0);
  psi.normalize();
  psi.boundary_warning = psi.edge_amplitude() > edge_amplitude_limit;
  return run_gate(p, std::move(psi), k);
}

struct ThermalLabel {
  double k_bt = 0.0;
};
struct CycleLabel {
  std::size_t cycles = 0;
};

/// Diagonal motional density in the Fock basis.
struct MotionalDensity {
  std::vector<double> weights;
  std::variant<ThermalLabel, CycleLabel> label;

  double total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// -sum w ln w (units of k_B), with 0 ln 0 = 0.
inline double entropy(const MotionalDensity& rho) {
  double s = 0.0;
  for (double w : rho.weights)
    if (w > 0.0) s -= w * std::log(w);
  return s;
}

/// Levels kept for temperature k_bt: all E_k up to at least 5 k_bt, never fewer than 3.
inline std::size_t thermal_level_count(double k_bt) {
  if (!(k_bt > 0.0)) throw std::invalid_argument("thermal_level_count: k_bt must be positive");
  const double top = std::ceil(5.0 * k_bt - 0.5);
  return std::max<std::size_t>(3, static_cast<std::size_t>(std::max(0.0, top)) + 1);
}

/// Canonical weights 2 sinh(E0/kT) exp(-E_k/kT), renormalized over the kept levels.
inline MotionalDensity thermal_density(double k_bt) {
  const std::size_t count = thermal_level_count(k_bt);
  MotionalDensity rho{std::vector<double>(count), ThermalLabel{k_bt}};
  const double prefactor = 2.0 * std::sinh(0.5 / k_bt);
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    rho.weights[k] = prefactor * std::exp(-(static_cast<double>(k) + 0.5) / k_bt);
    sum += rho.weights[k];
  }
  for (double& w : rho.weights) w /= sum;
  return rho;
}

struct LevelFidelities {
  std::vector<double> fidelity;
  bool untrusted = false;
};

/// F_k for k = 0..count-1, evaluated concurrently.
inline LevelFidelities level_fidelities(const GateParams& p, std::size_t count,
                                        unsigned jobs = default_jobs()) {
  GateParams q = p;
  q.n_max = std::max(p.n_max, count - 1);
  std::vector<double> f(count);
  std::vector<char> bad(count, 0);
  parallel_for(count, jobs, [&](std::size_t k) {
    const auto o = run_gate(q, k);
    f[k] = o.fidelity;
    bad[k] = o.untrusted;
  });
  LevelFidelities out{std::move(f), false};
  for (char b : bad) out.untrusted = out.untrusted || b;
  return out;
}

/// sum_k w_k F_k in fixed level order.
inline double weighted_fidelity(const MotionalDensity& rho, const std::vector<double>& f_k) {
  if (f_k.size() < rho.weights.size())
    throw std::invalid_argument("weighted_fidelity: missing level fidelities");
  double s = 0.0;
  for (std::size_t k = 0; k < rho.weights.size(); ++k) s += rho.weights[k] * f_k[k];
  return s;
}

struct ThermalResult {
  double fidelity = 0.0;
  MotionalDensity density;
  bool untrusted = false;
};

inline ThermalResult fidelity_thermal(const GateParams& p, double k_bt,
                                      unsigned jobs = default_jobs()) {
  ThermalResult r;
  r.density = thermal_density(k_bt);
  const auto levels = level_fidelities(p, r.density.weights.size(), jobs);
  r.fidelity = weighted_fidelity(r.density, levels.fidelity);
  r.untrusted = levels.untrusted;
  return r;
}

inline constexpr double cycle_truncation_warning = 1e-4;

struct CycleRecord {
  std::size_t cycles = 0;
  MotionalDensity density;
  double entropy = 0.0;
  double fidelity = 0.0;
  double truncation_loss = 0.0;
  bool truncation_warning = false;
  bool untrusted = false;
};

/// Repeats the gate on the same pair, starting from |0>, and reports the
/// diagonal motional density |alpha_0k(N tau)|^2 after each of 1..n_cycles
/// applications together with its entropy and sum_k w_k F_k.
inline std::vector<CycleRecord> iterate_cycles(const GateParams& p, std::size_t n_cycles,
                                               unsigned jobs = default_jobs()) {
  if (n_cycles < 1) throw std::invalid_argument("iterate_cycles: need at least one cycle");
  const auto levels = level_fidelities(p, p.n_max + 1, jobs);
  const GridSpec grid = p.grid.value_or(GridSpec::around(p.x0));
  WaveFunction psi = init_fock_on_grid(0, grid, p.x0);

  std::vector<CycleRecord> out;
  out.reserve(n_cycles);
  for (std::size_t n = 1; n <= n_cycles; ++n) {
    auto o = run_gate(p, std::move(psi), 0);
    CycleRecord rec;
    rec.cycles = n;
    rec.density.label = CycleLabel{n};
    rec.density.weights.resize(o.alpha_row.coeffs.size());
    for (std::size_t k = 0; k < o.alpha_row.coeffs.size(); ++k)
      rec.density.weights[k] = std::norm(o.alpha_row.coeffs[k]);
    rec.entropy = entropy(rec.density);
    rec.fidelity = weighted_fidelity(rec.density, levels.fidelity);
    rec.truncation_loss = o.truncation_loss;
    rec.truncation_warning = o.truncation_loss > cycle_truncation_warning;
    rec.untrusted = o.untrusted || levels.untrusted;
    out.push_back(std::move(rec));
    psi = std::move(o.final_state);
  }
  return out;
}

inline constexpr double validity_factor = 10.0;

struct ValidityReport {
  double impulse_margin = 0.0;   ///< <H0>/|<V_dip>|, want <= 1/10
  double phase_margin = 0.0;     ///< <H0> dt1/|phi|, want <= 1/10
  double linear_margin = 0.0;    ///< (|<x> - x0| + <dx>)/x0, want <= 1/10
  double fast_x0_margin = 0.0;   ///< x0 / sqrt(|phi|/theta), want >= 10
  double fast_dt_margin = 0.0;   ///< 2 theta / dt1, want >= 10
  std::optional<double> rabi_margin;  ///< Omega / (2 alpha^2/x0^3), want >= 10
  double r_bound = 0.0;          ///< coherent-state radius reached from |0>, p1
  double alpha_plus_sq = 0.0;
  double dt1 = 0.0;

  struct Entry {
    std::string name;
    double value;
    bool small_is_good;
    bool pass;
  };

  std::vector<Entry> entries() const {
    auto small = [](double v) { return v <= 1.0 / validity_factor; };
    auto large = [](double v) { return v >= validity_factor; };
    std::vector<Entry> e{
        {"impulse_margin", impulse_margin, true, small(impulse_margin)},
        {"phase_margin", phase_margin, true, small(phase_margin)},
        {"linear_margin", linear_margin, true, small(linear_margin)},
        {"fast_x0_margin", fast_x0_margin, false, large(fast_x0_margin)},
        {"fast_dt_margin", fast_dt_margin, false, large(fast_dt_margin)},
    };
    if (rabi_margin) e.push_back({"rabi_margin", *rabi_margin, false, large(*rabi_margin)});
    return e;
  }

  bool all_pass() const {
    for (const auto& e : entries())
      if (!e.pass) return false;
    return true;
  }
};

/// Validity margins estimated for a ground-state start: the state stays a
/// coherent state of radius at most R = p1, so <H0> <= R^2 + 1/2,
/// |<x - x0>| <= sqrt(2) R and <dx> = 1/sqrt(2). rabi_over_trap is Omega/omega
/// when known. A vanishing coupling is allowed and yields infinite kick times.
inline ValidityReport check_validity(const GateParams& p,
                                     std::optional<double> rabi_over_trap = std::nullopt) {
  if (!(p.x0 > 0.0)) throw std::invalid_argument("check_validity: x0 must be positive");
  if (!(p.theta > 0.0 && p.theta <= constants::pi / 2))
    throw std::invalid_argument("check_validity: theta must lie in (0, pi/2]");
  const double inf = std::numeric_limits<double>::infinity();
  const double mag = std::abs(realizable_phase(p.phi_target));
  const double area = kick_area(p.phi_target, p.theta, p.x0);  // alpha^2 dt1

  ValidityReport r;
  if (p.dt1) {
    r.dt1 = *p.dt1;
    r.alpha_plus_sq = r.dt1 > 0.0 ? area / r.dt1 : 0.0;
  } else if (p.alpha_plus_sq) {
    r.alpha_plus_sq = *p.alpha_plus_sq;
    r.dt1 = area == 0.0 ? 0.0 : (r.alpha_plus_sq > 0.0 ? area / r.alpha_plus_sq : inf);
  } else {
    throw std::invalid_argument("check_validity: give dt1 or alpha_plus_sq");
  }
  const double x0 = p.x0;
  r.r_bound = 3.0 / std::sqrt(2.0) * area / std::pow(x0, 4);
  const double h0 = r.r_bound * r.r_bound + 0.5;
  const double v_plus = r.alpha_plus_sq / (x0 * x0 * x0);
  r.impulse_margin = v_plus > 0.0 ? h0 / v_plus : inf;
  r.phase_margin = mag > 0.0 ? (std::isinf(r.dt1) ? inf : h0 * r.dt1 / mag) : 0.0;
  r.linear_margin = (std::sqrt(2.0) * r.r_bound + 1.0 / std::sqrt(2.0)) / x0;
  r.fast_x0_margin = mag > 0.0 ? x0 / std::sqrt(mag / p.theta) : inf;
  r.fast_dt_margin = r.dt1 > 0.0 ? 2.0 * p.theta / r.dt1 : inf;
  if (rabi_over_trap) r.rabi_margin = rabi_margin(*rabi_over_trap, r.alpha_plus_sq, x0);
  return r;
}

}  // namespace rydkick

#endif  // RYDKICK_GATE_HPP
