#ifndef RYDKICK_PHASESPACE_HPP
#define RYDKICK_PHASESPACE_HPP

// Closed-form bookkeeping of the three-kick protocol: displacement-operator
// algebra, triangle closure, and the geometric/dynamical phase budget.
//
// A kick of real strength p is the displacement D(i p). Free evolution for a
// time t is U(t) = exp(-i (a^dag a + 1/2) t). Throughout, phases are kept
// unreduced; callers reduce modulo 2 pi only when comparing.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rydkick/constants.hpp"
#include "rydkick/physpar.hpp"

namespace rydkick {

using complex = std::complex<double>;

/// D(label) * exp(i phase).
struct Displacement {
  complex label{0.0, 0.0};
  double phase = 0.0;
};

/// Operator product a * b, using D(x) D(y) = D(x + y) exp(i Im(x y*)).
inline Displacement compose(const Displacement& a, const Displacement& b) {
  return {a.label + b.label, a.phase + b.phase + std::imag(a.label * std::conj(b.label))};
}

/// Displacement seen after commuting U(t) through it: U(t) D(x) = D(e^{-it} x) U(t).
inline Displacement rotate(const Displacement& d, double t) {
  return {d.label * std::polar(1.0, -t), d.phase};
}

struct Kick {
  double p = 0.0;         // signed, D(i p)
  double duration = 0.0;  // dimensionless time
  DipoleOrientation orientation = DipoleOrientation::Perpendicular;
};

struct FreeEvolution {
  double angle = 0.0;
};

using PulseElement = std::variant<Kick, FreeEvolution>;

/// Elements in time order (first applied first).
struct PulseTrain {
  std::vector<PulseElement> elements;

  void validate() const {
    for (const auto& e : elements) {
      if (const auto* k = std::get_if<Kick>(&e); k && k->duration < 0.0)
        throw std::invalid_argument("PulseTrain: negative kick duration");
      if (const auto* f = std::get_if<FreeEvolution>(&e); f && f->angle < 0.0)
        throw std::invalid_argument("PulseTrain: negative free-evolution angle");
    }
  }
};

struct ReducedTrain {
  Displacement net;  ///< rotating-frame displacement, net.phase == phi_geom
  double phi_geom = 0.0;
  double total_rotation = 0.0;
};

/// Rewrites the train as U(total_rotation) D(net) exp(i phi_geom).
inline ReducedTrain reduce_train(const PulseTrain& train) {
  train.validate();
  Displacement acc;
  double rotation = 0.0;
  for (const auto& e : train.elements) {
    if (const auto* k = std::get_if<Kick>(&e)) {
      // D(ip) U(R) = U(R) D(e^{iR} ip)
      const Displacement kick = rotate({complex(0.0, k->p), 0.0}, -rotation);
      acc = compose(kick, acc);
    } else {
      rotation += std::get<FreeEvolution>(e).angle;
    }
  }
  return {acc, acc.phase, rotation};
}

inline constexpr double closure_tolerance = 1e-12;

inline bool is_closed(const PulseTrain& train) {
  return std::abs(reduce_train(train).net.label) < closure_tolerance;
}

struct TriangleSides {
  double p2 = 0.0;
  double p3 = 0.0;
};

/// Symmetric triangle (theta1 = theta2 = theta) closing p1 - p2 e^{i theta} + p3 e^{2 i theta} = 0.
inline TriangleSides close_triangle(double p1, double theta) {
  if (!(theta > 0.0 && theta <= constants::pi / 2))
    throw std::domain_error("close_triangle: theta must lie in (0, pi/2]");
  return {2.0 * p1 * std::cos(theta), p1};
}

/// Equivalent of phi in (-2 pi, 0]; the kick pattern only accumulates negative phase.
inline double realizable_phase(double phi) {
  if (phi == 0.0) return 0.0;
  double r = std::fmod(phi, constants::two_pi);
  if (r > 0.0) r -= constants::two_pi;
  if (r == 0.0) r = -constants::two_pi;
  return r;
}

/// Below this |sin 2 theta| the theta = pi/2 analytic limit is used.
inline constexpr double quarter_turn_switch = 1e-8;

/// alpha_+^2 * dt1 solving
///   |phi| = 2 (y/x0^3)(1 - cos theta) + (9/2)(y^2/x0^8) sin 2 theta,   y = alpha_+^2 dt1,
/// on the non-negative branch. Written in rationalized form so that the
/// theta -> pi/2 limit y = |phi| x0^3 / 2 is reached without cancellation.
inline double kick_area(double phi_target, double theta, double x0) {
  if (!(theta > 0.0 && theta <= constants::pi / 2))
    throw std::domain_error("kick_area: theta must lie in (0, pi/2]");
  if (!(x0 > 0.0)) throw std::domain_error("kick_area: x0 must be positive");
  const double mag = std::abs(realizable_phase(phi_target));
  if (mag == 0.0) return 0.0;
  const double x3 = x0 * x0 * x0;
  const double s = std::sin(2.0 * theta);
  if (std::abs(s) < quarter_turn_switch) return mag * x3 / 2.0;
  const double h = std::sin(theta / 2.0);
  const double one_minus_cos = 2.0 * h * h;
  const double disc = one_minus_cos * one_minus_cos + 4.5 * s * mag / (x0 * x0);
  const double y = mag * x3 / (one_minus_cos + std::sqrt(disc));
  if (!(y >= 0.0) || !std::isfinite(y))
    throw std::runtime_error("kick_area: no non-negative root");
  return y;
}

/// Duration of kicks 1 and 3 for a given coupling alpha_+^2.
inline double solve_kick_time(double phi_target, double theta, double x0, double alpha_plus_sq) {
  if (!(alpha_plus_sq > 0.0))
    throw std::domain_error("solve_kick_time: alpha_plus_sq must be positive");
  return kick_area(phi_target, theta, x0) / alpha_plus_sq;
}

/// Momentum kick |V+'(x0)| dt / sqrt(2) delivered by the first kick.
inline double kick_strength(double alpha_plus_sq, double x0, double dt1) {
  return 3.0 / std::sqrt(2.0) * alpha_plus_sq / std::pow(x0, 4) * dt1;
}

struct ProtocolSchedule {
  double theta = 0.0;
  double x0 = 0.0;
  double dt1 = 0.0;
  double dt2 = 0.0;
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  double phi_target = 0.0;  ///< realized target, in (-2 pi, 0]
};

struct PhaseBudget {
  double phi_dyn = 0.0;
  double phi_geom = 0.0;
  double phi_total = 0.0;
  double gate_time = 0.0;
};

inline PulseTrain train_of(const ProtocolSchedule& s) {
  return {{Kick{s.p1, s.dt1, DipoleOrientation::Perpendicular}, FreeEvolution{s.theta},
           Kick{-s.p2, s.dt2, DipoleOrientation::Parallel}, FreeEvolution{s.theta},
           Kick{s.p3, s.dt1, DipoleOrientation::Perpendicular}}};
}

inline PhaseBudget phase_budget(const ProtocolSchedule& s, double alpha_plus_sq) {
  PhaseBudget b;
  const double v_plus = alpha_plus_sq / (s.x0 * s.x0 * s.x0);
  // V+ dt1 + V- dt2 + V+ dt1 with V- = -2 V+.
  b.phi_dyn = -v_plus * (2.0 * s.dt1 - 2.0 * s.dt2);
  b.phi_geom = reduce_train(train_of(s)).phi_geom;
  b.phi_total = b.phi_dyn + b.phi_geom;
  b.gate_time = s.dt1 * (2.0 + std::cos(s.theta)) + 2.0 * s.theta;
  return b;
}

struct Protocol {
  ProtocolSchedule schedule;
  PulseTrain train;
};

/// Assembles the symmetric kick protocol from a given kick duration; alpha_+^2
/// sets the kick strengths.
inline Protocol schedule_from_kick_time(double phi_target, double theta, double x0,
                                        double alpha_plus_sq, double dt1) {
  if (!(theta > 0.0 && theta <= constants::pi / 2))
    throw std::domain_error("build_schedule: theta must lie in (0, pi/2]");
  if (!(x0 > 0.0)) throw std::domain_error("build_schedule: x0 must be positive");
  if (alpha_plus_sq < 0.0 || dt1 < 0.0)
    throw std::domain_error("build_schedule: negative coupling or duration");
  Protocol p;
  auto& s = p.schedule;
  s.theta = theta;
  s.x0 = x0;
  s.dt1 = dt1;
  s.dt2 = dt1 * std::cos(theta);
  s.phi_target = realizable_phase(phi_target);
  s.p1 = kick_strength(alpha_plus_sq, x0, dt1);
  const auto sides = close_triangle(s.p1, theta);
  s.p2 = sides.p2;
  s.p3 = sides.p3;
  p.train = train_of(s);
  return p;
}

inline Protocol build_schedule(double phi_target, double theta, double x0,
                               double alpha_plus_sq) {
  const double dt1 =
      realizable_phase(phi_target) == 0.0 ? 0.0
                                          : solve_kick_time(phi_target, theta, x0, alpha_plus_sq);
  return schedule_from_kick_time(phi_target, theta, x0, alpha_plus_sq, dt1);
}

/// Parameters saturating the fast-gate conditions by a factor of ten:
/// x0 = 10 sqrt(|phi|/theta), dt1 = theta/5, with theta as small as the
/// coupling allows, theta = [(10 sqrt|phi|)^5 / (6 alpha_+^2)]^{2/7}.
struct FastGateDesign {
  double theta = 0.0;
  double x0 = 0.0;
  double dt1 = 0.0;
  double gate_time_estimate = 0.0;  ///< 2 theta, the theta -> 0 gate time
};

inline FastGateDesign design_fast_gate(double phi_target, double alpha_plus_sq) {
  if (!(alpha_plus_sq > 0.0))
    throw std::domain_error("design_fast_gate: alpha_plus_sq must be positive");
  const double mag = std::abs(realizable_phase(phi_target));
  if (mag == 0.0) throw std::domain_error("design_fast_gate: zero target phase");
  FastGateDesign d;
  d.theta = std::pow(std::pow(10.0 * std::sqrt(mag), 5) / (6.0 * alpha_plus_sq), 2.0 / 7.0);
  d.x0 = 10.0 * std::sqrt(mag / d.theta);
  d.dt1 = d.theta / 5.0;
  d.gate_time_estimate = 2.0 * d.theta;
  return d;
}

}  // namespace rydkick

#endif  // RYDKICK_PHASESPACE_HPP
