#ifndef RYDKICK_COMMANDS_HPP
#define RYDKICK_COMMANDS_HPP

// Subcommands of the rydkick tool. Each returns the process exit code:
// 0 success, 2 finished with untrusted points. Configuration problems are
// thrown as ConfigError (exit 1 in the driver).
//
// CSV columns (fixed order, 12 significant digits, '\n' line ends):
//   gate.csv            theta,theta_periods,x0,level,dt1,alpha_plus_sq,tau,phi_dyn,phi_geom,
//                       fidelity,alpha_re,alpha_im,phi_kk,truncation_loss,untrusted
//   sweep.csv           theta,theta_periods,x0,dt1,lambda,alpha_plus_sq,f0,phi_dyn,phi_geom,tau,
//                       impulse_margin,phase_margin,linear_margin,fast_x0_margin,
//                       fast_dt_margin,truncation_loss,untrusted
//   contours_<F>.csv    line,point,theta,theta_periods,x0
//   reference_curve.csv theta,theta_periods,x0
//   thermal.csv         theta,theta_periods,x0,k_bt,levels,fidelity,untrusted
//   cycles.csv          theta,theta_periods,x0,n,entropy,fidelity,truncation_loss,
//                       truncation_warning,untrusted
//   wavefunction.csv    x,re,im

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rydkick/config.hpp"
#include "rydkick/contour.hpp"
#include "rydkick/format.hpp"
#include "rydkick/gate.hpp"
#include "rydkick/parallel.hpp"

namespace rydkick {

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  unsigned jobs = default_jobs();
  bool dump_wavefunction = false;
};

namespace cli_detail {

class CsvRow {
 public:
  CsvRow& operator<<(double v) { return add(format_number(v)); }
  CsvRow& operator<<(std::size_t v) { return add(std::to_string(v)); }
  CsvRow& operator<<(bool v) { return add(v ? "1" : "0"); }
  std::string str() const { return text_ + "\n"; }

 private:
  CsvRow& add(const std::string& s) {
    if (!text_.empty()) text_ += ',';
    text_ += s;
    return *this;
  }
  std::string text_;
};

inline std::ofstream open_output(const CommandOptions& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream out(opt.out_dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (opt.out_dir / name).string());
  return out;
}

inline double periods(double theta) { return theta / constants::oscillator_period; }

inline void require_coupling(const RunConfig& cfg) {
  if (!cfg.protocol.dt1 && !cfg.coupling())
    throw ConfigError(cfg.source, "[protocol] alpha_plus_sq",
                      "required in dimensionless mode (or give dt1 or a [physical] section)");
}

inline void require_point(const RunConfig& cfg, Mode m) {
  if (!cfg.protocol.theta)
    throw ConfigError(cfg.source, "[protocol] theta",
                      std::string("a single theta is required for ") + to_string(m));
  if (!cfg.protocol.x0)
    throw ConfigError(cfg.source, "[protocol] x0",
                      std::string("a single x0 is required for ") + to_string(m));
}

inline void require_points(const RunConfig& cfg) {
  if (!cfg.protocol.theta && !cfg.protocol.theta_range)
    throw ConfigError(cfg.source, "[protocol] theta", "theta or theta_range is required");
  if (!cfg.protocol.x0 && !cfg.protocol.x0_range)
    throw ConfigError(cfg.source, "[protocol] x0", "x0 or x0_range is required");
}

inline void check_mode(const RunConfig& cfg, Mode m) {
  if (cfg.analysis.mode && *cfg.analysis.mode != m)
    throw ConfigError(cfg.source, "[analysis] mode",
                      std::string("'") + to_string(*cfg.analysis.mode) +
                          "' conflicts with subcommand '" + to_string(m) + "'");
}

struct Pair {
  double theta, x0;
};

inline std::vector<Pair> parameter_pairs(const RunConfig& cfg) {
  std::vector<Pair> out;
  for (double t : cfg.protocol.thetas())
    for (double x : cfg.protocol.x0s()) out.push_back({t, x});
  return out;
}

}  // namespace cli_detail

inline int cmd_gate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  using namespace cli_detail;
  check_mode(cfg, Mode::Gate);
  require_point(cfg, Mode::Gate);
  require_coupling(cfg);
  const GateParams p = cfg.gate_params(*cfg.protocol.theta, *cfg.protocol.x0);
  const auto o = run_gate(p, cfg.analysis.level);
  const auto& s = o.gate.protocol.schedule;
  const auto& b = o.gate.budget;

  const std::string k = std::to_string(o.level);
  log << "theta            " << format_number(p.theta) << " rad (" << format_number(periods(p.theta))
      << " T_ho)\n"
      << "x0               " << format_number(p.x0) << '\n'
      << "phi_target       " << format_number(s.phi_target) << '\n'
      << "alpha_plus_sq    " << format_number(o.gate.alpha_plus_sq) << '\n'
      << "dt1              " << format_number(s.dt1) << '\n'
      << "dt2              " << format_number(s.dt2) << '\n'
      << "p1               " << format_number(s.p1) << '\n'
      << "phi_dyn          " << format_number(b.phi_dyn) << '\n'
      << "phi_geom         " << format_number(b.phi_geom) << '\n'
      << "tau              " << format_number(o.gate_time) << " (" << format_number(periods(o.gate_time))
      << " T_ho)\n"
      << "alpha_" << k << k << "       " << format_number(std::abs(o.alpha_kk)) << " exp(i "
      << format_number(o.phi_kk) << ")\n"
      << "F" << k << "               " << format_number(o.fidelity) << '\n'
      << "truncation_loss  " << format_number(o.truncation_loss) << '\n'
      << "untrusted        " << (o.untrusted ? "yes" : "no") << '\n';

  auto out = open_output(opt, "gate.csv");
  out << "theta,theta_periods,x0,level,dt1,alpha_plus_sq,tau,phi_dyn,phi_geom,fidelity,alpha_re,"
         "alpha_im,phi_kk,truncation_loss,untrusted\n";
  CsvRow row;
  row << p.theta << periods(p.theta) << p.x0 << o.level << s.dt1 << o.gate.alpha_plus_sq
      << o.gate_time << b.phi_dyn << b.phi_geom << o.fidelity << o.alpha_kk.real()
      << o.alpha_kk.imag() << o.phi_kk << o.truncation_loss << o.untrusted;
  out << row.str();
  if (opt.dump_wavefunction) {
    auto wf = open_output(opt, "wavefunction.csv");
    write_wavefunction_csv(o.final_state, wf);
  }
  return o.untrusted ? 2 : 0;
}

struct SweepRecord {
  double theta = 0.0, x0 = 0.0, dt1 = 0.0, lambda = 0.0, alpha_plus_sq = 0.0;
  double f0 = std::numeric_limits<double>::quiet_NaN();
  double phi_dyn = 0.0, phi_geom = 0.0, tau = 0.0;
  ValidityReport validity;
  double truncation_loss = 0.0;
  bool untrusted = true;
};

/// Evaluates every (theta, x0) point, row-major in theta then x0. Failed points
/// come back untrusted with NaN fidelity.
inline std::vector<SweepRecord> run_sweep(const RunConfig& cfg, unsigned jobs) {
  const auto pairs = cli_detail::parameter_pairs(cfg);
  std::vector<SweepRecord> recs(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    SweepRecord& r = recs[i];
    r.theta = pairs[i].theta;
    r.x0 = pairs[i].x0;
    r.lambda = cfg.protocol.lambda;
    try {
      const GateParams p = cfg.gate_params(r.theta, r.x0);
      const auto o = run_gate(p, 0);
      r.dt1 = o.gate.protocol.schedule.dt1;
      r.alpha_plus_sq = o.gate.alpha_plus_sq;
      r.f0 = o.fidelity;
      r.phi_dyn = o.gate.budget.phi_dyn;
      r.phi_geom = o.gate.budget.phi_geom;
      r.tau = o.gate_time;
      r.validity = check_validity(p);
      r.truncation_loss = o.truncation_loss;
      r.untrusted = o.untrusted;
    } catch (const std::exception&) {
      r.untrusted = true;
    }
  });
  return recs;
}

inline int cmd_sweep(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  using namespace cli_detail;
  check_mode(cfg, Mode::Sweep);
  if (!cfg.protocol.theta_range)
    throw ConfigError(cfg.source, "[protocol] theta_range", "required for sweep");
  if (!cfg.protocol.x0_range)
    throw ConfigError(cfg.source, "[protocol] x0_range", "required for sweep");
  require_coupling(cfg);

  const auto recs = run_sweep(cfg, opt.jobs);
  bool untrusted = false;
  {
    auto out = open_output(opt, "sweep.csv");
    out << "theta,theta_periods,x0,dt1,lambda,alpha_plus_sq,f0,phi_dyn,phi_geom,tau,"
           "impulse_margin,phase_margin,linear_margin,fast_x0_margin,fast_dt_margin,"
           "truncation_loss,untrusted\n";
    for (const auto& r : recs) {
      CsvRow row;
      row << r.theta << periods(r.theta) << r.x0 << r.dt1 << r.lambda << r.alpha_plus_sq << r.f0
          << r.phi_dyn << r.phi_geom << r.tau << r.validity.impulse_margin
          << r.validity.phase_margin << r.validity.linear_margin << r.validity.fast_x0_margin
          << r.validity.fast_dt_margin << r.truncation_loss << r.untrusted;
      out << row.str();
      untrusted = untrusted || r.untrusted;
    }
  }

  const auto thetas = cfg.protocol.thetas();
  const auto x0s = cfg.protocol.x0s();
  std::vector<double> f(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) f[i] = recs[i].f0;
  for (double level : cfg.analysis.contour_levels) {
    auto out = open_output(opt, "contours_" + format_number(level) + ".csv");
    out << "line,point,theta,theta_periods,x0\n";
    const auto lines = contour_lines(thetas, x0s, f, level);
    for (std::size_t l = 0; l < lines.size(); ++l)
      for (std::size_t k = 0; k < lines[l].size(); ++k) {
        CsvRow row;
        row << l << k << lines[l][k].x << periods(lines[l][k].x) << lines[l][k].y;
        out << row.str();
      }
  }
  {
    auto out = open_output(opt, "reference_curve.csv");
    out << "theta,theta_periods,x0\n";
    const double mag = std::abs(realizable_phase(cfg.protocol.phi_target));
    const std::size_t n = 200;
    const double a = thetas.front(), b = thetas.back();
    for (std::size_t i = 0; i < n; ++i) {
      const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
      CsvRow row;
      row << t << periods(t) << 10.0 * std::sqrt(mag / t);
      out << row.str();
    }
  }
  std::size_t bad = 0;
  for (const auto& r : recs) bad += r.untrusted ? 1 : 0;
  log << "sweep: " << recs.size() << " points, " << bad << " untrusted\n";
  return untrusted ? 2 : 0;
}

inline int cmd_thermal(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  using namespace cli_detail;
  check_mode(cfg, Mode::Thermal);
  require_points(cfg);
  require_coupling(cfg);
  if (cfg.analysis.temperatures.empty())
    throw ConfigError(cfg.source, "[analysis] temperatures", "required for thermal");

  std::size_t levels = 1;
  for (double t : cfg.analysis.temperatures) levels = std::max(levels, thermal_level_count(t));
  bool untrusted = false;
  auto out = open_output(opt, "thermal.csv");
  out << "theta,theta_periods,x0,k_bt,levels,fidelity,untrusted\n";
  for (const auto& pr : parameter_pairs(cfg)) {
    GateParams p = cfg.gate_params(pr.theta, pr.x0);
    const auto lf = level_fidelities(p, levels, opt.jobs);
    untrusted = untrusted || lf.untrusted;
    CsvRow anchor;
    anchor << pr.theta << periods(pr.theta) << pr.x0 << 0.0 << std::size_t{1} << lf.fidelity[0]
           << lf.untrusted;
    out << anchor.str();
    for (double t : cfg.analysis.temperatures) {
      const auto rho = thermal_density(t);
      CsvRow row;
      row << pr.theta << periods(pr.theta) << pr.x0 << t << rho.weights.size()
          << weighted_fidelity(rho, lf.fidelity) << lf.untrusted;
      out << row.str();
    }
    log << "thermal: theta = " << format_number(pr.theta) << ", x0 = " << format_number(pr.x0)
        << ", F0 = " << format_number(lf.fidelity[0]) << '\n';
  }
  return untrusted ? 2 : 0;
}

inline int cmd_cycles(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  using namespace cli_detail;
  check_mode(cfg, Mode::Cycles);
  require_points(cfg);
  require_coupling(cfg);
  bool untrusted = false;
  auto out = open_output(opt, "cycles.csv");
  out << "theta,theta_periods,x0,n,entropy,fidelity,truncation_loss,truncation_warning,untrusted\n";
  for (const auto& pr : parameter_pairs(cfg)) {
    const auto recs = iterate_cycles(cfg.gate_params(pr.theta, pr.x0), cfg.analysis.n_cycles, opt.jobs);
    for (const auto& r : recs) {
      CsvRow row;
      row << pr.theta << periods(pr.theta) << pr.x0 << r.cycles << r.entropy << r.fidelity
          << r.truncation_loss << r.truncation_warning << r.untrusted;
      out << row.str();
      untrusted = untrusted || r.untrusted;
      if (r.truncation_warning)
        log << "warning: truncation loss " << format_number(r.truncation_loss) << " at N = "
            << r.cycles << '\n';
    }
    log << "cycles: theta = " << format_number(pr.theta) << ", x0 = " << format_number(pr.x0)
        << ", S(" << recs.back().cycles << ") = " << format_number(recs.back().entropy) << '\n';
  }
  return untrusted ? 2 : 0;
}

namespace cli_detail {

inline void write_margins(std::ostream& out, const ValidityReport& r, double alpha_plus_sq) {
  out << "  margin            value                target  status\n";
  for (const auto& e : r.entries()) {
    std::string value = format_number(e.value);
    std::string status = e.pass ? "PASS" : "WARN";
    if (e.name == "rabi_margin" && alpha_plus_sq == 0.0) status = "PASS (unconditionally valid)";
    out << "  " << e.name << std::string(18 - std::min<std::size_t>(17, e.name.size()), ' ')
        << value << std::string(21 - std::min<std::size_t>(20, value.size()), ' ')
        << (e.small_is_good ? "<= 0.1  " : ">= 10   ") << status << '\n';
  }
  if (!r.rabi_margin && alpha_plus_sq == 0.0)
    out << "  rabi_margin       inf                  >= 10   PASS (unconditionally valid)\n";
}

}  // namespace cli_detail

inline int cmd_validity(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  using namespace cli_detail;
  check_mode(cfg, Mode::Validity);
  if (cfg.protocol.theta_range || cfg.protocol.x0_range)
    throw ConfigError(cfg.source, "[protocol]", "validity takes a single theta and x0");
  std::ostringstream rep;
  const double phi = cfg.protocol.phi_target;
  const auto rabi = cfg.rabi_over_trap();
  std::optional<DerivedScales> scales;
  if (cfg.physical) {
    scales = derive_scales(*cfg.physical);
    rep << "reduced_mass_kg        " << format_number(scales->reduced_mass) << '\n'
        << "osc_length_m           " << format_number(scales->osc_length) << '\n'
        << "mass_length_ratio      " << format_number(scales->mass_length_ratio) << '\n'
        << "alpha_plus_sq          " << format_number(scales->alpha_plus_sq) << '\n';
    if (scales->rydberg_trap_mismatch)
      rep << "warning: Rydberg-state trap frequency differs from the ground-state trap by >50%\n";
  }

  double theta = 0.0, x0 = 0.0;
  if (cfg.protocol.theta && cfg.protocol.x0) {
    theta = *cfg.protocol.theta;
    x0 = *cfg.protocol.x0;
  } else if (cfg.protocol.theta || cfg.protocol.x0) {
    throw ConfigError(cfg.source, cfg.protocol.theta ? "[protocol] x0" : "[protocol] theta",
                      "give both theta and x0, or neither to use the fast-gate design");
  } else {
    const auto coupling = cfg.coupling();
    if (!coupling || *coupling <= 0.0)
      throw ConfigError(cfg.source, "[protocol] theta",
                        "fast-gate design needs a positive coupling; otherwise give theta and x0");
    const auto d = design_fast_gate(phi, *coupling);
    theta = d.theta;
    x0 = d.x0;
    const double tau = d.dt1 * (2.0 + std::cos(d.theta)) + 2.0 * d.theta;
    rep << "design_theta           " << format_number(d.theta) << " rad ("
        << format_number(periods(d.theta)) << " T_ho)\n"
        << "design_x0              " << format_number(d.x0) << '\n'
        << "design_dt1             " << format_number(d.dt1) << '\n'
        << "gate_time_estimate     " << format_number(periods(d.gate_time_estimate))
        << " T_ho (2 theta)\n"
        << "gate_time              " << format_number(periods(tau)) << " T_ho\n";
  }

  auto params_at = [&](double xx) {
    GateParams p;
    p.theta = theta;
    p.x0 = xx;
    p.phi_target = phi;
    if (cfg.protocol.dt1)
      p.dt1 = cfg.protocol.dt1;
    else
      p.alpha_plus_sq = cfg.coupling();
    return p;
  };
  require_coupling(cfg);

  auto report_point = [&](const std::string& title, double xx) {
    const auto p = params_at(xx);
    const auto r = check_validity(p, rabi);
    rep << '\n' << title << ": theta = " << format_number(theta) << " rad, x0 = " << format_number(xx)
        << ", dt1 = " << format_number(r.dt1) << ", R = " << format_number(r.r_bound) << '\n';
    write_margins(rep, r, r.alpha_plus_sq);
  };
  report_point("point", x0);
  if (cfg.physical && scales) {
    if (auto lat = lattice_separation(*cfg.physical, *scales)) report_point("lattice", *lat);
  }

  const std::string text = rep.str();
  log << text;
  auto out = open_output(opt, "validity.txt");
  out << text;
  return 0;
}

inline int run_command(Mode m, const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  switch (m) {
    case Mode::Gate: return cmd_gate(cfg, opt, log);
    case Mode::Sweep: return cmd_sweep(cfg, opt, log);
    case Mode::Thermal: return cmd_thermal(cfg, opt, log);
    case Mode::Cycles: return cmd_cycles(cfg, opt, log);
    case Mode::Validity: return cmd_validity(cfg, opt, log);
  }
  return 1;
}

}  // namespace rydkick

#endif  // RYDKICK_COMMANDS_HPP
