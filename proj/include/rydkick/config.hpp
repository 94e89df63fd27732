#ifndef RYDKICK_CONFIG_HPP
#define RYDKICK_CONFIG_HPP

// Strict INI-style run configuration: sections [physical], [protocol],
// [numerics], [analysis]; "key = value" lines; ';' or '#' comments.
// Unknown sections or keys, duplicates and malformed values are errors that
// name the line and the field.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rydkick/constants.hpp"
#include "rydkick/engine.hpp"
#include "rydkick/gate.hpp"
#include "rydkick/physpar.hpp"

namespace rydkick {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& field, const std::string& what)
      : std::runtime_error(where + ": " + field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Mode { Gate, Sweep, Thermal, Cycles, Validity };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Gate: return "gate";
    case Mode::Sweep: return "sweep";
    case Mode::Thermal: return "thermal";
    case Mode::Cycles: return "cycles";
    case Mode::Validity: return "validity";
  }
  return "?";
}

/// (start, stop, count) with count >= 2, endpoints included.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 2;

  std::vector<double> values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
      v[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
  }
};

struct ProtocolConfig {
  double phi_target = -constants::pi;
  std::optional<double> theta;  // radians
  std::optional<Range> theta_range;
  std::optional<double> x0;
  std::optional<Range> x0_range;
  std::optional<double> dt1;  // 1/omega
  std::optional<double> alpha_plus_sq;
  std::optional<double> rabi_over_trap;
  double lambda = 0.0;
  KickModel kick_model = KickModel::Full;

  std::vector<double> thetas() const { return theta ? std::vector<double>{*theta} : theta_range->values(); }
  std::vector<double> x0s() const { return x0 ? std::vector<double>{*x0} : x0_range->values(); }
};

struct NumericsConfig {
  std::optional<std::size_t> n_points;
  std::optional<double> half_width;
  std::optional<double> x_min, x_max;
  std::optional<double> dt;  // 1/omega
  std::size_t kick_steps = 200;
  std::size_t n_max = 25;
};

struct AnalysisConfig {
  std::optional<Mode> mode;
  std::vector<double> temperatures;
  std::size_t n_cycles = 25;
  std::vector<double> contour_levels{0.9, 0.99, 0.999};
  std::size_t level = 0;
};

struct RunConfig {
  std::string source = "<config>";
  std::optional<PhysicalConfig> physical;
  ProtocolConfig protocol;
  NumericsConfig numerics;
  AnalysisConfig analysis;

  /// alpha_+^2 from [physical] when present, else from [protocol] (may be unset
  /// if dt1 fixes it through the phase condition).
  std::optional<double> coupling() const {
    if (physical) return derive_scales(*physical).alpha_plus_sq;
    return protocol.alpha_plus_sq;
  }

  std::optional<double> rabi_over_trap() const {
    if (physical) return physical->rabi_freq / physical->trap_freq;
    return protocol.rabi_over_trap;
  }

  GridSpec grid_for(double x0) const {
    GridSpec g = GridSpec::around(x0);
    if (numerics.half_width) {
      g.x_min = x0 - *numerics.half_width;
      g.x_max = x0 + *numerics.half_width;
    }
    if (numerics.x_min) g.x_min = *numerics.x_min;
    if (numerics.x_max) g.x_max = *numerics.x_max;
    if (numerics.n_points) g.n_points = *numerics.n_points;
    if (numerics.dt) g.dt = *numerics.dt;
    return g;
  }

  GateParams gate_params(double theta, double x0) const {
    GateParams p;
    p.theta = theta;
    p.x0 = x0;
    p.phi_target = protocol.phi_target;
    if (protocol.dt1)
      p.dt1 = protocol.dt1;
    else
      p.alpha_plus_sq = coupling();
    p.lambda = protocol.lambda;
    p.grid = grid_for(x0);
    p.kick_steps = numerics.kick_steps;
    p.n_max = numerics.n_max;
    p.kick_model = protocol.kick_model;
    return p;
  }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(std::string source, std::map<std::string, std::map<std::string, Entry>> sections)
      : source_(std::move(source)), sections_(std::move(sections)) {}

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
  bool has(const std::string& s, const std::string& k) const {
    auto it = sections_.find(s);
    return it != sections_.end() && it->second.count(k) != 0;
  }

  [[noreturn]] void fail(const std::string& s, const std::string& k, const std::string& what) const {
    auto it = sections_.find(s);
    std::string where = source_;
    if (it != sections_.end()) {
      auto e = it->second.find(k);
      if (e != it->second.end()) where += ":" + std::to_string(e->second.line);
    }
    throw ConfigError(where, "[" + s + "] " + k, what);
  }

  const std::string& raw(const std::string& s, const std::string& k) {
    used_[s].insert(k);
    return sections_.at(s).at(k).value;
  }

  double number(const std::string& s, const std::string& k) {
    const std::string& v = raw(s, k);
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
      fail(s, k, "expected a number, got '" + v + "'");
    return x;
  }

  std::optional<double> opt_number(const std::string& s, const std::string& k) {
    if (!has(s, k)) return std::nullopt;
    return number(s, k);
  }

  long long integer(const std::string& s, const std::string& k) {
    const std::string& v = raw(s, k);
    long long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
      fail(s, k, "expected an integer, got '" + v + "'");
    return x;
  }

  std::size_t count(const std::string& s, const std::string& k, long long min) {
    const long long x = integer(s, k);
    if (x < min) fail(s, k, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(x);
  }

  std::vector<double> numbers(const std::string& s, const std::string& k) {
    std::vector<double> out;
    for (const auto& item : split_list(raw(s, k))) {
      double x = 0.0;
      const auto r = std::from_chars(item.data(), item.data() + item.size(), x);
      if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size() ||
          !std::isfinite(x))
        fail(s, k, "expected a comma-separated list of numbers");
      out.push_back(x);
    }
    if (out.empty()) fail(s, k, "empty list");
    return out;
  }

  Range range(const std::string& s, const std::string& k) {
    const auto items = split_list(raw(s, k));
    if (items.size() != 3) fail(s, k, "expected 'start, stop, count'");
    Range r;
    auto num = [&](const std::string& item, double& out) {
      const auto res = std::from_chars(item.data(), item.data() + item.size(), out);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size() || !std::isfinite(out))
        fail(s, k, "expected 'start, stop, count'");
    };
    num(items[0], r.start);
    num(items[1], r.stop);
    long long c = 0;
    const auto res = std::from_chars(items[2].data(), items[2].data() + items[2].size(), c);
    if (res.ec != std::errc() || res.ptr != items[2].data() + items[2].size())
      fail(s, k, "count must be an integer");
    if (c < 2) fail(s, k, "count must be >= 2");
    r.count = static_cast<std::size_t>(c);
    return r;
  }

  /// Keys that were present but never read.
  void reject_unknown() const {
    for (const auto& [s, keys] : sections_)
      for (const auto& [k, e] : keys) {
        auto u = used_.find(s);
        if (u == used_.end() || u->second.count(k) == 0) fail(s, k, "unknown key");
      }
  }

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::map<std::string, std::set<std::string>> used_;
};

inline double unit_factor(Reader& r, const std::string& s, const std::string& k) {
  if (!r.has(s, k)) return 1.0;
  const std::string v = r.raw(s, k);
  if (v == "rad") return 1.0;
  if (v == "T_ho") return constants::oscillator_period;
  r.fail(s, k, "expected 'rad' or 'T_ho', got '" + v + "'");
}

}  // namespace config_detail

inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  using namespace config_detail;
  static const std::set<std::string> known{"physical", "protocol", "numerics", "analysis"};
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string line, current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    std::string t = trim(line);
    const auto comment = t.find_first_of(";#");
    if (comment != std::string::npos) t = trim(t.substr(0, comment));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where, "section header", "missing ']'");
      current = trim(t.substr(1, t.size() - 2));
      if (!known.count(current)) throw ConfigError(where, "[" + current + "]", "unknown section");
      if (sections.count(current)) throw ConfigError(where, "[" + current + "]", "duplicate section");
      sections[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "line", "expected 'key = value'");
    if (current.empty()) throw ConfigError(where, trim(t.substr(0, eq)), "key outside any section");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where, "line", "empty key");
    if (value.empty()) throw ConfigError(where, "[" + current + "] " + key, "empty value");
    auto& sec = sections[current];
    if (sec.count(key)) throw ConfigError(where, "[" + current + "] " + key, "duplicate key");
    sec[key] = {value, lineno};
  }

  Reader r(source, sections);
  RunConfig cfg;
  cfg.source = source;

  if (r.has_section("physical")) {
    const std::string s = "physical";
    PhysicalConfig pc;
    auto need = [&](const std::string& k) {
      if (!r.has(s, k)) throw ConfigError(source, "[physical] " + k, "required");
    };
    for (const char* k : {"atom_mass_amu", "trap_freq_hz", "n1", "q1", "n2", "q2", "rabi_freq_hz"})
      need(k);
    pc.atom_mass = r.number(s, "atom_mass_amu") * constants::atomic_mass_unit;
    pc.trap_freq = constants::two_pi * r.number(s, "trap_freq_hz");
    pc.rydberg_trap_freq = r.has(s, "rydberg_trap_freq_hz")
                               ? constants::two_pi * r.number(s, "rydberg_trap_freq_hz")
                               : pc.trap_freq;
    pc.n1 = static_cast<int>(r.integer(s, "n1"));
    pc.q1 = static_cast<int>(r.integer(s, "q1"));
    pc.n2 = static_cast<int>(r.integer(s, "n2"));
    pc.q2 = static_cast<int>(r.integer(s, "q2"));
    pc.rabi_freq = constants::two_pi * r.number(s, "rabi_freq_hz");
    if (auto w = r.opt_number(s, "lattice_wavelength_nm")) pc.lattice_wavelength = *w * 1e-9;
    try {
      pc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source, "[physical]", e.what());
    }
    cfg.physical = pc;
  }

  {
    const std::string s = "protocol";
    auto& p = cfg.protocol;
    if (auto v = r.opt_number(s, "phi_target")) p.phi_target = *v;
    const double theta_unit = unit_factor(r, s, "theta_units");
    const double dt_unit = unit_factor(r, s, "dt1_units");
    if (r.has(s, "theta") && r.has(s, "theta_range"))
      r.fail(s, "theta_range", "give either theta or theta_range");
    if (r.has(s, "x0") && r.has(s, "x0_range")) r.fail(s, "x0_range", "give either x0 or x0_range");
    if (auto v = r.opt_number(s, "theta")) p.theta = *v * theta_unit;
    if (r.has(s, "theta_range")) {
      Range rg = r.range(s, "theta_range");
      rg.start *= theta_unit;
      rg.stop *= theta_unit;
      p.theta_range = rg;
    }
    p.x0 = r.opt_number(s, "x0");
    if (r.has(s, "x0_range")) p.x0_range = r.range(s, "x0_range");
    auto check_theta = [&](double t, const char* key) {
      if (!(t > 0.0 && t <= constants::pi / 2 + 1e-12))
        r.fail(s, key, "theta must lie in (0, pi/2] rad");
    };
    if (p.theta) check_theta(*p.theta, "theta");
    if (p.theta_range) {
      check_theta(p.theta_range->start, "theta_range");
      check_theta(p.theta_range->stop, "theta_range");
    }
    if (p.x0 && !(*p.x0 > 0.0)) r.fail(s, "x0", "must be positive");
    if (p.x0_range && !(p.x0_range->start > 0.0 && p.x0_range->stop > 0.0))
      r.fail(s, "x0_range", "must be positive");
    if (auto v = r.opt_number(s, "dt1")) {
      if (!(*v > 0.0)) r.fail(s, "dt1", "must be positive");
      p.dt1 = *v * dt_unit;
    }
    if (auto v = r.opt_number(s, "alpha_plus_sq")) {
      if (*v < 0.0) r.fail(s, "alpha_plus_sq", "must be >= 0");
      p.alpha_plus_sq = *v;
    }
    if (auto v = r.opt_number(s, "rabi_over_trap")) {
      if (!(*v > 0.0)) r.fail(s, "rabi_over_trap", "must be positive");
      p.rabi_over_trap = *v;
    }
    if (auto v = r.opt_number(s, "lambda")) {
      if (*v < 0.0) r.fail(s, "lambda", "must be >= 0");
      p.lambda = *v;
    }
    if (r.has(s, "kick_model")) {
      const std::string v = r.raw(s, "kick_model");
      if (v == "full")
        p.kick_model = KickModel::Full;
      else if (v == "ideal")
        p.kick_model = KickModel::Ideal;
      else if (v == "impulse")
        p.kick_model = KickModel::Impulse;
      else
        r.fail(s, "kick_model", "expected full, ideal or impulse");
      if (p.kick_model != KickModel::Full && p.lambda != 0.0)
        r.fail(s, "kick_model", "instantaneous kicks require lambda = 0");
    }
    if (cfg.physical && p.alpha_plus_sq)
      r.fail(s, "alpha_plus_sq", "coupling is derived from [physical]; remove one of them");
    if (cfg.physical && p.rabi_over_trap)
      r.fail(s, "rabi_over_trap", "Rabi frequency is taken from [physical]");
    if (p.dt1 && (p.alpha_plus_sq || cfg.physical))
      r.fail(s, "dt1", "give either dt1 or a coupling, not both");
  }

  {
    const std::string s = "numerics";
    auto& n = cfg.numerics;
    if (r.has(s, "n_points")) n.n_points = r.count(s, "n_points", 1);
    n.half_width = r.opt_number(s, "half_width");
    n.x_min = r.opt_number(s, "x_min");
    n.x_max = r.opt_number(s, "x_max");
    if (r.has(s, "dt")) {
      const double unit = unit_factor(r, s, "dt_units");
      n.dt = r.number(s, "dt") * unit;
    } else if (r.has(s, "dt_units")) {
      unit_factor(r, s, "dt_units");
    }
    if (r.has(s, "kick_steps")) n.kick_steps = r.count(s, "kick_steps", 1);
    if (r.has(s, "n_max")) n.n_max = r.count(s, "n_max", 1);
    if (n.half_width && (n.x_min || n.x_max))
      r.fail(s, "half_width", "give either half_width or x_min/x_max");
    if (n.x_min.has_value() != n.x_max.has_value())
      r.fail(s, n.x_min ? "x_max" : "x_min", "x_min and x_max go together");
    if (n.x_min && cfg.protocol.x0_range)
      r.fail(s, "x_min", "absolute window cannot be combined with x0_range; use half_width");
    if (n.half_width && !(*n.half_width > 0.0)) r.fail(s, "half_width", "must be positive");
    if (n.dt && !(*n.dt > 0.0)) r.fail(s, "dt", "must be positive");
  }

  {
    const std::string s = "analysis";
    auto& a = cfg.analysis;
    if (r.has(s, "mode")) {
      const std::string v = r.raw(s, "mode");
      bool ok = false;
      for (Mode m : {Mode::Gate, Mode::Sweep, Mode::Thermal, Mode::Cycles, Mode::Validity})
        if (v == to_string(m)) {
          a.mode = m;
          ok = true;
        }
      if (!ok) r.fail(s, "mode", "expected gate, sweep, thermal, cycles or validity");
    }
    if (r.has(s, "temperatures")) {
      a.temperatures = r.numbers(s, "temperatures");
      for (double t : a.temperatures)
        if (!(t > 0.0)) r.fail(s, "temperatures", "temperatures must be positive");
    }
    if (r.has(s, "n_cycles")) a.n_cycles = r.count(s, "n_cycles", 1);
    if (r.has(s, "contour_levels")) {
      a.contour_levels = r.numbers(s, "contour_levels");
      for (double l : a.contour_levels)
        if (!(l > 0.0 && l < 1.0)) r.fail(s, "contour_levels", "levels must lie in (0, 1)");
    }
    if (r.has(s, "level")) a.level = r.count(s, "level", 0);
  }

  r.reject_unknown();

  // Grid overrides must give a valid window for every x0 that will be run.
  if (cfg.protocol.x0 || cfg.protocol.x0_range) {
    for (double x0 : cfg.protocol.x0s()) {
      const GridSpec g = cfg.grid_for(x0);
      const std::string field = cfg.numerics.x_min      ? "[numerics] x_min"
                                : cfg.numerics.half_width ? "[numerics] half_width"
                                                          : "[numerics] n_points";
      if (!(g.x_min > 0.0))
        throw ConfigError(source, field, "grid window reaches x <= 0 (x_min = " +
                                             format_number(g.x_min) + ")");
      try {
        g.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(source, field, e.what());
      }
    }
  }
  if (cfg.analysis.level > cfg.numerics.n_max)
    throw ConfigError(source, "[analysis] level", "exceeds [numerics] n_max");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "file", "cannot open");
  return parse_config(in, path);
}

}  // namespace rydkick

#endif  // RYDKICK_CONFIG_HPP
