// rydkick: gate, sweep, thermal, cycles and validity runs from a config file.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "rydkick/commands.hpp"
#include "rydkick/config.hpp"

int main(int argc, char** argv) {
  using namespace rydkick;
  CLI::App app{"Three-kick Rydberg phase-gate simulator"};
  app.require_subcommand(1);

  std::string config_path;
  CommandOptions opt;
  std::string out_dir = ".";
  unsigned jobs = default_jobs();
  bool dump = false;

  struct Sub {
    const char* name;
    const char* help;
    Mode mode;
  };
  const Sub subs[] = {
      {"gate", "single gate run from one Fock level", Mode::Gate},
      {"sweep", "fidelity surface over theta_range x x0_range", Mode::Sweep},
      {"thermal", "thermal fidelity per (theta, x0)", Mode::Thermal},
      {"cycles", "entropy and fidelity after N gate cycles", Mode::Cycles},
      {"validity", "approximation-validity margins", Mode::Validity},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    if (s.mode == Mode::Gate) sub->add_flag("--dump-wavefunction", dump, "write wavefunction.csv");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Mode mode = Mode::Gate;
  for (const auto& s : subs)
    if (app.got_subcommand(s.name)) mode = s.mode;
  opt.out_dir = out_dir;
  opt.jobs = jobs;
  opt.dump_wavefunction = dump;

  try {
    const RunConfig cfg = load_config(config_path);
    return run_command(mode, cfg, opt, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
