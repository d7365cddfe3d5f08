#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "jtpol/app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Jahn-Teller molecules in a two-mode circularly polarized cavity"};
  cli.set_version_flag("--version", std::string(JTPOL_VERSION));
  cli.require_subcommand(1);

  std::string config_path;
  auto add = [&](const char* name, const char* help) {
    auto* sub = cli.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file (defaults apply when omitted)");
    return sub;
  };
  auto* vibronic = add("vibronic", "single-molecule level table and bare absorption sticks");
  auto* spectrum = add("spectrum", "polariton spectrum of one (n_ex, j) sector");
  auto* dynamics = add("dynamics", "pulse-driven photon polarization traces");
  auto* validate = add("validate", "run the invariant and oracle suite");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : jtpol::app::kConfigError;
  }

  return jtpol::app::guarded_run(
      [&] {
        const jtpol::RunConfig config = config_path.empty() ? jtpol::RunConfig{} : jtpol::load_config(config_path);
        if (vibronic->parsed()) return jtpol::app::run_vibronic(config, std::cout);
        if (spectrum->parsed()) return jtpol::app::run_spectrum(config, std::cout);
        if (dynamics->parsed()) return jtpol::app::run_dynamics(config, std::cout);
        (void)validate;
        return jtpol::app::run_validate(config, std::cout);
      },
      std::cerr);
}
