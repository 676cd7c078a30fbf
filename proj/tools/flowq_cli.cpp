#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flowq/harness/config.hpp"
#include "flowq/harness/runners.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> oracle_check;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", f.seed, "overrides the config seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--oracle-check", f.oracle_check, "compare against classical oracles")
      ->check(CLI::IsMember({"on", "off"}));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace flowq::harness;
  CLI::App app{"flowq: quantum fluid-simulation experiments"};
  app.set_version_flag("--version", std::string(FLOWQ_VERSION));
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  auto bind = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_flags(cmd, flags);
    cmd->callback([&chosen, name] { chosen = name; });
  };
  bind("run", "run whichever algorithm the config names");
  bind("encode", "amplitude, basis, basis-to-amplitude and block encodings");
  bind("qae", "quantum amplitude estimation");
  bind("integrate", "quantum-integration ODE/PDE solver");
  bind("copies", "interacting-copies nonlinear maps");
  bind("qade", "annealing-based differential equation solver");
  bind("qrk", "annealing-based Runge-Kutta step");
  bind("qlbm", "quantum lattice Boltzmann (D1Q2)");
  bind("sweep", "parameter grid over another algorithm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitSchema;
  }

  try {
    ExperimentConfig cfg = load_config(flags.config);
    if (chosen != "run" && chosen != cfg.algorithm)
      throw SchemaError("subcommand '" + chosen + "' does not match config algorithm '" + cfg.algorithm + "'");
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.out) cfg.out_dir = *flags.out;
    if (flags.oracle_check) cfg.oracle_check = *flags.oracle_check == "on";
    const int rc = execute(cfg, std::cerr);
    if (rc == kExitOk) std::cout << "wrote " << cfg.out_dir << "/report.json and data.csv\n";
    return rc;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  }
}
