// sddvir: equilibria, hypothesis checks, simulation and stability certification from an
// INI config file.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sddvir/commands.hpp"
#include "sddvir/config.hpp"
#include "sddvir/errors.hpp"

namespace {

struct CommandArgs {
  std::string config;
  std::string out;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, CommandArgs& args,
                      bool with_out) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", args.config, "INI config file")->required()->check(CLI::ExistingFile);
  if (with_out) sub->add_option("--out", args.out, "output directory (default: [output] dir)");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-diffusion virus model with state-dependent delay"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string level = "warn";
  app.add_option("--seed", seed, "seed for random perturbation directions");
  app.add_option("--log-level", level, "log verbosity")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  CommandArgs args;
  CLI::App* simulate = add_command(app, "simulate", "integrate and write trajectory.csv, summary.jsonl", args, true);
  CLI::App* equilibria = add_command(app, "equilibria", "write equilibria.csv", args, true);
  CLI::App* hypotheses = add_command(app, "check-hypotheses", "sample the incidence hypotheses", args, false);
  CLI::App* certify = add_command(app, "certify", "perturb interior equilibria and write certify.csv", args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("sddvir"));
  spdlog::set_level(spdlog::level::from_str(level));

  sddvir::RunConfig cfg;
  try {
    cfg = sddvir::load_config(args.config);
  } catch (const sddvir::ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << msg << '\n';
    return 1;
  }
  if (seed) cfg.seed = *seed;
  const std::filesystem::path out = args.out.empty() ? cfg.output.dir : std::filesystem::path(args.out);

  try {
    if (*simulate) return sddvir::cmd_simulate(cfg, out, std::cout);
    if (*equilibria) return sddvir::cmd_equilibria(cfg, out, std::cout);
    if (*hypotheses) return sddvir::cmd_check_hypotheses(cfg, std::cout);
    if (*certify) return sddvir::cmd_certify(cfg, out, std::cout);
  } catch (const sddvir::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
