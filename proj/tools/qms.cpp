// qms: verify superintegrability claims and simulate catalog systems.
//
//   qms verify <cfg>     involution table, rank certificate, extra integrals
//   qms simulate <cfg>   trajectory with monitor drift and closure report
//   qms catalog          list the system families
//
// Global flags: --seed, --out <dir> (default $QMS_OUT_DIR or .), --threads,
// --float-format decimal|hex.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qms/cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = qms::cli;
  CLI::App app{"Quasi-maximally superintegrable systems: verification and simulation"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 1;
  std::string float_format = "decimal";
  app.add_option("--seed", seed, "Override the sampling seed of the config");
  app.add_option("--out", out_dir, "Output directory (default: $QMS_OUT_DIR or .)");
  app.add_option("--threads", threads, "Worker threads for sample points")->check(CLI::Range(1u, 256u));
  app.add_option("--float-format", float_format, "Float encoding in output files")
      ->check(CLI::IsMember({"decimal", "hex"}));

  std::string config;
  auto* verify = app.add_subcommand("verify", "Check brackets, independence and extra integrals");
  verify->add_option("config", config, "Experiment config file")->required();
  auto* simulate = app.add_subcommand("simulate", "Integrate the [simulation] block of a config");
  simulate->add_option("config", config, "Experiment config file")->required();
  app.add_subcommand("catalog", "List the system families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitPass : cli::kExitUsage;
  }

  cli::RunOptions opt;
  opt.seed = seed;
  opt.out_dir = cli::resolve_out_dir(out_dir);
  opt.threads = threads;
  opt.float_format = cli::parse_float_format(float_format);

  if (*verify) return cli::cmd_verify(config, opt, std::cout, std::cerr);
  if (*simulate) return cli::cmd_simulate(config, opt, std::cout, std::cerr);
  return cli::cmd_catalog(std::cout);
}
