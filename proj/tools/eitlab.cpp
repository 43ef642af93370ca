#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eitlab/cli/commands.hpp"
#include "eitlab/cli/config.hpp"
#include "eitlab/errors.hpp"

using namespace eitlab::cli;

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for the linearized EIT forward map"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  double tol = 0.0;
  std::string which = "all";

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "base seed");
    cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", tol, "Loewner certificate tolerance")->check(CLI::NonNegativeNumber);
  };
  auto* verify = app.add_subcommand("verify-identities", "Galerkin, resolvent and projector identities");
  auto* certify = app.add_subcommand("certify", "Loewner certificates of the remainder bounds");
  auto* tcc = app.add_subcommand("tcc-scan", "cone-condition gates over amplitude sweeps");
  auto* landweber = app.add_subcommand("landweber", "monotone and oscillatory Landweber runs");
  for (auto* cmd : {verify, certify, tcc, landweber}) common(cmd);
  certify->add_option("--which", which, "main1|util|conmo|babel0|theorem3|all")
      ->check(CLI::IsMember({"main1", "util", "conmo", "babel0", "theorem3", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = config_path.empty() ? parse_config("") : load_config(config_path);
    Overrides ov;
    auto* cmd = app.get_subcommands().front();
    if (cmd->count("--out")) ov.out_dir = out_dir;
    if (cmd->count("--seed")) ov.seed = seed;
    if (cmd->count("--jobs")) ov.jobs = jobs;
    if (cmd->count("--tol")) ov.tol = tol;
    apply_overrides(config, ov);

    CommandResult result;
    if (cmd == verify) result = run_verify_identities(config, std::cerr);
    else if (cmd == certify) result = run_certify(config, which, std::cerr);
    else if (cmd == tcc) result = run_tcc_scan(config, std::cerr);
    else result = run_landweber(config, std::cerr);
    return result.exit_code;
  } catch (const eitlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const eitlab::Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return kExitFailure;
  }
}
