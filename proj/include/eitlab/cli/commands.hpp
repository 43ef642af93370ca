#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eitlab/cli/config.hpp"

namespace eitlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct CommandResult {
  int exit_code = kExitOk;
  int rows = 0;
  int failures = 0;
  int skipped = 0;
  std::vector<std::string> files;  ///< written outputs, relative to out_dir
};

/// Expanded scenario entry: config entry, replica and derived seed.
struct ScenarioJob {
  std::string name;
  nlohmann::json recipe;
  std::uint64_t seed = 0;
  int line = 0;
};

std::vector<ScenarioJob> expand_scenarios(const RunConfig& config);

/// splitmix64 finalizer, used to derive per-scenario seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Galerkin cross-check, resolvent identity and projector properties per scenario.
CommandResult run_verify_identities(const RunConfig& config, std::ostream& log);

/// `which` is one of main1, util, conmo, babel0, theorem3, all. Throws ConfigError otherwise.
CommandResult run_certify(const RunConfig& config, const std::string& which, std::ostream& log);

/// Amplitude sweeps of the cone-condition gates per scenario and eta target.
CommandResult run_tcc_scan(const RunConfig& config, std::ostream& log);

/// Monotone and oscillatory starts on the configured inclusion.
CommandResult run_landweber(const RunConfig& config, std::ostream& log);

/// %.17g
std::string format_double(double v);

}  // namespace eitlab::cli
