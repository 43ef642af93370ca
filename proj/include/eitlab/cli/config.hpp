#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eitlab/operator.hpp"

namespace eitlab::cli {

struct ScenarioSpec {
  nlohmann::json recipe;
  int count = 1;
  int line = 0;  ///< 1-based line in the config file, 0 for built-in defaults
};

struct Tolerances {
  double loewner = 1e-8;
  double galerkin = 1e-11;
  double resolvent = 1e-9;
  double projector = 1e-10;
  double contraction_margin = 0.95;
};

struct TccScanConfig {
  std::vector<double> amplitude_fractions{0.25, 0.5, 1.0};
  double c1 = 0.2;
};

struct LandweberConfig {
  int mesh_n = 8;
  int basis_K = 4;
  int max_iter = 5000;
  double tau = 1.5;
  double noise = 0.0;
  double rel_tol = 1e-8;
  double step_margin = 0.9;
  int thin = 10;
  bool track_eta = true;
  std::vector<double> inclusion_center{0.5, 0.5};
  double inclusion_radius = 0.25;
  double inclusion_amplitude = 0.05;
  int oscillation_block = 1;
  double oscillation_amplitude = 0.05;
};

struct RunConfig {
  int mesh_n = 8;
  int basis_K = 8;
  BasisFamily basis_family = BasisFamily::trigonometric;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = "out";
  Tolerances tol;
  double alpha_lower = 0.5;
  std::vector<double> eta_targets{0.25, 0.5, 1.0};
  int projector_fields = 20;
  std::vector<ScenarioSpec> scenarios;
  TccScanConfig tcc;
  LandweberConfig landweber;

  /// Everything that influences results; out_dir and jobs are excluded.
  nlohmann::json to_json() const;
  /// FNV-1a 64 of to_json().dump(), as 16 hex digits.
  std::string hash() const;
};

/// Parses YAML text. Throws ConfigError with "line N" context on malformed input,
/// unknown keys, wrong types or invalid values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<double> tol;
};

/// Environment (EITLAB_OUT, EITLAB_JOBS) first, then explicit overrides.
void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Validates cross-field constraints (K against mesh_n, ranges). Throws ConfigError.
void validate(const RunConfig& config);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace eitlab::cli
