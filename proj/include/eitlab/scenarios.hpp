#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "eitlab/fem.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

inline constexpr double kDefaultLower = 0.5;
inline constexpr double kDefaultUpper = 2.0;

enum class PatternClass { monotone_plus, monotone_minus, mixed, checkerboard, source_condition, none };

const char* to_string(PatternClass c);
PatternClass parse_pattern_class(const std::string& name);
/// monotone_plus / monotone_minus / mixed from the sign of d, none for d = 0.
PatternClass classify(const Eigen::VectorXd& d);

struct Pattern {
  Eigen::VectorXd values;
  bool empty = false;  ///< no element selected
};

/// contrast * indicator of the elements whose centroid lies strictly inside the disk.
Pattern inclusion(const Mesh& mesh, const Eigen::Vector2d& center, double radius, double contrast);

/// +-amplitude on block x block groups of grid cells. Throws InvalidArgument
/// unless 1 <= block <= n.
Pattern checkerboard(const Mesh& mesh, int block, double amplitude);

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  nlohmann::json recipe;
  Eigen::VectorXd gamma_dagger;
  Eigen::VectorXd gamma;
  double lower = kDefaultLower;
  double upper = kDefaultUpper;
  PatternClass pattern_class = PatternClass::none;
  double xi_dagger = 0;
  double xi = 0;

  Conductivity dagger_conductivity() const { return Conductivity(gamma_dagger, lower, upper); }
  Conductivity gamma_conductivity() const { return Conductivity(gamma, lower, upper); }
  Eigen::VectorXd delta() const { return gamma - gamma_dagger; }

  nlohmann::json to_json() const;
  /// Validates both conductivities and the recorded contraction parameters.
  static Scenario from_json(const nlohmann::json& j);
};

/// gamma_dagger uniform in [lower, upper], gamma = gamma_dagger (1 + u), u uniform
/// in [-xi_max, xi_max]. Bounds widen to [lower (1 - xi_max), upper (1 + xi_max)].
Scenario random_pair(const Mesh& mesh, std::uint64_t seed, double xi_max, double lower = kDefaultLower,
                     double upper = kDefaultUpper);

/// Realizes a recipe object. Supported types:
///   random_pair  {xi_max, lower?, upper?}
///   inclusion    {center, radius, amplitude, background?}
///   checkerboard {block, amplitude, background?}
///   explicit     {gamma_dagger, gamma, lower?, upper?}
/// Perturbation recipes set gamma_dagger = background and gamma = gamma_dagger + pattern.
Scenario realize(const Mesh& mesh, const nlohmann::json& recipe, std::uint64_t seed);

}  // namespace eitlab
