#include "eitlab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eitlab/errors.hpp"

namespace eitlab {

namespace {

struct ClassName {
  PatternClass c;
  const char* name;
};

constexpr ClassName kClassNames[] = {
    {PatternClass::monotone_plus, "monotone+"},  {PatternClass::monotone_minus, "monotone-"},
    {PatternClass::mixed, "mixed"},              {PatternClass::checkerboard, "checkerboard"},
    {PatternClass::source_condition, "source-condition"}, {PatternClass::none, "none"}};

double contraction_of(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() ? ((a - b).array() / b.array()).abs().maxCoeff() : 0.0;
}

Eigen::VectorXd to_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json to_array(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void finish(Scenario& s) {
  s.dagger_conductivity();
  s.gamma_conductivity();
  s.xi_dagger = contraction_of(s.gamma, s.gamma_dagger);
  s.xi = contraction_of(s.gamma_dagger, s.gamma);
}

}  // namespace

const char* to_string(PatternClass c) {
  for (const auto& e : kClassNames)
    if (e.c == c) return e.name;
  return "none";
}

PatternClass parse_pattern_class(const std::string& name) {
  for (const auto& e : kClassNames)
    if (name == e.name) return e.c;
  throw InvalidArgument("unknown pattern class '" + name + "'");
}

PatternClass classify(const Eigen::VectorXd& d) {
  if (d.size() == 0 || d.cwiseAbs().maxCoeff() == 0.0) return PatternClass::none;
  if (d.minCoeff() >= 0.0) return PatternClass::monotone_plus;
  if (d.maxCoeff() <= 0.0) return PatternClass::monotone_minus;
  return PatternClass::mixed;
}

Pattern inclusion(const Mesh& mesh, const Eigen::Vector2d& center, double radius, double contrast) {
  if (!(radius >= 0.0)) throw InvalidArgument("radius must be nonnegative");
  Pattern p;
  p.values = Eigen::VectorXd::Zero(mesh.num_triangles());
  p.empty = true;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    if ((mesh.centroid(t) - center).norm() < radius) {
      p.values[t] = contrast;
      p.empty = false;
    }
  }
  return p;
}

Pattern checkerboard(const Mesh& mesh, int block, double amplitude) {
  const int n = mesh.subdivisions();
  if (block < 1 || block > n) throw InvalidArgument("block size must lie in [1, " + std::to_string(n) + "]");
  Pattern p;
  p.values.resize(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector2d c = mesh.centroid(t);
    const int i = std::min(n - 1, static_cast<int>(std::floor(c.x() * n)));
    const int j = std::min(n - 1, static_cast<int>(std::floor(c.y() * n)));
    p.values[t] = ((i / block + j / block) % 2 == 0) ? amplitude : -amplitude;
  }
  p.empty = false;
  return p;
}

nlohmann::json Scenario::to_json() const {
  return {{"name", name},
          {"seed", seed},
          {"recipe", recipe},
          {"gamma_dagger", to_array(gamma_dagger)},
          {"gamma", to_array(gamma)},
          {"lower", lower},
          {"upper", upper},
          {"pattern_class", to_string(pattern_class)},
          {"xi_dagger", xi_dagger},
          {"xi", xi}};
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.name = j.at("name").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.recipe = j.value("recipe", nlohmann::json::object());
    s.gamma_dagger = to_vector(j.at("gamma_dagger"), "gamma_dagger");
    s.gamma = to_vector(j.at("gamma"), "gamma");
    s.lower = j.at("lower").get<double>();
    s.upper = j.at("upper").get<double>();
    s.pattern_class = parse_pattern_class(j.at("pattern_class").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed scenario: ") + e.what());
  }
  if (s.gamma.size() != s.gamma_dagger.size()) throw InvalidArgument("scenario conductivities differ in size");
  finish(s);
  if (j.contains("xi_dagger") && std::abs(j["xi_dagger"].get<double>() - s.xi_dagger) > 1e-12 * (1.0 + s.xi_dagger))
    throw ConsistencyError("recorded xi_dagger does not match the conductivities");
  return s;
}

Scenario random_pair(const Mesh& mesh, std::uint64_t seed, double xi_max, double lower, double upper) {
  if (!(xi_max >= 0.0 && xi_max < 1.0)) throw InvalidArgument("xi_max must lie in [0, 1)");
  if (!(lower > 0.0 && upper >= lower)) throw InvalidArgument("invalid conductivity range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base(lower, upper);
  std::uniform_real_distribution<double> u(-xi_max, xi_max);
  Scenario s;
  s.name = "random_pair";
  s.seed = seed;
  s.recipe = {{"type", "random_pair"}, {"xi_max", xi_max}, {"lower", lower}, {"upper", upper}};
  s.gamma_dagger.resize(mesh.num_triangles());
  s.gamma.resize(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    s.gamma_dagger[t] = base(rng);
    s.gamma[t] = xi_max > 0.0 ? s.gamma_dagger[t] * (1.0 + u(rng)) : s.gamma_dagger[t];
  }
  s.lower = lower * (1.0 - xi_max);
  s.upper = upper * (1.0 + xi_max);
  finish(s);
  s.pattern_class = classify(s.delta());
  return s;
}

Scenario realize(const Mesh& mesh, const nlohmann::json& recipe, std::uint64_t seed) {
  if (!recipe.is_object() || !recipe.contains("type")) throw InvalidArgument("recipe needs a 'type'");
  const std::string type = recipe["type"].get<std::string>();
  try {
    if (type == "random_pair") {
      Scenario s = random_pair(mesh, seed, recipe.at("xi_max").get<double>(), recipe.value("lower", kDefaultLower),
                               recipe.value("upper", kDefaultUpper));
      s.name = recipe.value("name", s.name);
      return s;
    }
    if (type == "explicit") {
      Scenario s;
      s.name = recipe.value("name", std::string("explicit"));
      s.seed = seed;
      s.recipe = recipe;
      s.gamma_dagger = to_vector(recipe.at("gamma_dagger"), "gamma_dagger");
      s.gamma = to_vector(recipe.at("gamma"), "gamma");
      if (s.gamma.size() != mesh.num_triangles() || s.gamma_dagger.size() != mesh.num_triangles())
        throw InvalidArgument("explicit conductivities do not match the mesh");
      s.lower = recipe.value("lower", kDefaultLower);
      s.upper = recipe.value("upper", kDefaultUpper);
      finish(s);
      s.pattern_class = classify(s.delta());
      return s;
    }

    Pattern pattern;
    PatternClass cls = PatternClass::none;
    const double amplitude = recipe.at("amplitude").get<double>();
    if (type == "inclusion") {
      const auto c = recipe.value("center", std::vector<double>{0.5, 0.5});
      if (c.size() != 2) throw InvalidArgument("inclusion center needs two coordinates");
      pattern = inclusion(mesh, {c[0], c[1]}, recipe.value("radius", 0.25), amplitude);
    } else if (type == "checkerboard") {
      pattern = checkerboard(mesh, recipe.value("block", 1), amplitude);
      cls = PatternClass::checkerboard;
    } else {
      throw InvalidArgument("unknown recipe type '" + type + "'");
    }
    if (pattern.empty) throw InvalidArgument("recipe '" + type + "' selects no element");

    Scenario s;
    s.name = recipe.value("name", type);
    s.seed = seed;
    s.recipe = recipe;
    s.lower = recipe.value("lower", kDefaultLower);
    s.upper = recipe.value("upper", kDefaultUpper);
    const Eigen::VectorXd background = Eigen::VectorXd::Constant(mesh.num_triangles(), recipe.value("background", 1.0));
    const std::string perturb = recipe.value("perturb", std::string("gamma"));
    if (perturb == "gamma") {
      s.gamma_dagger = background;
      s.gamma = background + pattern.values;
    } else if (perturb == "dagger") {
      s.gamma_dagger = background + pattern.values;
      s.gamma = background;
    } else {
      throw InvalidArgument("perturb must be 'gamma' or 'dagger'");
    }
    finish(s);
    s.pattern_class = cls == PatternClass::none ? classify(s.delta()) : cls;
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("recipe '" + type + "': " + e.what());
  }
}

}  // namespace eitlab
