#include "eitlab/cli/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "eitlab/errors.hpp"

namespace eitlab::cli {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const int line = node.Mark().is_null() ? 0 : line_of(node);
  throw ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what);
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section) {
  if (!map.IsMap()) fail_at(map, "'" + section + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail_at(kv.first, "unknown key '" + key + "' in " + section);
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out) {
  const YAML::Node node = map[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, std::string("invalid value for '") + key + "'");
  }
}

nlohmann::json to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& item : node) arr.push_back(to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      nlohmann::json obj = nlohmann::json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string text = node.Scalar();
  if (node.Tag() == "!") return text;
  long long i;
  double d;
  bool b;
  if (YAML::convert<long long>::decode(node, i)) return i;
  if (YAML::convert<double>::decode(node, d)) return d;
  if (YAML::convert<bool>::decode(node, b)) return b;
  return text;
}

void parse_scenarios(const YAML::Node& list, RunConfig& cfg) {
  if (!list.IsSequence()) fail_at(list, "'scenarios' must be a list");
  cfg.scenarios.clear();
  for (const auto& item : list) {
    if (!item.IsMap() || !item["type"]) fail_at(item, "every scenario needs a 'type'");
    ScenarioSpec spec;
    spec.line = line_of(item);
    spec.recipe = to_json(item);
    if (spec.recipe.contains("count")) {
      if (!spec.recipe["count"].is_number_integer() || spec.recipe["count"].get<long long>() < 1)
        fail_at(item["count"], "'count' must be a positive integer");
      spec.count = spec.recipe["count"].get<int>();
      spec.recipe.erase("count");
    }
    static const std::set<std::string> types{"random_pair", "inclusion", "checkerboard", "explicit", "file"};
    if (!spec.recipe["type"].is_string() || !types.count(spec.recipe["type"].get<std::string>()))
      fail_at(item["type"], "unknown scenario type");
    if (spec.recipe["type"] == "file" && !(spec.recipe.contains("path") && spec.recipe["path"].is_string()))
      fail_at(item, "file scenarios need a 'path'");
    cfg.scenarios.push_back(std::move(spec));
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json scen = nlohmann::json::array();
  for (const auto& s : scenarios) scen.push_back({{"recipe", s.recipe}, {"count", s.count}});
  return {{"mesh_n", mesh_n},
          {"basis", {{"K", basis_K}, {"family", to_string(basis_family)}}},
          {"seed", seed},
          {"tolerance",
           {{"loewner", tol.loewner},
            {"galerkin", tol.galerkin},
            {"resolvent", tol.resolvent},
            {"projector", tol.projector},
            {"contraction_margin", tol.contraction_margin}}},
          {"alpha_lower", alpha_lower},
          {"eta_targets", eta_targets},
          {"projector_fields", projector_fields},
          {"scenarios", scen},
          {"tcc", {{"amplitude_fractions", tcc.amplitude_fractions}, {"c1", tcc.c1}}},
          {"landweber",
           {{"mesh_n", landweber.mesh_n},
            {"K", landweber.basis_K},
            {"max_iter", landweber.max_iter},
            {"tau", landweber.tau},
            {"noise", landweber.noise},
            {"rel_tol", landweber.rel_tol},
            {"step_margin", landweber.step_margin},
            {"thin", landweber.thin},
            {"track_eta", landweber.track_eta},
            {"inclusion",
             {{"center", landweber.inclusion_center},
              {"radius", landweber.inclusion_radius},
              {"amplitude", landweber.inclusion_amplitude}}},
            {"oscillation", {{"block", landweber.oscillation_block}, {"amplitude", landweber.oscillation_amplitude}}}}}};
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  RunConfig cfg;
  cfg.scenarios = {{{{"type", "random_pair"}, {"xi_max", 0.9}}, 50, 0}};
  if (!root || root.IsNull()) return cfg;
  check_keys(root,
             {"mesh_n", "basis", "seed", "jobs", "output", "tolerance", "alpha_lower", "eta_targets",
              "projector_fields", "scenarios", "tcc", "landweber"},
             "config");

  read(root, "mesh_n", cfg.mesh_n);
  read(root, "seed", cfg.seed);
  read(root, "jobs", cfg.jobs);
  read(root, "alpha_lower", cfg.alpha_lower);
  read(root, "eta_targets", cfg.eta_targets);
  read(root, "projector_fields", cfg.projector_fields);
  if (const auto basis = root["basis"]) {
    check_keys(basis, {"K", "family"}, "basis");
    read(basis, "K", cfg.basis_K);
    if (basis["family"]) {
      try {
        cfg.basis_family = parse_basis_family(basis["family"].as<std::string>());
      } catch (const Error& e) {
        fail_at(basis["family"], e.what());
      }
    }
  }
  if (const auto out = root["output"]) {
    check_keys(out, {"dir"}, "output");
    read(out, "dir", cfg.out_dir);
  }
  if (const auto tol = root["tolerance"]) {
    check_keys(tol, {"loewner", "galerkin", "resolvent", "projector", "contraction_margin"}, "tolerance");
    read(tol, "loewner", cfg.tol.loewner);
    read(tol, "galerkin", cfg.tol.galerkin);
    read(tol, "resolvent", cfg.tol.resolvent);
    read(tol, "projector", cfg.tol.projector);
    read(tol, "contraction_margin", cfg.tol.contraction_margin);
  }
  if (const auto list = root["scenarios"]) parse_scenarios(list, cfg);
  if (const auto tcc = root["tcc"]) {
    check_keys(tcc, {"amplitude_fractions", "c1"}, "tcc");
    read(tcc, "amplitude_fractions", cfg.tcc.amplitude_fractions);
    read(tcc, "c1", cfg.tcc.c1);
  }
  if (const auto lw = root["landweber"]) {
    check_keys(lw, {"mesh_n", "K", "max_iter", "tau", "noise", "rel_tol", "step_margin", "thin", "track_eta",
                    "inclusion", "oscillation"},
               "landweber");
    auto& l = cfg.landweber;
    read(lw, "mesh_n", l.mesh_n);
    read(lw, "K", l.basis_K);
    read(lw, "max_iter", l.max_iter);
    read(lw, "tau", l.tau);
    read(lw, "noise", l.noise);
    read(lw, "rel_tol", l.rel_tol);
    read(lw, "step_margin", l.step_margin);
    read(lw, "thin", l.thin);
    read(lw, "track_eta", l.track_eta);
    if (const auto inc = lw["inclusion"]) {
      check_keys(inc, {"center", "radius", "amplitude"}, "landweber.inclusion");
      read(inc, "center", l.inclusion_center);
      read(inc, "radius", l.inclusion_radius);
      read(inc, "amplitude", l.inclusion_amplitude);
      if (l.inclusion_center.size() != 2) fail_at(inc["center"], "center needs two coordinates");
    }
    if (const auto osc = lw["oscillation"]) {
      check_keys(osc, {"block", "amplitude"}, "landweber.oscillation");
      read(osc, "block", l.oscillation_block);
      read(osc, "amplitude", l.oscillation_amplitude);
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  try {
    cfg = parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (auto& spec : cfg.scenarios) {
    if (spec.recipe["type"] != "file") continue;
    std::filesystem::path file(spec.recipe["path"].get<std::string>());
    if (file.is_relative()) file = base / file;
    if (!std::filesystem::exists(file))
      throw ConfigError(path + ": line " + std::to_string(spec.line) + ": scenario file '" + file.string() +
                        "' not found");
    spec.recipe["path"] = file.string();
  }
  return cfg;
}

void apply_overrides(RunConfig& config, const Overrides& overrides) {
  if (const char* env = std::getenv("EITLAB_OUT"); env && *env) config.out_dir = env;
  if (const char* env = std::getenv("EITLAB_JOBS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("EITLAB_JOBS must be a positive integer");
    config.jobs = static_cast<int>(v);
  }
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.jobs) config.jobs = *overrides.jobs;
  if (overrides.tol) config.tol.loewner = *overrides.tol;
  validate(config);
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.mesh_n >= 1, "mesh_n must be >= 1");
  require(c.basis_K >= 1 && c.basis_K <= 4 * c.mesh_n - 1,
          "basis K must lie in [1, 4*mesh_n - 1] = [1, " + std::to_string(4 * c.mesh_n - 1) + "]");
  require(c.jobs >= 1, "jobs must be >= 1");
  require(c.tol.loewner >= 0 && c.tol.galerkin >= 0 && c.tol.resolvent >= 0 && c.tol.projector >= 0,
          "tolerances must be nonnegative");
  require(c.tol.contraction_margin > 0 && c.tol.contraction_margin < 1, "contraction_margin must lie in (0, 1)");
  require(c.alpha_lower > 0, "alpha_lower must be positive");
  for (double eta : c.eta_targets) require(eta > 0 && eta <= 1, "eta targets must lie in (0, 1]");
  for (double f : c.tcc.amplitude_fractions) require(f > 0, "amplitude fractions must be positive");
  require(c.tcc.c1 > 0, "tcc.c1 must be positive");
  require(c.projector_fields >= 0, "projector_fields must be >= 0");
  const auto& l = c.landweber;
  require(l.mesh_n >= 1 && l.basis_K >= 1 && l.basis_K <= 4 * l.mesh_n - 1, "landweber mesh/basis sizes invalid");
  require(l.max_iter >= 0 && l.thin >= 1, "landweber iteration limits invalid");
  require(l.tau > 1, "landweber tau must exceed 1");
  require(l.noise >= 0 && l.rel_tol >= 0, "landweber noise and rel_tol must be nonnegative");
  require(l.step_margin > 0 && l.step_margin <= 1, "landweber step_margin must lie in (0, 1]");
  require(l.oscillation_block >= 1 && l.oscillation_block <= l.mesh_n, "landweber oscillation block invalid");
}

}  // namespace eitlab::cli
