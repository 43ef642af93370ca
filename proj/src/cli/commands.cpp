#include "eitlab/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

#include "eitlab/errors.hpp"
#include "eitlab/landweber.hpp"
#include "eitlab/loewner.hpp"
#include "eitlab/parallel.hpp"
#include "eitlab/scenarios.hpp"
#include "eitlab/tcc.hpp"

namespace eitlab::cli {

namespace fs = std::filesystem;

namespace {

using Row = std::vector<std::string>;

std::string cell(double v) { return format_double(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(const std::string& v) { return v; }
std::string cell(const char* v) { return v; }

template <class... Ts>
Row row(const Ts&... values) {
  return Row{cell(values)...};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv(const fs::path& path, const Row& header, const std::vector<Row>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  auto line = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_escape(r[i]);
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path prepare_out(const RunConfig& config) {
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + config.out_dir + "': " + ec.message());
  return dir;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

struct Setup {
  Mesh mesh;
  BoundaryBasis basis;
};

Setup make_setup(int n, int K, BasisFamily family) {
  Mesh mesh = Mesh::structured(n);
  try {
    BoundaryBasis basis = BoundaryBasis::build(mesh, K, family);
    return {std::move(mesh), std::move(basis)};
  } catch (const BasisRankError& e) {
    throw ConfigError(std::string("basis K = ") + std::to_string(K) + " is not supported on mesh n = " +
                      std::to_string(n) + ": " + e.what());
  }
}

Scenario realize_job(const Mesh& mesh, const ScenarioJob& job) {
  if (job.recipe.value("type", std::string()) == "file") {
    const std::string path = job.recipe.at("path").get<std::string>();
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open scenario file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("scenario file '" + path + "': " + e.what());
    }
    Scenario s = Scenario::from_json(j);
    if (s.gamma.size() != mesh.num_triangles())
      throw InvalidArgument("scenario file '" + path + "' does not match the mesh");
    return s;
  }
  Scenario s = realize(mesh, job.recipe, job.seed);
  s.name = job.name;
  return s;
}

std::string error_kind(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->kind();
  return "error";
}

struct Outcome {
  std::vector<Row> rows;
  int failures = 0;
  int skipped = 0;
};

void gather(std::vector<Outcome>& parts, std::vector<Row>& rows, CommandResult& result) {
  for (auto& p : parts) {
    result.failures += p.failures;
    result.skipped += p.skipped;
    for (auto& r : p.rows) rows.push_back(std::move(r));
  }
  result.rows = static_cast<int>(rows.size());
  result.exit_code = result.failures ? kExitFailure : kExitOk;
}

void finish_run(const RunConfig& config, const fs::path& dir, const std::string& command, CommandResult& result,
                std::ostream& log, nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json j = {{"command", command},
                      {"config_hash", config.hash()},
                      {"seed", config.seed},
                      {"config", config.to_json()},
                      {"rows", result.rows},
                      {"failures", result.failures},
                      {"skipped", result.skipped},
                      {"exit_code", result.exit_code}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  const std::string name = "run_" + command + ".json";
  write_json(dir / name, j);
  result.files.push_back(name);
  log << "[" << command << "] " << result.rows << " rows, " << result.failures << " failures, " << result.skipped
      << " skipped; outputs in " << dir.string() << "\n";
}

// ---- verify-identities ----

const Row kVerifyHeader{"config_hash", "seed", "scenario", "mesh_n", "K", "check",
                        "value", "tol", "pass", "status", "error_kind", "message"};

Outcome verify_one(const RunConfig& config, const Setup& setup, const ScenarioJob& job, const std::string& hash) {
  Outcome out;
  const int n = config.mesh_n, K = config.basis_K;
  auto add = [&](const std::string& check, double value, double tol, bool pass, const std::string& status,
                 const std::string& kind = "", const std::string& message = "") {
    out.rows.push_back(row(hash, job.seed, job.name, n, K, check, value, tol, pass, status, kind, message));
    if (!pass) ++out.failures;
    if (status == "skipped") ++out.skipped;
  };
  auto fail = [&](const std::string& check, const std::exception& e) {
    add(check, std::numeric_limits<double>::quiet_NaN(), 0.0, false, "error", error_kind(e), e.what());
  };

  Scenario s;
  try {
    s = realize_job(setup.mesh, job);
  } catch (const std::exception& e) {
    fail("realize", e);
    return out;
  }
  try {
    const Conductivity g = s.gamma_conductivity();
    const Conductivity gd = s.dagger_conductivity();
    const ForwardSolution sg = ForwardSolution::compute(setup.mesh, setup.basis, g);
    const ForwardSolution sd = ForwardSolution::compute(setup.mesh, setup.basis, gd);
    const double mismatch = galerkin_mismatch(sg, sd);
    add("galerkin", mismatch, config.tol.galerkin, mismatch <= config.tol.galerkin, "checked");

    const double margin = config.tol.contraction_margin;
    if (s.xi_dagger <= margin) {
      const Eigen::VectorXd data = setup.basis.traces.rowwise().sum();
      const double err = resolvent_identity_check(setup.mesh, g, gd, data, margin);
      add("resolvent", err, config.tol.resolvent, err <= config.tol.resolvent, "checked");
    } else {
      add("resolvent", s.xi_dagger, margin, true, "skipped", "", "xi_dagger above contraction margin");
    }

    const ProjectorReport p = projector_checks(setup.mesh, gd, config.projector_fields, job.seed);
    const double tol = config.tol.projector;
    add("projector_idempotence", p.idempotence, tol, p.idempotence <= tol, "checked");
    add("projector_self_adjointness", p.self_adjointness, tol, p.self_adjointness <= tol, "checked");
    if (config.projector_fields > 0)
      add("projector_annihilation", p.annihilation, tol, p.annihilation <= tol, "checked");
    add("projector_positivity", p.positivity, tol, p.positivity >= -tol, "checked");
  } catch (const std::exception& e) {
    fail("identities", e);
  }
  return out;
}

// ---- certify ----

const Row kCertifyHeader{"config_hash", "seed", "scenario", "mesh_n", "K", "set", "inequality",
                         "lambda_min_gap", "scale", "tol", "pass", "xi_dagger", "error_kind", "message"};

struct CertifyOutcome : Outcome {
  double ratio_x1 = std::numeric_limits<double>::quiet_NaN();
  double ratio_x2 = std::numeric_limits<double>::quiet_NaN();
};

CertifyOutcome certify_one(const RunConfig& config, const Setup& setup, const ScenarioJob& job,
                           const std::vector<std::string>& sets, const std::string& hash) {
  CertifyOutcome out;
  const int n = config.mesh_n, K = config.basis_K;
  const double tol = config.tol.loewner;
  double xi_dagger = std::numeric_limits<double>::quiet_NaN();
  auto add_cert = [&](const std::string& set, const LoewnerCertificate& c) {
    out.rows.push_back(row(hash, job.seed, job.name, n, K, set, c.inequality(), c.lambda_min_gap, c.scale,
                           c.tolerance, c.pass, xi_dagger, "", ""));
    if (!c.pass) ++out.failures;
  };
  auto add_norm = [&](const std::string& set, const std::string& what, double lhs, double rhs, bool pass) {
    out.rows.push_back(row(hash, job.seed, job.name, n, K, set, what, rhs - lhs, rhs, tol, pass, xi_dagger, "", ""));
    if (!pass) ++out.failures;
  };
  auto add_error = [&](const std::string& set, const std::exception& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.rows.push_back(
        row(hash, job.seed, job.name, n, K, set, "", nan, nan, tol, false, xi_dagger, error_kind(e), e.what()));
    ++out.failures;
  };

  std::unique_ptr<ConductivityPair> pair;
  try {
    const Scenario s = realize_job(setup.mesh, job);
    pair = std::make_unique<ConductivityPair>(setup.mesh, setup.basis, s.gamma_conductivity(),
                                              s.dagger_conductivity());
    xi_dagger = pair->xi_dagger();
  } catch (const std::exception& e) {
    add_error("realize", e);
    return out;
  }

  for (const auto& set : sets) {
    try {
      if (set == "main1") {
        for (const auto& c : certify_main1(*pair, tol)) add_cert(set, c);
      } else if (set == "util") {
        const UtilCertificates u = certify_util(*pair, tol);
        add_cert(set, u.util1);
        add_cert(set, u.util2);
        add_cert(set, u.util1_sharper);
      } else if (set == "conmo") {
        for (const auto& c : certify_conmo(*pair, tol)) add_cert(set, c);
      } else if (set == "babel0") {
        const Babel0Certificates b = certify_babel0(*pair, tol);
        add_cert(set, b.lower);
        add_cert(set, b.upper);
      } else if (set == "theorem3") {
        const Theorem3Report r = certify_theorem3(*pair, tol);
        add_norm(set, "||B||_HS <= ||F'[gamma](d^2/gamma_dagger)||_HS", r.remainder_hs, r.bound_hs, r.mainest1_pass);
        add_norm(set, "||B||_2 <= ||F'[gamma](d^2/gamma_dagger)||_2", r.remainder_spectral, r.bound_spectral,
                 r.mainest1_spectral_pass);
        out.ratio_x1 = r.ratio_x1;
        out.ratio_x2 = r.ratio_x2;
      }
    } catch (const std::exception& e) {
      add_error(set, e);
    }
  }
  return out;
}

// ---- tcc-scan ----

const Row kTccHeader{"config_hash", "seed",         "scenario",       "mesh_n",        "K",
                     "class",       "eta",          "fraction",       "amplitude",     "alpha",
                     "theta",       "xi_dagger",    "eta_stc_gamma",  "eta_stc_dagger", "eta_wtc",
                     "zeta",        "mjmi_holds",   "mjmi1_gate",     "mjmi_sharp",    "gate_fir",
                     "gate_fir1",   "gate_final",   "within_theta",   "guarantee",     "pass",
                     "status",      "error_kind",   "message"};

Outcome tcc_one(const RunConfig& config, const Setup& setup, const ScenarioJob& job, const std::string& hash,
                std::ostream& log, std::mutex& log_guard) {
  Outcome out;
  const int n = config.mesh_n, K = config.basis_K;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto add_error = [&](const std::string& cls, double eta, double fraction, const std::string& status,
                       const std::exception& e) {
    const bool skipped = status == "skipped";
    out.rows.push_back(row(hash, job.seed, job.name, n, K, cls, eta, fraction, nan, nan, nan, nan, nan, nan, nan,
                           nan, false, false, false, false, false, false, false, skipped, skipped, status,
                           error_kind(e), e.what()));
    if (skipped) {
      ++out.skipped;
      std::lock_guard<std::mutex> lock(log_guard);
      log << "[tcc-scan] skipped " << job.name << " (eta " << eta << ", fraction " << fraction << "): " << e.what()
          << "\n";
    } else {
      ++out.failures;
    }
  };

  Scenario s;
  try {
    s = realize_job(setup.mesh, job);
  } catch (const std::exception& e) {
    add_error("none", nan, nan, "error", e);
    return out;
  }
  const Eigen::VectorXd delta = s.delta();
  const double size = delta.size() ? delta.cwiseAbs().maxCoeff() : 0.0;
  if (!(size > 0.0)) {
    add_error("none", nan, nan, "skipped", DegeneratePair("zero perturbation"));
    return out;
  }
  const Eigen::VectorXd d = delta / size;
  const PatternClass cls = classify(d);
  const bool monotone = cls == PatternClass::monotone_plus || cls == PatternClass::monotone_minus;
  const std::string cls_name = monotone ? to_string(cls) : "mixed";
  const double min_dagger = s.gamma_dagger.minCoeff();

  for (double eta : config.eta_targets) {
    // the lower bound must also hold for gamma after a full-radius step down
    double alpha0 = std::min(config.alpha_lower, min_dagger);
    if (d.minCoeff() < 0.0) alpha0 = std::min(alpha0, min_dagger * (4.0 + eta) / (4.0 + 2.0 * eta));
    for (double fraction : config.tcc.amplitude_fractions) {
      try {
        const double amplitude =
            fraction * (monotone ? monotone_radius(d, eta, alpha0) : theta_eta(eta, alpha0));
        const Eigen::VectorXd g = s.gamma_dagger + amplitude * d;
        const double lower = std::min(s.lower, g.minCoeff());
        const double upper = std::max(s.upper, g.maxCoeff());
        const ConductivityPair pair(setup.mesh, setup.basis, Conductivity(g, lower, upper),
                                    Conductivity(s.gamma_dagger, lower, upper));
        const double alpha = std::min(alpha0, g.minCoeff());

        const TccReport at_gamma = tcc_measure(pair, Linearization::at_gamma, eta);
        const TccReport at_dagger = tcc_measure(pair, Linearization::at_dagger, eta);
        const MjmiReport m = check_mjmi(pair, eta, alpha);
        UnbalancedOptions opts;
        opts.c1 = config.tcc.c1;
        opts.seed = job.seed;
        const UnbalancedReport u = check_unbalanced(pair, eta, alpha, opts);
        const ZetaReport z = sufficient_zeta(pair);

        const double theta = theta_eta(eta, alpha);
        const bool within = monotone && amplitude <= theta * (1.0 + 1e-12);
        const bool monotone_ok = !within || at_gamma.eta_stc <= eta + kEtaSlack;
        const bool guarantee = m.guarantee_valid && u.guarantee_valid && monotone_ok;
        const bool pass = guarantee && z.holds && z.weak_half;
        out.rows.push_back(row(hash, job.seed, job.name, n, K, cls_name, eta, fraction, amplitude, alpha, theta,
                               pair.xi_dagger(), at_gamma.eta_stc, at_dagger.eta_stc, at_gamma.eta_wtc, z.zeta,
                               m.mjmi_holds, m.mjmi1_gate, m.mjmi_sharp_holds, u.gate_fir, u.gate_fir1, u.gate_final,
                               within, guarantee, pass, "checked", "", ""));
        if (!pass) ++out.failures;
      } catch (const DegeneratePair& e) {
        add_error(cls_name, eta, fraction, "skipped", e);
      } catch (const std::exception& e) {
        add_error(cls_name, eta, fraction, "error", e);
      }
    }
  }
  return out;
}

// ---- landweber ----

struct LandweberRun {
  std::string name;
  LandweberTrace trace;
  double eta0 = 0;
  bool first_step_checked = false;
  bool first_step_ok = true;
  bool strictly_decreasing = true;
  std::string error;
};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<ScenarioJob> expand_scenarios(const RunConfig& config) {
  std::vector<ScenarioJob> jobs;
  std::uint64_t index = 0;
  for (const auto& spec : config.scenarios) {
    const std::string base = spec.recipe.value("name", spec.recipe.value("type", std::string("scenario")));
    for (int i = 0; i < spec.count; ++i, ++index) {
      ScenarioJob job;
      job.name = spec.count > 1 ? base + "#" + std::to_string(i) : base;
      job.recipe = spec.recipe;
      job.seed = derive_seed(config.seed, index);
      job.line = spec.line;
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

CommandResult run_verify_identities(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out(config);
  const Setup setup = make_setup(config.mesh_n, config.basis_K, config.basis_family);
  const auto jobs = expand_scenarios(config);
  const std::string hash = config.hash();
  std::vector<Outcome> parts(jobs.size());
  parallel_for(jobs.size(), config.jobs, [&](std::size_t i) { parts[i] = verify_one(config, setup, jobs[i], hash); });

  CommandResult result;
  std::vector<Row> rows;
  gather(parts, rows, result);
  write_csv(dir / "verify_identities.csv", kVerifyHeader, rows);
  result.files.push_back("verify_identities.csv");
  finish_run(config, dir, "verify-identities", result, log);
  return result;
}

CommandResult run_certify(const RunConfig& config, const std::string& which, std::ostream& log) {
  static const std::vector<std::string> all{"main1", "util", "conmo", "babel0", "theorem3"};
  std::vector<std::string> sets;
  if (which == "all") {
    sets = all;
  } else if (std::find(all.begin(), all.end(), which) != all.end()) {
    sets = {which};
  } else {
    throw ConfigError("--which must be one of main1, util, conmo, babel0, theorem3, all (got '" + which + "')");
  }

  const fs::path dir = prepare_out(config);
  const Setup setup = make_setup(config.mesh_n, config.basis_K, config.basis_family);
  const auto jobs = expand_scenarios(config);
  const std::string hash = config.hash();
  std::vector<CertifyOutcome> parts(jobs.size());
  parallel_for(jobs.size(), config.jobs,
               [&](std::size_t i) { parts[i] = certify_one(config, setup, jobs[i], sets, hash); });

  nlohmann::json extra = {{"which", which}};
  if (std::find(sets.begin(), sets.end(), "theorem3") != sets.end()) {
    double x1 = 0.0, x2 = 0.0;
    int counted = 0;
    for (const auto& p : parts) {
      if (!std::isfinite(p.ratio_x1) || !std::isfinite(p.ratio_x2)) continue;
      x1 = std::max(x1, p.ratio_x1);
      x2 = std::max(x2, p.ratio_x2);
      ++counted;
    }
    extra["theorem3"] = {{"max_ratio_x1", x1}, {"max_ratio_x2", x2}, {"pairs", counted}};
    log << "[certify] theorem3 trace ratios over " << counted << " pairs: max x1 = " << format_double(x1)
        << ", max x2 = " << format_double(x2) << "\n";
  }

  std::vector<Outcome> plain(parts.begin(), parts.end());
  CommandResult result;
  std::vector<Row> rows;
  gather(plain, rows, result);
  write_csv(dir / "certify.csv", kCertifyHeader, rows);
  result.files.push_back("certify.csv");
  finish_run(config, dir, "certify", result, log, extra);
  return result;
}

CommandResult run_tcc_scan(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out(config);
  const Setup setup = make_setup(config.mesh_n, config.basis_K, config.basis_family);
  const auto jobs = expand_scenarios(config);
  const std::string hash = config.hash();
  std::vector<Outcome> parts(jobs.size());
  std::mutex log_guard;
  parallel_for(jobs.size(), config.jobs,
               [&](std::size_t i) { parts[i] = tcc_one(config, setup, jobs[i], hash, log, log_guard); });

  CommandResult result;
  std::vector<Row> rows;
  gather(parts, rows, result);
  write_csv(dir / "tcc_scan.csv", kTccHeader, rows);
  result.files.push_back("tcc_scan.csv");
  finish_run(config, dir, "tcc-scan", result, log);
  return result;
}

CommandResult run_landweber(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out(config);
  const auto& lc = config.landweber;
  const Setup setup = make_setup(lc.mesh_n, lc.basis_K, config.basis_family);
  const Mesh& mesh = setup.mesh;
  const std::string hash = config.hash();

  const Index T = mesh.num_triangles();
  const Eigen::VectorXd background = Eigen::VectorXd::Ones(T);
  const Pattern bump = inclusion(mesh, {lc.inclusion_center[0], lc.inclusion_center[1]}, lc.inclusion_radius,
                                 lc.inclusion_amplitude);
  if (bump.empty) throw ConfigError("landweber inclusion selects no element");
  const Eigen::VectorXd truth = background + bump.values;
  const Eigen::VectorXd wiggle = truth + checkerboard(mesh, lc.oscillation_block, lc.oscillation_amplitude).values;

  LandweberOptions opts;
  opts.tau = lc.tau;
  opts.noise = lc.noise;
  opts.max_iter = lc.max_iter;
  opts.step_margin = lc.step_margin;
  opts.rel_tol = lc.rel_tol;
  opts.track_eta = lc.track_eta;
  opts.seed = config.seed;
  opts.thin = lc.thin;

  std::vector<LandweberRun> runs(2);
  runs[0].name = "monotone";
  runs[1].name = "oscillatory";
  const Eigen::VectorXd starts[2] = {background, wiggle};
  parallel_for(2, config.jobs, [&](std::size_t i) {
    LandweberRun& run = runs[i];
    try {
      const Conductivity dagger(truth, kDefaultLower, kDefaultUpper);
      const Conductivity start(starts[i], kDefaultLower, kDefaultUpper);
      run.trace = landweber_run(mesh, setup.basis, start, dagger, opts);
      try {
        run.eta0 = tcc_measure(ConductivityPair(mesh, setup.basis, start, dagger), Linearization::at_gamma).eta_stc;
      } catch (const DegeneratePair&) {
        run.eta0 = std::numeric_limits<double>::quiet_NaN();
      }
      const auto& r = run.trace.residual_norms;
      for (std::size_t k = 1; k < r.size(); ++k)
        if (!(r[k] < r[k - 1])) run.strictly_decreasing = false;
      if (run.eta0 <= 0.5 && r.size() > 1 && opts.noise == 0.0) {
        run.first_step_checked = true;
        run.first_step_ok = r[1] <= r[0] + 1e-12 * std::max(1.0, r[0]);
      }
    } catch (const std::exception& e) {
      run.error = error_kind(e) + std::string(": ") + e.what();
    }
  });

  CommandResult result;
  nlohmann::json summary = {{"config_hash", hash}, {"seed", config.seed}, {"mesh_n", lc.mesh_n}, {"K", lc.basis_K}};
  for (auto& run : runs) {
    nlohmann::json j = run.error.empty() ? run.trace.summary() : nlohmann::json{{"error", run.error}};
    j["eta_stc_initial"] = finite_or_null(run.eta0);
    j["first_step_checked"] = run.first_step_checked;
    j["first_step_nonincreasing"] = run.first_step_ok;
    j["strictly_decreasing"] = run.strictly_decreasing;

    bool pass = run.error.empty() && run.first_step_ok;
    if (run.name == "monotone") {
      const bool converged = run.trace.status == LandweberStatus::relative_tolerance ||
                             run.trace.status == LandweberStatus::discrepancy;
      j["converged"] = converged;
      pass = pass && converged && run.strictly_decreasing;
      if (run.trace.clamp_events > 0)
        log << "[landweber] monotone run clamped " << run.trace.clamp_events << " times\n";
    }
    j["pass"] = pass;
    summary[run.name] = j;
    if (!pass) ++result.failures;
    if (!run.error.empty()) continue;

    const auto& t = run.trace;
    std::vector<Row> rows;
    for (std::size_t k = 0; k < t.residual_norms.size(); ++k) {
      const double eta = k < t.eta_track.size() ? t.eta_track[k] : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row(hash, config.seed, static_cast<int>(k), t.residual_norms[k], t.error_norms[k], eta));
    }
    const std::string trace_name = "landweber_" + run.name + ".csv";
    write_csv(dir / trace_name, {"config_hash", "seed", "iteration", "residual", "error", "eta_stc"}, rows);
    result.files.push_back(trace_name);
    result.rows += static_cast<int>(rows.size());

    Row header{"config_hash", "seed", "iteration"};
    for (Index e = 0; e < T; ++e) header.push_back("gamma_" + std::to_string(e));
    std::vector<Row> iterates;
    for (std::size_t k = 0; k < t.iterates.size(); ++k) {
      Row r = row(hash, config.seed, t.iterate_index[k]);
      for (Index e = 0; e < T; ++e) r.push_back(format_double(t.iterates[k][e]));
      iterates.push_back(std::move(r));
    }
    const std::string iter_name = "landweber_" + run.name + "_iterates.csv";
    write_csv(dir / iter_name, header, iterates);
    result.files.push_back(iter_name);
  }
  if (runs[0].error.empty() && runs[1].error.empty())
    summary["stop_index_difference"] = runs[1].trace.stop_index - runs[0].trace.stop_index;
  write_json(dir / "landweber_summary.json", summary);
  result.files.push_back("landweber_summary.json");
  result.exit_code = result.failures ? kExitFailure : kExitOk;
  finish_run(config, dir, "landweber", result, log);
  return result;
}

}  // namespace eitlab::cli
