#include "eitlab/landweber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "eitlab/errors.hpp"
#include "eitlab/tcc.hpp"

namespace eitlab {

double estimate_lipschitz(const ForwardSolution& sol, int max_iter, double rel_tol) {
  const Eigen::VectorXd& areas = sol.mesh().element_areas();
  auto x_norm = [&](const Eigen::VectorXd& w) { return std::sqrt(areas.dot(w.cwiseAbs2())); };

  // fixed start so the estimate is reproducible
  Eigen::VectorXd x(areas.size());
  for (Index t = 0; t < x.size(); ++t) x[t] = 1.0 + 0.5 * std::sin(1.0 + 3.7 * static_cast<double>(t));
  x /= x_norm(x);

  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd y = derivative_adjoint(sol, derivative_form(sol, x));
    const double next = areas.dot(x.cwiseProduct(y));
    const double ny = x_norm(y);
    if (!(ny > 0.0)) throw EstimationError("F'[gamma] annihilates the power-iteration vector");
    x = y / ny;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * next) return std::sqrt(next);
    lambda = next;
  }
  throw EstimationError("power iteration did not converge in " + std::to_string(max_iter) + " steps");
}

OperatorOnVD make_noise(Index K, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw InvalidArgument("noise level must be nonnegative");
  if (K < 1) throw InvalidArgument("noise dimension must be positive");
  if (delta == 0.0) return OperatorOnVD::zero(K, "noise");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(K, K);
  for (Index j = 0; j < K; ++j)
    for (Index i = 0; i < K; ++i) m(i, j) = normal(rng);
  m = 0.5 * (m + m.transpose()).eval();
  return OperatorOnVD(m * (delta / m.norm()), "noise");
}

const char* to_string(LandweberStatus status) {
  switch (status) {
    case LandweberStatus::discrepancy: return "discrepancy";
    case LandweberStatus::relative_tolerance: return "relative-tolerance";
    case LandweberStatus::max_iter: return "max-iter";
    case LandweberStatus::diverged: return "diverged";
  }
  return "unknown";
}

nlohmann::json LandweberTrace::summary() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"status", to_string(status)},
                      {"stop_index", stop_index},
                      {"step_size", step_size},
                      {"lipschitz", lipschitz},
                      {"noise_level", noise_level},
                      {"tau", tau},
                      {"clamp_events", clamp_events},
                      {"seed", seed},
                      {"initial_residual", residual_norms.empty() ? nlohmann::json(nullptr) : num(residual_norms.front())},
                      {"final_residual", residual_norms.empty() ? nlohmann::json(nullptr) : num(residual_norms.back())},
                      {"final_error", error_norms.empty() ? nlohmann::json(nullptr) : num(error_norms.back())}};
  if (!failure.empty()) j["failure"] = failure;
  if (!eta_track.empty()) {
    double worst = -1.0;
    for (double e : eta_track)
      if (std::isfinite(e)) worst = std::max(worst, e);
    j["max_eta"] = worst < 0 ? nlohmann::json(nullptr) : nlohmann::json(worst);
  }
  return j;
}

LandweberTrace landweber_run(const Mesh& mesh, const BoundaryBasis& basis, const Conductivity& gamma0,
                             const Conductivity& dagger, const LandweberOptions& options) {
  if (!(options.tau > 1.0)) throw InvalidArgument("tau must exceed 1");
  if (!(options.step_margin > 0.0 && options.step_margin <= 1.0))
    throw InvalidArgument("step margin must lie in (0, 1]");
  if (options.max_iter < 0 || options.thin < 1) throw InvalidArgument("invalid iteration limits");
  if (gamma0.size() != mesh.num_triangles() || dagger.size() != mesh.num_triangles())
    throw InvalidArgument("conductivity size does not match the mesh");

  const double lower = options.lower > 0.0 ? options.lower : std::min(gamma0.lower_bound(), dagger.lower_bound());
  const double upper = options.upper > 0.0 ? options.upper : std::max(gamma0.upper_bound(), dagger.upper_bound());
  if (!(upper >= lower)) throw InvalidArgument("empty clamp box");

  LandweberTrace trace;
  trace.noise_level = options.noise;
  trace.tau = options.tau;
  trace.seed = options.seed;

  const Eigen::VectorXd& areas = mesh.element_areas();
  auto x_norm = [&](const Eigen::VectorXd& w) { return std::sqrt(areas.dot(w.cwiseAbs2())); };

  const ForwardSolution truth = ForwardSolution::compute(mesh, basis, dagger);
  // y - F(gamma) = Lambda_dagger + noise - Lambda_gamma; Lambda_1 cancels
  const OperatorOnVD data = dtn_form(truth) + make_noise(basis.size, options.noise, options.seed);

  Conductivity current(gamma0.values(), lower, upper);
  ForwardSolution sol = ForwardSolution::compute(mesh, basis, current);
  trace.lipschitz = estimate_lipschitz(sol);
  trace.step_size = options.step_margin / (trace.lipschitz * trace.lipschitz);

  auto record = [&](int k, const ForwardSolution& s, const OperatorOnVD& residual) {
    trace.residual_norms.push_back(hs_norm(residual));
    trace.error_norms.push_back(x_norm(s.conductivity().values() - dagger.values()));
    if (k % options.thin == 0) {
      trace.iterate_index.push_back(k);
      trace.iterates.push_back(s.conductivity().values());
    }
    if (options.track_eta) {
      double eta = std::numeric_limits<double>::quiet_NaN();
      try {
        const ConductivityPair pair(mesh, basis, s.conductivity(), dagger);
        eta = tcc_measure(pair, Linearization::at_gamma).eta_stc;
      } catch (const DegeneratePair&) {
      }
      trace.eta_track.push_back(eta);
    }
  };

  OperatorOnVD residual = data - dtn_form(sol);
  record(0, sol, residual);
  const double initial = trace.residual_norms.front();

  int k = 0;
  for (;; ++k) {
    const double r = trace.residual_norms.back();
    if (r == 0.0 || (options.noise > 0.0 && r <= options.tau * options.noise)) {
      trace.status = LandweberStatus::discrepancy;
      break;
    }
    if (options.rel_tol > 0.0 && r <= options.rel_tol * initial) {
      trace.status = LandweberStatus::relative_tolerance;
      break;
    }
    if (k >= options.max_iter) {
      trace.status = LandweberStatus::max_iter;
      break;
    }
    Eigen::VectorXd next = current.values() + trace.step_size * derivative_adjoint(sol, residual);
    if (!next.allFinite()) {
      trace.status = LandweberStatus::diverged;
      trace.failure = "non-finite iterate at step " + std::to_string(k + 1);
      break;
    }
    const Eigen::VectorXd clamped = next.cwiseMax(lower).cwiseMin(upper);
    if (clamped != next) ++trace.clamp_events;
    try {
      current = Conductivity(clamped, lower, upper);
      sol = ForwardSolution::compute(mesh, basis, current);
    } catch (const Error& e) {
      trace.status = LandweberStatus::diverged;
      trace.failure = std::string(e.kind()) + ": " + e.what();
      break;
    }
    residual = data - dtn_form(sol);
    record(k + 1, sol, residual);
  }
  trace.stop_index = k;
  if (trace.iterate_index.empty() || trace.iterate_index.back() != k) {
    trace.iterate_index.push_back(k);
    trace.iterates.push_back(current.values());
  }
  return trace;
}

}  // namespace eitlab
