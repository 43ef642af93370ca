#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "eitlab/operator.hpp"

namespace eitlab {

/// X -> Y norm of F'[gamma] (X: area-weighted element l2, Y: HS) by power
/// iteration on F'^* F'. Stops at 1e-6 relative eigenvalue change; throws
/// EstimationError after max_iter iterations.
double estimate_lipschitz(const ForwardSolution& sol, int max_iter = 500, double rel_tol = 1e-6);

/// Symmetric Gaussian K x K matrix rescaled to HS norm delta. Throws InvalidArgument for delta < 0.
OperatorOnVD make_noise(Index K, double delta, std::uint64_t seed);

struct LandweberOptions {
  double tau = 1.5;
  double noise = 0.0;
  int max_iter = 2000;
  double step_margin = 0.9;
  double rel_tol = 0.0;  ///< also stop once residual <= rel_tol * initial residual
  bool track_eta = false;
  std::uint64_t seed = 0;
  int thin = 1;          ///< keep every thin-th iterate (the last one is always kept)
  double lower = 0.0;    ///< clamp box; <= 0 takes the bounds of gamma0 and gamma_dagger
  double upper = 0.0;
};

enum class LandweberStatus { discrepancy, relative_tolerance, max_iter, diverged };

const char* to_string(LandweberStatus status);

struct LandweberTrace {
  std::vector<int> iterate_index;
  std::vector<Eigen::VectorXd> iterates;
  std::vector<double> residual_norms;
  std::vector<double> error_norms;
  std::vector<double> eta_track;  ///< eta_stc(gamma_k, gamma_dagger) at gamma_k; NaN when undefined
  double step_size = 0;
  double lipschitz = 0;
  int stop_index = 0;
  double noise_level = 0;
  double tau = 0;
  LandweberStatus status = LandweberStatus::max_iter;
  std::string failure;  ///< error text when diverged
  int clamp_events = 0;
  std::uint64_t seed = 0;

  nlohmann::json summary() const;
};

/// Nonlinear Landweber with data F(gamma_dagger) + noise. A non-finite step
/// ends the run with status diverged rather than throwing.
LandweberTrace landweber_run(const Mesh& mesh, const BoundaryBasis& basis, const Conductivity& gamma0,
                             const Conductivity& dagger, const LandweberOptions& options = {});

}  // namespace eitlab
