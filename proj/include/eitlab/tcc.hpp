#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eitlab/operator.hpp"

namespace eitlab {

enum class Linearization { at_gamma, at_dagger };

const char* to_string(Linearization point);

/// Slack added to every advertised eta bound before comparing with the measured one.
inline constexpr double kEtaSlack = 1e-8;

/// F'[gamma] as a dense K^2 x T matrix: column t is vec(sum over element t).
/// Frobenius geometry on rows equals the HS geometry of V_D.
class LinearizedForward {
 public:
  explicit LinearizedForward(const ForwardSolution& sol);

  const Eigen::MatrixXd& jacobian() const { return jacobian_; }
  const Eigen::VectorXd& areas() const { return areas_; }
  Index dim() const { return k_; }

  OperatorOnVD apply(const Eigen::VectorXd& w) const;
  /// ||F'[gamma] w||_HS
  double norm_of(const Eigen::VectorXd& w) const;

 private:
  Index k_ = 0;
  Eigen::MatrixXd jacobian_;
  Eigen::VectorXd areas_;
};

struct TccReport {
  Linearization linearization = Linearization::at_dagger;
  double eta_stc = 0;         ///< at the requested linearization point
  double eta_stc_gamma = 0;   ///< ||B(gamma,gd)|| / ||dF||
  double eta_stc_dagger = 0;  ///< ||dF - F'[gd] d|| / ||dF||
  double eta_wtc = 0;         ///< (r, dF) / ||dF||^2
  double qcon_value = 0;      ///< (J d, dF)
  double zeta = 0;            ///< ||F'[g](d^2/gd)|| / ||F'[g] d||
  double theta_eta = 0;       ///< theta for eta_target and the pair's lower bound
  double xi_dagger = 0;
  double xi = 0;
  double data_norm = 0;       ///< ||F(g) - F(gd)||
  double linear_norm = 0;     ///< ||J d||
  double residual_norm = 0;   ///< ||dF - J d||
  double para_residual = 0;   ///< relative defect of the parallelogram identity
};

/// Cone quantities in the HS geometry of V_D. Throws DegeneratePair when
/// ||F(gamma) - F(gamma_dagger)|| < 1e-13 * max(||Lambda_gamma||, ||Lambda_gd||).
TccReport tcc_measure(const ConductivityPair& pair, Linearization point = Linearization::at_dagger,
                      double eta_target = 0.5);

struct ZetaReport {
  double zeta = 0;
  double predicted_eta = 0;  ///< zeta/(1-zeta), +inf when zeta >= 1
  double measured_eta = 0;   ///< eta_stc linearized at gamma
  double eta_wtc = 0;        ///< linearized at gamma
  bool applicable = false;   ///< zeta < 1
  bool holds = true;         ///< measured <= predicted + slack, vacuous unless applicable
  bool weak_half = true;     ///< zeta <= 1 implies eta_wtc <= 1/2 + slack
};

ZetaReport sufficient_zeta(const ConductivityPair& pair);

/// alpha * eta / (4 + eta). Throws InvalidArgument unless 0 < eta <= 1 and alpha > 0.
double theta_eta(double eta, double alpha);
/// The sharper alpha * eta / (3 + xi + eta) from the proof chain.
double theta_eta_sharp(double eta, double alpha, double xi);

struct MjmiReport {
  double eta = 0;
  double alpha = 0;
  double theta = 0;
  double lhs = 0;               ///< ||F'[gd](|d|^2)||
  double linear_norm = 0;       ///< ||F'[gd] d||
  bool mjmi_holds = false;      ///< lhs <= theta * linear_norm
  double measured_eta = 0;      ///< eta_stc linearized at gamma
  double measured_eta_dagger = 0;
  bool guarantee_valid = true;  ///< measured_eta <= eta + slack whenever mjmi holds
  double c_measured = 0;        ///< ||F'[gd](|d|)|| / ||F'[gd] d||
  bool mjmi1_gate = false;      ///< ||d||_inf <= theta / C
  double theta_sharp = 0;
  bool mjmi_sharp_holds = false;
};

/// Evaluates the localized sufficient condition. `alpha` <= 0 selects the
/// pair's common lower bound; otherwise it must not exceed min(gamma).
MjmiReport check_mjmi(const ConductivityPair& pair, double eta, double alpha = 0.0);

/// min(theta_eta(eta, alpha), alpha) / ||direction||_inf for a single-signed direction.
double monotone_radius(const Eigen::VectorXd& direction, double eta, double alpha);

/// (positive part, negative part) with d = p - n.
std::pair<Eigen::VectorXd, Eigen::VectorXd> split_parts(const Eigen::VectorXd& d);

/// Bracket for the L^inf -> HS norm of F'[gd].
struct LinfBracket {
  double lower = 0;     ///< greedy sign-flip ascent with restarts
  double upper = 0;     ///< ||F'[gd](1)||, attained by the constant sign vector
  double row_sum = 0;   ///< sum_t ||F'[gd] e_t||
};

LinfBracket linf_norm_bracket(const LinearizedForward& lin, int restarts = 4, std::uint64_t seed = 0);

/// ||F'[gd] chi_B(center, radius)|| over elements whose centroid lies strictly inside the disk.
double ball_response(const Mesh& mesh, const LinearizedForward& lin, const Eigen::Vector2d& center,
                     double radius);

/// inf over centroid-grid centers with B_m(x0) inside the unit square. NaN if none admissible.
double kappa(const Mesh& mesh, const LinearizedForward& lin, double m);

struct UnbalancedOptions {
  double c1 = 0.2;  ///< assumed C^2 bound of gamma - gamma_dagger
  int restarts = 4;
  std::uint64_t seed = 0;
};

struct UnbalancedReport {
  double eta = 0;
  double theta = 0;
  double sup_norm = 0;
  double norm_p = 0, norm_n = 0, norm_d = 0;  ///< HS norms of F'[gd] applied to p, n, d
  bool applicable = true;                     ///< false for equal-norm parts or zero F'[gd] d
  double c_fir = 0;
  bool gate_fir = false;
  double nu_fir1 = 0;
  bool gate_fir1 = false;
  bool mjmi_holds = false;
  double measured_eta = 0;
  bool guarantee_valid = true;  ///< whenever a gate fires: mjmi and measured_eta <= eta + slack

  // final gate
  double dominant_sup = 0;
  double minor_sup = 0;
  LinfBracket linf;
  double c2 = 0;
  double nu_final = 0;
  double kappa_value = 0;
  double psi = 0;
  bool ball_check = false;
  bool gate_final = false;
};

UnbalancedReport check_unbalanced(const ConductivityPair& pair, double eta, double alpha = 0.0,
                                  const UnbalancedOptions& options = {});

struct SourceElement {
  Eigen::VectorXd perturbation;  ///< N^mu omega, rescaled to the requested sup norm
  Eigen::VectorXd omega;         ///< rescaled coefficient vector
  double mu = 0;
  double x_norm = 0;             ///< ||perturbation||_X
  double omega_norm = 0;
  double image_norm = 0;         ///< ||F'[gd] perturbation||
  double holder_rhs = 0;
  bool holder_holds = false;
  double embedding_constant = 0;  ///< ||v||_inf <= c ||v||_X on the mesh
  double corollary_radius = 0;   ///< sup-norm radius implied by the source condition
};

/// Element of the range of (F'^* F')^mu, adjoint in the area-weighted element
/// inner product. Throws EllipticityViolation when dagger + perturbation leaves its bounds.
SourceElement source_condition_element(const ForwardSolution& dagger, double mu,
                                       const Eigen::VectorXd& omega, double sup_scale,
                                       double eta = 0.5);

/// ||F'[gd](|w|)||
double star_seminorm(const LinearizedForward& lin, const Eigen::VectorXd& w);

struct FiniteDimConstant {
  double estimate = 1.0;  ///< lower bound of the true constant
  double sigma_min = 0;
  int samples = 0;
};

/// Sampled max of ||F'(|w|)|| / ||F' w|| over span(patterns). Throws
/// PreconditionError when F'[gd] is not injective on the span.
FiniteDimConstant finite_dim_constant(const LinearizedForward& lin,
                                      const std::vector<Eigen::VectorXd>& patterns, int samples,
                                      std::uint64_t seed);

/// Amplitude a with zeta(dagger + a * direction) = target, by bisection.
double bisect_zeta_amplitude(const Mesh& mesh, const BoundaryBasis& basis, const Conductivity& dagger,
                             const Eigen::VectorXd& direction, double target, double tol = 1e-10);

}  // namespace eitlab
