#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "eitlab/operator.hpp"

namespace eitlab {

/// Default relative eigenvalue tolerance of Loewner certificates.
inline constexpr double kLoewnerTolerance = 1e-8;
/// Lower floor applied to the certificate scale.
inline constexpr double kScaleFloor = 1e-14;

/// Outcome of checking lhs <= rhs in the Loewner order.
struct LoewnerCertificate {
  std::string lhs_label;
  std::string rhs_label;
  double lambda_min_gap = 0.0;  ///< smallest eigenvalue of rhs - lhs
  double scale = 0.0;           ///< max of the two spectral norms
  double tolerance = 0.0;
  bool pass = false;

  std::string inequality() const { return lhs_label + " <= " + rhs_label; }
};

/// Certificate for a <= b from the smallest eigenvalue of b - a. Passes iff
/// gap >= -tol * max(scale, kScaleFloor).
LoewnerCertificate loewner_leq(const OperatorOnVD& a, const OperatorOnVD& b,
                               double tol = kLoewnerTolerance);
LoewnerCertificate loewner_leq(const OperatorOnVD& a, const OperatorOnVD& b, double tol,
                               std::string lhs_label, std::string rhs_label);

/// One JSON row {inequality, lambda_min_gap, scale, tol, pass, seed, mesh_n, K}.
nlohmann::json certificate_row(const LoewnerCertificate& cert, std::uint64_t seed, int mesh_n, int K);

/// 0 <= B(gamma, gamma_dagger) <= F'[gamma]((gamma - gamma_dagger)^2 / gamma_dagger).
/// Requires xi_dagger < contraction_limit <= 1.
std::array<LoewnerCertificate, 2> certify_main1(const ConductivityPair& pair,
                                                double tol = kLoewnerTolerance,
                                                double contraction_limit = 1.0);

struct UtilCertificates {
  LoewnerCertificate util1;            ///< B <= D(dg2) - dL Lambda_dagger^-1 dL
  LoewnerCertificate util2;            ///< B <= D(dg2) - D(m) D(g2/gd)^-1 D(m)
  LoewnerCertificate util1_sharper;    ///< util1 bound <= main bound
  double condition_lambda_dagger = 0;  ///< 2-norm condition of Lambda_dagger
  double condition_middle = 0;         ///< 2-norm condition of D(gamma^2/gamma_dagger)
};

/// Both refined upper bounds for B. Throws BasisRankError if a middle
/// matrix is not numerically positive definite.
UtilCertificates certify_util(const ConductivityPair& pair, double tol = kLoewnerTolerance,
                              double contraction_limit = 1.0);

/// F'[g](d) <= dL <= F'[gd](d) and F'[gd](gd/g d) <= dL <= F'[g](g/gd d).
std::array<LoewnerCertificate, 4> certify_conmo(const ConductivityPair& pair,
                                                double tol = kLoewnerTolerance,
                                                double contraction_limit = 1.0);

struct Babel0Certificates {
  LoewnerCertificate lower;  ///< 0 <= F'[gd](d) - F'[g](d)
  LoewnerCertificate upper;  ///< ... <= (2 + xi_dagger) F'[g](d^2/gd)
  double xi_dagger = 0;
};

Babel0Certificates certify_babel0(const ConductivityPair& pair, double tol = kLoewnerTolerance,
                                  double contraction_limit = 1.0);

/// Norm form of the remainder bound plus the empirical trace ratios.
struct Theorem3Report {
  double remainder_hs = 0;      ///< ||B||_HS
  double bound_hs = 0;          ///< ||F'[g](d^2/gd)||_HS
  bool mainest1_pass = false;
  double remainder_spectral = 0;
  double bound_spectral = 0;
  bool mainest1_spectral_pass = false;
  double trace = 0;             ///< sum_i <F'[g](d^2/gd) f_i, f_i>
  double ratio_x1 = 0;          ///< ||F(g)-F(gd)||^2 / trace
  double ratio_x2 = 0;          ///< ||F'[g](d g/gd)||^2 / trace
};

Theorem3Report certify_theorem3(const ConductivityPair& pair, double tol = kLoewnerTolerance,
                                double contraction_limit = 1.0);

struct SecondDerivativeStep {
  double eps = 0;
  LoewnerCertificate lower;   ///< 0 <= 2 B(gd + eps w, gd) / eps^2
  LoewnerCertificate upper;   ///< ... <= 2 F'[gd](w^2/gd), eps-scaled tolerance
  double defect = 0;          ///< relative HS distance of the quotient to -F''[gd](w,w)
  double central_defect = 0;  ///< same for the second central difference
};

struct SecondDerivativeReport {
  LoewnerCertificate exact_lower;  ///< 0 <= -F''[gd](w,w)
  LoewnerCertificate exact_upper;  ///< -F''[gd](w,w) <= 2 F'[gd](w^2/gd)
  std::vector<SecondDerivativeStep> steps;
  double defect_slope = 0;          ///< log-log slope of defect in eps
  double central_defect_slope = 0;  ///< log-log slope of central_defect in eps
};

/// Sign and size of the second derivative along w. Every eps must keep
/// ||eps w / gd||_inf < 1, otherwise PreconditionError.
SecondDerivativeReport second_derivative_sign(const Mesh& mesh, const BoundaryBasis& basis,
                                              const Conductivity& dagger, const Eigen::VectorXd& w,
                                              const std::vector<double>& eps_sweep,
                                              double tol = kLoewnerTolerance);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eitlab
