#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "eitlab/fem.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

enum class BasisFamily { trigonometric, boundary_hat };

BasisFamily parse_basis_family(const std::string& name);
std::string to_string(BasisFamily family);

/// Dirichlet data spanning V_D, orthonormal in the discrete H^{1/2} inner
/// product (f, g) = <grad u_{1,f}, grad u_{1,g}>_W. In this basis the Riesz
/// map is the identity and Hilbert-Schmidt norms are Frobenius norms.
struct BoundaryBasis {
  int size = 0;
  BasisFamily family = BasisFamily::trigonometric;
  Eigen::MatrixXd raw_traces;       ///< Nb x K, one column per raw trace
  Eigen::MatrixXd gram;             ///< K x K, H^{1/2} Gram matrix of raw traces
  Eigen::MatrixXd ortho_transform;  ///< K x K, traces = raw_traces * ortho_transform
  Eigen::MatrixXd traces;           ///< Nb x K orthonormal traces
  Eigen::MatrixXd lift_gradients;   ///< 2T x K gradients of the gamma = 1 lifts of `traces`

  /// Throws InvalidArgument for K < 1 and BasisRankError when the Gram
  /// matrix is rank deficient (K too large for the mesh).
  static BoundaryBasis build(const Mesh& mesh, int K,
                             BasisFamily family = BasisFamily::trigonometric);
};

/// Raw (not yet orthonormalized) traces of a family, one column per function.
Eigen::MatrixXd raw_boundary_traces(const Mesh& mesh, int K, BasisFamily family);

/// Symmetric K x K matrix of a quadratic form on V_D, in the orthonormal basis.
/// Entries are symmetrized on construction.
class OperatorOnVD {
 public:
  OperatorOnVD() = default;
  OperatorOnVD(const Eigen::MatrixXd& entries, std::string label = {});

  static OperatorOnVD zero(Index K, std::string label = {});

  const Eigen::MatrixXd& matrix() const { return entries_; }
  const std::string& label() const { return label_; }
  Index dim() const { return entries_.rows(); }
  OperatorOnVD relabeled(std::string label) const { return OperatorOnVD(entries_, std::move(label)); }

  friend OperatorOnVD operator+(const OperatorOnVD& a, const OperatorOnVD& b);
  friend OperatorOnVD operator-(const OperatorOnVD& a, const OperatorOnVD& b);
  friend OperatorOnVD operator*(double s, const OperatorOnVD& a);

 private:
  Eigen::MatrixXd entries_;
  std::string label_;
};

double hs_norm(const OperatorOnVD& s);
double hs_inner(const OperatorOnVD& s, const OperatorOnVD& t);
double spectral_norm(const OperatorOnVD& s);
/// Ascending eigenvalues.
Eigen::VectorXd eigenvalues(const OperatorOnVD& s);

/// Lifts of every orthonormal basis trace for one conductivity, plus the
/// factorization that produced them. Mesh and basis must outlive the object.
class ForwardSolution {
 public:
  static ForwardSolution compute(const Mesh& mesh, const BoundaryBasis& basis,
                                 const Conductivity& gamma);

  const Mesh& mesh() const { return *mesh_; }
  const BoundaryBasis& basis() const { return *basis_; }
  const Conductivity& conductivity() const { return gamma_; }
  const DirichletSolver& solver() const { return *solver_; }
  /// 2T x K, column i is grad u_{gamma, f_i}.
  const Eigen::MatrixXd& lift_gradients() const { return gradients_; }

 private:
  ForwardSolution(const Mesh& mesh, const BoundaryBasis& basis, Conductivity gamma)
      : mesh_(&mesh), basis_(&basis), gamma_(std::move(gamma)) {}

  const Mesh* mesh_;
  const BoundaryBasis* basis_;
  Conductivity gamma_;
  std::shared_ptr<const DirichletSolver> solver_;
  Eigen::MatrixXd gradients_;
};

/// <Lambda_gamma f_i, f_j> = sum_T gamma_T |T| grad u_i . grad u_j
OperatorOnVD dtn_form(const ForwardSolution& sol);
OperatorOnVD dtn_form(const Mesh& mesh, const Conductivity& gamma, const BoundaryBasis& basis);

/// Cross formula sum_T (gamma1 - gamma2)_T |T| grad u_{gamma1,f_i} . grad u_{gamma2,f_j}
/// for Lambda_{gamma1} - Lambda_{gamma2}.
OperatorOnVD dtn_difference_cross(const ForwardSolution& s1, const ForwardSolution& s2);

/// Relative disagreement between dtn_form(s1) - dtn_form(s2) and the cross formula.
double galerkin_mismatch(const ForwardSolution& s1, const ForwardSolution& s2);

/// Tolerance of the built-in cross-check in forward_F.
inline constexpr double kGalerkinTolerance = 1e-11;

/// F(gamma) = Lambda_gamma - Lambda_1. `background` must be the gamma = 1
/// solution. Both routes are computed; throws ConsistencyError if they
/// disagree beyond kGalerkinTolerance.
OperatorOnVD forward_F(const ForwardSolution& sol, const ForwardSolution& background);
OperatorOnVD forward_F(const Mesh& mesh, const Conductivity& gamma, const BoundaryBasis& basis);

/// Derivative form <F'[gamma] w f_i, f_j> = sum_T w_T |T| grad u_i . grad u_j.
OperatorOnVD derivative_form(const ForwardSolution& sol, const Eigen::VectorXd& w);
OperatorOnVD derivative_form(const Mesh& mesh, const Conductivity& gamma, const Eigen::VectorXd& w,
                             const BoundaryBasis& basis);

/// Adjoint of w -> F'[gamma] w between the area-weighted element inner
/// product and the Frobenius inner product. Rejects asymmetric S.
Eigen::VectorXd derivative_adjoint(const ForwardSolution& sol, const Eigen::MatrixXd& s);
Eigen::VectorXd derivative_adjoint(const ForwardSolution& sol, const OperatorOnVD& s);

/// Exact second directional derivative F''[gamma](w, w) of the discrete map.
OperatorOnVD second_derivative_form(const ForwardSolution& sol, const Eigen::VectorXd& w);

/// B(gamma, gamma_dagger) = Lambda_gamma - Lambda_dagger - F'[gamma](gamma - gamma_dagger).
OperatorOnVD taylor_remainder(const ForwardSolution& gamma, const ForwardSolution& dagger);
OperatorOnVD taylor_remainder(const Mesh& mesh, const Conductivity& gamma,
                              const Conductivity& dagger, const BoundaryBasis& basis);

/// Forward solutions for a pair (gamma, gamma_dagger) on a shared mesh and
/// basis, with the derived quantities every certificate needs.
class ConductivityPair {
 public:
  ConductivityPair(const Mesh& mesh, const BoundaryBasis& basis, const Conductivity& gamma,
                   const Conductivity& dagger);

  const ForwardSolution& gamma() const { return gamma_; }
  const ForwardSolution& dagger() const { return dagger_; }
  const Mesh& mesh() const { return gamma_.mesh(); }
  const BoundaryBasis& basis() const { return gamma_.basis(); }

  /// gamma - gamma_dagger per element
  const Eigen::VectorXd& delta() const { return delta_; }
  /// ||(gamma - gamma_dagger) / gamma_dagger||_inf
  double xi_dagger() const { return xi_dagger_; }
  /// ||(gamma - gamma_dagger) / gamma||_inf
  double xi() const { return xi_; }
  /// Common ellipticity lower bound of the pair.
  double alpha_lower() const;

  const OperatorOnVD& lambda_gamma() const { return lambda_gamma_; }
  const OperatorOnVD& lambda_dagger() const { return lambda_dagger_; }
  /// Lambda_gamma - Lambda_dagger = F(gamma) - F(gamma_dagger)
  OperatorOnVD data_difference() const { return (lambda_gamma_ - lambda_dagger_).relabeled("F(gamma)-F(gamma_dagger)"); }
  OperatorOnVD derivative_at_gamma(const Eigen::VectorXd& w) const { return derivative_form(gamma_, w); }
  OperatorOnVD derivative_at_dagger(const Eigen::VectorXd& w) const { return derivative_form(dagger_, w); }
  /// B(gamma, gamma_dagger)
  OperatorOnVD remainder() const;

 private:
  ForwardSolution gamma_;
  ForwardSolution dagger_;
  Eigen::VectorXd delta_;
  double xi_dagger_;
  double xi_;
  OperatorOnVD lambda_gamma_;
  OperatorOnVD lambda_dagger_;
};

/// ||(a - b) / b||_inf
double contraction(const Conductivity& a, const Conductivity& b);

/// Dense projector R_gamma = H_sqrt(gamma) G_int A(gamma)^-1 G_int^T W H_sqrt(gamma)
/// acting on GradientField coordinates.
Eigen::MatrixXd projector_R(const Mesh& mesh, const Conductivity& gamma);

/// Operator norm of a dense map on GradientFields in the W-weighted inner product.
double w_operator_norm(const Eigen::MatrixXd& m, const Eigen::VectorXd& weights);
/// ||v||_W
double w_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& weights);

/// Per-element rotated gradient (d_y phi, -d_x phi) of a P1 nodal function.
GradientField rotated_gradient(const Mesh& mesh, const Eigen::VectorXd& phi);

struct ProjectorReport {
  double idempotence = 0;       ///< ||R^2 - R||_W
  double self_adjointness = 0;  ///< ||R - R^*||_W
  double annihilation = 0;      ///< max ||R z||_W / ||z||_W over constructed divergence-free z
  double positivity = 0;        ///< min <R y, y>_W / ||y||_W^2 over random y
};

/// Checks the projector properties of R_gamma with `fields` random divergence-free
/// fields H_{1/sqrt(gamma)} rot(phi) and as many random test fields.
ProjectorReport projector_checks(const Mesh& mesh, const Conductivity& gamma, int fields, std::uint64_t seed);

/// Checks grad u_{gamma2,f} = (I - K_{gamma2} H_{gamma2-gamma1}) grad u_{gamma1,f}
/// with K_gamma = G_int A(gamma)^-1 G_int^T W. Returns the W-norm relative
/// error. Throws PreconditionError unless ||(gamma1-gamma2)/gamma2||_inf <= margin < 1.
double resolvent_identity_check(const Mesh& mesh, const Conductivity& gamma1,
                                const Conductivity& gamma2, const Eigen::VectorXd& boundary_values,
                                double margin = 0.95);

}  // namespace eitlab
