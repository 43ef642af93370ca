#include "eitlab/operator.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "eitlab/errors.hpp"

namespace eitlab {

BasisFamily parse_basis_family(const std::string& name) {
  if (name == "trigonometric" || name == "trig") return BasisFamily::trigonometric;
  if (name == "boundary-hat" || name == "hat") return BasisFamily::boundary_hat;
  throw InvalidArgument("unknown basis family '" + name + "'");
}

std::string to_string(BasisFamily family) {
  return family == BasisFamily::trigonometric ? "trigonometric" : "boundary-hat";
}

Eigen::MatrixXd raw_boundary_traces(const Mesh& mesh, int K, BasisFamily family) {
  const Index nb = mesh.num_boundary_nodes();
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(nb, K);
  if (family == BasisFamily::trigonometric) {
    const Eigen::VectorXd s = boundary_arclength(mesh);
    for (int j = 0; j < K; ++j) {
      const int k = j / 2 + 1;
      // sin vanishes on every node at the Nyquist mode k = nb / 2
      const bool use_sin = j % 2 == 0 && 2 * k != nb;
      for (Index b = 0; b < nb; ++b) {
        const double phase = 2.0 * std::numbers::pi * k * s[b] / 4.0;
        raw(b, j) = use_sin ? std::sin(phase) : std::cos(phase);
      }
    }
  } else {
    for (int j = 0; j < K; ++j) raw((Index(j) * nb) / K, j) = 1.0;
  }
  return raw;
}

BoundaryBasis BoundaryBasis::build(const Mesh& mesh, int K, BasisFamily family) {
  if (K < 1) throw InvalidArgument("basis size must be >= 1");
  if (K > mesh.num_boundary_nodes() - 1)
    throw BasisRankError("basis size " + std::to_string(K) + " exceeds boundary nodes - 1 = " +
                         std::to_string(mesh.num_boundary_nodes() - 1));

  BoundaryBasis basis;
  basis.size = K;
  basis.family = family;
  basis.raw_traces = raw_boundary_traces(mesh, K, family);

  const DiscreteOperators ops = DiscreteOperators::build(mesh);
  const DirichletSolver solver(mesh, Conductivity::uniform(mesh, 1.0, 1.0, 1.0));
  Eigen::MatrixXd raw_gradients(2 * mesh.num_triangles(), K);
  for (int i = 0; i < K; ++i)
    raw_gradients.col(i) = ops.gradient * solver.solve(basis.raw_traces.col(i));

  basis.gram = raw_gradients.transpose() * ops.weights.asDiagonal() * raw_gradients;
  basis.gram = 0.5 * (basis.gram + basis.gram.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(basis.gram);
  const double gram_scale = basis.gram.diagonal().maxCoeff();
  if (llt.info() != Eigen::Success || !(gram_scale > 0.0))
    throw BasisRankError("Gram matrix of the boundary basis is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  const double min_pivot = lower.diagonal().array().square().minCoeff();
  if (min_pivot < 1e-12 * gram_scale)
    throw BasisRankError("Gram matrix of the boundary basis is numerically rank deficient");

  // traces * L^-T are orthonormal: L^-1 gram L^-T = I
  basis.ortho_transform = lower.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(K, K));
  basis.traces = basis.raw_traces * basis.ortho_transform;
  basis.lift_gradients = raw_gradients * basis.ortho_transform;
  return basis;
}

OperatorOnVD::OperatorOnVD(const Eigen::MatrixXd& entries, std::string label)
    : entries_(0.5 * (entries + entries.transpose())), label_(std::move(label)) {
  if (entries.rows() != entries.cols()) throw InvalidArgument("operator on V_D must be square");
}

OperatorOnVD OperatorOnVD::zero(Index K, std::string label) {
  return OperatorOnVD(Eigen::MatrixXd::Zero(K, K), std::move(label));
}

namespace {

void require_same_dim(const OperatorOnVD& a, const OperatorOnVD& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("operators live on different V_D dimensions");
}

}  // namespace

OperatorOnVD operator+(const OperatorOnVD& a, const OperatorOnVD& b) {
  require_same_dim(a, b);
  return OperatorOnVD(a.entries_ + b.entries_);
}

OperatorOnVD operator-(const OperatorOnVD& a, const OperatorOnVD& b) {
  require_same_dim(a, b);
  return OperatorOnVD(a.entries_ - b.entries_);
}

OperatorOnVD operator*(double s, const OperatorOnVD& a) { return OperatorOnVD(s * a.entries_, a.label_); }

double hs_norm(const OperatorOnVD& s) { return s.matrix().norm(); }

double hs_inner(const OperatorOnVD& s, const OperatorOnVD& t) {
  require_same_dim(s, t);
  return (s.matrix().array() * t.matrix().array()).sum();
}

Eigen::VectorXd eigenvalues(const OperatorOnVD& s) {
  if (s.dim() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double spectral_norm(const OperatorOnVD& s) {
  const Eigen::VectorXd ev = eigenvalues(s);
  if (ev.size() == 0) return 0.0;
  return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

ForwardSolution ForwardSolution::compute(const Mesh& mesh, const BoundaryBasis& basis,
                                         const Conductivity& gamma) {
  if (gamma.size() != mesh.num_triangles())
    throw InvalidArgument("conductivity size does not match the mesh");
  ForwardSolution sol(mesh, basis, gamma);
  sol.solver_ = std::make_shared<const DirichletSolver>(mesh, gamma);
  sol.gradients_.resize(2 * mesh.num_triangles(), basis.size);
  for (int i = 0; i < basis.size; ++i)
    sol.gradients_.col(i) = element_gradients(mesh, sol.solver_->solve(basis.traces.col(i)));
  return sol;
}

namespace {

// G1^T diag(|T| kappa) G2 with kappa per element.
Eigen::MatrixXd weighted_gram(const Mesh& mesh, const Eigen::MatrixXd& g1, const Eigen::MatrixXd& g2,
                              const Eigen::VectorXd& kappa) {
  const Eigen::VectorXd weight = repeat_per_component(mesh.element_areas().cwiseProduct(kappa));
  return g1.transpose() * weight.asDiagonal() * g2;
}

void require_element_function(const Mesh& mesh, const Eigen::VectorXd& w) {
  if (w.size() != mesh.num_triangles()) throw InvalidArgument("element function size mismatch");
  if (!w.allFinite()) throw InvalidArgument("element function must be finite");
}

void require_compatible(const ForwardSolution& a, const ForwardSolution& b) {
  if (&a.mesh() != &b.mesh() || &a.basis() != &b.basis())
    throw InvalidArgument("forward solutions belong to different meshes or bases");
}

}  // namespace

OperatorOnVD dtn_form(const ForwardSolution& sol) {
  const auto& g = sol.lift_gradients();
  return OperatorOnVD(weighted_gram(sol.mesh(), g, g, sol.conductivity().values()), "Lambda_gamma");
}

OperatorOnVD dtn_form(const Mesh& mesh, const Conductivity& gamma, const BoundaryBasis& basis) {
  return dtn_form(ForwardSolution::compute(mesh, basis, gamma));
}

namespace {

Eigen::MatrixXd cross_matrix(const ForwardSolution& s1, const ForwardSolution& s2) {
  require_compatible(s1, s2);
  const Eigen::VectorXd diff = s1.conductivity().values() - s2.conductivity().values();
  return weighted_gram(s1.mesh(), s1.lift_gradients(), s2.lift_gradients(), diff);
}

}  // namespace

OperatorOnVD dtn_difference_cross(const ForwardSolution& s1, const ForwardSolution& s2) {
  return OperatorOnVD(cross_matrix(s1, s2), "Lambda_1 - Lambda_2 (cross)");
}

double galerkin_mismatch(const ForwardSolution& s1, const ForwardSolution& s2) {
  const OperatorOnVD l1 = dtn_form(s1);
  const OperatorOnVD l2 = dtn_form(s2);
  const Eigen::MatrixXd energy_route = (l1 - l2).matrix();
  // unsymmetrized, so any asymmetry of the cross route counts as mismatch
  const Eigen::MatrixXd cross_route = cross_matrix(s1, s2);
  const double floor = 1e-14 * (hs_norm(l1) + hs_norm(l2));
  const double denom = std::max({energy_route.norm(), cross_route.norm(), floor});
  if (denom == 0.0) return 0.0;
  return (energy_route - cross_route).norm() / denom;
}

OperatorOnVD forward_F(const ForwardSolution& sol, const ForwardSolution& background) {
  require_compatible(sol, background);
  const Eigen::VectorXd& bg = background.conductivity().values();
  if ((bg.array() != 1.0).any()) throw InvalidArgument("forward_F background must be gamma = 1");
  const double mismatch = galerkin_mismatch(sol, background);
  if (!(mismatch <= kGalerkinTolerance))
    throw ConsistencyError("energy and cross formulas for F disagree: relative mismatch " +
                           std::to_string(mismatch));
  return (dtn_form(sol) - dtn_form(background)).relabeled("F(gamma)");
}

OperatorOnVD forward_F(const Mesh& mesh, const Conductivity& gamma, const BoundaryBasis& basis) {
  const auto sol = ForwardSolution::compute(mesh, basis, gamma);
  const auto one = ForwardSolution::compute(mesh, basis, Conductivity::uniform(mesh, 1.0, 1.0, 1.0));
  return forward_F(sol, one);
}

OperatorOnVD derivative_form(const ForwardSolution& sol, const Eigen::VectorXd& w) {
  require_element_function(sol.mesh(), w);
  const auto& g = sol.lift_gradients();
  return OperatorOnVD(weighted_gram(sol.mesh(), g, g, w), "F'[gamma]w");
}

OperatorOnVD derivative_form(const Mesh& mesh, const Conductivity& gamma, const Eigen::VectorXd& w,
                             const BoundaryBasis& basis) {
  return derivative_form(ForwardSolution::compute(mesh, basis, gamma), w);
}

Eigen::VectorXd derivative_adjoint(const ForwardSolution& sol, const Eigen::MatrixXd& s) {
  const Index K = sol.basis().size;
  if (s.rows() != K || s.cols() != K) throw InvalidArgument("adjoint argument has wrong shape");
  const double scale = std::max(s.norm(), 1e-300);
  if ((s - s.transpose()).norm() > 1e-12 * scale)
    throw InvalidArgument("derivative_adjoint requires a symmetric argument");

  const auto& g = sol.lift_gradients();
  // row r of g holds one gradient component of all K lifts on one element
  const Eigen::VectorXd per_row = ((g * s).array() * g.array()).rowwise().sum();
  Eigen::VectorXd out(sol.mesh().num_triangles());
  for (Index t = 0; t < out.size(); ++t) out[t] = per_row[2 * t] + per_row[2 * t + 1];
  return out;
}

Eigen::VectorXd derivative_adjoint(const ForwardSolution& sol, const OperatorOnVD& s) {
  return derivative_adjoint(sol, s.matrix());
}

OperatorOnVD second_derivative_form(const ForwardSolution& sol, const Eigen::VectorXd& w) {
  const Mesh& mesh = sol.mesh();
  require_element_function(mesh, w);
  const DiscreteOperators ops = DiscreteOperators::build(mesh);
  const Eigen::VectorXd hw = repeat_per_component(mesh.element_areas().cwiseProduct(w));
  const Index K = sol.basis().size;

  // A(gamma) du_i = -G_int^T W H_w grad u_i ;  F''_ij = -2 a_gamma(du_i, du_j)
  const Eigen::MatrixXd rhs = -(ops.gradient_interior.transpose() * (hw.asDiagonal() * sol.lift_gradients()));
  Eigen::MatrixXd du(mesh.num_interior_nodes(), K);
  for (Index i = 0; i < K; ++i) du.col(i) = sol.solver().solve_interior(rhs.col(i));
  const Eigen::MatrixXd ddu = ops.gradient_interior * du;
  return OperatorOnVD(-2.0 * weighted_gram(mesh, ddu, ddu, sol.conductivity().values()),
                      "F''[gamma](w,w)");
}

OperatorOnVD taylor_remainder(const ForwardSolution& gamma, const ForwardSolution& dagger) {
  require_compatible(gamma, dagger);
  const Eigen::VectorXd delta = gamma.conductivity().values() - dagger.conductivity().values();
  return (dtn_form(gamma) - dtn_form(dagger) - derivative_form(gamma, delta)).relabeled("B(gamma,gamma_dagger)");
}

OperatorOnVD taylor_remainder(const Mesh& mesh, const Conductivity& gamma,
                              const Conductivity& dagger, const BoundaryBasis& basis) {
  return taylor_remainder(ForwardSolution::compute(mesh, basis, gamma),
                          ForwardSolution::compute(mesh, basis, dagger));
}

ConductivityPair::ConductivityPair(const Mesh& mesh, const BoundaryBasis& basis,
                                   const Conductivity& gamma, const Conductivity& dagger)
    : gamma_(ForwardSolution::compute(mesh, basis, gamma)),
      dagger_(ForwardSolution::compute(mesh, basis, dagger)),
      delta_(gamma.values() - dagger.values()),
      xi_dagger_(contraction(gamma, dagger)),
      xi_(contraction(dagger, gamma)),
      lambda_gamma_(dtn_form(gamma_)),
      lambda_dagger_(dtn_form(dagger_)) {}

double ConductivityPair::alpha_lower() const {
  return std::min(gamma_.conductivity().lower_bound(), dagger_.conductivity().lower_bound());
}

OperatorOnVD ConductivityPair::remainder() const {
  return (lambda_gamma_ - lambda_dagger_ - derivative_form(gamma_, delta_)).relabeled("B(gamma,gamma_dagger)");
}

double contraction(const Conductivity& a, const Conductivity& b) {
  if (a.size() != b.size()) throw InvalidArgument("conductivity size mismatch");
  if (a.size() == 0) return 0.0;
  return ((a.values() - b.values()).array() / b.values().array()).abs().maxCoeff();
}

Eigen::MatrixXd projector_R(const Mesh& mesh, const Conductivity& gamma) {
  const DiscreteOperators ops = DiscreteOperators::build(mesh);
  const DirichletSolver solver(mesh, gamma);
  const Eigen::VectorXd sqrt_gamma = repeat_per_component(gamma.values().cwiseSqrt());
  const Eigen::MatrixXd gi = ops.gradient_interior;
  // right factor G_int^T W H_sqrt(gamma), N_I x 2T
  const Eigen::MatrixXd right = gi.transpose() * ops.weights.cwiseProduct(sqrt_gamma).asDiagonal();
  Eigen::MatrixXd solved(right.rows(), right.cols());
  for (Index c = 0; c < right.cols(); ++c) solved.col(c) = solver.solve_interior(right.col(c));
  return sqrt_gamma.asDiagonal() * (gi * solved);
}

double w_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& weights) {
  return std::sqrt((v.array().square() * weights.array()).sum());
}

double w_operator_norm(const Eigen::MatrixXd& m, const Eigen::VectorXd& weights) {
  const Eigen::VectorXd s = weights.cwiseSqrt();
  const Eigen::MatrixXd similar = s.asDiagonal() * m * s.cwiseInverse().asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(similar);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

double resolvent_identity_check(const Mesh& mesh, const Conductivity& gamma1,
                                const Conductivity& gamma2, const Eigen::VectorXd& boundary_values,
                                double margin) {
  const double xi = contraction(gamma1, gamma2);
  if (!(xi < 1.0) || !(xi <= margin))
    throw PreconditionError("resolvent identity needs ||(gamma1-gamma2)/gamma2||_inf = " +
                            std::to_string(xi) + " <= " + std::to_string(margin) + " < 1");

  const DiscreteOperators ops = DiscreteOperators::build(mesh);
  const DirichletSolver solver1(mesh, gamma1);
  const DirichletSolver solver2(mesh, gamma2);
  const GradientField grad1 = ops.gradient * solver1.solve(boundary_values);
  const GradientField grad2 = ops.gradient * solver2.solve(boundary_values);

  const Eigen::VectorXd diff = repeat_per_component(gamma2.values() - gamma1.values());
  const Eigen::VectorXd rhs =
      ops.gradient_interior.transpose() * ops.weights.cwiseProduct(diff).cwiseProduct(grad1);
  const GradientField correction = ops.gradient_interior * solver2.solve_interior(rhs);
  const GradientField rebuilt = grad1 - correction;

  const double scale = w_norm(grad2, ops.weights);
  const double err = w_norm(grad2 - rebuilt, ops.weights);
  return scale > 0.0 ? err / scale : err;
}

GradientField rotated_gradient(const Mesh& mesh, const Eigen::VectorXd& phi) {
  const GradientField g = element_gradients(mesh, phi);
  GradientField r(g.size());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    r[2 * t] = g[2 * t + 1];
    r[2 * t + 1] = -g[2 * t];
  }
  return r;
}

ProjectorReport projector_checks(const Mesh& mesh, const Conductivity& gamma, int fields, std::uint64_t seed) {
  const DiscreteOperators ops = DiscreteOperators::build(mesh);
  const Eigen::MatrixXd r = projector_R(mesh, gamma);
  const Eigen::VectorXd& w = ops.weights;
  ProjectorReport out;
  out.idempotence = w_operator_norm(r * r - r, w);
  // W R is symmetric iff R is self-adjoint in the W inner product
  const Eigen::MatrixXd wr = w.asDiagonal() * r;
  out.self_adjointness = w_operator_norm(w.cwiseInverse().asDiagonal() * (wr - wr.transpose()), w);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::VectorXd inv_sqrt = repeat_per_component(gamma.values().cwiseSqrt().cwiseInverse());
  out.positivity = std::numeric_limits<double>::infinity();
  for (int k = 0; k < fields; ++k) {
    Eigen::VectorXd phi(mesh.num_nodes());
    for (Index i = 0; i < phi.size(); ++i) phi[i] = normal(rng);
    // H_{1/sqrt(gamma)} rot(phi) is discretely sqrt(gamma)-divergence free
    const GradientField z = inv_sqrt.cwiseProduct(rotated_gradient(mesh, phi));
    out.annihilation = std::max(out.annihilation, w_norm(r * z, w) / w_norm(z, w));

    GradientField y(r.cols());
    for (Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
    const double yy = w_norm(y, w);
    out.positivity = std::min(out.positivity, y.dot(w.cwiseProduct(r * y)) / (yy * yy));
  }
  if (fields <= 0) out.positivity = 0.0;
  return out;
}

}  // namespace eitlab
