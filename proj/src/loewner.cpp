#include "eitlab/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "eitlab/errors.hpp"

namespace eitlab {

LoewnerCertificate loewner_leq(const OperatorOnVD& a, const OperatorOnVD& b, double tol) {
  return loewner_leq(a, b, tol, a.label(), b.label());
}

LoewnerCertificate loewner_leq(const OperatorOnVD& a, const OperatorOnVD& b, double tol,
                               std::string lhs_label, std::string rhs_label) {
  if (a.dim() != b.dim()) throw InvalidArgument("Loewner comparison of operators with different dimensions");
  LoewnerCertificate cert;
  cert.lhs_label = std::move(lhs_label);
  cert.rhs_label = std::move(rhs_label);
  cert.tolerance = tol;
  const Eigen::VectorXd gap = eigenvalues(b - a);
  cert.lambda_min_gap = gap.size() ? gap[0] : 0.0;
  cert.scale = std::max(spectral_norm(a), spectral_norm(b));
  cert.pass = cert.lambda_min_gap >= -tol * std::max(cert.scale, kScaleFloor);
  return cert;
}

nlohmann::json certificate_row(const LoewnerCertificate& cert, std::uint64_t seed, int mesh_n, int K) {
  return {{"inequality", cert.inequality()},
          {"lambda_min_gap", cert.lambda_min_gap},
          {"scale", cert.scale},
          {"tol", cert.tolerance},
          {"pass", cert.pass},
          {"seed", seed},
          {"mesh_n", mesh_n},
          {"K", K}};
}

namespace {

void require_contraction(const ConductivityPair& pair, double limit) {
  if (!(limit <= 1.0)) throw InvalidArgument("contraction limit must be <= 1");
  if (!(pair.xi_dagger() < limit))
    throw PreconditionError("||(gamma - gamma_dagger)/gamma_dagger||_inf = " +
                            std::to_string(pair.xi_dagger()) + " is not below " + std::to_string(limit));
}

// (gamma - gamma_dagger)^2 / gamma_dagger
Eigen::VectorXd squared_over_dagger(const ConductivityPair& pair) {
  return pair.delta().array().square() / pair.dagger().conductivity().values().array();
}

struct SpdSolve {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double condition = 0;
};

SpdSolve factor_spd(const OperatorOnVD& m, const char* what) {
  SpdSolve out;
  const Eigen::VectorXd ev = eigenvalues(m);
  const double top = ev.size() ? ev[ev.size() - 1] : 0.0;
  const double bottom = ev.size() ? ev[0] : 0.0;
  out.condition = bottom > 0 ? top / bottom : std::numeric_limits<double>::infinity();
  out.llt.compute(m.matrix());
  if (out.llt.info() != Eigen::Success || !(bottom > 1e-13 * top))
    throw BasisRankError(std::string(what) + " is not numerically positive definite (condition " +
                         std::to_string(out.condition) + ")");
  return out;
}

// x^T m^-1 x for a symmetric x, realized with a symmetric-definite solve
OperatorOnVD sandwich_inverse(const OperatorOnVD& x, const SpdSolve& m, std::string label) {
  return OperatorOnVD(x.matrix() * m.llt.solve(x.matrix()), std::move(label));
}

}  // namespace

std::array<LoewnerCertificate, 2> certify_main1(const ConductivityPair& pair, double tol,
                                                double contraction_limit) {
  require_contraction(pair, contraction_limit);
  const OperatorOnVD b = pair.remainder();
  const OperatorOnVD bound = pair.derivative_at_gamma(squared_over_dagger(pair));
  const OperatorOnVD zero = OperatorOnVD::zero(b.dim());
  return {loewner_leq(zero, b, tol, "0", "B(g,gd)"),
          loewner_leq(b, bound, tol, "B(g,gd)", "F'[g]((g-gd)^2/gd)")};
}

UtilCertificates certify_util(const ConductivityPair& pair, double tol, double contraction_limit) {
  require_contraction(pair, contraction_limit);
  const Eigen::VectorXd& g = pair.gamma().conductivity().values();
  const Eigen::VectorXd& gd = pair.dagger().conductivity().values();

  const OperatorOnVD b = pair.remainder();
  const OperatorOnVD main_bound = pair.derivative_at_gamma(squared_over_dagger(pair));
  const OperatorOnVD dl = pair.data_difference();

  UtilCertificates out;
  const SpdSolve lambda_dagger = factor_spd(pair.lambda_dagger(), "Lambda_gamma_dagger");
  out.condition_lambda_dagger = lambda_dagger.condition;
  const OperatorOnVD util1 = main_bound - sandwich_inverse(dl, lambda_dagger, "");

  const Eigen::VectorXd cross = pair.delta().array() * g.array() / gd.array();
  const Eigen::VectorXd ratio = g.array().square() / gd.array();
  const OperatorOnVD d_cross = pair.derivative_at_gamma(cross);
  const SpdSolve middle = factor_spd(pair.derivative_at_gamma(ratio), "F'[g](g^2/gd)");
  out.condition_middle = middle.condition;
  const OperatorOnVD util2 = main_bound - sandwich_inverse(d_cross, middle, "");

  out.util1 = loewner_leq(b, util1, tol, "B(g,gd)", "F'[g]((g-gd)^2/gd) - dL Lgd^-1 dL");
  out.util2 = loewner_leq(b, util2, tol, "B(g,gd)",
                          "F'[g]((g-gd)^2/gd) - F'[g](d g/gd) F'[g](g^2/gd)^-1 F'[g](d g/gd)");
  out.util1_sharper = loewner_leq(util1, main_bound, tol, "F'[g]((g-gd)^2/gd) - dL Lgd^-1 dL",
                                  "F'[g]((g-gd)^2/gd)");
  return out;
}

std::array<LoewnerCertificate, 4> certify_conmo(const ConductivityPair& pair, double tol,
                                                double contraction_limit) {
  require_contraction(pair, contraction_limit);
  const Eigen::VectorXd& g = pair.gamma().conductivity().values();
  const Eigen::VectorXd& gd = pair.dagger().conductivity().values();
  const Eigen::VectorXd& d = pair.delta();
  const OperatorOnVD dl = pair.data_difference();

  const Eigen::VectorXd d_scaled_down = d.array() * gd.array() / g.array();
  const Eigen::VectorXd d_scaled_up = d.array() * g.array() / gd.array();
  return {loewner_leq(pair.derivative_at_gamma(d), dl, tol, "F'[g](g-gd)", "dL"),
          loewner_leq(dl, pair.derivative_at_dagger(d), tol, "dL", "F'[gd](g-gd)"),
          loewner_leq(pair.derivative_at_dagger(d_scaled_down), dl, tol, "F'[gd](gd/g (g-gd))", "dL"),
          loewner_leq(dl, pair.derivative_at_gamma(d_scaled_up), tol, "dL", "F'[g](g/gd (g-gd))")};
}

Babel0Certificates certify_babel0(const ConductivityPair& pair, double tol, double contraction_limit) {
  require_contraction(pair, contraction_limit);
  const Eigen::VectorXd& d = pair.delta();
  const OperatorOnVD middle = pair.derivative_at_dagger(d) - pair.derivative_at_gamma(d);
  const OperatorOnVD bound = (2.0 + pair.xi_dagger()) * pair.derivative_at_gamma(squared_over_dagger(pair));
  Babel0Certificates out;
  out.xi_dagger = pair.xi_dagger();
  out.lower = loewner_leq(OperatorOnVD::zero(middle.dim()), middle, tol, "0", "F'[gd](d) - F'[g](d)");
  out.upper = loewner_leq(middle, bound, tol, "F'[gd](d) - F'[g](d)", "(2+xi_d) F'[g](d^2/gd)");
  return out;
}

Theorem3Report certify_theorem3(const ConductivityPair& pair, double tol, double contraction_limit) {
  require_contraction(pair, contraction_limit);
  const Eigen::VectorXd& g = pair.gamma().conductivity().values();
  const Eigen::VectorXd& gd = pair.dagger().conductivity().values();
  const OperatorOnVD b = pair.remainder();
  const OperatorOnVD bound = pair.derivative_at_gamma(squared_over_dagger(pair));

  Theorem3Report out;
  out.remainder_hs = hs_norm(b);
  out.bound_hs = hs_norm(bound);
  out.mainest1_pass = out.remainder_hs <= out.bound_hs + tol * std::max(out.bound_hs, kScaleFloor);
  out.remainder_spectral = spectral_norm(b);
  out.bound_spectral = spectral_norm(bound);
  out.mainest1_spectral_pass =
      out.remainder_spectral <= out.bound_spectral + tol * std::max(out.bound_spectral, kScaleFloor);

  out.trace = bound.matrix().trace();
  const double data = hs_norm(pair.data_difference());
  const Eigen::VectorXd cross = pair.delta().array() * g.array() / gd.array();
  const double lin = hs_norm(pair.derivative_at_gamma(cross));
  if (out.trace > 0.0) {
    out.ratio_x1 = data * data / out.trace;
    out.ratio_x2 = lin * lin / out.trace;
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs >= 2 matching points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InvalidArgument("slope fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

Conductivity shifted(const Conductivity& base, const Eigen::VectorXd& shift) {
  Eigen::VectorXd v = base.values() + shift;
  if (!(v.minCoeff() > 0.0)) throw PreconditionError("perturbation leaves the positive cone");
  const double lo = std::min(base.lower_bound(), v.minCoeff());
  const double hi = std::max(base.upper_bound(), v.maxCoeff());
  return Conductivity(std::move(v), lo, hi);
}

LoewnerCertificate with_scale(LoewnerCertificate cert, double scale) {
  cert.scale = std::max(cert.scale, scale);
  cert.pass = cert.lambda_min_gap >= -cert.tolerance * std::max(cert.scale, kScaleFloor);
  return cert;
}

}  // namespace

SecondDerivativeReport second_derivative_sign(const Mesh& mesh, const BoundaryBasis& basis,
                                              const Conductivity& dagger, const Eigen::VectorXd& w,
                                              const std::vector<double>& eps_sweep, double tol) {
  if (w.size() != mesh.num_triangles()) throw InvalidArgument("direction size mismatch");
  const Eigen::VectorXd rel = w.array() / dagger.values().array();
  const double rel_max = rel.size() ? rel.cwiseAbs().maxCoeff() : 0.0;

  const ForwardSolution base = ForwardSolution::compute(mesh, basis, dagger);
  const OperatorOnVD lambda0 = dtn_form(base);
  const OperatorOnVD neg_second = -1.0 * second_derivative_form(base, w);
  const Eigen::VectorXd w2 = w.array().square() / dagger.values().array();
  const OperatorOnVD bound = 2.0 * derivative_form(base, w2);
  const OperatorOnVD zero = OperatorOnVD::zero(bound.dim());

  SecondDerivativeReport out;
  out.exact_lower = loewner_leq(zero, neg_second, tol, "0", "-F''[gd](w,w)");
  out.exact_upper = loewner_leq(neg_second, bound, tol, "-F''[gd](w,w)", "2F'[gd](w^2/gd)");
  // the bound sets the natural size; -F'' itself can vanish for special directions
  const double reference = std::max(hs_norm(bound), kScaleFloor);

  std::vector<double> eps_used, defects, central_defects;
  for (const double eps : eps_sweep) {
    if (!(eps > 0.0) || !(eps * rel_max < 1.0))
      throw PreconditionError("step " + std::to_string(eps) + " breaks the contraction condition");
    const ForwardSolution plus = ForwardSolution::compute(mesh, basis, shifted(dagger, eps * w));
    const ForwardSolution minus = ForwardSolution::compute(mesh, basis, shifted(dagger, -eps * w));
    const OperatorOnVD quotient = (2.0 / (eps * eps)) * taylor_remainder(plus, base);
    const OperatorOnVD central =
        (-1.0 / (eps * eps)) * (dtn_form(plus) - 2.0 * lambda0 + dtn_form(minus));

    SecondDerivativeStep step;
    step.eps = eps;
    // the quotient approaches -F'' at rate eps; the tolerance absorbs that
    const double eps_tol = tol + 4.0 * eps * rel_max;
    step.lower = with_scale(loewner_leq(zero, quotient, eps_tol, "0", "2B(gd+eps w,gd)/eps^2"), reference);
    step.upper = with_scale(loewner_leq(quotient, bound, eps_tol, "2B(gd+eps w,gd)/eps^2", "2F'[gd](w^2/gd)"),
                            reference);
    step.defect = hs_norm(quotient - neg_second) / reference;
    step.central_defect = hs_norm(central - neg_second) / reference;
    out.steps.push_back(step);
    eps_used.push_back(eps);
    defects.push_back(step.defect);
    central_defects.push_back(step.central_defect);
  }
  if (eps_used.size() >= 2 && hs_norm(neg_second) > 1e-12 * reference) {
    out.defect_slope = loglog_slope(eps_used, defects);
    out.central_defect_slope = loglog_slope(eps_used, central_defects);
  }
  return out;
}

}  // namespace eitlab
