#include "eitlab/tcc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "eitlab/errors.hpp"

namespace eitlab {

const char* to_string(Linearization point) {
  return point == Linearization::at_gamma ? "gamma" : "gamma_dagger";
}

LinearizedForward::LinearizedForward(const ForwardSolution& sol)
    : k_(sol.basis().size), areas_(sol.mesh().element_areas()) {
  const auto& g = sol.lift_gradients();
  const Index T = sol.mesh().num_triangles();
  jacobian_.resize(k_ * k_, T);
  for (Index t = 0; t < T; ++t) {
    const Eigen::MatrixXd block = g.middleRows(2 * t, 2);
    const Eigen::MatrixXd e = areas_[t] * (block.transpose() * block);
    jacobian_.col(t) = Eigen::Map<const Eigen::VectorXd>(e.data(), e.size());
  }
}

OperatorOnVD LinearizedForward::apply(const Eigen::VectorXd& w) const {
  if (w.size() != jacobian_.cols()) throw InvalidArgument("element function size mismatch");
  const Eigen::VectorXd v = jacobian_ * w;
  return OperatorOnVD(Eigen::Map<const Eigen::MatrixXd>(v.data(), k_, k_), "F'w");
}

double LinearizedForward::norm_of(const Eigen::VectorXd& w) const {
  if (w.size() != jacobian_.cols()) throw InvalidArgument("element function size mismatch");
  return (jacobian_ * w).norm();
}

namespace {

// relative slack for gate comparisons that can hold with equality
constexpr double kGateSlack = 1e-12;

bool leq(double a, double b) { return a <= b * (1.0 + kGateSlack); }

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double resolve_alpha(const ConductivityPair& pair, double alpha) {
  if (alpha <= 0.0) return pair.alpha_lower();
  const double floor = pair.gamma().conductivity().values().minCoeff();
  if (alpha > floor * (1.0 + 1e-15))
    throw InvalidArgument("alpha " + std::to_string(alpha) + " exceeds min(gamma) = " + std::to_string(floor));
  return alpha;
}

void require_both_contractions(const ConductivityPair& pair) {
  if (!(pair.xi_dagger() < 1.0) || !(pair.xi() < 1.0))
    throw PreconditionError("both contraction parameters must be below 1 (xi_dagger = " +
                            std::to_string(pair.xi_dagger()) + ", xi = " + std::to_string(pair.xi()) + ")");
}

}  // namespace

TccReport tcc_measure(const ConductivityPair& pair, Linearization point, double eta_target) {
  const OperatorOnVD df = pair.data_difference();
  TccReport r;
  r.linearization = point;
  r.xi_dagger = pair.xi_dagger();
  r.xi = pair.xi();
  r.data_norm = hs_norm(df);
  const double scale = std::max(hs_norm(pair.lambda_gamma()), hs_norm(pair.lambda_dagger()));
  if (r.data_norm < 1e-13 * scale)
    throw DegeneratePair("F(gamma) and F(gamma_dagger) coincide to " + std::to_string(r.data_norm));

  const Eigen::VectorXd& d = pair.delta();
  const OperatorOnVD lin_g = pair.derivative_at_gamma(d);
  const OperatorOnVD lin_d = pair.derivative_at_dagger(d);
  r.eta_stc_gamma = hs_norm(df - lin_g) / r.data_norm;
  r.eta_stc_dagger = hs_norm(df - lin_d) / r.data_norm;

  // F(x~) - F(x) - F'(x)(x~ - x) at x = gamma is -(dF - F'[g] d); every
  // quantity below is invariant under the common sign flip
  const OperatorOnVD& j = point == Linearization::at_gamma ? lin_g : lin_d;
  const OperatorOnVD res = df - j;
  r.eta_stc = point == Linearization::at_gamma ? r.eta_stc_gamma : r.eta_stc_dagger;
  r.linear_norm = hs_norm(j);
  r.residual_norm = hs_norm(res);
  r.qcon_value = hs_inner(j, df);
  r.eta_wtc = hs_inner(res, df) / (r.data_norm * r.data_norm);

  const double lhs = r.residual_norm * r.residual_norm;
  const double rhs = (2.0 * r.eta_wtc - 1.0) * r.data_norm * r.data_norm + r.linear_norm * r.linear_norm;
  r.para_residual = std::abs(lhs - rhs) / std::max({lhs, r.data_norm * r.data_norm, r.linear_norm * r.linear_norm});

  const double lin_norm_g = hs_norm(lin_g);
  const Eigen::VectorXd sq = d.array().square() / pair.dagger().conductivity().values().array();
  r.zeta = lin_norm_g > 0 ? hs_norm(pair.derivative_at_gamma(sq)) / lin_norm_g
                          : std::numeric_limits<double>::infinity();
  r.theta_eta = theta_eta(eta_target, pair.alpha_lower());
  return r;
}

ZetaReport sufficient_zeta(const ConductivityPair& pair) {
  if (!(pair.xi_dagger() < 1.0)) throw PreconditionError("xi_dagger must be below 1");
  const Eigen::VectorXd& d = pair.delta();
  const double denom = hs_norm(pair.derivative_at_gamma(d));
  if (!(denom > 0.0)) throw DegeneratePair("F'[gamma](gamma - gamma_dagger) vanishes");
  const Eigen::VectorXd sq = d.array().square() / pair.dagger().conductivity().values().array();

  ZetaReport z;
  z.zeta = hs_norm(pair.derivative_at_gamma(sq)) / denom;
  z.applicable = z.zeta < 1.0;
  z.predicted_eta = z.applicable ? z.zeta / (1.0 - z.zeta) : std::numeric_limits<double>::infinity();
  const TccReport t = tcc_measure(pair, Linearization::at_gamma);
  z.measured_eta = t.eta_stc;
  z.eta_wtc = t.eta_wtc;
  if (z.applicable) z.holds = z.measured_eta <= z.predicted_eta + kEtaSlack;
  if (z.zeta <= 1.0) z.weak_half = z.eta_wtc <= 0.5 + kEtaSlack;
  return z;
}

double theta_eta(double eta, double alpha) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1], got " + std::to_string(eta));
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  return alpha * eta / (4.0 + eta);
}

double theta_eta_sharp(double eta, double alpha, double xi) {
  theta_eta(eta, alpha);
  if (!(xi >= 0.0 && xi < 1.0)) throw InvalidArgument("xi must lie in [0, 1)");
  return alpha * eta / (3.0 + xi + eta);
}

MjmiReport check_mjmi(const ConductivityPair& pair, double eta, double alpha) {
  require_both_contractions(pair);
  MjmiReport m;
  m.eta = eta;
  m.alpha = resolve_alpha(pair, alpha);
  m.theta = theta_eta(eta, m.alpha);
  m.theta_sharp = theta_eta_sharp(eta, m.alpha, pair.xi());

  const Eigen::VectorXd& d = pair.delta();
  m.lhs = hs_norm(pair.derivative_at_dagger(d.array().square().matrix()));
  m.linear_norm = hs_norm(pair.derivative_at_dagger(d));
  m.mjmi_holds = leq(m.lhs, m.theta * m.linear_norm);
  m.mjmi_sharp_holds = leq(m.lhs, m.theta_sharp * m.linear_norm);

  const TccReport t = tcc_measure(pair, Linearization::at_gamma);
  m.measured_eta = t.eta_stc_gamma;
  m.measured_eta_dagger = t.eta_stc_dagger;
  if (m.mjmi_holds || m.mjmi_sharp_holds) m.guarantee_valid = m.measured_eta <= eta + kEtaSlack;

  m.c_measured = hs_norm(pair.derivative_at_dagger(d.cwiseAbs())) / m.linear_norm;
  m.mjmi1_gate = leq(sup(d) * m.c_measured, m.theta);
  if (m.mjmi1_gate && !m.mjmi_holds) m.guarantee_valid = false;
  return m;
}

double monotone_radius(const Eigen::VectorXd& direction, double eta, double alpha) {
  const double size = sup(direction);
  if (!(size > 0.0)) throw InvalidArgument("direction is zero");
  if (direction.minCoeff() < 0.0 && direction.maxCoeff() > 0.0)
    throw InvalidArgument("direction changes sign");
  return std::min(theta_eta(eta, alpha), alpha) / size;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> split_parts(const Eigen::VectorXd& d) {
  return {d.cwiseMax(0.0), (-d).cwiseMax(0.0)};
}

LinfBracket linf_norm_bracket(const LinearizedForward& lin, int restarts, std::uint64_t seed) {
  const Eigen::MatrixXd& j = lin.jacobian();
  const Index T = j.cols();
  LinfBracket b;
  b.upper = lin.norm_of(Eigen::VectorXd::Ones(T));
  for (Index t = 0; t < T; ++t) b.row_sum += j.col(t).norm();

  const Eigen::VectorXd col_sq = j.colwise().squaredNorm();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    Eigen::VectorXd s(T);
    for (Index t = 0; t < T; ++t) s[t] = coin(rng) ? 1.0 : -1.0;
    Eigen::VectorXd v = j * s;
    for (bool improved = true; improved;) {
      improved = false;
      for (Index t = 0; t < T; ++t) {
        // ||v - 2 s_t J_t||^2 - ||v||^2
        const double gain = -4.0 * s[t] * j.col(t).dot(v) + 4.0 * col_sq[t];
        if (gain > 1e-14 * v.squaredNorm()) {
          v -= 2.0 * s[t] * j.col(t);
          s[t] = -s[t];
          improved = true;
        }
      }
    }
    b.lower = std::max(b.lower, v.norm());
  }
  return b;
}

namespace {

Eigen::VectorXd ball_indicator(const Mesh& mesh, const Eigen::Vector2d& center, double radius) {
  Eigen::VectorXd chi = Eigen::VectorXd::Zero(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t)
    if ((mesh.centroid(t) - center).norm() < radius) chi[t] = 1.0;
  return chi;
}

bool ball_inside(const Eigen::Vector2d& c, double m) {
  constexpr double eps = 1e-12;
  return c.x() - m >= -eps && c.x() + m <= 1.0 + eps && c.y() - m >= -eps && c.y() + m <= 1.0 + eps;
}

}  // namespace

double ball_response(const Mesh& mesh, const LinearizedForward& lin, const Eigen::Vector2d& center,
                     double radius) {
  return lin.norm_of(ball_indicator(mesh, center, radius));
}

double kappa(const Mesh& mesh, const LinearizedForward& lin, double m) {
  if (!(m >= 0.0)) throw InvalidArgument("ball radius must be nonnegative");
  double best = std::numeric_limits<double>::quiet_NaN();
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector2d c = mesh.centroid(t);
    if (!ball_inside(c, m)) continue;
    const double v = ball_response(mesh, lin, c, m);
    if (std::isnan(best) || v < best) best = v;
  }
  return best;
}

UnbalancedReport check_unbalanced(const ConductivityPair& pair, double eta, double alpha,
                                  const UnbalancedOptions& options) {
  require_both_contractions(pair);
  if (!(options.c1 > 0.0)) throw InvalidArgument("C1 must be positive");
  UnbalancedReport u;
  u.eta = eta;
  u.theta = theta_eta(eta, resolve_alpha(pair, alpha));

  const Mesh& mesh = pair.mesh();
  const LinearizedForward lin(pair.dagger());
  const Eigen::VectorXd& d = pair.delta();
  const auto [p, n] = split_parts(d);
  u.sup_norm = sup(d);
  u.norm_p = lin.norm_of(p);
  u.norm_n = lin.norm_of(n);
  u.norm_d = lin.norm_of(d);

  const double big = std::max(u.norm_p, u.norm_n);
  if (!(u.norm_d > 0.0) || std::abs(u.norm_p - u.norm_n) <= 1e-12 * big) {
    u.applicable = false;
  } else {
    u.c_fir = std::min(u.norm_p, u.norm_n) / u.norm_d;
    u.gate_fir = leq(u.sup_norm * (2.0 * u.c_fir + 1.0), u.theta);
    u.nu_fir1 = std::min(u.norm_p, u.norm_n) / big;
    u.gate_fir1 = leq(u.sup_norm, (u.theta / 3.0) * (1.0 - u.nu_fir1));
  }

  // final gate, dominant part in the role of p
  const double sup_p = sup(p), sup_n = sup(n);
  u.dominant_sup = std::max(sup_p, sup_n);
  u.minor_sup = std::min(sup_p, sup_n);
  u.c2 = u.sup_norm;
  u.nu_final = 1.0 - 3.0 * u.c2 / u.theta;
  u.linf = linf_norm_bracket(lin, options.restarts, options.seed);
  if (sup_p != sup_n && u.dominant_sup > 0.0) {
    const Eigen::VectorXd& dom = sup_p > sup_n ? p : n;
    Index arg = 0;
    dom.maxCoeff(&arg);
    const Eigen::Vector2d x0 = mesh.centroid(arg);
    const double m = u.dominant_sup / options.c1;
    const Eigen::VectorXd chi = ball_indicator(mesh, x0, m);
    u.ball_check = ball_inside(x0, m);
    for (Index t = 0; t < chi.size() && u.ball_check; ++t)
      if (chi[t] > 0.0 && dom[t] < 0.5 * u.dominant_sup) u.ball_check = false;
    u.kappa_value = kappa(mesh, lin, m);
    if (!std::isnan(u.kappa_value) && u.nu_final > 0.0 && u.linf.upper > 0.0) {
      u.psi = u.dominant_sup * u.kappa_value * u.nu_final / (2.0 * u.linf.upper);
      u.gate_final = u.ball_check && leq(u.minor_sup, u.psi);
    }
  }

  const Eigen::VectorXd sq = d.array().square();
  u.mjmi_holds = leq(lin.norm_of(sq), u.theta * u.norm_d);
  if (u.norm_d > 0.0) u.measured_eta = tcc_measure(pair, Linearization::at_gamma).eta_stc_gamma;
  if (u.gate_fir || u.gate_fir1 || u.gate_final)
    u.guarantee_valid = u.mjmi_holds && u.measured_eta <= eta + kEtaSlack;
  return u;
}

SourceElement source_condition_element(const ForwardSolution& dagger, double mu,
                                       const Eigen::VectorXd& omega, double sup_scale, double eta) {
  if (!(mu >= 0.0)) throw InvalidArgument("mu must be nonnegative");
  if (!(sup_scale > 0.0)) throw InvalidArgument("target sup norm must be positive");
  const LinearizedForward lin(dagger);
  const Eigen::VectorXd& areas = lin.areas();
  if (omega.size() != areas.size()) throw InvalidArgument("omega size mismatch");

  // N = A^-1 J^T J is self-adjoint in the A inner product; N^mu = A^-1/2 (A^-1/2 J^T J A^-1/2)^mu A^1/2
  const Eigen::VectorXd ah = areas.cwiseSqrt();
  const Eigen::VectorXd aih = ah.cwiseInverse();
  const Eigen::MatrixXd jt = lin.jacobian() * aih.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jt.transpose() * jt);
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd lam_mu = mu == 0.0 ? Eigen::VectorXd::Ones(lam.size()).eval()
                                            : lam.array().pow(mu).matrix().eval();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::VectorXd pert = aih.asDiagonal() * (v * (lam_mu.asDiagonal() * (v.transpose() * ah.cwiseProduct(omega))));

  const double size = sup(pert);
  if (!(size > 0.0)) throw InvalidArgument("omega lies in the kernel of the normal operator");
  const double factor = sup_scale / size;

  SourceElement s;
  s.mu = mu;
  s.perturbation = factor * pert;
  s.omega = factor * omega;
  dagger.conductivity().with_values(dagger.conductivity().values() + s.perturbation);

  auto x_norm = [&](const Eigen::VectorXd& w) { return std::sqrt(areas.dot(w.cwiseAbs2())); };
  s.x_norm = x_norm(s.perturbation);
  s.omega_norm = x_norm(s.omega);
  s.image_norm = lin.norm_of(s.perturbation);
  s.holder_rhs = std::pow(s.omega_norm, 1.0 / (2.0 * mu + 1.0)) *
                 std::pow(s.image_norm, 2.0 * mu / (2.0 * mu + 1.0));
  s.holder_holds = s.x_norm <= s.holder_rhs * (1.0 + 1e-10) + 1e-300;
  s.embedding_constant = 1.0 / std::sqrt(areas.minCoeff());

  const double L = lin.norm_of(Eigen::VectorXd::Ones(areas.size()));
  const double theta = theta_eta(eta, dagger.conductivity().lower_bound());
  if (std::abs(2.0 * mu - 1.0) > 1e-12 && s.omega_norm > 0.0) {
    const double base = theta / (L * std::pow(s.omega_norm, 2.0 / (1.0 + 2.0 * mu)));
    s.corollary_radius = std::pow(base, (2.0 * mu + 1.0) / (2.0 * mu - 1.0));
  } else {
    s.corollary_radius = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

double star_seminorm(const LinearizedForward& lin, const Eigen::VectorXd& w) {
  return lin.norm_of(w.cwiseAbs());
}

FiniteDimConstant finite_dim_constant(const LinearizedForward& lin,
                                      const std::vector<Eigen::VectorXd>& patterns, int samples,
                                      std::uint64_t seed) {
  if (patterns.empty()) throw InvalidArgument("empty subspace");
  if (samples < 0) throw InvalidArgument("negative sample count");
  const Index T = lin.jacobian().cols();
  const auto d = static_cast<Index>(patterns.size());
  Eigen::MatrixXd basis(T, d);
  for (Index k = 0; k < d; ++k) {
    if (patterns[k].size() != T) throw InvalidArgument("pattern size mismatch");
    basis.col(k) = patterns[k];
  }
  const Eigen::MatrixXd image = lin.jacobian() * basis;
  FiniteDimConstant out;
  out.sigma_min = Eigen::JacobiSVD<Eigen::MatrixXd>(image).singularValues().minCoeff();
  if (!(out.sigma_min > 1e-10))
    throw PreconditionError("F'[gamma_dagger] is not injective on the subspace (sigma_min = " +
                            std::to_string(out.sigma_min) + ")");

  auto ratio = [&](const Eigen::VectorXd& c) {
    const Eigen::VectorXd w = basis * c;
    return lin.norm_of(w.cwiseAbs()) / (image * c).norm();
  };
  if (d <= 12) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (d - 1)); ++mask) {
      Eigen::VectorXd c(d);
      c[0] = 1.0;
      for (Index k = 1; k < d; ++k) c[k] = (mask >> (k - 1)) & 1 ? -1.0 : 1.0;
      out.estimate = std::max(out.estimate, ratio(c));
      ++out.samples;
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd c(d);
    for (Index k = 0; k < d; ++k) c[k] = normal(rng);
    if (c.norm() == 0.0) continue;
    out.estimate = std::max(out.estimate, ratio(c));
    ++out.samples;
  }
  return out;
}

double bisect_zeta_amplitude(const Mesh& mesh, const BoundaryBasis& basis, const Conductivity& dagger,
                             const Eigen::VectorXd& direction, double target, double tol) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("target zeta must lie in (0, 1)");
  const double rel = sup(direction.cwiseQuotient(dagger.values()));
  if (!(rel > 0.0)) throw InvalidArgument("direction is zero");

  auto zeta_at = [&](double a) {
    Eigen::VectorXd v = dagger.values() + a * direction;
    const double lo = std::min(dagger.lower_bound(), v.minCoeff());
    const double hi = std::max(dagger.upper_bound(), v.maxCoeff());
    const ForwardSolution g = ForwardSolution::compute(mesh, basis, Conductivity(std::move(v), lo, hi));
    const Eigen::VectorXd d = a * direction;
    const Eigen::VectorXd sq = d.array().square() / dagger.values().array();
    return hs_norm(derivative_form(g, sq)) / hs_norm(derivative_form(g, d));
  };

  double lo = 0.0, hi = 0.99 / rel;
  if (zeta_at(hi) < target) throw PreconditionError("target zeta not reached inside the contraction ball");
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (zeta_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace eitlab
