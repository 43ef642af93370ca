#include <doctest.h>

#include <cmath>
#include <vector>

#include "eitlab/errors.hpp"
#include "eitlab/scenarios.hpp"
#include "eitlab/tcc.hpp"
#include "oracle.hpp"

using namespace eitlab;

namespace {

struct Fixture {
  Mesh mesh = Mesh::structured(8);
  BoundaryBasis basis = BoundaryBasis::build(mesh, 8);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_triangles());
};

ConductivityPair pair_from(const Fixture& f, const Eigen::VectorXd& g, const Eigen::VectorXd& gd) {
  const double lo = std::min(g.minCoeff(), gd.minCoeff());
  const double hi = std::max(g.maxCoeff(), gd.maxCoeff());
  return ConductivityPair(f.mesh, f.basis, Conductivity(g, lo, hi), Conductivity(gd, lo, hi));
}

}  // namespace

TEST_CASE("theta formula") {
  CHECK(theta_eta(1.0, 0.5) == 0.1);
  CHECK(theta_eta(0.5, 0.5) == doctest::Approx(0.5 * 0.5 / 4.5));
  for (double eta : {0.1, 0.25, 0.5, 0.9})
    for (double alpha : {0.2, 0.5, 1.0}) {
      CHECK(theta_eta(eta + 0.05, alpha) > theta_eta(eta, alpha));
      CHECK(theta_eta(eta, alpha + 0.1) > theta_eta(eta, alpha));
      CHECK(theta_eta_sharp(eta, alpha, 0.5) >= theta_eta(eta, alpha));
    }
  CHECK_THROWS_AS(theta_eta(0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(theta_eta(1.5, 0.5), InvalidArgument);
  CHECK_THROWS_AS(theta_eta(0.5, 0.0), InvalidArgument);
  CHECK(std::string(to_string(Linearization::at_gamma)) != to_string(Linearization::at_dagger));
}

TEST_CASE("linearized forward map reproduces the derivative form") {
  const Fixture f;
  const auto sol = ForwardSolution::compute(f.mesh, f.basis, Conductivity(oracle::random_conductivity(128, 4), 0.5, 2.0));
  const LinearizedForward lin(sol);
  CHECK(lin.dim() == 8);
  CHECK(lin.jacobian().rows() == 64);
  const Eigen::VectorXd w = oracle::random_vector(128, 5);
  CHECK((lin.apply(w).matrix() - derivative_form(sol, w).matrix()).norm() < 1e-13);
  CHECK(lin.norm_of(w) == doctest::Approx(hs_norm(derivative_form(sol, w))).epsilon(1e-12));
}

TEST_CASE("cone quantities: parallelogram identity, sign condition, degeneracy") {
  const Fixture f;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario s = random_pair(f.mesh, seed, 0.5);
    const ConductivityPair pair(f.mesh, f.basis, s.gamma_conductivity(), s.dagger_conductivity());
    for (auto point : {Linearization::at_gamma, Linearization::at_dagger}) {
      const TccReport r = tcc_measure(pair, point);
      CHECK(r.para_residual < 1e-10);
      CHECK(r.eta_stc >= 0.0);
      CHECK(std::abs(r.eta_wtc) <= r.eta_stc * (1 + 1e-12));
      CHECK(r.theta_eta == doctest::Approx(theta_eta(0.5, pair.alpha_lower())));
    }
  }
  // gamma >= gamma_dagger pointwise: (F'[gd] d, dF) >= 0
  const Eigen::VectorXd bump = inclusion(f.mesh, {0.4, 0.6}, 0.3, 0.3).values;
  const ConductivityPair up = pair_from(f, f.ones + bump, f.ones);
  const TccReport r = tcc_measure(up, Linearization::at_dagger);
  CHECK(r.qcon_value >= -1e-10 * r.data_norm * r.linear_norm);

  const ConductivityPair same = pair_from(f, f.ones, f.ones);
  CHECK_THROWS_AS(tcc_measure(same), DegeneratePair);
}

TEST_CASE("monotone perturbations within theta satisfy the strong cone condition") {
  const Fixture f;
  for (double eta : {0.25, 0.5, 1.0}) {
    for (double sign : {1.0, -1.0}) {
      const Eigen::VectorXd d = inclusion(f.mesh, {0.5, 0.5}, 0.25, sign).values;
      const double alpha = 0.5;
      const double a = monotone_radius(d, eta, alpha);
      CHECK(a == doctest::Approx(theta_eta(eta, alpha)));
      const ConductivityPair pair = pair_from(f, f.ones + a * d, f.ones);
      const MjmiReport m = check_mjmi(pair, eta, alpha);
      CHECK(m.guarantee_valid);
      CHECK(m.measured_eta <= eta + kEtaSlack);
      CHECK(m.c_measured == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS_AS(monotone_radius(checkerboard(f.mesh, 2, 1.0).values, 0.5, 0.5), InvalidArgument);
}

TEST_CASE("L-infinity norm bracket against exhaustive sign search") {
  const Mesh m = Mesh::structured(2);
  const BoundaryBasis b = BoundaryBasis::build(m, 4);
  const auto sol = ForwardSolution::compute(m, b, Conductivity(oracle::random_conductivity(8, 12), 0.5, 2.0));
  const LinearizedForward lin(sol);
  double best = 0.0;
  for (int mask = 0; mask < 256; ++mask) {
    Eigen::VectorXd s(8);
    for (int t = 0; t < 8; ++t) s[t] = (mask >> t) & 1 ? 1.0 : -1.0;
    best = std::max(best, lin.norm_of(s));
  }
  const LinfBracket br = linf_norm_bracket(lin, 4, 1);
  CHECK(br.upper == doctest::Approx(best).epsilon(1e-12));
  CHECK(br.lower <= br.upper * (1 + 1e-12));
  CHECK(br.lower > 0.0);
  CHECK(br.row_sum >= br.upper * (1 - 1e-12));
}

TEST_CASE("ball response and kappa") {
  const Fixture f;
  const LinearizedForward lin(ForwardSolution::compute(f.mesh, f.basis, Conductivity::uniform(f.mesh, 1.0, 0.5, 2.0)));
  CHECK(ball_response(f.mesh, lin, {0.5, 0.5}, 0.0) == 0.0);
  const double k = kappa(f.mesh, lin, 0.2);
  CHECK(k > 0.0);
  for (Index t = 0; t < f.mesh.num_triangles(); ++t) {
    const Eigen::Vector2d c = f.mesh.centroid(t);
    if (c.x() >= 0.2 && c.y() >= 0.2 && c.x() <= 0.8 && c.y() <= 0.8)
      CHECK(k <= ball_response(f.mesh, lin, c, 0.2) * (1 + 1e-14));
  }
  CHECK(std::isnan(kappa(f.mesh, lin, 0.6)));
  CHECK_THROWS_AS(kappa(f.mesh, lin, -1.0), InvalidArgument);
}

TEST_CASE("unbalanced perturbations: fired gates honor the guarantee") {
  const Fixture f;
  const Eigen::VectorXd big = inclusion(f.mesh, {0.5, 0.5}, 0.3, 1.0).values;
  const Eigen::VectorXd small = inclusion(f.mesh, {0.15, 0.15}, 0.08, -0.05).values;
  for (double eta : {0.25, 0.5, 1.0}) {
    for (double frac : {0.1, 0.3, 1.0}) {
      const double a = frac * theta_eta(eta, 0.5);
      const ConductivityPair pair = pair_from(f, f.ones + a * (big + small), f.ones);
      const UnbalancedReport u = check_unbalanced(pair, eta, 0.5);
      CHECK(u.guarantee_valid);
      CHECK(u.linf.lower <= u.linf.upper * (1 + 1e-12));
      if (u.applicable) CHECK(u.c_fir >= 0.0);
    }
  }
}

TEST_CASE("sufficient zeta condition") {
  const Fixture f;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario s = random_pair(f.mesh, seed, 0.6);
    const ConductivityPair pair(f.mesh, f.basis, s.gamma_conductivity(), s.dagger_conductivity());
    const ZetaReport z = sufficient_zeta(pair);
    CHECK(z.holds);
    CHECK(z.weak_half);
    if (z.applicable) CHECK(z.predicted_eta == doctest::Approx(z.zeta / (1 - z.zeta)));
  }
  const Eigen::VectorXd d = inclusion(f.mesh, {0.5, 0.5}, 0.3, 1.0).values;
  const Conductivity dagger = Conductivity::uniform(f.mesh, 1.0, 0.5, 2.0);
  const double a = bisect_zeta_amplitude(f.mesh, f.basis, dagger, d, 0.2);
  const ConductivityPair pair = pair_from(f, f.ones + a * d, f.ones);
  CHECK(sufficient_zeta(pair).zeta == doctest::Approx(0.2).epsilon(1e-8));
}

TEST_CASE("star seminorm: triangle inequality and homogeneity") {
  const Fixture f;
  const LinearizedForward lin(ForwardSolution::compute(f.mesh, f.basis, Conductivity(oracle::random_conductivity(128, 8), 0.5, 2.0)));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::VectorXd u = oracle::random_vector(128, 100 + seed);
    const Eigen::VectorXd v = oracle::random_vector(128, 200 + seed);
    const double nu = star_seminorm(lin, u), nv = star_seminorm(lin, v);
    CHECK(star_seminorm(lin, u + v) <= nu + nv + 1e-10 * (nu + nv));
    CHECK(star_seminorm(lin, -2.5 * u) == doctest::Approx(2.5 * nu));
    CHECK(star_seminorm(lin, u) >= lin.norm_of(u) * (1 - 1e-12));
  }
}

TEST_CASE("finite-dimensional equivalence constant") {
  const Fixture f;
  const LinearizedForward lin(ForwardSolution::compute(f.mesh, f.basis, Conductivity::uniform(f.mesh, 1.0, 0.5, 2.0)));
  const std::vector<Eigen::VectorXd> patterns{inclusion(f.mesh, {0.3, 0.3}, 0.2, 1.0).values,
                                              inclusion(f.mesh, {0.7, 0.6}, 0.2, 1.0).values};
  const FiniteDimConstant c = finite_dim_constant(lin, patterns, 50, 3);
  CHECK(c.estimate >= 1.0);
  CHECK(c.sigma_min > 0.0);
  CHECK(c.samples == 52);
  CHECK_THROWS_AS(finite_dim_constant(lin, {patterns[0], 2.0 * patterns[0]}, 10, 3), PreconditionError);
}

TEST_CASE("source-condition elements") {
  const Fixture f;
  const auto dagger = ForwardSolution::compute(f.mesh, f.basis, Conductivity::uniform(f.mesh, 1.0, 0.5, 2.0));
  const Eigen::VectorXd omega = oracle::random_vector(128, 77);
  const SourceElement zero = source_condition_element(dagger, 0.0, omega, 0.01);
  CHECK(zero.perturbation.cwiseAbs().maxCoeff() == doctest::Approx(0.01));
  CHECK((zero.perturbation - zero.omega).norm() < 1e-15);
  for (double mu : {0.25, 0.5, 1.0}) {
    const SourceElement s = source_condition_element(dagger, mu, omega, 0.01);
    CHECK(s.holder_holds);
    CHECK(s.perturbation.cwiseAbs().maxCoeff() == doctest::Approx(0.01));
    CHECK(s.embedding_constant == doctest::Approx(std::sqrt(128.0)));
    CHECK(s.perturbation.cwiseAbs().maxCoeff() <= s.embedding_constant * s.x_norm * (1 + 1e-12));
    if (mu == 0.5) CHECK(std::isnan(s.corollary_radius));
    else CHECK(s.corollary_radius > 0.0);
  }
  CHECK_THROWS_AS(source_condition_element(dagger, 1.0, omega, 5.0), EllipticityViolation);
  CHECK_THROWS_AS(source_condition_element(dagger, -1.0, omega, 0.01), InvalidArgument);
}

TEST_CASE("split into positive and negative parts") {
  const Fixture f;
  const Eigen::VectorXd c = checkerboard(f.mesh, 1, 0.3).values;
  const auto [p, n] = split_parts(c);
  CHECK((p - n - c).norm() == 0.0);
  CHECK(p.minCoeff() >= 0.0);
  CHECK(n.minCoeff() >= 0.0);
  CHECK(p.cwiseProduct(n).norm() == 0.0);
  CHECK(p.maxCoeff() == 0.3);
  CHECK(n.maxCoeff() == 0.3);
}
