#include <doctest.h>

#include <cmath>
#include <vector>

#include "eitlab/errors.hpp"
#include "eitlab/loewner.hpp"
#include "eitlab/operator.hpp"
#include "oracle.hpp"

using namespace eitlab;

namespace {

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("boundary basis is orthonormal in the harmonic-lift energy") {
  for (auto family : {BasisFamily::trigonometric, BasisFamily::boundary_hat}) {
    const Mesh m = Mesh::structured(6);
    const BoundaryBasis b = BoundaryBasis::build(m, 8, family);
    const Eigen::MatrixXd gram = oracle::dtn(m, Eigen::VectorXd::Ones(m.num_triangles()), b.traces);
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-11);
    CHECK((b.raw_traces * b.ortho_transform - b.traces).norm() < 1e-13);
  }
}

TEST_CASE("K=1 sine trace: Gram entry on n=4") {
  const Mesh m = Mesh::structured(4);
  const BoundaryBasis b = BoundaryBasis::build(m, 1);
  CHECK(b.gram(0, 0) == doctest::Approx(3.3399485814814369).epsilon(1e-12));
}

TEST_CASE("basis size limits") {
  const Mesh m = Mesh::structured(2);
  CHECK_THROWS_AS(BoundaryBasis::build(m, 0), InvalidArgument);
  CHECK_NOTHROW(BoundaryBasis::build(m, 7));
  CHECK_THROWS_AS(BoundaryBasis::build(m, 8), BasisRankError);
  CHECK(parse_basis_family("boundary-hat") == BasisFamily::boundary_hat);
  CHECK(to_string(BasisFamily::trigonometric) == "trigonometric");
  CHECK_THROWS_AS(parse_basis_family("legendre"), InvalidArgument);
}

TEST_CASE("OperatorOnVD symmetrizes and norms agree with definitions") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, -3;
  const OperatorOnVD s(a);
  CHECK(s.matrix()(0, 1) == 1.0);
  CHECK(s.matrix()(1, 0) == 1.0);
  CHECK(hs_norm(s) == doctest::Approx(std::sqrt(1 + 1 + 1 + 9)));
  const Eigen::VectorXd ev = eigenvalues(s);
  CHECK(ev[0] <= ev[1]);
  CHECK(spectral_norm(s) == doctest::Approx(std::max(std::abs(ev[0]), std::abs(ev[1]))));
  CHECK(hs_inner(s, s) == doctest::Approx(hs_norm(s) * hs_norm(s)));
  CHECK_THROWS_AS(s + OperatorOnVD::zero(3), InvalidArgument);
}

TEST_CASE("DtN form agrees with dense oracle; symmetric, PSD, monotone in gamma") {
  const Mesh m = Mesh::structured(5);
  const BoundaryBasis b = BoundaryBasis::build(m, 6);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), seed);
    const OperatorOnVD lam = dtn_form(m, Conductivity(g, 0.5, 2.0), b);
    CHECK(rel(lam.matrix(), oracle::dtn(m, g, b.traces)) < 1e-11);
    CHECK(oracle::lambda_min(lam.matrix()) > 0.0);

    const Eigen::VectorXd bigger = g + oracle::random_conductivity(m.num_triangles(), seed + 10, 0.0, 0.3);
    const OperatorOnVD lam2 = dtn_form(m, Conductivity(bigger, 0.5, 2.5), b);
    CHECK(loewner_leq(lam, lam2).pass);
  }
}

TEST_CASE("Galerkin cross formula agrees with the energy difference") {
  const Mesh m = Mesh::structured(8);
  const BoundaryBasis b = BoundaryBasis::build(m, 8);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s1 = ForwardSolution::compute(m, b, Conductivity(oracle::random_conductivity(128, seed), 0.5, 2.0));
    const auto s2 =
        ForwardSolution::compute(m, b, Conductivity(oracle::random_conductivity(128, seed + 100), 0.5, 2.0));
    CHECK(galerkin_mismatch(s1, s2) <= 1e-11);
    CHECK(rel(dtn_difference_cross(s1, s2).matrix(), (dtn_form(s1) - dtn_form(s2)).matrix()) < 1e-11);
  }
}

TEST_CASE("forward map vanishes at the background and matches the oracle difference") {
  const Mesh m = Mesh::structured(4);
  const BoundaryBasis b = BoundaryBasis::build(m, 5);
  CHECK(hs_norm(forward_F(m, Conductivity::uniform(m, 1.0, 0.5, 2.0), b)) < 1e-14);
  const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), 5);
  const Eigen::MatrixXd expect =
      oracle::dtn(m, g, b.traces) - oracle::dtn(m, Eigen::VectorXd::Ones(m.num_triangles()), b.traces);
  CHECK(rel(forward_F(m, Conductivity(g, 0.5, 2.0), b).matrix(), expect) < 1e-10);
}

TEST_CASE("derivative: central differences converge at second order") {
  const Mesh m = Mesh::structured(8);
  const BoundaryBasis b = BoundaryBasis::build(m, 8);
  const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), 21, 0.8, 1.5);
  const Eigen::VectorXd w = oracle::random_vector(m.num_triangles(), 22);
  const Conductivity gamma(g, 0.3, 3.0);
  const auto sol = ForwardSolution::compute(m, b, gamma);
  const Eigen::MatrixXd exact = derivative_form(sol, w).matrix();
  std::vector<double> hs{1e-1, 1e-2, 1e-3}, errs;
  for (double h : hs) {
    const Eigen::MatrixXd plus = dtn_form(m, gamma.with_values(g + h * w), b).matrix();
    const Eigen::MatrixXd minus = dtn_form(m, gamma.with_values(g - h * w), b).matrix();
    errs.push_back(rel((plus - minus) / (2 * h), exact));
  }
  CHECK(loglog_slope(hs, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("derivative adjoint duality") {
  const Mesh m = Mesh::structured(8);
  const BoundaryBasis b = BoundaryBasis::build(m, 8);
  const auto sol =
      ForwardSolution::compute(m, b, Conductivity(oracle::random_conductivity(m.num_triangles(), 31), 0.5, 2.0));
  const Eigen::VectorXd& areas = m.element_areas();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::VectorXd w = oracle::random_vector(m.num_triangles(), 40 + seed);
    const Eigen::MatrixXd S = oracle::random_symmetric(8, 60 + seed);
    const double lhs = (derivative_form(sol, w).matrix().array() * S.array()).sum();
    const double rhs = areas.dot(w.cwiseProduct(derivative_adjoint(sol, S)));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(8, 8);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(derivative_adjoint(sol, asym), InvalidArgument);
}

TEST_CASE("second derivative matches the second difference and the Taylor remainder") {
  const Mesh m = Mesh::structured(6);
  const BoundaryBasis b = BoundaryBasis::build(m, 6);
  const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), 51, 0.8, 1.5);
  const Eigen::VectorXd w = oracle::random_vector(m.num_triangles(), 52);
  const Conductivity gamma(g, 0.3, 3.0);
  const auto sol = ForwardSolution::compute(m, b, gamma);
  const Eigen::MatrixXd exact = second_derivative_form(sol, w).matrix();
  const double h = 1e-3;
  const Eigen::MatrixXd fd = (dtn_form(m, gamma.with_values(g + h * w), b).matrix() - 2 * dtn_form(sol).matrix() +
                              dtn_form(m, gamma.with_values(g - h * w), b).matrix()) /
                             (h * h);
  CHECK(rel(fd, exact) < 1e-4);
  // -F'' is PSD
  CHECK(oracle::lambda_min(-exact) >= -1e-12 * exact.norm());

  // remainder definition
  const Eigen::VectorXd gd = oracle::random_conductivity(m.num_triangles(), 53, 0.8, 1.5);
  const Conductivity dagger(gd, 0.3, 3.0);
  const Eigen::MatrixXd B = taylor_remainder(m, gamma, dagger, b).matrix();
  const Eigen::MatrixXd expect = oracle::dtn(m, g, b.traces) - oracle::dtn(m, gd, b.traces) -
                                 derivative_form(sol, g - gd).matrix();
  CHECK(rel(B, expect) < 1e-9);
}

TEST_CASE("projector R: idempotent, self-adjoint, kills divergence-free fields") {
  const Mesh m = Mesh::structured(6);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Conductivity g(oracle::random_conductivity(m.num_triangles(), seed), 0.5, 2.0);
    const ProjectorReport r = projector_checks(m, g, 20, seed);
    CHECK(r.idempotence <= 1e-10);
    CHECK(r.self_adjointness <= 1e-10);
    CHECK(r.annihilation <= 1e-10);
    CHECK(r.positivity >= -1e-10);
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(10, 10);
  CHECK(w_operator_norm(I, Eigen::VectorXd::Constant(10, 0.3)) == doctest::Approx(1.0));
}

TEST_CASE("resolvent identity and its contraction precondition") {
  const Mesh m = Mesh::structured(8);
  const BoundaryBasis b = BoundaryBasis::build(m, 8);
  const Eigen::VectorXd data = b.traces.rowwise().sum();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Eigen::VectorXd gd = oracle::random_conductivity(m.num_triangles(), seed);
    const Eigen::VectorXd u = oracle::random_vector(m.num_triangles(), seed + 7, -0.9, 0.9);
    const Eigen::VectorXd g = gd.cwiseProduct((1.0 + u.array()).matrix());
    const double err = resolvent_identity_check(m, Conductivity(g, 0.05, 4.0), Conductivity(gd, 0.05, 4.0), data);
    CHECK(err <= 1e-9);
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_triangles());
  CHECK_THROWS_AS(resolvent_identity_check(m, Conductivity(1.99 * ones, 0.5, 2.0), Conductivity(ones, 0.5, 2.0), data),
                  PreconditionError);
}

TEST_CASE("conductivity pair bookkeeping") {
  const Mesh m = Mesh::structured(4);
  const BoundaryBasis b = BoundaryBasis::build(m, 4);
  const Eigen::VectorXd gd = Eigen::VectorXd::Ones(m.num_triangles());
  Eigen::VectorXd g = gd;
  g[0] = 1.5;
  const ConductivityPair pair(m, b, Conductivity(g, 0.5, 2.0), Conductivity(gd, 0.5, 2.0));
  CHECK(pair.xi_dagger() == doctest::Approx(0.5));
  CHECK(pair.xi() == doctest::Approx(1.0 / 3.0));
  CHECK(pair.delta()[0] == doctest::Approx(0.5));
  CHECK(rel(pair.remainder().matrix(), (pair.data_difference() - pair.derivative_at_gamma(pair.delta())).matrix()) <
        1e-12);
  CHECK(contraction(Conductivity(g, 0.5, 2.0), Conductivity(gd, 0.5, 2.0)) == doctest::Approx(0.5));
}
