#include <doctest.h>

#include <cmath>

#include "eitlab/errors.hpp"
#include "eitlab/fem.hpp"
#include "eitlab/mesh.hpp"
#include "oracle.hpp"

using namespace eitlab;

TEST_CASE("structured mesh counts and geometry") {
  for (int n : {1, 2, 5, 8}) {
    const Mesh m = Mesh::structured(n);
    CHECK(m.num_nodes() == (n + 1) * (n + 1));
    CHECK(m.num_triangles() == 2 * n * n);
    CHECK(m.num_boundary_nodes() == 4 * n);
    CHECK(m.num_interior_nodes() == (n - 1) * (n - 1));
    CHECK(m.element_areas().sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (Index t = 0; t < m.num_triangles(); ++t) {
      CHECK(signed_area(m, t) > 0.0);
      CHECK(m.element_areas()[t] == doctest::Approx(0.5 / (n * n)));
    }
  }
  CHECK_THROWS_AS(Mesh::structured(0), InvalidArgument);
}

TEST_CASE("n=2 element areas are 1/8") {
  const Mesh m = Mesh::structured(2);
  for (Index t = 0; t < m.num_triangles(); ++t) CHECK(m.element_areas()[t] == 0.125);
}

TEST_CASE("boundary order is counterclockwise from the origin") {
  const Mesh m = Mesh::structured(3);
  const Eigen::VectorXd s = boundary_arclength(m);
  CHECK(m.nodes()[m.boundary_nodes()[0]].norm() == 0.0);
  for (Index b = 1; b < s.size(); ++b) CHECK(s[b] > s[b - 1]);
  CHECK(s[s.size() - 1] < 4.0);
  for (Index v = 0; v < m.num_nodes(); ++v) {
    const auto p = m.nodes()[v];
    const bool on_edge = p.x() == 0 || p.y() == 0 || p.x() == 1 || p.y() == 1;
    CHECK(m.is_boundary(v) == on_edge);
    if (on_edge) CHECK(m.boundary_nodes()[m.boundary_slot(v)] == v);
    else CHECK(m.interior_nodes()[m.interior_slot(v)] == v);
  }
}

TEST_CASE("n=1 stiffness matches hand computation") {
  const Mesh m = Mesh::structured(1);
  const Eigen::MatrixXd A = Eigen::MatrixXd(assemble_stiffness(m, Conductivity::uniform(m, 1.0, 0.5, 2.0)));
  for (int i = 0; i < 4; ++i) CHECK(A(i, i) == doctest::Approx(1.0));
  CHECK(A(0, 1) == doctest::Approx(-0.5));
  CHECK(A(0, 2) == doctest::Approx(-0.5));
  CHECK(A(1, 3) == doctest::Approx(-0.5));
  CHECK(A(2, 3) == doctest::Approx(-0.5));
  CHECK(std::abs(A(0, 3)) < 1e-15);
  CHECK(std::abs(A(1, 2)) < 1e-15);
}

TEST_CASE("stiffness agrees with dense oracle, symmetric with zero row sums") {
  const Mesh m = Mesh::structured(4);
  const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), 11);
  const Eigen::MatrixXd A = Eigen::MatrixXd(assemble_stiffness(m, Conductivity(g, 0.5, 2.0)));
  CHECK((A - oracle::stiffness(m, g)).norm() < 1e-13);
  CHECK((A - A.transpose()).norm() == 0.0);
  CHECK(A.rowwise().sum().cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("n=1 gradients of the node-0 hat function") {
  const Mesh m = Mesh::structured(1);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(4);
  u[0] = 1.0;
  const GradientField g = element_gradients(m, u);
  CHECK(g[0] == doctest::Approx(-1.0));
  CHECK(std::abs(g[1]) < 1e-15);
  CHECK(std::abs(g[2]) < 1e-15);
  CHECK(g[3] == doctest::Approx(-1.0));
}

TEST_CASE("Dirichlet solve reproduces the harmonic xy at the n=2 center") {
  const Mesh m = Mesh::structured(2);
  Eigen::VectorXd b(m.num_boundary_nodes());
  for (Index i = 0; i < b.size(); ++i) {
    const auto p = m.nodes()[m.boundary_nodes()[i]];
    b[i] = p.x() * p.y();
  }
  const Eigen::VectorXd u = solve_dirichlet(m, Conductivity::uniform(m, 1.0, 1.0, 1.0), b);
  CHECK(u[4] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("Dirichlet solve agrees with dense oracle and reproduces linear data") {
  const Mesh m = Mesh::structured(6);
  const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), 3);
  const Conductivity gamma(g, 0.5, 2.0);
  const Eigen::VectorXd b = oracle::random_vector(m.num_boundary_nodes(), 4);
  const Eigen::VectorXd u = solve_dirichlet(m, gamma, b);
  CHECK((u - oracle::dirichlet(m, g, b)).cwiseAbs().maxCoeff() < 1e-12);

  // affine data is reproduced exactly for constant gamma
  Eigen::VectorXd lin(m.num_boundary_nodes());
  for (Index i = 0; i < lin.size(); ++i) {
    const auto p = m.nodes()[m.boundary_nodes()[i]];
    lin[i] = 0.3 + 2.0 * p.x() - p.y();
  }
  const Eigen::VectorXd ul = solve_dirichlet(m, Conductivity::uniform(m, 1.7, 0.5, 2.0), lin);
  for (Index v = 0; v < m.num_nodes(); ++v)
    CHECK(ul[v] == doctest::Approx(0.3 + 2.0 * m.nodes()[v].x() - m.nodes()[v].y()).epsilon(1e-12));
  const double e = energy(m, Conductivity::uniform(m, 1.7, 0.5, 2.0), ul);
  CHECK(e == doctest::Approx(1.7 * 5.0).epsilon(1e-12));
}

TEST_CASE("conductivity enforces ellipticity") {
  const Mesh m = Mesh::structured(2);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.num_triangles());
  CHECK_NOTHROW(Conductivity(v, 0.5, 2.0));
  v[3] = -0.1;
  CHECK_THROWS_AS(Conductivity(v, 0.5, 2.0), EllipticityViolation);
  v[3] = 2.5;
  CHECK_THROWS_AS(Conductivity(v, 0.5, 2.0), EllipticityViolation);
  CHECK_THROWS_AS(Conductivity::uniform(m, 1.0, 0.0, 2.0), EllipticityViolation);
}

TEST_CASE("discrete operators: gradient layout and weights") {
  const Mesh m = Mesh::structured(3);
  const DiscreteOperators ops = DiscreteOperators::build(m);
  CHECK(ops.gradient.rows() == 2 * m.num_triangles());
  CHECK(ops.gradient.cols() == m.num_nodes());
  CHECK(ops.gradient_interior.cols() == m.num_interior_nodes());
  const Eigen::VectorXd u = oracle::random_vector(m.num_nodes(), 9);
  CHECK((ops.gradient * u - element_gradients(m, u)).norm() < 1e-13);
  CHECK((ops.weights - repeat_per_component(m.element_areas())).norm() == 0.0);
  // energy = u^T A u
  const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), 10);
  const Conductivity gamma(g, 0.5, 2.0);
  CHECK(energy(m, gamma, u) == doctest::Approx(u.dot(oracle::stiffness(m, g) * u)).epsilon(1e-12));
}
