#include <doctest.h>

#include <cmath>

#include "eitlab/errors.hpp"
#include "eitlab/landweber.hpp"
#include "eitlab/scenarios.hpp"
#include "oracle.hpp"

using namespace eitlab;

TEST_CASE("Lipschitz estimate agrees with a dense singular value") {
  const Mesh m = Mesh::structured(4);
  const BoundaryBasis b = BoundaryBasis::build(m, 4);
  const Eigen::VectorXd g = oracle::random_conductivity(m.num_triangles(), 17);
  const auto sol = ForwardSolution::compute(m, b, Conductivity(g, 0.5, 2.0));

  // columns: vec of the derivative form along each element, divided by sqrt(area)
  const Index T = m.num_triangles();
  Eigen::MatrixXd J(16, T);
  for (Index t = 0; t < T; ++t) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(T);
    e[t] = 1.0;
    const Eigen::MatrixXd d = oracle::derivative(m, g, e, b.traces);
    J.col(t) = Eigen::Map<const Eigen::VectorXd>(d.data(), 16) / std::sqrt(m.element_areas()[t]);
  }
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues()[0];
  const double L = estimate_lipschitz(sol);
  CHECK(L == doctest::Approx(sigma).epsilon(1e-5));
  CHECK(L > 0.0);
  CHECK_THROWS_AS(estimate_lipschitz(sol, 1), EstimationError);
}

TEST_CASE("noise generator") {
  CHECK(hs_norm(make_noise(5, 0.0, 1)) == 0.0);
  const OperatorOnVD n = make_noise(5, 0.3, 42);
  CHECK(std::abs(hs_norm(n) - 0.3) < 1e-12);
  CHECK((n.matrix() - n.matrix().transpose()).norm() == 0.0);
  CHECK((make_noise(5, 0.3, 42).matrix() - n.matrix()).norm() == 0.0);
  CHECK((make_noise(5, 0.3, 43).matrix() - n.matrix()).norm() > 0.0);
  CHECK_THROWS_AS(make_noise(5, -1.0, 1), InvalidArgument);
}

TEST_CASE("starting at the truth stops immediately") {
  const Mesh m = Mesh::structured(4);
  const BoundaryBasis b = BoundaryBasis::build(m, 4);
  const Conductivity truth(oracle::random_conductivity(m.num_triangles(), 2), 0.5, 2.0);
  const LandweberTrace t = landweber_run(m, b, truth, truth);
  CHECK(t.stop_index == 0);
  CHECK(t.residual_norms.size() == 1);
  CHECK(t.residual_norms[0] == 0.0);
  CHECK(t.status == LandweberStatus::discrepancy);
}

TEST_CASE("monotone start: residual decreases, trace is reproducible") {
  const Mesh m = Mesh::structured(4);
  const BoundaryBasis b = BoundaryBasis::build(m, 3);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_triangles());
  const Conductivity dagger(ones + inclusion(m, {0.5, 0.5}, 0.3, 0.05).values, 0.5, 2.0);
  const Conductivity start(ones, 0.5, 2.0);
  LandweberOptions opts;
  opts.max_iter = 3000;
  opts.rel_tol = 1e-6;
  opts.thin = 7;
  opts.track_eta = true;
  const LandweberTrace t = landweber_run(m, b, start, dagger, opts);
  CHECK(t.status == LandweberStatus::relative_tolerance);
  CHECK(t.residual_norms.size() == static_cast<std::size_t>(t.stop_index + 1));
  CHECK(t.error_norms.size() == t.residual_norms.size());
  CHECK(t.eta_track.size() == t.residual_norms.size());
  for (std::size_t k = 1; k < t.residual_norms.size(); ++k) CHECK(t.residual_norms[k] < t.residual_norms[k - 1]);
  CHECK(t.residual_norms.back() <= 1e-6 * t.residual_norms.front());
  CHECK(t.step_size == doctest::Approx(0.9 / (t.lipschitz * t.lipschitz)));
  CHECK(t.clamp_events == 0);
  for (std::size_t i = 0; i + 1 < t.iterate_index.size(); ++i) CHECK(t.iterate_index[i] % 7 == 0);
  CHECK(t.iterate_index.back() == t.stop_index);

  const LandweberTrace again = landweber_run(m, b, start, dagger, opts);
  CHECK(again.residual_norms == t.residual_norms);
  CHECK(again.stop_index == t.stop_index);
  CHECK((again.iterates.back() - t.iterates.back()).norm() == 0.0);

  const auto s = t.summary();
  CHECK(s["status"] == "relative-tolerance");
  CHECK(s["stop_index"] == t.stop_index);
}

TEST_CASE("noisy data stops by the discrepancy principle") {
  const Mesh m = Mesh::structured(4);
  const BoundaryBasis b = BoundaryBasis::build(m, 3);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_triangles());
  const Conductivity dagger(ones + inclusion(m, {0.5, 0.5}, 0.3, 0.05).values, 0.5, 2.0);
  LandweberOptions opts;
  opts.noise = 1e-4;
  opts.max_iter = 5000;
  const LandweberTrace t = landweber_run(m, b, Conductivity(ones, 0.5, 2.0), dagger, opts);
  CHECK(t.status == LandweberStatus::discrepancy);
  CHECK(t.residual_norms.back() <= 1.5 * 1e-4);
  CHECK(t.residual_norms[t.residual_norms.size() - 2] > 1.5 * 1e-4);
}

TEST_CASE("invalid Landweber options") {
  const Mesh m = Mesh::structured(2);
  const BoundaryBasis b = BoundaryBasis::build(m, 2);
  const Conductivity g = Conductivity::uniform(m, 1.0, 0.5, 2.0);
  LandweberOptions o;
  o.tau = 1.0;
  CHECK_THROWS_AS(landweber_run(m, b, g, g, o), InvalidArgument);
  o = {};
  o.step_margin = 1.5;
  CHECK_THROWS_AS(landweber_run(m, b, g, g, o), InvalidArgument);
  CHECK(std::string(to_string(LandweberStatus::diverged)) == "diverged");
}
