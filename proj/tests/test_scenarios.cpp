#include <doctest.h>

#include <cmath>

#include "eitlab/errors.hpp"
#include "eitlab/scenarios.hpp"

using namespace eitlab;

TEST_CASE("inclusion rasterization") {
  const Mesh m = Mesh::structured(8);
  const Pattern p = inclusion(m, {0.5, 0.5}, 0.25, 1.0);
  CHECK_FALSE(p.empty);
  CHECK(p.values.sum() == 26.0);
  const Pattern none = inclusion(m, {0.5, 0.5}, 0.0, 1.0);
  CHECK(none.empty);
  CHECK(none.values.norm() == 0.0);
  const Pattern neg = inclusion(m, {0.5, 0.5}, 0.25, -1.0);
  CHECK((neg.values + p.values).norm() == 0.0);
  CHECK(inclusion(m, {5.0, 5.0}, 0.5, 1.0).empty);
  CHECK_THROWS_AS(inclusion(m, {0.5, 0.5}, -0.1, 1.0), InvalidArgument);
}

TEST_CASE("checkerboard parity") {
  const Mesh m = Mesh::structured(4);
  const Pattern c = checkerboard(m, 1, 0.2);
  const Eigen::VectorXd& a = m.element_areas();
  double plus = 0, minus = 0;
  for (Index t = 0; t < c.values.size(); ++t) (c.values[t] > 0 ? plus : minus) += a[t];
  CHECK(plus == doctest::Approx(0.5));
  CHECK(minus == doctest::Approx(0.5));
  CHECK(a.dot(c.values) == doctest::Approx(0.0).scale(1.0));
  CHECK(checkerboard(m, 2, 0.0).values.norm() == 0.0);
  CHECK(checkerboard(m, 4, 1.0).values.minCoeff() == 1.0);
  CHECK_THROWS_AS(checkerboard(m, 5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(checkerboard(m, 0, 1.0), InvalidArgument);
  // both triangles of a grid cell share a sign
  for (Index t = 0; t < c.values.size(); t += 2) CHECK(c.values[t] == c.values[t + 1]);
}

TEST_CASE("random pairs: contraction bound, determinism, xi = 0") {
  const Mesh m = Mesh::structured(6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario s = random_pair(m, seed, 0.7);
    CHECK(s.xi_dagger <= 0.7);
    CHECK(s.lower == doctest::Approx(0.5 * 0.3));
    CHECK(s.upper == doctest::Approx(2.0 * 1.7));
    CHECK(s.gamma_dagger.minCoeff() >= 0.5);
    CHECK(s.gamma_dagger.maxCoeff() <= 2.0);
  }
  const Scenario a = random_pair(m, 5, 0.5), b = random_pair(m, 5, 0.5);
  CHECK((a.gamma - b.gamma).norm() == 0.0);
  CHECK((a.gamma_dagger - b.gamma_dagger).norm() == 0.0);
  const Scenario z = random_pair(m, 5, 0.0);
  CHECK((z.gamma - z.gamma_dagger).norm() == 0.0);
  CHECK(z.pattern_class == PatternClass::none);
  CHECK_THROWS_AS(random_pair(m, 1, 1.0), InvalidArgument);
}

TEST_CASE("scenario JSON round trip and consistency check") {
  const Mesh m = Mesh::structured(4);
  for (const auto& recipe : {nlohmann::json{{"type", "random_pair"}, {"xi_max", 0.6}},
                             nlohmann::json{{"type", "inclusion"}, {"center", {0.4, 0.5}}, {"radius", 0.3},
                                            {"amplitude", -0.2}},
                             nlohmann::json{{"type", "checkerboard"}, {"block", 2}, {"amplitude", 0.1}}}) {
    const Scenario s = realize(m, recipe, 9);
    const Scenario back = Scenario::from_json(nlohmann::json::parse(s.to_json().dump()));
    CHECK(back.to_json() == s.to_json());
    CHECK((back.gamma - s.gamma).norm() == 0.0);
  }
  nlohmann::json j = realize(m, {{"type", "random_pair"}, {"xi_max", 0.6}}, 3).to_json();
  j["xi_dagger"] = 0.01;
  CHECK_THROWS_AS(Scenario::from_json(j), ConsistencyError);
  CHECK_THROWS_AS(Scenario::from_json(nlohmann::json{{"name", "x"}}), InvalidArgument);
}

TEST_CASE("recipes: classes, perturbation side, errors") {
  const Mesh m = Mesh::structured(4);
  const Scenario up = realize(m, {{"type", "inclusion"}, {"radius", 0.3}, {"amplitude", 0.1}}, 1);
  CHECK(up.pattern_class == PatternClass::monotone_plus);
  CHECK(up.gamma_dagger.minCoeff() == 1.0);
  const Scenario down = realize(m, {{"type", "inclusion"}, {"radius", 0.3}, {"amplitude", 0.1}, {"perturb", "dagger"}}, 1);
  CHECK(down.pattern_class == PatternClass::monotone_minus);
  CHECK(down.gamma.maxCoeff() == 1.0);
  const Scenario cb = realize(m, {{"type", "checkerboard"}, {"block", 1}, {"amplitude", 0.1}}, 1);
  CHECK(cb.pattern_class == PatternClass::checkerboard);
  CHECK(classify(cb.delta()) == PatternClass::mixed);

  Eigen::VectorXd bad = Eigen::VectorXd::Ones(m.num_triangles());
  bad[0] = -1.0;
  nlohmann::json e = {{"type", "explicit"},
                      {"gamma", std::vector<double>(bad.data(), bad.data() + bad.size())},
                      {"gamma_dagger", std::vector<double>(m.num_triangles(), 1.0)}};
  CHECK_THROWS_AS(realize(m, e, 1), EllipticityViolation);
  CHECK_THROWS_AS(realize(m, {{"type", "inclusion"}, {"radius", 0.0}, {"amplitude", 0.1}}, 1), InvalidArgument);
  CHECK_THROWS_AS(realize(m, {{"type", "spiral"}, {"amplitude", 0.1}}, 1), InvalidArgument);
  CHECK_THROWS_AS(realize(m, {{"type", "checkerboard"}}, 1), InvalidArgument);
  CHECK(parse_pattern_class("source-condition") == PatternClass::source_condition);
  CHECK_THROWS_AS(parse_pattern_class("stripes"), InvalidArgument);
}
