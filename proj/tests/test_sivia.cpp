#include <cmath>
#include <limits>
#include <vector>

#include "doakit/errors.hpp"
#include "doakit/sivia.hpp"
#include "doctest.h"

using namespace doakit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

SiviaResult disc(double eps) {
  const Expr p = parse("x1^2 + x2^2", 2, 0);
  const Paving init = Paving::from_disjoint(2, 0, {IvBox({Interval(-2, 2), Interval(-2, 2)})});
  return sivia(std::span(&p, 1), SiviaTarget(std::vector<Interval>{Interval(0, 1)}), init, eps);
}

}  // namespace

TEST_CASE("disc inversion brackets the area") {
  const SiviaResult r = disc(0.01);
  const double inner = measure(r.inner);
  CHECK(inner >= 3.10);
  CHECK(inner <= kPi);
  CHECK(inner + measure(r.boundary) >= kPi);
  for (const auto& b : r.boundary.boxes()) CHECK(b.width() < 0.01);
  CHECK(measure(r.inner) + measure(r.outer) + measure(r.boundary) == 16.0);
}

TEST_CASE("halving eps never loses inner measure") {
  double last = 0.0;
  for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    const double m = measure(disc(eps).inner);
    CHECK(m >= last);
    last = m;
  }
}

TEST_CASE("a box exactly eps wide is bisected") {
  const Expr p = parse("x1", 1, 0);
  const Paving init = Paving::from_disjoint(1, 0, {IvBox({Interval(-0.5, 0.5)})});
  const SiviaTarget t(std::vector<Interval>{Interval(-kInf, 0.1)});
  const SiviaResult at = sivia(std::span(&p, 1), t, init, 1.0);
  CHECK(at.boundary.size() == 1);
  CHECK(at.boundary.boxes()[0].width() == 0.5);
  const SiviaResult below = sivia(std::span(&p, 1), t, init, 1.01);
  CHECK(below.boundary.boxes()[0].width() == 1.0);
}

TEST_CASE("paving targets") {
  const Expr p = parse("2*x1", 1, 0);
  const Paving y = normalize({IvBox({Interval(0, 1)}), IvBox({Interval(1, 2)})}, 1, 0);
  const Paving init = Paving::from_disjoint(1, 0, {IvBox({Interval(-2, 2)})});
  const SiviaResult r = sivia(std::span(&p, 1), SiviaTarget(y), init, 0.01);
  const auto c = components_1d(r.inner);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == Interval(0, 1));
}

TEST_CASE("argument errors") {
  const Expr p = parse("x1", 1, 0);
  const Paving init = Paving::from_disjoint(1, 0, {IvBox({Interval(-1, 1)})});
  const SiviaTarget t(std::vector<Interval>{Interval(0, 1)});
  CHECK_THROWS_AS(sivia(std::span(&p, 1), t, init, 0.0), ConfigError);
  const SiviaTarget t2(std::vector<Interval>{Interval(0, 1), Interval(0, 1)});
  CHECK_THROWS_AS(sivia(std::span(&p, 1), t2, init, 0.1), ConfigError);
  const Expr q = parse("1/x1", 1, 0);
  CHECK_THROWS_AS(sivia(std::span(&q, 1), t, init, 0.1), DomainError);
}

TEST_CASE("negative-definite set of the example plant") {
  const PlantModel plant = PlantModel::parse(1, 1, {"-sin(2*x1) - x1*u1 - 0.2*x1 - u1^2 + u1"});
  const Expr dl = delta_l(plant, parse("x1^2", 1, 0));
  const Paving init =
      Paving::from_disjoint(1, 1, {IvBox({Interval(-2, 2), Interval(-2, 2)}, 1, 1)});
  const SiviaResult r = sivia(std::span(&dl, 1),
                              SiviaTarget(std::vector<Interval>{Interval(-kInf, -1e-15)}), init,
                              0.01);
  const auto c = components_1d(project(r.inner));
  REQUIRE(c.size() == 3);
  const double expected[3][2] = {{-2, -0.02344}, {0.02344, 0.1406}, {1.07, 2}};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(c[i].lo() - expected[i][0]) <= 0.02);
    CHECK(std::abs(c[i].hi() - expected[i][1]) <= 0.02);
  }
}

TEST_CASE("delta_l rejects control-dependent candidates") {
  const PlantModel plant = PlantModel::parse(1, 1, {"0.5*x1 + u1"});
  CHECK_THROWS_AS(delta_l(plant, parse("u1^2", 1, 1)), ConfigError);
  const Expr dl = delta_l(plant, parse("x1^2", 1, 0));
  const std::vector<double> x{1.0}, u{0.25};
  CHECK(eval_scalar(dl, x, u) == doctest::Approx(0.5625 - 1.0));
}
