#include <cmath>
#include <limits>
#include <vector>

#include "doakit/doa.hpp"
#include "doakit/errors.hpp"
#include "doctest.h"

using namespace doakit;

namespace {

const char* kPlant = "-sin(2*x1) - x1*u1 - 0.2*x1 - u1^2 + u1";

NegDefSpec example(const char* lyap, const char* plant = kPlant, double alpha = 1e-15) {
  return NegDefSpec{PlantModel::parse(1, 1, {plant}), parse(lyap, 1, 0),
                    IvBox({Interval(-2, 2), Interval(-2, 2)}, 1, 1), alpha, 0.01};
}

void check_components(const Paving& p, std::vector<std::pair<double, double>> expected) {
  const auto c = components_1d(p);
  REQUIRE(c.size() == expected.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(std::abs(c[i].lo() - expected[i].first) <= 0.02);
    CHECK(std::abs(c[i].hi() - expected[i].second) <= 0.02);
  }
}

}  // namespace

TEST_CASE("quadratic candidate on the example plant") {
  const NegDefSpec spec = example("x1^2");
  const DoaEstimate est = doa_pipeline(spec);
  CHECK_FALSE(est.degenerate);
  check_components(project(est.ndef), {{-2, -0.02344}, {0.02344, 0.1406}, {1.07, 2}});
  check_components(est.proj, {{-2, -0.02344}, {0.02344, 0.1406}, {1.07, 2}});
  REQUIRE(est.x0.has_value());
  CHECK(std::abs(est.x0->dims()[0].lo() + 0.02344) <= 0.02);
  CHECK(std::abs(est.x0->dims()[0].hi() - 0.02344) <= 0.02);
  check_components(est.doa_region, {{-2, 0.1406}, {1.07, 2}});
  CHECK(est.volume == doctest::Approx(3.0706).epsilon(0.01));
}

TEST_CASE("invariance and negative-definiteness post-checks") {
  const NegDefSpec spec = example("x1^2");
  const DoaEstimate est = doa_pipeline(spec);
  const Expr dl = delta_l(spec.plant, spec.lyapunov);
  const Paving target = unite(est.proj, normalize({*est.x0}, 1, 0));
  for (const auto& w : est.ni_set.boxes()) {
    CHECK(covers_box(target, spec.plant.image(w)));
    CHECK(eval_interval(dl, w).hi() <= -spec.alpha);
    CHECK(covers_box(est.ndef, w));
    CHECK(w.subset_of(spec.cons));
  }
  for (std::size_t i = 1; i < est.refine_measures.size(); ++i) {
    CHECK(est.refine_measures[i] <= est.refine_measures[i - 1]);
  }
}

TEST_CASE("refining without the linear-gain neighbourhood empties the set") {
  const NegDefSpec spec = example("x1^2");
  const DoaEstimate est = doa_pipeline(spec, DoaOptions{false});
  CHECK(est.degenerate);
  CHECK(est.ni_set.empty());
  CHECK(est.volume == 0.0);
}

TEST_CASE("contracting plant is invariant after one pass") {
  const NegDefSpec spec = example("x1^2", "0.5*x1");
  const DoaEstimate est = doa_pipeline(spec);
  CHECK(est.iterations == 1);
  CHECK(est.ni_set == est.ndef);
  // dL = -0.75 x^2 is below -alpha except in an O(eps) band at 0
  CHECK(measure(est.proj) >= 4.0 - 4 * spec.eps);
}

TEST_CASE("expanding plant leaves nothing invariant") {
  const PlantModel plant = PlantModel::parse(1, 1, {"11*x1"});
  const Paving w0 =
      Paving::from_disjoint(1, 1, {IvBox({Interval(1, 2), Interval(0, 1)}, 1, 1)});
  const RefineResult r = invariant_refine(plant, w0, 0.01);
  CHECK(r.set.empty());
  CHECK(r.measures.front() == 1.0);
  CHECK(r.measures.back() == 0.0);
}

TEST_CASE("an unreachable margin gives a degenerate estimate") {
  const DoaEstimate est = doa_pipeline(example("x1^2", kPlant, 1e6));
  CHECK(est.degenerate);
  CHECK(est.ndef.empty());
  CHECK(est.volume == 0.0);
}

TEST_CASE("spec validation") {
  NegDefSpec s = example("x1^2");
  s.alpha = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = example("x1^2");
  s.cons = IvBox({Interval(-2, 2), Interval(-std::numeric_limits<double>::infinity(), 2)}, 1, 1);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = example("x1^2");
  s.lyapunov = parse("x1^2 + u1", 1, 1);
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("pipeline is deterministic") {
  const DoaEstimate a = doa_pipeline(example("x1^2"));
  const DoaEstimate b = doa_pipeline(example("x1^2"));
  CHECK(a.ni_set == b.ni_set);
  CHECK(a.doa_region == b.doa_region);
}

TEST_CASE("level-set baseline: symmetric region") {
  const Paving region = normalize({IvBox({Interval(-1, 1)})}, 1, 0);
  const LevelSetBaseline b = levelset_baseline(parse("x1^2", 1, 0), region, IvBox({Interval(-2, 2)}), 0.01);
  CHECK(b.c == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(b.c <= 1.0);
  const auto c = components_1d(b.set);
  REQUIRE(c.size() == 1);
  CHECK(std::abs(c[0].lo() + 1) <= 0.01);
  CHECK(std::abs(c[0].hi() - 1) <= 0.01);
  CHECK(covers_box(region, IvBox({c[0]})));
}

TEST_CASE("level-set baseline: quadratic candidate") {
  const NegDefSpec spec = example("x1^2");
  const DoaEstimate est = doa_pipeline(spec);
  const LevelSetBaseline b =
      levelset_baseline(spec.lyapunov, est.doa_region, spec.cons.state_box(), spec.eps);
  check_components(b.set, {{-0.1406, 0.1406}});
  // {x^2 <= c} must stay left of the gap that starts at the region's right end
  const double edge = components_1d(est.doa_region)[0].hi();
  CHECK(b.c <= edge * edge);
  CHECK_THROWS_AS(levelset_baseline(spec.lyapunov, Paving(1, 0), spec.cons.state_box(), 0.01),
                  ConfigError);
}
