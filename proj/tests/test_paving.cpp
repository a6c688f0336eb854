#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "doakit/errors.hpp"
#include "doakit/paving.hpp"
#include "doctest.h"

using namespace doakit;

namespace {

IvBox box2(double a, double b, double c, double d) { return IvBox({Interval(a, b), Interval(c, d)}); }

// Area of a union of rectangles by coordinate compression: every cell of
// the grid spanned by all box edges is either fully inside some box or not.
double union_area_oracle(const std::vector<IvBox>& boxes) {
  std::set<double> xs, ys;
  for (const auto& b : boxes) {
    xs.insert({b[0].lo(), b[0].hi()});
    ys.insert({b[1].lo(), b[1].hi()});
  }
  const std::vector<double> gx(xs.begin(), xs.end()), gy(ys.begin(), ys.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
    for (std::size_t j = 0; j + 1 < gy.size(); ++j) {
      const double cx = 0.5 * (gx[i] + gx[i + 1]), cy = 0.5 * (gy[j] + gy[j + 1]);
      const bool in = std::any_of(boxes.begin(), boxes.end(), [&](const IvBox& b) {
        return b[0].lo() <= cx && cx <= b[0].hi() && b[1].lo() <= cy && cy <= b[1].hi();
      });
      if (in) area += (gx[i + 1] - gx[i]) * (gy[j + 1] - gy[j]);
    }
  }
  return area;
}

// Dyadic coordinates keep all areas exact in binary floating point.
std::vector<IvBox> random_boxes(std::mt19937_64& rng, int count) {
  std::uniform_int_distribution<int> d(0, 32);
  std::vector<IvBox> out;
  for (int i = 0; i < count; ++i) {
    int a = d(rng), b = d(rng), c = d(rng), e = d(rng);
    if (a == b || c == e) continue;
    out.push_back(box2(std::min(a, b) / 16.0, std::max(a, b) / 16.0, std::min(c, e) / 16.0,
                       std::max(c, e) / 16.0));
  }
  return out;
}

}  // namespace

TEST_CASE("measure matches the coordinate-compression oracle") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 100; ++t) {
    const auto boxes = random_boxes(rng, 1 + t % 12);
    if (boxes.empty()) continue;
    const Paving p = normalize(boxes, 2, 0);
    CHECK(audit_disjoint(p));
    CHECK(measure(p) == union_area_oracle(boxes));
  }
}

TEST_CASE("normalize is canonical") {
  const Paving a = normalize({box2(0, 1, 0, 1), box2(1, 2, 0, 1)}, 2, 0);
  const Paving b = normalize({box2(0, 2, 0, 0.5), box2(0, 2, 0.5, 1)}, 2, 0);
  CHECK(a == b);
  CHECK(a.size() == 1);
  CHECK(normalize({box2(0, 1, 0, 0)}, 2, 0).empty());
}

TEST_CASE("partition measure identity is exact") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 50; ++t) {
    const auto xa = random_boxes(rng, 6), xb = random_boxes(rng, 6);
    if (xa.empty() || xb.empty()) continue;
    const Paving a = normalize(xa, 2, 0), b = normalize(xb, 2, 0);
    std::vector<IvBox> diff;
    for (const auto& q : a.boxes()) {
      std::vector<IvBox> pieces{q};
      for (const auto& r : b.boxes()) {
        std::vector<IvBox> next;
        for (const auto& s : pieces) {
          auto cut = subtract(s, r);
          next.insert(next.end(), cut.begin(), cut.end());
        }
        pieces.swap(next);
      }
      diff.insert(diff.end(), pieces.begin(), pieces.end());
    }
    std::vector<IvBox> inter;
    for (const auto& q : a.boxes()) {
      for (const auto& r : b.boxes()) {
        if (q.overlaps_interior(r)) inter.push_back(intersect(q, r));
      }
    }
    const double m_diff = measure(normalize(diff, 2, 0));
    const double m_inter = measure(normalize(inter, 2, 0));
    CHECK(m_diff + m_inter == measure(a));
    CHECK(measure(unite(a, b)) == measure(a) + measure(b) - m_inter);
  }
}

TEST_CASE("covers_box and intersects_box") {
  const Paving p = normalize({box2(0, 1, 0, 1), box2(1, 2, 0, 1)}, 2, 0);
  CHECK(covers_box(p, box2(0.5, 1.5, 0.25, 0.75)));
  CHECK_FALSE(covers_box(p, box2(0.5, 2.5, 0.25, 0.75)));
  CHECK(intersects_box(p, box2(2, 3, 0, 1)));
  CHECK_FALSE(intersects_box(p, box2(2.5, 3, 0, 1)));
}

TEST_CASE("projection drops controls and is idempotent under normalize") {
  const Paving w = normalize({IvBox({Interval(0, 1), Interval(0, 1)}, 1, 1),
                              IvBox({Interval(0, 1), Interval(2, 3)}, 1, 1),
                              IvBox({Interval(1, 2), Interval(0, 1)}, 1, 1)},
                             1, 1);
  const Paving p = project(w);
  CHECK(p.m_ctrl() == 0);
  CHECK(p.size() == 1);
  CHECK(p.boxes()[0][0] == Interval(0, 2));
  CHECK(normalize(p.boxes(), 1, 0) == p);
  CHECK_THROWS_AS(project(p), InvalidProjection);
}

TEST_CASE("origin gap grows to the nearest boxes") {
  const Paving p = normalize({IvBox({Interval(-2, -0.25)}), IvBox({Interval(0.5, 2)})}, 1, 0);
  const IvBox gap = origin_gap(p, IvBox({Interval(-2, 2)}));
  CHECK(gap[0] == Interval(-0.25, 0.5));
  const Paving covered = normalize({IvBox({Interval(-1, 1)})}, 1, 0);
  CHECK_THROWS_AS(origin_gap(covered, IvBox({Interval(-2, 2)})), OriginCoveredError);
  CHECK(origin_gap(Paving(1, 0), IvBox({Interval(-2, 2)}))[0] == Interval(-2, 2));
}

TEST_CASE("components of a one-dimensional paving") {
  const Paving p = normalize(
      {IvBox({Interval(0, 1)}), IvBox({Interval(1, 2)}), IvBox({Interval(3, 4)})}, 1, 0);
  const auto c = components_1d(p);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == Interval(0, 2));
  CHECK(c[1] == Interval(3, 4));
}

TEST_CASE("JSON lines round-trip") {
  const Paving inner = normalize({IvBox({Interval(0.1, 0.7), Interval(-1.0 / 3, 2)}, 1, 1),
                                  IvBox({Interval(0.7, 1.3), Interval(0, 0.5)}, 1, 1)},
                                 1, 1);
  const Paving boundary =
      Paving::from_disjoint(1, 1, {IvBox({Interval(1.3, 1.31), Interval(0, 0.01)}, 1, 1)});
  std::stringstream ss;
  write_paving(ss, inner, PavingHeader{2, 1, 1, 0.01, 1e-15}, &boundary);
  const PavingFile f = read_paving(ss);
  CHECK(f.inner == inner);
  CHECK(f.boundary == boundary);
  CHECK(f.header.epsilon == 0.01);
  CHECK(f.header.alpha == 1e-15);

  std::stringstream bad("{\"dim\": 1}\n{\"lo\": [0], \"hi\": [1], \"label\": \"nope\"}\n");
  CHECK_THROWS_AS(read_paving(bad), ConfigError);
}
