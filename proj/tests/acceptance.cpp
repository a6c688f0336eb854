// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doakit/config.hpp"
#include "doakit/control.hpp"
#include "doakit/doa.hpp"
#include "doakit/lyap_opt.hpp"
#include "doakit/sivia.hpp"
#include "doakit/verify.hpp"

using namespace doakit;

namespace {

constexpr double kTol = 0.02;
const std::string kConfigs = DOAKIT_SOURCE_DIR "/configs/";

struct Criterion {
  int id;
  std::string title;
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

std::string show(const std::vector<Interval>& parts) {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += " u ";
    s += "[" + fmt(p.lo()) + ", " + fmt(p.hi()) + "]";
  }
  return s.empty() ? "(empty)" : s;
}

using Expected = std::vector<std::pair<double, double>>;

bool near(const std::vector<Interval>& got, const Expected& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (std::abs(got[i].lo() - want[i].first) > kTol) return false;
    if (std::abs(got[i].hi() - want[i].second) > kTol) return false;
  }
  return true;
}

std::string show(const Expected& want) {
  std::vector<Interval> v;
  for (const auto& [a, b] : want) v.emplace_back(a, b);
  return show(v);
}

void compare(Criterion& c, const std::string& what, const std::vector<Interval>& got,
             const Expected& want) {
  c.check(near(got, want), what + " = " + show(got) + " (expected " + show(want) + " +/- 0.02)");
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Example {
  explicit Example(const std::string& file)
      : cfg(load_config(kConfigs + file)), spec(cfg.spec()) {
    const auto t0 = std::chrono::steady_clock::now();
    est = doa_pipeline(spec);
    runtime = seconds(t0);
  }

  RunConfig cfg;
  NegDefSpec spec;
  DoaEstimate est;
  double runtime = 0.0;
};

// Every state visited strictly inside `gap` counts as a visit.
int visits_inside(const RunSummary& s, double lo, double hi) {
  int n = 0;
  for (const auto& t : s.trajectories) {
    for (const auto& x : t.states) n += lo < x[0] && x[0] < hi;
  }
  return n;
}

void closed_loop(Criterion& c, const std::string& label, const Example& ex,
                 const std::optional<Paving>& starts, const std::pair<double, double>* gap,
                 int& lyapunov_violations) {
  const Eigen::MatrixXd k = ex.cfg.gain(ex.spec.plant);
  const ClosedLoopReport rep = verify_closed_loop(ex.spec.plant, ex.spec.lyapunov, ex.est,
                                                  ex.spec.cons.state_box(), k, ex.cfg.sim, starts);
  if (rep.x0) {
    c.check(rep.x0->ok(), label + " X0 under u = Kx: rho(A+BK) = " +
                              fmt(rep.x0->spectral_radius) + ", " +
                              std::to_string(rep.x0->converged) + "/100 converged");
  }
  for (const auto* s : {&rep.table, &rep.sampled}) {
    const std::string mode = s == &rep.table ? "table" : "sampled";
    c.check(s->converged == s->runs && s->runs == 200,
            label + " " + mode + " controller: " + std::to_string(s->converged) + "/" +
                std::to_string(s->runs) + " reach |x| <= 1e-3 within 200 steps" +
                (s->domain_failures ? " (" + std::to_string(s->domain_failures) +
                                          " started or left outside the estimate)"
                                    : ""));
    for (std::size_t i = 0; i < s->failures.size() && i < 3; ++i) {
      c.details.push_back("       " + s->failures[i]);
    }
    c.check(s->gap_visits == 0,
            label + " " + mode + ": " + std::to_string(s->gap_visits) + " states inside gaps");
    if (gap) {
      const int v = visits_inside(*s, gap->first, gap->second);
      c.check(v == 0, label + " " + mode + ": " + std::to_string(v) + " states in (" +
                          fmt(gap->first) + ", " + fmt(gap->second) + ")");
    }
    lyapunov_violations += s->lyapunov_violations;
  }
}

// Union area of rectangles by coordinate compression.
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
      for (const auto& b : boxes) {
        if (b[0].lo() <= cx && cx <= b[0].hi() && b[1].lo() <= cy && cy <= b[1].hi()) {
          area += (gx[i + 1] - gx[i]) * (gy[j + 1] - gy[j]);
          break;
        }
      }
    }
  }
  return area;
}

std::vector<IvBox> random_dyadic_boxes(std::mt19937_64& rng, int count) {
  std::uniform_int_distribution<int> d(0, 64);
  std::vector<IvBox> out;
  while (static_cast<int>(out.size()) < count) {
    int a = d(rng), b = d(rng), c = d(rng), e = d(rng);
    if (a == b || c == e) continue;
    out.push_back(IvBox({Interval(std::min(a, b) / 32.0, std::max(a, b) / 32.0),
                         Interval(std::min(c, e) / 32.0, std::max(c, e) / 32.0)}));
  }
  return out;
}

int interval_soundness_violations(int samples) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> d(-4, 4), t(0, 1);
  auto draw = [&] {
    double a = d(rng), b = d(rng);
    return Interval(std::min(a, b), std::max(a, b));
  };
  auto pick = [&](const Interval& a) -> long double { return a.lo() + t(rng) * (a.hi() - a.lo()); };
  auto in = [](const Interval& e, long double v) { return e.lo() <= v && v <= e.hi(); };
  int bad = 0;
  for (int i = 0; i < samples; ++i) {
    const Interval a = draw(), b = draw();
    const long double x = pick(a), y = pick(b);
    switch (i % 10) {
      case 0: bad += !in(a + b, x + y); break;
      case 1: bad += !in(a - b, x - y); break;
      case 2: bad += !in(a * b, x * y); break;
      case 3: bad += b.contains_zero() ? 0 : !in(a / b, x / y); break;
      case 4: bad += !in(sin(a), std::sin(x)); break;
      case 5: bad += !in(cos(a), std::cos(x)); break;
      case 6: bad += !in(exp(a), std::exp(x)); break;
      case 7: bad += !in(tanh(a), std::tanh(x)); break;
      case 8: bad += !in(pow_int(a, 3), x * x * x); break;
      default: bad += a.lo() < 0 ? !in(abs(a), std::fabs(x)) : !in(sqrt(a), std::sqrt(x)); break;
    }
  }
  return bad;
}

double disc_inner(double eps) {
  const Expr p = parse("x1^2 + x2^2", 2, 0);
  const Paving init = Paving::from_disjoint(2, 0, {IvBox({Interval(-2, 2), Interval(-2, 2)})});
  return measure(
      sivia(std::span(&p, 1), SiviaTarget(std::vector<Interval>{Interval(0, 1)}), init, eps).inner);
}

int post_check_failures(const Example& ex) {
  const Expr dl = delta_l(ex.spec.plant, ex.spec.lyapunov);
  Paving target = ex.est.proj;
  if (ex.est.x0) target = unite(target, normalize({*ex.est.x0}, ex.spec.plant.n_state(), 0));
  int bad = 0;
  for (const auto& w : ex.est.ni_set.boxes()) {
    bad += !covers_box(target, ex.spec.plant.image(w));
    bad += !(eval_interval(dl, w).hi() <= -ex.spec.alpha);
  }
  return bad;
}

double jacobian_worst_error() {
  const PlantModel p =
      PlantModel::parse(2, 1, {"x2 - sin(2*x1)*u1", "exp(x1*x2) - 1 + tanh(u1)*x1 - u1^2"});
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{d(rng), d(rng)}, u{d(rng)};
    const Linearization lin = jacobian_at(p, x, u);
    for (int j = 0; j < 3; ++j) {
      auto xp = x, xm = x, up = u, um = u;
      (j < 2 ? xp[j] : up[0]) += h;
      (j < 2 ? xm[j] : um[0]) -= h;
      const auto fp = p.step(xp, up), fm = p.step(xm, um);
      for (int r = 0; r < 2; ++r) {
        const double fd = (fp[r] - fm[r]) / (2 * h);
        const double ad = j < 2 ? lin.A(r, j) : lin.B(r, 0);
        worst = std::max(worst, std::abs(fd - ad) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  return worst;
}

}  // namespace

int main() {
  std::vector<Criterion> out;
  int lyapunov_violations = 0;

  const Example quad("quadratic.json");
  const Example quart("quartic.json");

  {
    Criterion c{1, "quadratic candidate: proj, X0 and DOA estimate"};
    compare(c, "proj", components_1d(quad.est.proj), {{-2, -0.02344}, {0.02344, 0.1406}, {1.07, 2}});
    std::vector<Interval> x0;
    if (quad.est.x0) x0.push_back(quad.est.x0->dims()[0]);
    compare(c, "X0", x0, {{-0.02344, 0.02344}});
    compare(c, "DOA", components_1d(quad.est.doa_region), {{-2, 0.1406}, {1.07, 2}});
    c.check(quad.runtime < 60.0, "runtime " + fmt(quad.runtime) + " s (< 60 s)");
    out.push_back(c);
  }
  {
    Criterion c{2, "quadratic candidate: level-set baseline"};
    const LevelSetBaseline b = levelset_baseline(quad.spec.lyapunov, quad.est.doa_region,
                                                 quad.spec.cons.state_box(), quad.spec.eps);
    compare(c, "level set (c = " + fmt(b.c) + ")", components_1d(b.set), {{-0.1406, 0.1406}});
    out.push_back(c);
  }
  {
    Criterion c{3, "quartic candidate: proj, DOA estimate and level-set baseline"};
    compare(c, "proj", components_1d(quart.est.proj), {{-2, -0.02344}, {0.01563, 2}});
    compare(c, "DOA", components_1d(quart.est.doa_region), {{-2, 2}});
    const Paving region = normalize(*quart.cfg.baseline_region, 1, 0);
    const LevelSetBaseline b = levelset_baseline(quart.spec.lyapunov, region,
                                                 quart.spec.cons.state_box(), quart.spec.eps);
    compare(c, "level set on region [-2, 2] (c = " + fmt(b.c) + ")", components_1d(b.set),
            {{-2, 0.9145}});
    out.push_back(c);
  }
  {
    Criterion c{4, "closed-loop verification"};
    const std::pair<double, double> gap{0.1406, 1.07};
    closed_loop(c, "quadratic", quad, std::nullopt, &gap, lyapunov_violations);
    const Paving whole = normalize({quart.spec.cons.state_box()}, 1, 0);
    closed_loop(c, "quartic on [-2, 2]", quart, whole, nullptr, lyapunov_violations);
    out.push_back(c);
  }
  {
    Criterion c{5, "seeded particle swarm over SOS candidates"};
    const RunConfig cfg = load_config(kConfigs + "optimize.json");
    NegDefSpec tmpl{cfg.plant(), parse("x1^2", 1, 0), cfg.cons(), cfg.alpha, cfg.eps};
    const auto t0 = std::chrono::steady_clock::now();
    const PsoResult r = pso_optimize(*cfg.pso, cfg.lyapunov.sos.n, cfg.lyapunov.sos.d, tmpl);
    const double baseline = measure(quad.est.proj);
    c.check(r.best >= 3.5 && r.best > baseline,
            "best proj measure " + fmt(r.best) + " (>= 3.5, quadratic gives " + fmt(baseline) +
                "), swarm " + std::to_string(cfg.pso->swarm) + ", " +
                std::to_string(cfg.pso->iterations) + " iterations, seed " +
                std::to_string(cfg.pso->seed) + ", " + fmt(seconds(t0)) + " s");
    bool monotone = true;
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      monotone = monotone && r.history[i].best >= r.history[i - 1].best;
    }
    c.check(monotone, "objective history non-decreasing over " +
                          std::to_string(r.history.size()) + " entries");
    out.push_back(c);
  }
  {
    Criterion c{6, "property suites"};
    const int iv = interval_soundness_violations(100000);
    c.check(iv == 0, "interval soundness: " + std::to_string(iv) + " violations in 1e5 samples");

    const double d1 = disc_inner(0.01), d2 = disc_inner(0.005);
    c.check(d1 >= 3.10 && d1 <= M_PI && d2 >= d1,
            "disc inversion: inner " + fmt(d1) + " at eps 0.01, " + fmt(d2) + " at 0.005");

    std::mt19937_64 rng(31);
    int identity_bad = 0, oracle_bad = 0;
    for (int t = 0; t < 100; ++t) {
      const auto xa = random_dyadic_boxes(rng, 1 + t % 9);
      const auto xb = random_dyadic_boxes(rng, 1 + t % 7);
      const Paving a = normalize(xa, 2, 0), b = normalize(xb, 2, 0);
      oracle_bad += measure(a) != union_area_oracle(xa);
      std::vector<IvBox> inter;
      for (const auto& p : a.boxes()) {
        for (const auto& q : b.boxes()) {
          if (p.overlaps_interior(q)) inter.push_back(intersect(p, q));
        }
      }
      std::vector<IvBox> all = xa;
      all.insert(all.end(), xb.begin(), xb.end());
      identity_bad += measure(unite(a, b)) + measure(normalize(inter, 2, 0)) !=
                      measure(a) + measure(b);
      identity_bad += measure(unite(a, b)) != union_area_oracle(all);
    }
    c.check(identity_bad == 0,
            "partition measure identity: " + std::to_string(identity_bad) + " mismatches");
    c.check(oracle_bad == 0, "paving measure vs coordinate compression: " +
                                 std::to_string(oracle_bad) + " mismatches in 100 cases");

    const int post = post_check_failures(quad) + post_check_failures(quart);
    c.check(post == 0, "invariance and negative-definiteness post-checks on " +
                           std::to_string(quad.est.ni_set.size() + quart.est.ni_set.size()) +
                           " boxes: " + std::to_string(post) + " failures");
    c.check(lyapunov_violations == 0, "Lyapunov decrease along simulated trajectories: " +
                                          std::to_string(lyapunov_violations) + " violations");
    const double jac = jacobian_worst_error();
    c.check(jac <= 1e-6, "jacobian vs central differences: worst relative error " + fmt(jac));
    out.push_back(c);
  }

  int failed = 0;
  for (const auto& c : out) {
    std::printf("%s criterion %d: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.title.c_str());
    for (const auto& d : c.details) std::printf("    %s\n", d.c_str());
    failed += !c.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(out.size()) - failed, out.size());
  return failed;
}
