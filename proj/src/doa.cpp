#include "doakit/doa.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "doakit/errors.hpp"

namespace doakit {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Paving single_box_paving(const IvBox& b) {
  return Paving::from_disjoint(b.n_state(), b.m_ctrl(), {b});
}

}  // namespace

void NegDefSpec::validate() const {
  if (cons.dim() != plant.n_state() + plant.m_ctrl() || cons.n_state() != plant.n_state()) {
    throw ConfigError("constraint box does not match the plant dimensions");
  }
  for (const auto& d : cons.dims()) {
    if (d.is_empty() || !std::isfinite(d.lo()) || !std::isfinite(d.hi()) || !(d.lo() < d.hi())) {
      throw ConfigError("constraint box must be compact with positive extent");
    }
  }
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (lyapunov.depends_on_control()) throw ConfigError("Lyapunov candidate uses controls");
  if (lyapunov.n_state() > plant.n_state()) throw ConfigError("Lyapunov candidate uses undeclared states");
}

SiviaResult negdef_sivia(const NegDefSpec& spec) {
  spec.validate();
  const Expr dl = delta_l(spec.plant, spec.lyapunov);
  const SiviaTarget target(
      std::vector<Interval>{Interval(-std::numeric_limits<double>::infinity(), -spec.alpha)});
  return sivia(std::span(&dl, 1), target, single_box_paving(spec.cons), spec.eps);
}

Paving negdef_set(const NegDefSpec& spec) { return negdef_sivia(spec).inner; }

RefineResult invariant_refine(const PlantModel& plant, const Paving& w0, double eps,
                              const std::optional<IvBox>& terminal) {
  if (w0.n_state() != plant.n_state() || w0.m_ctrl() != plant.m_ctrl()) {
    throw ConfigError("refinement input is not a state-control paving of the plant");
  }
  std::optional<Paving> terminal_paving;
  if (terminal) {
    if (terminal->dim() != plant.n_state()) throw ConfigError("terminal set must be a state box");
    terminal_paving = normalize({*terminal}, plant.n_state(), 0);
  }

  RefineResult result;
  result.measures.push_back(measure(w0));
  Paving current = w0;
  Paving previous(plant.n_state(), plant.m_ctrl());
  while (!(current == previous)) {
    previous = current;
    Paving target_set = previous.empty() ? Paving(plant.n_state(), 0) : project(previous);
    if (terminal_paving) target_set = unite(target_set, *terminal_paving);
    const SiviaTarget target(std::move(target_set));
    current = sivia(plant.dynamics(), target, previous, eps).inner;
    ++result.iterations;
    result.measures.push_back(measure(current));
  }
  result.set = std::move(current);
  return result;
}

DoaEstimate doa_pipeline(const NegDefSpec& spec, const DoaOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  DoaEstimate est;
  const int n = spec.plant.n_state();
  const int m = spec.plant.m_ctrl();

  auto ndef = negdef_sivia(spec);
  est.ndef = std::move(ndef.inner);
  est.ndef_boundary = std::move(ndef.boundary);
  est.timings.negdef_s = seconds_since(start);

  const IvBox cons_state = spec.cons.state_box();
  if (est.ndef.empty()) {
    est.degenerate = true;
    est.ni_set = Paving(n, m);
    est.proj = Paving(n, 0);
    est.doa_region = Paving(n, 0);
    est.timings.total_s = seconds_since(start);
    return est;
  }

  try {
    est.x0 = origin_gap(project(est.ndef), cons_state);
  } catch (const OriginCoveredError&) {
    est.x0.reset();
  }

  const auto refine_start = std::chrono::steady_clock::now();
  const std::optional<IvBox> terminal =
      options.x0_in_invariance_target ? est.x0 : std::optional<IvBox>{};
  auto refined = invariant_refine(spec.plant, est.ndef, spec.eps, terminal);
  est.timings.refine_s = seconds_since(refine_start);
  est.ni_set = std::move(refined.set);
  est.iterations = refined.iterations;
  est.refine_measures = std::move(refined.measures);

  if (est.ni_set.empty()) {
    est.degenerate = true;
    est.proj = Paving(n, 0);
    est.doa_region = Paving(n, 0);
    est.timings.total_s = seconds_since(start);
    return est;
  }

  est.proj = project(est.ni_set);
  est.doa_region = est.x0 ? unite(est.proj, normalize({*est.x0}, n, 0)) : est.proj;
  est.volume = measure(est.doa_region);
  est.timings.total_s = seconds_since(start);
  return est;
}

// ---------------------------------------------------------------------------

namespace {

// True when L > c is proven on every box (no point of the sublevel set).
bool sublevel_avoids(const Expr& lyapunov, double c, const std::vector<IvBox>& boxes,
                     double resolution) {
  std::vector<IvBox> stack(boxes.rbegin(), boxes.rend());
  while (!stack.empty()) {
    IvBox b = std::move(stack.back());
    stack.pop_back();
    const Interval value = eval_interval(lyapunov, b);
    if (value.lo() > c) continue;
    if (value.hi() <= c || b.width() < resolution) return false;
    auto [left, right] = bisect(b);
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return true;
}

}  // namespace

LevelSetBaseline levelset_baseline(const Expr& lyapunov, const Paving& region,
                                   const IvBox& cons_state, double eps, double c_tol,
                                   double certify_ratio) {
  if (region.empty()) throw ConfigError("level-set baseline needs a non-empty region");
  if (region.m_ctrl() != 0 || region.dim() != cons_state.dim()) {
    throw ConfigError("level-set baseline: region must be a state paving matching cons");
  }
  if (lyapunov.depends_on_control()) throw ConfigError("Lyapunov candidate uses controls");
  const int n = cons_state.dim();

  std::vector<Interval> doubled;
  for (const auto& d : cons_state.dims()) {
    const double half = d.hi() - d.lo();
    doubled.emplace_back(d.lo() - 0.5 * half, d.hi() + 0.5 * half);
  }
  const IvBox search(std::move(doubled));

  std::vector<IvBox> outside{search};
  for (const auto& q : region.boxes()) {
    std::vector<IvBox> next;
    for (const auto& r : outside) {
      auto pieces = subtract(r, q);
      next.insert(next.end(), pieces.begin(), pieces.end());
    }
    outside.swap(next);
  }

  const double resolution = eps * certify_ratio;
  auto feasible = [&](double c) { return sublevel_avoids(lyapunov, c, outside, resolution); };

  double lo = 0.0;
  double hi = eval_interval(lyapunov, search).hi();
  LevelSetBaseline out;
  if (outside.empty() || feasible(hi)) {
    lo = hi;
  } else if (!feasible(lo)) {
    out.c = 0.0;
    out.set = Paving(n, 0);
    return out;
  } else {
    while (hi - lo > c_tol * hi) {
      const double mid = lo + 0.5 * (hi - lo);
      (feasible(mid) ? lo : hi) = mid;
    }
  }

  out.c = lo;
  const Paving init = Paving::from_disjoint(n, 0, {cons_state});
  const SiviaTarget target(
      std::vector<Interval>{Interval(-std::numeric_limits<double>::infinity(), lo)});
  out.set = normalize(sivia(std::span(&lyapunov, 1), target, init, eps).inner.boxes(), n, 0);
  return out;
}

}  // namespace doakit
