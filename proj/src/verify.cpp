#include "doakit/verify.hpp"

#include <random>

#include "doakit/errors.hpp"

namespace doakit {

std::vector<IvBox> region_gaps(const IvBox& cons_state, const Paving& region) {
  std::vector<IvBox> gaps{cons_state};
  for (const auto& q : region.boxes()) {
    std::vector<IvBox> next;
    for (const auto& g : gaps) {
      auto pieces = subtract(g, q);
      next.insert(next.end(), pieces.begin(), pieces.end());
    }
    gaps.swap(next);
  }
  return gaps;
}

namespace {

bool strictly_inside(const IvBox& b, const Point& x) {
  for (int i = 0; i < b.dim(); ++i) {
    if (!(b[i].lo() < x[i] && x[i] < b[i].hi())) return false;
  }
  return true;
}

}  // namespace

RunSummary run_closed_loop(const PlantModel& plant, const Expr& lyapunov, const DoaEstimate& est,
                           const IvBox& cons_state, const Eigen::MatrixXd& k, ControlMode mode,
                           const SimSettings& settings, const std::optional<Paving>& starts_from) {
  const ControllerTable table(est.ni_set);
  const std::vector<IvBox> gaps = region_gaps(cons_state, est.doa_region);
  std::mt19937_64 start_rng(settings.seed);
  std::mt19937_64 control_rng(settings.seed + 1);

  const ControlLaw law = [&](std::span<const double> x) -> Point {
    if (mode == ControlMode::kTable) return mu(x, table, k, est.x0);
    if (table.lookup(x) != nullptr) return sample_admissible(est.ni_set, x, control_rng);
    return mu(x, table, k, est.x0);
  };

  const Paving& source = starts_from ? *starts_from : est.doa_region;
  RunSummary summary;
  for (int i = 0; i < settings.trajectories; ++i) {
    const Point start = sample_in(source, start_rng);
    summary.starts.push_back(start);
    ++summary.runs;
    Trajectory traj;
    try {
      traj = simulate(plant, law, start, settings.max_steps, settings.conv_tol, est.doa_region,
                      est.x0);
    } catch (const Error& e) {
      ++summary.domain_failures;
      summary.failures.push_back("run " + std::to_string(i) + ": " + e.what());
      continue;
    }
    if (traj.converged) ++summary.converged;
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
      const Point& x = traj.states[s];
      for (const auto& g : gaps) {
        if (strictly_inside(g, x)) ++summary.gap_visits;
      }
      if (s + 1 < traj.states.size() && est.proj.contains_point(x) && table.lookup(x) != nullptr) {
        const double now = eval_scalar(lyapunov, x, {});
        const double next = eval_scalar(lyapunov, traj.states[s + 1], {});
        if (!(next < now)) ++summary.lyapunov_violations;
      }
    }
    summary.trajectories.push_back(std::move(traj));
  }
  return summary;
}

ClosedLoopReport verify_closed_loop(const PlantModel& plant, const Expr& lyapunov,
                                    const DoaEstimate& est, const IvBox& cons_state,
                                    const Eigen::MatrixXd& k, const SimSettings& settings,
                                    const std::optional<Paving>& starts_from) {
  ClosedLoopReport report;
  if (est.x0) {
    report.x0 = verify_x0(plant, k, *est.x0, 100, settings.max_steps, settings.conv_tol,
                          settings.seed + 2);
  }
  report.table = run_closed_loop(plant, lyapunov, est, cons_state, k, ControlMode::kTable,
                                 settings, starts_from);
  report.sampled = run_closed_loop(plant, lyapunov, est, cons_state, k, ControlMode::kSampled,
                                   settings, starts_from);
  return report;
}

}  // namespace doakit
