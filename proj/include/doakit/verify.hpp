#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doakit/control.hpp"
#include "doakit/doa.hpp"

namespace doakit {

struct SimSettings {
  int trajectories = 200;
  int max_steps = 200;
  double conv_tol = 1e-3;
  std::uint64_t seed = 1;
};

enum class ControlMode { kTable, kSampled };

struct RunSummary {
  int runs = 0;
  int converged = 0;
  /// Runs that left doa_region u X0 or started outside it.
  int domain_failures = 0;
  /// Steps from a state in proj with L(x+) >= L(x).
  int lyapunov_violations = 0;
  /// Visited states strictly inside a gap of cons \ doa_region.
  int gap_visits = 0;
  std::vector<Point> starts;
  std::vector<Trajectory> trajectories;  ///< one per run that did not fail
  std::vector<std::string> failures;
  bool ok() const {
    return converged == runs && domain_failures == 0 && lyapunov_violations == 0 && gap_visits == 0;
  }
};

struct ClosedLoopReport {
  std::optional<X0Check> x0;
  RunSummary table;
  RunSummary sampled;
  bool ok() const { return (!x0 || x0->ok()) && table.ok() && sampled.ok(); }
};

/// Runs `settings.trajectories` closed-loop simulations from points uniform
/// in `starts_from` (defaults to the DOA estimate) under the given control
/// mode, checking convergence, invariance, Lyapunov decrease on proj and gap
/// avoidance. Starts are drawn from a generator seeded with settings.seed, so
/// both modes use the same initial states; sampled controls use seed + 1.
RunSummary run_closed_loop(const PlantModel& plant, const Expr& lyapunov, const DoaEstimate& est,
                           const IvBox& cons_state, const Eigen::MatrixXd& k, ControlMode mode,
                           const SimSettings& settings,
                           const std::optional<Paving>& starts_from = std::nullopt);

/// X0 check (100 runs) plus table and sampled runs.
ClosedLoopReport verify_closed_loop(const PlantModel& plant, const Expr& lyapunov,
                                    const DoaEstimate& est, const IvBox& cons_state,
                                    const Eigen::MatrixXd& k, const SimSettings& settings,
                                    const std::optional<Paving>& starts_from = std::nullopt);

/// Boxes of the closure of cons \ region.
std::vector<IvBox> region_gaps(const IvBox& cons_state, const Paving& region);

}  // namespace doakit
