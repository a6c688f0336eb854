#pragma once

#include <optional>
#include <vector>

#include "doakit/expr.hpp"
#include "doakit/interval.hpp"
#include "doakit/paving.hpp"
#include "doakit/sivia.hpp"

namespace doakit {

/// Inputs of the negative-definite set W_N(L) = {w in cons : dL(w) <= -alpha}.
struct NegDefSpec {
  PlantModel plant;
  Expr lyapunov;
  IvBox cons;  ///< state-control constraint box, all bounds finite
  double alpha = 1e-15;
  double eps = 0.01;

  /// Throws ConfigError on any violated precondition.
  void validate() const;
};

/// Inner approximation of W_N(L) within cons.
SiviaResult negdef_sivia(const NegDefSpec& spec);
Paving negdef_set(const NegDefSpec& spec);

struct RefineResult {
  Paving set;
  int iterations = 0;
  /// Measure of the input followed by the measure after each pass.
  std::vector<double> measures;
};

/// Fixed point of W -> SIVIA(f, proj(W) u T, W, eps): repeatedly drop the
/// state-control boxes whose image may leave proj(W) u T, where T is the
/// optional `terminal` state box (the linear-gain neighbourhood X0).
///
/// Without a terminal set every box attaining min L over proj(W) maps
/// strictly closer to the origin and is removed, so a negative-definite
/// input shrinks to the empty set; pass X0 to get a useful region.
RefineResult invariant_refine(const PlantModel& plant, const Paving& w0, double eps,
                              const std::optional<IvBox>& terminal = std::nullopt);

struct StageTimings {
  double negdef_s = 0.0;
  double refine_s = 0.0;
  double total_s = 0.0;
};

struct DoaEstimate {
  Paving ndef;           ///< inner approximation of W_N(L)
  Paving ndef_boundary;  ///< undecided boxes of the same SIVIA run
  Paving ni_set;         ///< inner approximation of W_N&I(L)
  Paving proj;           ///< proj(ni_set)
  std::optional<IvBox> x0;
  Paving doa_region;     ///< proj u x0
  double volume = 0.0;
  int iterations = 0;
  std::vector<double> refine_measures;
  /// Empty negative-definite or invariant set: volume is reported as 0.
  bool degenerate = false;
  StageTimings timings;
};

struct DoaOptions {
  /// Accept images landing in X0 during the invariance refinement.
  bool x0_in_invariance_target = true;
};

/// negdef_set -> origin gap X0 -> invariant_refine -> project -> proj u X0.
DoaEstimate doa_pipeline(const NegDefSpec& spec, const DoaOptions& options = {});

struct LevelSetBaseline {
  double c = 0.0;
  Paving set;  ///< inner approximation of {x in cons : L(x) <= c}
};

/// Largest sublevel set {L <= c} that stays inside `region`, with c found
/// by bisection to relative tolerance `c_tol`.
///
/// Feasibility of c is certified on S \ region, where S is the state
/// constraint box doubled about its centre: every point there must have
/// L > c, proven by interval bisection down to eps * `certify_ratio`.
LevelSetBaseline levelset_baseline(const Expr& lyapunov, const Paving& region,
                                   const IvBox& cons_state, double eps, double c_tol = 1e-4,
                                   double certify_ratio = 1.0 / 1024.0);

}  // namespace doakit
