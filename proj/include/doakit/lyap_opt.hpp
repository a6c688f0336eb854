#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "doakit/doa.hpp"
#include "doakit/expr.hpp"

namespace doakit {

/// Exponent vectors of all monomials of total degree 1..d in n variables,
/// graded-lexicographic (x1 before x2 within a degree).
std::vector<std::vector<int>> monomial_exponents(int n, int d);

/// r = C(n + d, d) - 1.
int monomial_count(int n, int d);

/// s_d(x): the monomials above evaluated at x.
std::vector<double> monomial_vector(std::span<const double> x, int n, int d);

/// L(x) = s_d(x)' P'P s_d(x) with P an r x r matrix.
struct SosLyapunov {
  int n = 1;
  int d = 1;
  Eigen::MatrixXd p;

  /// |det P| >= 1e-6.
  bool full_rank() const;
};

/// Expanded polynomial sum_a c_a x^a with c collected from M = P'P.
/// Throws ConfigError when P has the wrong size or fails the rank guard.
Expr sos_to_expr(const SosLyapunov& lyap);

/// measure(proj) of the DOA pipeline run with L from P; -1 when P fails the
/// rank guard or the pipeline raises.
double sos_objective(const SosLyapunov& lyap, const NegDefSpec& tmpl);

struct PsoConfig {
  int swarm = 20;
  int iterations = 30;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double lower = -3.0;
  double upper = 3.0;
  std::uint64_t seed = 1;
};

struct PsoStep {
  int iteration = 0;
  double best = 0.0;
  Eigen::MatrixXd p;
};

struct PsoResult {
  Eigen::MatrixXd best_p;
  double best = -1.0;
  /// Entry 0 is the initial swarm; one entry per iteration after that.
  std::vector<PsoStep> history;
  int evaluations = 0;
};

/// Global-best particle swarm over the r*r entries of P (row-major),
/// maximizing sos_objective. Positions start uniform in [lower, upper] with
/// zero velocity and are clamped to the bounds; velocities are clamped to
/// the bound width. The incumbent is updated in particle-index order.
PsoResult pso_optimize(const PsoConfig& cfg, int n, int d, const NegDefSpec& tmpl);

}  // namespace doakit
