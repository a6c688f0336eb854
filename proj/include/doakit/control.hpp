#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "doakit/expr.hpp"
#include "doakit/interval.hpp"
#include "doakit/paving.hpp"

namespace doakit {

using Point = std::vector<double>;

/// Spectral radius of a square matrix.
double spectral_radius(const Eigen::MatrixXd& m);

/// LQR gain for the linearization at the origin, with the sign chosen so
/// that u = Kx is stabilizing: K = -(R + B'PB)^-1 B'PA, where P solves the
/// discrete algebraic Riccati equation by fixed-point iteration.
///
/// Throws StabilizabilityError if the iteration does not settle within
/// 1e5 steps or the resulting A + BK is not Schur stable.
Eigen::MatrixXd linear_gain(const PlantModel& plant, const Eigen::MatrixXd& q,
                            const Eigen::MatrixXd& r);

/// Validates a user-supplied gain; throws StabilizabilityError if A + BK is
/// not Schur stable.
void check_gain(const PlantModel& plant, const Eigen::MatrixXd& k);

struct ControlCell {
  IvBox state_box;
  Point u;      ///< midpoint of the source box's control part
  IvBox source; ///< the ni_set box the cell comes from
  double margin = 0.0;  ///< product of the source control widths
};

/// One cell per box of the negative-definite and invariant set. Lookup picks
/// the containing cell with the largest control margin, first in canonical
/// order on ties.
class ControllerTable {
 public:
  ControllerTable() = default;
  explicit ControllerTable(const Paving& ni_set);

  const std::vector<ControlCell>& cells() const { return cells_; }
  int n_state() const { return n_state_; }
  int m_ctrl() const { return m_ctrl_; }

  /// nullptr when no cell covers x.
  const ControlCell* lookup(std::span<const double> x) const;

 private:
  int n_state_ = 0;
  int m_ctrl_ = 0;
  std::vector<ControlCell> cells_;
};

/// Closed-loop law: table output on proj, u = Kx on X0 otherwise.
/// Throws OutOfDomainError when neither applies.
Point mu(std::span<const double> x, const ControllerTable& table, const Eigen::MatrixXd& k,
         const std::optional<IvBox>& x0);

/// Uniform in [0, 1) from the top 53 bits of one engine draw; unlike
/// std::uniform_real_distribution the mapping is fixed across standard
/// libraries.
double uniform01(std::mt19937_64& rng);

/// Control drawn uniformly from U(x) = {u : (x, u) in ni_set}: a box is
/// chosen with probability proportional to its control volume, then u is
/// uniform inside it. Throws OutOfDomainError if no box contains x.
Point sample_admissible(const Paving& ni_set, std::span<const double> x, std::mt19937_64& rng);
Point sample_admissible(const Paving& ni_set, std::span<const double> x, std::uint64_t seed);

struct Trajectory {
  std::vector<Point> states;
  std::vector<Point> controls;  ///< controls[k] drives states[k] -> states[k+1]
  bool converged = false;
  int steps_to_converge = -1;
};

using ControlLaw = std::function<Point(std::span<const double>)>;

/// Iterates x+ = f(x, u(x)) until |x|_inf <= conv_tol or max_steps steps.
/// Every visited state must lie in `region` or `x0`, else InvarianceViolation;
/// an initial state outside both raises OutOfDomainError.
Trajectory simulate(const PlantModel& plant, const ControlLaw& law, std::span<const double> start,
                    int max_steps, double conv_tol, const Paving& region,
                    const std::optional<IvBox>& x0 = std::nullopt);

/// Uniform point in a paving (boxes weighted by volume).
Point sample_in(const Paving& p, std::mt19937_64& rng);
Point sample_in(const IvBox& b, std::mt19937_64& rng);

struct X0Check {
  double spectral_radius = 0.0;
  int runs = 0;
  int converged = 0;
  bool ok() const { return spectral_radius < 1.0 && converged == runs; }
};

/// Spectral test on A + BK plus `runs` closed-loop runs from points uniform
/// in X0 under u = Kx.
X0Check verify_x0(const PlantModel& plant, const Eigen::MatrixXd& k, const IvBox& x0, int runs,
                  int max_steps, double conv_tol, std::uint64_t seed);

}  // namespace doakit
