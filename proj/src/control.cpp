#include "doakit/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "doakit/errors.hpp"

namespace doakit {

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

Linearization origin_linearization(const PlantModel& plant) {
  const Point x(plant.n_state(), 0.0);
  const Point u(plant.m_ctrl(), 0.0);
  return jacobian_at(plant, x, u);
}

}  // namespace

Eigen::MatrixXd linear_gain(const PlantModel& plant, const Eigen::MatrixXd& q,
                            const Eigen::MatrixXd& r) {
  const auto [a, b] = origin_linearization(plant);
  const int n = plant.n_state();
  const int m = plant.m_ctrl();
  if (q.rows() != n || q.cols() != n || r.rows() != m || r.cols() != m) {
    throw ConfigError("LQR weights do not match the plant dimensions");
  }

  Eigen::MatrixXd p = q;
  bool settled = false;
  for (int it = 0; it < 100000 && !settled; ++it) {
    const Eigen::MatrixXd gain = (r + b.transpose() * p * b).ldlt().solve(b.transpose() * p * a);
    const Eigen::MatrixXd next = q + a.transpose() * p * a - a.transpose() * p * b * gain;
    if (!next.allFinite()) break;
    settled = (next - p).cwiseAbs().maxCoeff() < 1e-12;
    p = next;
  }
  if (!settled) throw StabilizabilityError("Riccati iteration did not converge");

  Eigen::MatrixXd k = -(r + b.transpose() * p * b).ldlt().solve(b.transpose() * p * a);
  check_gain(plant, k);
  return k;
}

void check_gain(const PlantModel& plant, const Eigen::MatrixXd& k) {
  if (k.rows() != plant.m_ctrl() || k.cols() != plant.n_state()) {
    throw ConfigError("gain must be m x n");
  }
  const auto [a, b] = origin_linearization(plant);
  const double rho = spectral_radius(a + b * k);
  if (!(rho < 1.0)) {
    throw StabilizabilityError("A + BK has spectral radius " + std::to_string(rho));
  }
}

ControllerTable::ControllerTable(const Paving& ni_set)
    : n_state_(ni_set.n_state()), m_ctrl_(ni_set.m_ctrl()) {
  if (ni_set.empty()) throw ConfigError("controller table needs a non-empty set");
  if (m_ctrl_ == 0) throw ConfigError("controller table needs a state-control paving");
  cells_.reserve(ni_set.size());
  for (const auto& box : ni_set.boxes()) {
    ControlCell cell{box.state_box(), {}, box, 1.0};
    for (const auto& c : box.control()) {
      cell.u.push_back(c.mid());
      cell.margin *= c.hi() - c.lo();
    }
    cells_.push_back(std::move(cell));
  }
}

const ControlCell* ControllerTable::lookup(std::span<const double> x) const {
  const ControlCell* best = nullptr;
  for (const auto& cell : cells_) {
    if (cell.state_box.contains_point(x) && (best == nullptr || cell.margin > best->margin)) {
      best = &cell;
    }
  }
  return best;
}

Point mu(std::span<const double> x, const ControllerTable& table, const Eigen::MatrixXd& k,
         const std::optional<IvBox>& x0) {
  if (const ControlCell* cell = table.lookup(x)) return cell->u;
  if (x0 && x0->contains_point(x)) {
    const Eigen::VectorXd u = k * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    return Point(u.data(), u.data() + u.size());
  }
  throw OutOfDomainError("state outside the DOA estimate");
}

namespace {

bool state_contains(const IvBox& box, std::span<const double> x) {
  const auto s = box.state();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].contains(x[i])) return false;
  }
  return true;
}

}  // namespace

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Point sample_admissible(const Paving& ni_set, std::span<const double> x, std::mt19937_64& rng) {
  std::vector<const IvBox*> hits;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& box : ni_set.boxes()) {
    if (!state_contains(box, x)) continue;
    double vol = 1.0;
    for (const auto& c : box.control()) vol *= c.hi() - c.lo();
    total += vol;
    hits.push_back(&box);
    cumulative.push_back(total);
  }
  if (hits.empty()) throw OutOfDomainError("no admissible control at this state");

  const double pick = uniform01(rng) * total;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
  const IvBox& chosen = *hits[std::min<std::size_t>(it - cumulative.begin(), hits.size() - 1)];
  Point u;
  for (const auto& c : chosen.control()) u.push_back(c.lo() + uniform01(rng) * (c.hi() - c.lo()));
  return u;
}

Point sample_admissible(const Paving& ni_set, std::span<const double> x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_admissible(ni_set, x, rng);
}

namespace {

double inf_norm(std::span<const double> x) {
  double v = 0.0;
  for (double c : x) v = std::max(v, std::abs(c));
  return v;
}

bool in_domain(std::span<const double> x, const Paving& region, const std::optional<IvBox>& x0) {
  return region.contains_point(x) || (x0 && x0->contains_point(x));
}

std::string point_string(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
  return s + ")";
}

}  // namespace

Trajectory simulate(const PlantModel& plant, const ControlLaw& law, std::span<const double> start,
                    int max_steps, double conv_tol, const Paving& region,
                    const std::optional<IvBox>& x0) {
  if (static_cast<int>(start.size()) != plant.n_state()) {
    throw ConfigError("initial state has the wrong dimension");
  }
  if (!in_domain(start, region, x0)) {
    throw OutOfDomainError("initial state " + point_string(start) + " outside the DOA estimate");
  }
  Trajectory traj;
  traj.states.emplace_back(start.begin(), start.end());
  for (int k = 0;; ++k) {
    const Point& x = traj.states.back();
    if (inf_norm(x) <= conv_tol) {
      traj.converged = true;
      traj.steps_to_converge = k;
      break;
    }
    if (k == max_steps) break;
    Point u = law(x);
    Point next = plant.step(x, u);
    traj.controls.push_back(std::move(u));
    if (!in_domain(next, region, x0)) {
      throw InvarianceViolation("step " + std::to_string(k + 1) + " left the DOA estimate at " +
                                point_string(next));
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Point sample_in(const IvBox& b, std::mt19937_64& rng) {
  Point p;
  for (const auto& d : b.dims()) p.push_back(d.lo() + uniform01(rng) * (d.hi() - d.lo()));
  return p;
}

Point sample_in(const Paving& p, std::mt19937_64& rng) {
  if (p.empty()) throw ConfigError("cannot sample from an empty paving");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& b : p.boxes()) cumulative.push_back(total += b.volume());
  const double pick = uniform01(rng) * total;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
  return sample_in(p.boxes()[std::min<std::size_t>(it - cumulative.begin(), p.size() - 1)], rng);
}

X0Check verify_x0(const PlantModel& plant, const Eigen::MatrixXd& k, const IvBox& x0, int runs,
                  int max_steps, double conv_tol, std::uint64_t seed) {
  const auto [a, b] = origin_linearization(plant);
  X0Check check;
  check.spectral_radius = spectral_radius(a + b * k);
  check.runs = runs;
  std::mt19937_64 rng(seed);
  const ControlLaw law = [&](std::span<const double> x) {
    const Eigen::VectorXd u = k * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    return Point(u.data(), u.data() + u.size());
  };
  const Paving none(plant.n_state(), 0);
  for (int i = 0; i < runs; ++i) {
    const Point start = sample_in(x0, rng);
    try {
      if (simulate(plant, law, start, max_steps, conv_tol, none, x0).converged) ++check.converged;
    } catch (const InvarianceViolation&) {
      // left X0: counted as a failed run
    }
  }
  return check;
}

}  // namespace doakit
