#include "doakit/sivia.hpp"

#include <string>
#include <utility>

#include "doakit/errors.hpp"

namespace doakit {

SiviaTarget::SiviaTarget(std::vector<Interval> intervals) : target_(std::move(intervals)) {
  if (std::get<0>(target_).empty()) throw ConfigError("SIVIA target needs at least one interval");
}

SiviaTarget::SiviaTarget(Paving paving) : target_(std::move(paving)) {}

int SiviaTarget::arity() const {
  if (const auto* iv = std::get_if<std::vector<Interval>>(&target_)) {
    return static_cast<int>(iv->size());
  }
  return std::get<Paving>(target_).dim();
}

bool SiviaTarget::contains(const IvBox& image) const {
  if (const auto* iv = std::get_if<std::vector<Interval>>(&target_)) {
    for (std::size_t i = 0; i < iv->size(); ++i) {
      if (!image[i].subset_of((*iv)[i])) return false;
    }
    return true;
  }
  return covers_box(std::get<Paving>(target_), image);
}

bool SiviaTarget::misses(const IvBox& image) const {
  if (const auto* iv = std::get_if<std::vector<Interval>>(&target_)) {
    for (std::size_t i = 0; i < iv->size(); ++i) {
      if (!image[i].intersects((*iv)[i])) return true;
    }
    return false;
  }
  return !intersects_box(std::get<Paving>(target_), image);
}

SiviaResult sivia(std::span<const Expr> p, const SiviaTarget& target, const Paving& init,
                  double eps) {
  if (!(eps > 0.0)) throw ConfigError("SIVIA needs eps > 0");
  if (static_cast<int>(p.size()) != target.arity()) {
    throw ConfigError("SIVIA: function arity does not match the target");
  }
  for (const Expr& e : p) {
    if (e.n_state() > init.n_state() || e.m_ctrl() > init.m_ctrl()) {
      throw ConfigError("SIVIA: function uses variables outside the search space");
    }
  }

  std::vector<IvBox> inner;
  std::vector<IvBox> outer;
  std::vector<IvBox> boundary;
  SiviaStats stats;

  std::vector<std::pair<IvBox, int>> stack;
  stack.reserve(64);
  for (const auto& b : init.boxes()) stack.emplace_back(b, 0);

  std::vector<Interval> image(p.size());
  while (!stack.empty()) {
    auto [box, depth] = std::move(stack.back());
    stack.pop_back();
    ++stats.boxes_processed;
    if (depth > stats.max_depth) stats.max_depth = depth;

    try {
      for (std::size_t i = 0; i < p.size(); ++i) image[i] = eval_interval(p[i], box);
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " (over box " + to_string(box) + ")");
    }
    const IvBox image_box(image);

    if (target.contains(image_box)) {
      inner.push_back(std::move(box));
    } else if (target.misses(image_box)) {
      outer.push_back(std::move(box));
    } else if (box.width() < eps) {
      boundary.push_back(std::move(box));
    } else {
      auto [left, right] = bisect(box);
      stack.emplace_back(std::move(left), depth + 1);
      stack.emplace_back(std::move(right), depth + 1);
    }
  }

  const int n = init.n_state();
  const int m = init.m_ctrl();
  return SiviaResult{Paving::from_disjoint(n, m, std::move(inner)),
                     Paving::from_disjoint(n, m, std::move(outer)),
                     Paving::from_disjoint(n, m, std::move(boundary)), stats};
}

Expr delta_l(const PlantModel& plant, const Expr& lyapunov) {
  if (lyapunov.depends_on_control()) {
    throw ConfigError("Lyapunov candidate must depend on state variables only");
  }
  if (lyapunov.n_state() > plant.n_state()) {
    throw ConfigError("Lyapunov candidate uses more states than the plant has");
  }
  // The difference takes the plant's (n, m) from the composed term.
  return compose_states(lyapunov, plant.dynamics()) - lyapunov;
}

}  // namespace doakit
