#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "doakit/expr.hpp"
#include "doakit/interval.hpp"
#include "doakit/paving.hpp"

namespace doakit {

/// The set Y in Z = {z : p(z) in Y}: one interval per output of p, or a
/// paving over the output space.
class SiviaTarget {
 public:
  explicit SiviaTarget(std::vector<Interval> intervals);
  explicit SiviaTarget(Paving paving);

  /// Output dimension of p the target expects.
  int arity() const;
  bool is_paving() const { return std::holds_alternative<Paving>(target_); }

  /// [p]([z]) entirely inside Y.
  bool contains(const IvBox& image) const;
  /// [p]([z]) disjoint from Y.
  bool misses(const IvBox& image) const;

 private:
  std::variant<std::vector<Interval>, Paving> target_;
};

struct SiviaStats {
  std::size_t boxes_processed = 0;
  int max_depth = 0;
};

struct SiviaResult {
  Paving inner;
  Paving outer;
  Paving boundary;
  SiviaStats stats;
};

/// Branch-and-classify set inversion. Boxes whose image is inside the target
/// go to `inner`, disjoint images to `outer`, undecided boxes narrower than
/// eps to `boundary`; everything else is bisected. The work list is a LIFO
/// stack seeded with `init` in canonical order, children pushed (left, right).
///
/// Throws ConfigError for eps <= 0 or mismatched dimensions; a DomainError
/// raised by an inclusion function is re-thrown with the offending box.
SiviaResult sivia(std::span<const Expr> p, const SiviaTarget& target, const Paving& init,
                  double eps);

/// Lyapunov difference dL(x, u) = L(f(x, u)) - L(x) as one expression over
/// the plant's state and control variables. Throws ConfigError when L uses
/// control variables.
Expr delta_l(const PlantModel& plant, const Expr& lyapunov);

}  // namespace doakit
