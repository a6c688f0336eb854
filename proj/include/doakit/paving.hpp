#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doakit/interval.hpp"

namespace doakit {

/// A finite union of boxes with pairwise disjoint interiors, kept in
/// canonical (lexicographic) order so that equality is list equality.
class Paving {
 public:
  Paving() = default;
  /// Empty paving of dimension n_state + m_ctrl.
  Paving(int n_state, int m_ctrl);

  /// Adopt boxes that are already interior-disjoint; only sorts them.
  static Paving from_disjoint(int n_state, int m_ctrl, std::vector<IvBox> boxes);

  int dim() const { return n_state_ + m_ctrl_; }
  int n_state() const { return n_state_; }
  int m_ctrl() const { return m_ctrl_; }
  const std::vector<IvBox>& boxes() const { return boxes_; }
  std::size_t size() const { return boxes_.size(); }
  bool empty() const { return boxes_.empty(); }

  bool contains_point(std::span<const double> p) const;

  friend bool operator==(const Paving& a, const Paving& b) {
    return a.n_state_ == b.n_state_ && a.m_ctrl_ == b.m_ctrl_ && a.boxes_ == b.boxes_;
  }

 private:
  int n_state_ = 0;
  int m_ctrl_ = 0;
  std::vector<IvBox> boxes_;
};

/// Disjoint canonical paving with the same union as `boxes`, up to sets of
/// measure zero (degenerate boxes are dropped). Adjacent pieces are merged
/// maximally along the leading coordinates, so two box lists with the same
/// union yield identical pavings.
Paving normalize(std::vector<IvBox> boxes, int n_state, int m_ctrl);

/// Union of two pavings of the same shape.
Paving unite(const Paving& a, const Paving& b);

/// Drop the control coordinates and normalize. Throws InvalidProjection for
/// a paving without control coordinates.
Paving project(const Paving& p);

/// Lebesgue measure of the union (sum of box volumes by disjointness).
double measure(const Paving& p);

/// Closure of a \ b as a list of boxes; requires a.intersects(b) to split,
/// returns {a} otherwise.
std::vector<IvBox> subtract(const IvBox& a, const IvBox& b);

/// True iff b lies in the union of the paving (closed boxes).
bool covers_box(const Paving& p, const IvBox& b);
/// True iff some paving box meets b; shared faces count.
bool intersects_box(const Paving& p, const IvBox& b);

bool equals(const Paving& a, const Paving& b);

/// Largest box around the origin, grown one axis direction at a time
/// (dim 1 negative, dim 1 positive, dim 2 negative, ...) until it touches a
/// paving box or the boundary of `cons`. `cons` must be a state box holding
/// the origin. Throws OriginCoveredError when the origin is in the paving.
IvBox origin_gap(const Paving& p, const IvBox& cons);

/// O(k^2) check that no two boxes share interior points.
bool audit_disjoint(const Paving& p);

/// Maximal connected intervals of a one-dimensional paving.
std::vector<Interval> components_1d(const Paving& p);

// ---------------------------------------------------------------------------
// JSON-lines files: a header object, then one object per box.

struct PavingHeader {
  int dim = 0;
  int n_state = 0;
  int m_ctrl = 0;
  double epsilon = 0.0;
  double alpha = 0.0;
};

struct PavingFile {
  PavingHeader header;
  Paving inner;
  Paving boundary;
};

void write_paving(std::ostream& os, const Paving& inner, const PavingHeader& header,
                  const Paving* boundary = nullptr);
void write_paving(const std::string& path, const Paving& inner, const PavingHeader& header,
                  const Paving* boundary = nullptr);
PavingFile read_paving(std::istream& is);
PavingFile read_paving(const std::string& path);

}  // namespace doakit
