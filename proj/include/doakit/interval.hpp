#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace doakit {

/// Closed interval [lo, hi] over the extended reals.
///
/// Every arithmetic operation returns an enclosure of the exact real result.
/// Bounds are rounded outward: exact floating-point results are kept as is,
/// inexact ones are moved one representable step away from the true value
/// (detected with error-free transformations for + - * / sqrt, assumed for
/// the transcendental functions).
class Interval {
 public:
  /// Degenerate interval [0, 0].
  constexpr Interval() = default;
  constexpr Interval(double point) : lo_(point), hi_(point) {}  // NOLINT
  Interval(double lo, double hi);

  static constexpr Interval empty() {
    Interval r;
    r.lo_ = std::numeric_limits<double>::infinity();
    r.hi_ = -std::numeric_limits<double>::infinity();
    return r;
  }
  static constexpr Interval entire() {
    Interval r;
    r.lo_ = -std::numeric_limits<double>::infinity();
    r.hi_ = std::numeric_limits<double>::infinity();
    return r;
  }

  constexpr double lo() const { return lo_; }
  constexpr double hi() const { return hi_; }
  constexpr bool is_empty() const { return lo_ > hi_; }

  /// hi - lo rounded up; 0 for the empty interval.
  double width() const;
  double mid() const;
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains_zero() const { return contains(0.0); }
  bool subset_of(const Interval& other) const;
  bool intersects(const Interval& other) const;

  friend bool operator==(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return a.is_empty() && b.is_empty();
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

Interval intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
/// Throws DomainError when 0 lies in b.
Interval operator/(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);

inline Interval iv_add(const Interval& a, const Interval& b) { return a + b; }
inline Interval iv_sub(const Interval& a, const Interval& b) { return a - b; }
inline Interval iv_mul(const Interval& a, const Interval& b) { return a * b; }
inline Interval iv_div(const Interval& a, const Interval& b) { return a / b; }
inline Interval iv_neg(const Interval& a) { return -a; }

Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval exp(const Interval& a);
/// Negative lower bounds are clamped to zero; hi < 0 throws DomainError.
Interval sqrt(const Interval& a);
Interval abs(const Interval& a);
Interval tanh(const Interval& a);
Interval pow_int(const Interval& a, unsigned k);

std::ostream& operator<<(std::ostream& os, const Interval& a);

/// Directed-rounding primitives shared with the box and paving code.
namespace rounding {
double down(double x);
double up(double x);
double add_down(double a, double b);
double add_up(double a, double b);
double sub_down(double a, double b);
double sub_up(double a, double b);
double mul_down(double a, double b);
double mul_up(double a, double b);
}  // namespace rounding

/// Axis-aligned box in state-control space: the first n_state coordinates
/// are states, the trailing m_ctrl ones are controls.
class IvBox {
 public:
  IvBox() = default;
  IvBox(std::vector<Interval> dims, int n_state, int m_ctrl);
  /// State-only box (m_ctrl = 0).
  explicit IvBox(std::vector<Interval> dims);

  int dim() const { return static_cast<int>(dims_.size()); }
  int n_state() const { return n_state_; }
  int m_ctrl() const { return m_ctrl_; }

  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  Interval& operator[](std::size_t i) { return dims_[i]; }
  std::span<const Interval> dims() const { return dims_; }
  std::span<const Interval> state() const { return std::span(dims_).first(n_state_); }
  std::span<const Interval> control() const { return std::span(dims_).subspan(n_state_); }

  bool is_empty() const;
  /// Largest extent over the coordinates.
  double width() const;
  /// Lebesgue measure (product of extents).
  double volume() const;
  std::vector<double> midpoint() const;
  bool contains_point(std::span<const double> p) const;
  bool subset_of(const IvBox& other) const;
  /// Closed intersection test: boxes sharing only a face intersect.
  bool intersects(const IvBox& other) const;
  /// Intersection with positive measure.
  bool overlaps_interior(const IvBox& other) const;

  /// The state coordinates as a state-only box.
  IvBox state_box() const;

  friend bool operator==(const IvBox& a, const IvBox& b) {
    return a.n_state_ == b.n_state_ && a.m_ctrl_ == b.m_ctrl_ && a.dims_ == b.dims_;
  }

 private:
  std::vector<Interval> dims_;
  int n_state_ = 0;
  int m_ctrl_ = 0;
};

/// Componentwise intersection; an empty box when any coordinate is empty.
IvBox intersect(const IvBox& a, const IvBox& b);

/// Split along the widest coordinate (lowest index on ties) at its midpoint.
/// Throws DegenerateBoxError on a zero-width box.
std::pair<IvBox, IvBox> bisect(const IvBox& b);

/// Lexicographic order on (lo_1, hi_1, lo_2, hi_2, ...).
bool canonical_less(const IvBox& a, const IvBox& b);

std::ostream& operator<<(std::ostream& os, const IvBox& b);
std::string to_string(const IvBox& b);

}  // namespace doakit
