#include "doakit/interval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "doakit/errors.hpp"

namespace doakit {

namespace rounding {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMax = std::numeric_limits<double>::max();

// Error of s = fl(a + b); exact when both operands and s are finite.
double two_sum_error(double a, double b, double s) {
  const double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}
}  // namespace

double down(double x) { return std::nextafter(x, -kInf); }
double up(double x) { return std::nextafter(x, kInf); }

double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) {
    // Finite operands overflowing to +inf still have a finite lower bound.
    if (s == kInf && std::isfinite(a) && std::isfinite(b)) return kMax;
    return s;
  }
  if (!std::isfinite(a) || !std::isfinite(b)) return s;
  return two_sum_error(a, b, s) < 0.0 ? down(s) : s;
}

double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) {
    if (s == -kInf && std::isfinite(a) && std::isfinite(b)) return -kMax;
    return s;
  }
  if (!std::isfinite(a) || !std::isfinite(b)) return s;
  return two_sum_error(a, b, s) > 0.0 ? up(s) : s;
}

double sub_down(double a, double b) { return add_down(a, -b); }
double sub_up(double a, double b) { return add_up(a, -b); }

namespace {
// Product with the 0 * inf = 0 convention of interval arithmetic.
double safe_mul(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}
}  // namespace

double mul_down(double a, double b) {
  const double p = safe_mul(a, b);
  if (p == 0.0) {
    if (a == 0.0 || b == 0.0) return 0.0;
    // Underflow to zero: the true product lies strictly between 0 and the
    // nearest subnormal of the correct sign.
    return (a > 0) == (b > 0) ? 0.0 : -std::numeric_limits<double>::denorm_min();
  }
  if (!std::isfinite(p)) {
    if (p == kInf && std::isfinite(a) && std::isfinite(b)) return kMax;
    return p;
  }
  if (!std::isfinite(a) || !std::isfinite(b)) return p;
  const double e = std::fma(a, b, -p);
  return e < 0.0 ? down(p) : p;
}

double mul_up(double a, double b) {
  const double p = safe_mul(a, b);
  if (p == 0.0) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return (a > 0) == (b > 0) ? std::numeric_limits<double>::denorm_min() : 0.0;
  }
  if (!std::isfinite(p)) {
    if (p == -kInf && std::isfinite(a) && std::isfinite(b)) return -kMax;
    return p;
  }
  if (!std::isfinite(a) || !std::isfinite(b)) return p;
  const double e = std::fma(a, b, -p);
  return e > 0.0 ? up(p) : p;
}

namespace {
// Sign of (a / b - fl(a / b)): a - q b computed exactly by fma.
int div_error_sign(double a, double b, double q) {
  const double r = std::fma(-q, b, a);
  if (r == 0.0) return 0;
  return ((r > 0) == (b > 0)) ? 1 : -1;
}

double div_down(double a, double b) {
  const double q = a / b;
  if (!std::isfinite(q) || !std::isfinite(a) || !std::isfinite(b)) {
    if (std::isinf(q) && std::isfinite(a) && std::isfinite(b))
      return q > 0 ? kMax : q;
    return q;
  }
  if (q == 0.0 && a != 0.0) {
    return (a > 0) == (b > 0) ? 0.0 : -std::numeric_limits<double>::denorm_min();
  }
  return div_error_sign(a, b, q) < 0 ? down(q) : q;
}

double div_up(double a, double b) {
  const double q = a / b;
  if (!std::isfinite(q) || !std::isfinite(a) || !std::isfinite(b)) {
    if (std::isinf(q) && std::isfinite(a) && std::isfinite(b))
      return q < 0 ? -kMax : q;
    return q;
  }
  if (q == 0.0 && a != 0.0) {
    return (a > 0) == (b > 0) ? std::numeric_limits<double>::denorm_min() : 0.0;
  }
  return div_error_sign(a, b, q) > 0 ? up(q) : q;
}
}  // namespace

}  // namespace rounding

namespace {

using rounding::down;
using rounding::up;

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// x^k for x >= 0 by binary exponentiation with directed rounding.
double pow_down(double x, unsigned k) {
  double result = 1.0;
  double base = x;
  while (k > 0) {
    if (k & 1u) result = rounding::mul_down(result, base);
    k >>= 1u;
    if (k > 0) base = rounding::mul_down(base, base);
  }
  return result;
}

double pow_up(double x, unsigned k) {
  double result = 1.0;
  double base = x;
  while (k > 0) {
    if (k & 1u) result = rounding::mul_up(result, base);
    k >>= 1u;
    if (k > 0) base = rounding::mul_up(base, base);
  }
  return result;
}

// True when some x0 + 2*pi*k (integer k) may lie in [lo, hi]. Errs on the
// side of reporting a hit, which only widens the enclosure.
bool may_contain_phase(double lo, double hi, double x0) {
  const double slack = 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  const double k_lo = std::ceil((lo - slack - x0) / kTwoPi);
  const double k_hi = std::floor((hi + slack - x0) / kTwoPi);
  return k_lo <= k_hi;
}

Interval clamp_unit(double lo, double hi) {
  return Interval(std::max(-1.0, lo), std::min(1.0, hi));
}

}  // namespace

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("interval bound is NaN");
  if (lo > hi) {
    throw DomainError("interval lower bound exceeds upper bound");
  }
}

double Interval::width() const {
  if (is_empty()) return 0.0;
  return rounding::sub_up(hi_, lo_);
}

double Interval::mid() const {
  if (is_empty()) throw DomainError("midpoint of empty interval");
  if (std::isinf(lo_) || std::isinf(hi_)) {
    if (std::isinf(lo_) && std::isinf(hi_)) return 0.0;
    return std::isinf(lo_) ? -std::numeric_limits<double>::max()
                           : std::numeric_limits<double>::max();
  }
  return lo_ + 0.5 * (hi_ - lo_);
}

bool Interval::subset_of(const Interval& other) const {
  if (is_empty()) return true;
  if (other.is_empty()) return false;
  return other.lo_ <= lo_ && hi_ <= other.hi_;
}

bool Interval::intersects(const Interval& other) const {
  if (is_empty() || other.is_empty()) return false;
  return lo_ <= other.hi_ && other.lo_ <= hi_;
}

Interval intersect(const Interval& a, const Interval& b) {
  if (!a.intersects(b)) return Interval::empty();
  return Interval(std::max(a.lo(), b.lo()), std::min(a.hi(), b.hi()));
}

Interval hull(const Interval& a, const Interval& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return Interval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

Interval operator+(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return Interval(rounding::add_down(a.lo(), b.lo()), rounding::add_up(a.hi(), b.hi()));
}

Interval operator-(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return Interval(rounding::sub_down(a.lo(), b.hi()), rounding::sub_up(a.hi(), b.lo()));
}

Interval operator-(const Interval& a) {
  if (a.is_empty()) return a;
  return Interval(-a.hi(), -a.lo());
}

Interval operator*(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  const double ends_a[2] = {a.lo(), a.hi()};
  const double ends_b[2] = {b.lo(), b.hi()};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : ends_a) {
    for (double y : ends_b) {
      lo = std::min(lo, rounding::mul_down(x, y));
      hi = std::max(hi, rounding::mul_up(x, y));
    }
  }
  return Interval(lo, hi);
}

Interval operator/(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  if (b.contains_zero()) {
    throw DomainError("interval division by an interval containing zero");
  }
  const double ends_a[2] = {a.lo(), a.hi()};
  const double ends_b[2] = {b.lo(), b.hi()};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : ends_a) {
    for (double y : ends_b) {
      if (std::isinf(x) && std::isinf(y)) {
        // inf/inf over a zero-free divisor: the quotient is unbounded.
        const bool positive = (x > 0) == (y > 0);
        lo = std::min(lo, positive ? 0.0 : -std::numeric_limits<double>::infinity());
        hi = std::max(hi, positive ? std::numeric_limits<double>::infinity() : 0.0);
        continue;
      }
      lo = std::min(lo, rounding::div_down(x, y));
      hi = std::max(hi, rounding::div_up(x, y));
    }
  }
  return Interval(lo, hi);
}

Interval sin(const Interval& a) {
  if (a.is_empty()) return a;
  if (a.lo() == 0.0 && a.hi() == 0.0) return Interval(0.0);
  if (!std::isfinite(a.lo()) || !std::isfinite(a.hi()) || a.width() >= kTwoPi) {
    return Interval(-1.0, 1.0);
  }
  const double s_lo = std::sin(a.lo());
  const double s_hi = std::sin(a.hi());
  double lo = down(std::min(s_lo, s_hi));
  double hi = up(std::max(s_lo, s_hi));
  if (may_contain_phase(a.lo(), a.hi(), kPi / 2)) hi = 1.0;
  if (may_contain_phase(a.lo(), a.hi(), -kPi / 2)) lo = -1.0;
  return clamp_unit(lo, hi);
}

Interval cos(const Interval& a) {
  if (a.is_empty()) return a;
  if (a.lo() == 0.0 && a.hi() == 0.0) return Interval(1.0);
  if (!std::isfinite(a.lo()) || !std::isfinite(a.hi()) || a.width() >= kTwoPi) {
    return Interval(-1.0, 1.0);
  }
  const double c_lo = std::cos(a.lo());
  const double c_hi = std::cos(a.hi());
  double lo = down(std::min(c_lo, c_hi));
  double hi = up(std::max(c_lo, c_hi));
  if (may_contain_phase(a.lo(), a.hi(), 0.0)) hi = 1.0;
  if (may_contain_phase(a.lo(), a.hi(), kPi)) lo = -1.0;
  return clamp_unit(lo, hi);
}

Interval exp(const Interval& a) {
  if (a.is_empty()) return a;
  auto lower = [](double x) {
    if (x == 0.0) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::max(0.0, down(std::exp(x)));
  };
  auto upper = [](double x) {
    if (x == 0.0) return 1.0;
    const double e = std::exp(x);
    return std::isinf(e) ? e : up(e);
  };
  return Interval(lower(a.lo()), upper(a.hi()));
}

Interval sqrt(const Interval& a) {
  if (a.is_empty()) return a;
  if (a.hi() < 0.0) throw DomainError("sqrt of an interval with negative upper bound");
  auto lower = [](double x) {
    if (x <= 0.0) return 0.0;
    const double s = std::sqrt(x);
    if (std::isinf(s)) return s;
    return std::fma(-s, s, x) < 0.0 ? down(s) : s;
  };
  auto upper = [](double x) {
    const double s = std::sqrt(x);
    if (std::isinf(s)) return s;
    return std::fma(-s, s, x) > 0.0 ? up(s) : s;
  };
  return Interval(lower(a.lo()), upper(a.hi()));
}

Interval abs(const Interval& a) {
  if (a.is_empty()) return a;
  if (a.lo() >= 0.0) return a;
  if (a.hi() <= 0.0) return -a;
  return Interval(0.0, std::max(-a.lo(), a.hi()));
}

Interval tanh(const Interval& a) {
  if (a.is_empty()) return a;
  auto lower = [](double x) { return x == 0.0 ? 0.0 : down(std::tanh(x)); };
  auto upper = [](double x) { return x == 0.0 ? 0.0 : up(std::tanh(x)); };
  return clamp_unit(lower(a.lo()), upper(a.hi()));
}

Interval pow_int(const Interval& a, unsigned k) {
  if (a.is_empty()) return a;
  if (k == 0) return Interval(1.0);
  if (k == 1) return a;
  const bool even = (k % 2u) == 0;
  if (a.lo() >= 0.0) return Interval(pow_down(a.lo(), k), pow_up(a.hi(), k));
  if (a.hi() <= 0.0) {
    if (even) return Interval(pow_down(-a.hi(), k), pow_up(-a.lo(), k));
    return Interval(-pow_up(-a.lo(), k), -pow_down(-a.hi(), k));
  }
  if (even) return Interval(0.0, pow_up(std::max(-a.lo(), a.hi()), k));
  return Interval(-pow_up(-a.lo(), k), pow_up(a.hi(), k));
}

std::ostream& operator<<(std::ostream& os, const Interval& a) {
  if (a.is_empty()) return os << "[empty]";
  return os << '[' << a.lo() << ", " << a.hi() << ']';
}

// ---------------------------------------------------------------------------

IvBox::IvBox(std::vector<Interval> dims, int n_state, int m_ctrl)
    : dims_(std::move(dims)), n_state_(n_state), m_ctrl_(m_ctrl) {
  if (n_state < 0 || m_ctrl < 0 ||
      static_cast<std::size_t>(n_state + m_ctrl) != dims_.size()) {
    throw ConfigError("box dimension does not match n_state + m_ctrl");
  }
}

IvBox::IvBox(std::vector<Interval> dims)
    : IvBox(dims, static_cast<int>(dims.size()), 0) {}

bool IvBox::is_empty() const {
  return std::any_of(dims_.begin(), dims_.end(),
                     [](const Interval& i) { return i.is_empty(); });
}

double IvBox::width() const {
  double w = 0.0;
  for (const auto& d : dims_) w = std::max(w, d.width());
  return w;
}

double IvBox::volume() const {
  if (is_empty()) return 0.0;
  double v = 1.0;
  for (const auto& d : dims_) v *= d.hi() - d.lo();
  return v;
}

std::vector<double> IvBox::midpoint() const {
  std::vector<double> m;
  m.reserve(dims_.size());
  for (const auto& d : dims_) m.push_back(d.mid());
  return m;
}

bool IvBox::contains_point(std::span<const double> p) const {
  if (p.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!dims_[i].contains(p[i])) return false;
  }
  return true;
}

bool IvBox::subset_of(const IvBox& other) const {
  if (other.dims_.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (!dims_[i].subset_of(other.dims_[i])) return false;
  }
  return true;
}

bool IvBox::intersects(const IvBox& other) const {
  if (other.dims_.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (!dims_[i].intersects(other.dims_[i])) return false;
  }
  return true;
}

bool IvBox::overlaps_interior(const IvBox& other) const {
  if (other.dims_.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& a = dims_[i];
    const auto& b = other.dims_[i];
    if (a.is_empty() || b.is_empty()) return false;
    if (!(a.lo() < b.hi() && b.lo() < a.hi())) return false;
  }
  return true;
}

IvBox IvBox::state_box() const {
  return IvBox(std::vector<Interval>(dims_.begin(), dims_.begin() + n_state_));
}

IvBox intersect(const IvBox& a, const IvBox& b) {
  if (a.dim() != b.dim()) throw ConfigError("intersecting boxes of different dimension");
  std::vector<Interval> dims;
  dims.reserve(a.dims().size());
  for (int i = 0; i < a.dim(); ++i) dims.push_back(intersect(a[i], b[i]));
  return IvBox(std::move(dims), a.n_state(), a.m_ctrl());
}

std::pair<IvBox, IvBox> bisect(const IvBox& b) {
  int split = -1;
  double widest = 0.0;
  for (int i = 0; i < b.dim(); ++i) {
    const double w = b[i].hi() - b[i].lo();
    if (w > widest) {
      widest = w;
      split = i;
    }
  }
  if (split < 0) throw DegenerateBoxError("cannot bisect a zero-width box " + to_string(b));
  if (!std::isfinite(widest)) throw DomainError("cannot bisect an unbounded box");
  const Interval& d = b[split];
  const double m = d.mid();
  IvBox left = b;
  IvBox right = b;
  left[split] = Interval(d.lo(), m);
  right[split] = Interval(m, d.hi());
  return {std::move(left), std::move(right)};
}

bool canonical_less(const IvBox& a, const IvBox& b) {
  const int n = std::min(a.dim(), b.dim());
  for (int i = 0; i < n; ++i) {
    if (a[i].lo() != b[i].lo()) return a[i].lo() < b[i].lo();
    if (a[i].hi() != b[i].hi()) return a[i].hi() < b[i].hi();
  }
  return a.dim() < b.dim();
}

std::ostream& operator<<(std::ostream& os, const IvBox& b) {
  for (int i = 0; i < b.dim(); ++i) {
    if (i > 0) os << " x ";
    os << b[i];
  }
  return os;
}

std::string to_string(const IvBox& b) {
  std::ostringstream os;
  os.precision(17);
  os << b;
  return os.str();
}

}  // namespace doakit
