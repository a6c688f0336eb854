#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "doakit/errors.hpp"
#include "doakit/interval.hpp"

namespace doakit {

enum class Op : std::uint8_t {
  kConst,
  kState,
  kCtrl,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kSin,
  kCos,
  kExp,
  kSqrt,
  kAbs,
  kTanh,
  kPow,
};

struct ExprNode {
  Op op = Op::kConst;
  std::int32_t lhs = -1;  // child (unary, pow) or left operand
  std::int32_t rhs = -1;  // right operand
  std::int32_t index = 0; // variable index (0-based) or integer exponent
  double value = 0.0;     // constant
};

/// Immutable expression over state variables x1..xn and controls u1..um.
///
/// Nodes are stored in evaluation order (children precede parents) and the
/// last node is the root. Subtrees may be shared, so an expression is a DAG;
/// composition exploits this to evaluate an inner expression once.
class Expr {
 public:
  /// The constant 0 over no variables.
  Expr();

  static Expr constant(double value);
  /// 1-based index, as written in expression text.
  static Expr state(int index, int n_state, int m_ctrl = 0);
  static Expr control(int index, int n_state, int m_ctrl);

  int n_state() const { return n_state_; }
  int m_ctrl() const { return m_ctrl_; }
  std::span<const ExprNode> nodes() const { return nodes_; }
  const ExprNode& root() const { return nodes_.back(); }

  bool depends_on_control() const;
  /// Fully parenthesised text accepted back by parse().
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow_int(const Expr& a, unsigned k);
  friend Expr apply(Op unary, const Expr& a);
  friend Expr compose_states(const Expr& outer, std::span<const Expr> inner);

 private:
  friend class ExprParser;
  Expr(std::vector<ExprNode> nodes, int n_state, int m_ctrl);

  static Expr binary(Op op, const Expr& a, const Expr& b);

  std::vector<ExprNode> nodes_;
  int n_state_ = 0;
  int m_ctrl_ = 0;
};

/// Substitute inner[i] for state variable x_{i+1} of `outer`. Each inner
/// expression is embedded once; the result is over the variables of inner.
Expr compose_states(const Expr& outer, std::span<const Expr> inner);

/// Parse expression text over x1..xn and u1..um.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | power
///   power  := atom ('^' integer)?
///   atom   := number | ident | func '(' expr ')' | '(' expr ')'
///   func   := sin | cos | exp | sqrt | abs | tanh
/// Throws ParseError (with the offending character offset).
Expr parse(std::string_view text, int n_state, int m_ctrl);

/// Forward-mode dual number carrying a full gradient.
struct Dual {
  double value = 0.0;
  std::vector<double> grad;
};

namespace detail {

inline double checked_div(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}
inline double checked_sqrt(double a) {
  if (a < 0.0) throw DomainError("sqrt of a negative number");
  return std::sqrt(a);
}

inline double lift(double v, const double&) { return v; }
inline Interval lift(double v, const Interval&) { return Interval(v); }
Dual lift(double v, const Dual& like);

inline double unary(Op op, double a) {
  switch (op) {
    case Op::kNeg: return -a;
    case Op::kSin: return std::sin(a);
    case Op::kCos: return std::cos(a);
    case Op::kExp: return std::exp(a);
    case Op::kSqrt: return checked_sqrt(a);
    case Op::kAbs: return std::abs(a);
    case Op::kTanh: return std::tanh(a);
    default: throw DomainError("not a unary operator");
  }
}
Interval unary(Op op, const Interval& a);
Dual unary(Op op, const Dual& a);

inline double binary(Op op, double a, double b) {
  switch (op) {
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv: return checked_div(a, b);
    default: throw DomainError("not a binary operator");
  }
}
Interval binary(Op op, const Interval& a, const Interval& b, bool strict);
Dual binary(Op op, const Dual& a, const Dual& b);

inline double power(double a, unsigned k) {
  double r = 1.0;
  for (unsigned i = 0; i < k; ++i) r *= a;
  return r;
}
inline Interval power(const Interval& a, unsigned k) { return doakit::pow_int(a, k); }
Dual power(const Dual& a, unsigned k);

}  // namespace detail

/// Evaluate over any value type with the operator set above. For Interval
/// this is the natural inclusion function; `strict = false` replaces a
/// division by a zero-straddling interval with the entire real line.
template <class T>
T evaluate(const Expr& e, std::span<const T> x, std::span<const T> u, bool strict = true) {
  if (static_cast<int>(x.size()) < e.n_state() || static_cast<int>(u.size()) < e.m_ctrl()) {
    throw ConfigError("evaluation point has fewer coordinates than the expression uses");
  }
  const auto nodes = e.nodes();
  std::vector<T> v;
  v.reserve(nodes.size());
  const T& like = x.empty() ? (u.empty() ? T{} : u[0]) : x[0];
  for (const ExprNode& n : nodes) {
    switch (n.op) {
      case Op::kConst: v.push_back(detail::lift(n.value, like)); break;
      case Op::kState: v.push_back(x[n.index]); break;
      case Op::kCtrl: v.push_back(u[n.index]); break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
        if constexpr (std::is_same_v<T, Interval>) {
          v.push_back(detail::binary(n.op, v[n.lhs], v[n.rhs], strict));
        } else {
          v.push_back(detail::binary(n.op, v[n.lhs], v[n.rhs]));
        }
        break;
      case Op::kPow: v.push_back(detail::power(v[n.lhs], static_cast<unsigned>(n.index))); break;
      default: v.push_back(detail::unary(n.op, v[n.lhs])); break;
    }
  }
  return std::move(v.back());
}

double eval_scalar(const Expr& e, std::span<const double> x, std::span<const double> u);
/// Natural inclusion function over a state-control box (controls trail).
Interval eval_interval(const Expr& e, const IvBox& box, bool strict = true);

/// Discrete-time plant x+ = f(x, u) with f(0, 0) = 0.
class PlantModel {
 public:
  /// Throws ConfigError when |f_i(0, 0)| > 1e-12 for some component.
  PlantModel(int n_state, int m_ctrl, std::vector<Expr> dynamics);
  static PlantModel parse(int n_state, int m_ctrl, const std::vector<std::string>& dynamics);

  int n_state() const { return n_state_; }
  int m_ctrl() const { return m_ctrl_; }
  const std::vector<Expr>& dynamics() const { return dynamics_; }

  std::vector<double> step(std::span<const double> x, std::span<const double> u) const;
  /// Componentwise inclusion of f over a state-control box, as a state box.
  IvBox image(const IvBox& w) const;

 private:
  int n_state_;
  int m_ctrl_;
  std::vector<Expr> dynamics_;
};

struct Linearization {
  Eigen::MatrixXd A;  // n x n, df/dx
  Eigen::MatrixXd B;  // n x m, df/du
};

/// Exact (forward-mode) Jacobians of f at (x, u). Throws DomainError at
/// non-differentiable points such as abs(0).
Linearization jacobian_at(const PlantModel& plant, std::span<const double> x,
                          std::span<const double> u);

}  // namespace doakit
