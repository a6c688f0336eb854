#include "doakit/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace doakit {

namespace {

bool is_unary(Op op) {
  switch (op) {
    case Op::kNeg:
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kSqrt:
    case Op::kAbs:
    case Op::kTanh:
      return true;
    default:
      return false;
  }
}

const char* function_name(Op op) {
  switch (op) {
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kExp: return "exp";
    case Op::kSqrt: return "sqrt";
    case Op::kAbs: return "abs";
    case Op::kTanh: return "tanh";
    default: return "";
  }
}

char binary_symbol(Op op) {
  switch (op) {
    case Op::kAdd: return '+';
    case Op::kSub: return '-';
    case Op::kMul: return '*';
    case Op::kDiv: return '/';
    default: return '?';
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Append `src` to `dst`, shifting child references. Returns the new root.
std::int32_t append_nodes(std::vector<ExprNode>& dst, std::span<const ExprNode> src) {
  const auto offset = static_cast<std::int32_t>(dst.size());
  for (ExprNode n : src) {
    if (n.lhs >= 0) n.lhs += offset;
    if (n.rhs >= 0) n.rhs += offset;
    dst.push_back(n);
  }
  return static_cast<std::int32_t>(dst.size()) - 1;
}

}  // namespace

Expr::Expr() : nodes_{ExprNode{}} {}

Expr::Expr(std::vector<ExprNode> nodes, int n_state, int m_ctrl)
    : nodes_(std::move(nodes)), n_state_(n_state), m_ctrl_(m_ctrl) {}

Expr Expr::constant(double value) {
  ExprNode n;
  n.op = Op::kConst;
  n.value = value;
  return Expr({n}, 0, 0);
}

Expr Expr::state(int index, int n_state, int m_ctrl) {
  if (index < 1 || index > n_state) throw ConfigError("state index out of range");
  ExprNode n;
  n.op = Op::kState;
  n.index = index - 1;
  return Expr({n}, n_state, m_ctrl);
}

Expr Expr::control(int index, int n_state, int m_ctrl) {
  if (index < 1 || index > m_ctrl) throw ConfigError("control index out of range");
  ExprNode n;
  n.op = Op::kCtrl;
  n.index = index - 1;
  return Expr({n}, n_state, m_ctrl);
}

bool Expr::depends_on_control() const {
  return std::any_of(nodes_.begin(), nodes_.end(),
                     [](const ExprNode& n) { return n.op == Op::kCtrl; });
}

std::string Expr::to_string() const {
  std::vector<std::string> text;
  text.reserve(nodes_.size());
  for (const ExprNode& n : nodes_) {
    switch (n.op) {
      case Op::kConst:
        text.push_back(n.value < 0 ? "(" + format_number(n.value) + ")" : format_number(n.value));
        break;
      case Op::kState: text.push_back("x" + std::to_string(n.index + 1)); break;
      case Op::kCtrl: text.push_back("u" + std::to_string(n.index + 1)); break;
      case Op::kNeg: text.push_back("(-" + text[n.lhs] + ")"); break;
      case Op::kPow: text.push_back("(" + text[n.lhs] + ")^" + std::to_string(n.index)); break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
        text.push_back("(" + text[n.lhs] + " " + binary_symbol(n.op) + " " + text[n.rhs] + ")");
        break;
      default: text.push_back(std::string(function_name(n.op)) + "(" + text[n.lhs] + ")"); break;
    }
  }
  return text.back();
}

Expr Expr::binary(Op op, const Expr& a, const Expr& b) {
  std::vector<ExprNode> nodes;
  nodes.reserve(a.nodes_.size() + b.nodes_.size() + 1);
  const auto l = append_nodes(nodes, a.nodes_);
  const auto r = append_nodes(nodes, b.nodes_);
  ExprNode n;
  n.op = op;
  n.lhs = l;
  n.rhs = r;
  nodes.push_back(n);
  return Expr(std::move(nodes), std::max(a.n_state_, b.n_state_), std::max(a.m_ctrl_, b.m_ctrl_));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::kAdd, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::kSub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::kMul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::kDiv, a, b); }
Expr operator-(const Expr& a) { return apply(Op::kNeg, a); }

Expr apply(Op unary, const Expr& a) {
  if (!is_unary(unary)) throw ConfigError("apply() needs a unary operator");
  std::vector<ExprNode> nodes = a.nodes_;
  ExprNode n;
  n.op = unary;
  n.lhs = static_cast<std::int32_t>(nodes.size()) - 1;
  nodes.push_back(n);
  return Expr(std::move(nodes), a.n_state_, a.m_ctrl_);
}

Expr pow_int(const Expr& a, unsigned k) {
  std::vector<ExprNode> nodes = a.nodes_;
  ExprNode n;
  n.op = Op::kPow;
  n.lhs = static_cast<std::int32_t>(nodes.size()) - 1;
  n.index = static_cast<std::int32_t>(k);
  nodes.push_back(n);
  return Expr(std::move(nodes), a.n_state_, a.m_ctrl_);
}

Expr compose_states(const Expr& outer, std::span<const Expr> inner) {
  if (static_cast<int>(inner.size()) < outer.n_state_) {
    throw ConfigError("composition needs one inner expression per state variable");
  }
  std::vector<ExprNode> nodes;
  std::vector<std::int32_t> roots;
  int n = 0;
  int m = 0;
  for (const Expr& e : inner) {
    roots.push_back(append_nodes(nodes, e.nodes_));
    n = std::max(n, e.n_state_);
    m = std::max(m, e.m_ctrl_);
  }
  // Outer nodes referencing states become aliases of the inner roots.
  std::vector<std::int32_t> remap(outer.nodes_.size());
  for (std::size_t i = 0; i < outer.nodes_.size(); ++i) {
    ExprNode node = outer.nodes_[i];
    if (node.op == Op::kState) {
      remap[i] = roots[node.index];
      continue;
    }
    if (node.op == Op::kCtrl) throw ConfigError("outer expression of a composition uses controls");
    if (node.lhs >= 0) node.lhs = remap[node.lhs];
    if (node.rhs >= 0) node.rhs = remap[node.rhs];
    nodes.push_back(node);
    remap[i] = static_cast<std::int32_t>(nodes.size()) - 1;
  }
  // A bare "x1" outer expression ends on an alias; make it the root.
  const auto root = remap.back();
  if (root != static_cast<std::int32_t>(nodes.size()) - 1) {
    ExprNode copy = nodes[root];
    nodes.push_back(copy);
  }
  return Expr(std::move(nodes), n, m);
}

// ---------------------------------------------------------------------------
// Parser

class ExprParser {
 public:
  ExprParser(std::string_view text, int n_state, int m_ctrl)
      : text_(text), n_state_(n_state), m_ctrl_(m_ctrl) {}

  Expr run() {
    skip_space();
    if (pos_ == text_.size()) fail("empty expression");
    const auto root = expr();
    skip_space();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    // Keep only nodes reachable from the root, in order (all are, by
    // construction), and make sure the root is last.
    if (root != static_cast<std::int32_t>(nodes_.size()) - 1) fail("internal parser error");
    return Expr(std::move(nodes_), n_state_, m_ctrl_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::int32_t push(ExprNode n) {
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size()) - 1;
  }

  std::int32_t push_binary(Op op, std::int32_t l, std::int32_t r) {
    ExprNode n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    return push(n);
  }

  std::int32_t expr() {
    auto left = term();
    for (;;) {
      if (accept('+')) {
        left = push_binary(Op::kAdd, left, term());
      } else if (accept('-')) {
        left = push_binary(Op::kSub, left, term());
      } else {
        return left;
      }
    }
  }

  std::int32_t term() {
    auto left = factor();
    for (;;) {
      if (accept('*')) {
        left = push_binary(Op::kMul, left, factor());
      } else if (accept('/')) {
        left = push_binary(Op::kDiv, left, factor());
      } else {
        return left;
      }
    }
  }

  std::int32_t factor() {
    if (accept('-')) {
      ExprNode n;
      n.op = Op::kNeg;
      n.lhs = factor();
      return push(n);
    }
    return power();
  }

  std::int32_t power() {
    const auto base = atom();
    if (!accept('^')) return base;
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be a nonnegative integer literal");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E' ||
                                std::isalpha(static_cast<unsigned char>(text_[pos_])))) {
      fail("exponent must be a nonnegative integer literal");
    }
    int k = 0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, k);
    if (res.ec != std::errc{} || k > 1024) fail("exponent out of range");
    ExprNode n;
    n.op = Op::kPow;
    n.lhs = base;
    n.index = k;
    return push(n);
  }

  std::int32_t atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const auto inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  std::int32_t number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent in number");
    }
    double value = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{}) {
      pos_ = start;
      fail("malformed number");
    }
    ExprNode n;
    n.op = Op::kConst;
    n.value = value;
    return push(n);
  }

  std::int32_t identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Op> kFunctions[] = {
        {"sin", Op::kSin}, {"cos", Op::kCos},   {"exp", Op::kExp},
        {"sqrt", Op::kSqrt}, {"abs", Op::kAbs}, {"tanh", Op::kTanh},
    };
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after " + std::string(fname));
        ExprNode n;
        n.op = op;
        n.lhs = expr();
        if (!accept(')')) fail("expected ')'");
        return push(n);
      }
    }

    if ((name[0] == 'x' || name[0] == 'u') && name.size() > 1 &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int index = 0;
      const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      const bool is_state = name[0] == 'x';
      const int limit = is_state ? n_state_ : m_ctrl_;
      if (res.ec != std::errc{} || index < 1 || index > limit) {
        pos_ = start;
        fail("variable '" + std::string(name) + "' out of range");
      }
      ExprNode n;
      n.op = is_state ? Op::kState : Op::kCtrl;
      n.index = index - 1;
      return push(n);
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int n_state_;
  int m_ctrl_;
  std::vector<ExprNode> nodes_;
};

Expr parse(std::string_view text, int n_state, int m_ctrl) {
  if (n_state < 0 || m_ctrl < 0) throw ConfigError("negative dimension");
  return ExprParser(text, n_state, m_ctrl).run();
}

// ---------------------------------------------------------------------------
// Value-type kernels

namespace detail {

Dual lift(double v, const Dual& like) { return Dual{v, std::vector<double>(like.grad.size(), 0.0)}; }

Interval unary(Op op, const Interval& a) {
  switch (op) {
    case Op::kNeg: return -a;
    case Op::kSin: return doakit::sin(a);
    case Op::kCos: return doakit::cos(a);
    case Op::kExp: return doakit::exp(a);
    case Op::kSqrt: return doakit::sqrt(a);
    case Op::kAbs: return doakit::abs(a);
    case Op::kTanh: return doakit::tanh(a);
    default: throw DomainError("not a unary operator");
  }
}

Interval binary(Op op, const Interval& a, const Interval& b, bool strict) {
  switch (op) {
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv:
      if (!strict && b.contains_zero()) return Interval::entire();
      return a / b;
    default: throw DomainError("not a binary operator");
  }
}

namespace {
Dual scaled(const Dual& a, double value, double slope) {
  Dual r{value, a.grad};
  for (double& g : r.grad) g *= slope;
  return r;
}
}  // namespace

Dual unary(Op op, const Dual& a) {
  switch (op) {
    case Op::kNeg: return scaled(a, -a.value, -1.0);
    case Op::kSin: return scaled(a, std::sin(a.value), std::cos(a.value));
    case Op::kCos: return scaled(a, std::cos(a.value), -std::sin(a.value));
    case Op::kExp: {
      const double e = std::exp(a.value);
      return scaled(a, e, e);
    }
    case Op::kSqrt: {
      if (a.value <= 0.0) throw DomainError("sqrt is not differentiable at or below 0");
      const double s = std::sqrt(a.value);
      return scaled(a, s, 0.5 / s);
    }
    case Op::kAbs:
      if (a.value == 0.0) throw DomainError("abs is not differentiable at 0");
      return scaled(a, std::abs(a.value), a.value > 0 ? 1.0 : -1.0);
    case Op::kTanh: {
      const double t = std::tanh(a.value);
      return scaled(a, t, 1.0 - t * t);
    }
    default: throw DomainError("not a unary operator");
  }
}

Dual binary(Op op, const Dual& a, const Dual& b) {
  Dual r{0.0, std::vector<double>(a.grad.size(), 0.0)};
  switch (op) {
    case Op::kAdd:
      r.value = a.value + b.value;
      for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] = a.grad[i] + b.grad[i];
      break;
    case Op::kSub:
      r.value = a.value - b.value;
      for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] = a.grad[i] - b.grad[i];
      break;
    case Op::kMul:
      r.value = a.value * b.value;
      for (std::size_t i = 0; i < r.grad.size(); ++i)
        r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
      break;
    case Op::kDiv: {
      r.value = checked_div(a.value, b.value);
      const double inv = 1.0 / b.value;
      for (std::size_t i = 0; i < r.grad.size(); ++i)
        r.grad[i] = (a.grad[i] - r.value * b.grad[i]) * inv;
      break;
    }
    default: throw DomainError("not a binary operator");
  }
  return r;
}

Dual power(const Dual& a, unsigned k) {
  if (k == 0) return lift(1.0, a);
  return scaled(a, power(a.value, k), static_cast<double>(k) * power(a.value, k - 1));
}

}  // namespace detail

double eval_scalar(const Expr& e, std::span<const double> x, std::span<const double> u) {
  return evaluate<double>(e, x, u);
}

Interval eval_interval(const Expr& e, const IvBox& box, bool strict) {
  return evaluate<Interval>(e, box.state(), box.control(), strict);
}

// ---------------------------------------------------------------------------

PlantModel::PlantModel(int n_state, int m_ctrl, std::vector<Expr> dynamics)
    : n_state_(n_state), m_ctrl_(m_ctrl), dynamics_(std::move(dynamics)) {
  if (n_state < 1 || m_ctrl < 0) throw ConfigError("plant needs n >= 1 and m >= 0");
  if (static_cast<int>(dynamics_.size()) != n_state) {
    throw ConfigError("plant needs one dynamics expression per state");
  }
  for (const Expr& f : dynamics_) {
    if (f.n_state() > n_state || f.m_ctrl() > m_ctrl) {
      throw ConfigError("dynamics expression uses undeclared variables");
    }
  }
  const std::vector<double> x0(n_state, 0.0);
  const std::vector<double> u0(m_ctrl, 0.0);
  for (std::size_t i = 0; i < dynamics_.size(); ++i) {
    const double v = eval_scalar(dynamics_[i], x0, u0);
    if (!(std::abs(v) <= 1e-12)) {
      throw ConfigError("f(0,0) != 0 for component " + std::to_string(i + 1) +
                        " (value " + format_number(v) + ")");
    }
  }
}

PlantModel PlantModel::parse(int n_state, int m_ctrl, const std::vector<std::string>& dynamics) {
  std::vector<Expr> exprs;
  exprs.reserve(dynamics.size());
  for (const auto& text : dynamics) exprs.push_back(doakit::parse(text, n_state, m_ctrl));
  return PlantModel(n_state, m_ctrl, std::move(exprs));
}

std::vector<double> PlantModel::step(std::span<const double> x, std::span<const double> u) const {
  std::vector<double> next;
  next.reserve(dynamics_.size());
  for (const Expr& f : dynamics_) next.push_back(eval_scalar(f, x, u));
  return next;
}

IvBox PlantModel::image(const IvBox& w) const {
  std::vector<Interval> out;
  out.reserve(dynamics_.size());
  for (const Expr& f : dynamics_) out.push_back(eval_interval(f, w));
  return IvBox(std::move(out));
}

Linearization jacobian_at(const PlantModel& plant, std::span<const double> x,
                          std::span<const double> u) {
  const int n = plant.n_state();
  const int m = plant.m_ctrl();
  if (static_cast<int>(x.size()) != n || static_cast<int>(u.size()) != m) {
    throw ConfigError("linearization point has the wrong dimension");
  }
  const auto vars = static_cast<std::size_t>(n + m);
  std::vector<Dual> xd;
  std::vector<Dual> ud;
  for (int i = 0; i < n; ++i) {
    Dual d{x[i], std::vector<double>(vars, 0.0)};
    d.grad[i] = 1.0;
    xd.push_back(std::move(d));
  }
  for (int j = 0; j < m; ++j) {
    Dual d{u[j], std::vector<double>(vars, 0.0)};
    d.grad[n + j] = 1.0;
    ud.push_back(std::move(d));
  }
  Linearization lin{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, m)};
  for (int i = 0; i < n; ++i) {
    const Dual fi = evaluate<Dual>(plant.dynamics()[i], xd, ud);
    for (int j = 0; j < n; ++j) lin.A(i, j) = fi.grad[j];
    for (int j = 0; j < m; ++j) lin.B(i, j) = fi.grad[n + j];
  }
  return lin;
}

}  // namespace doakit
