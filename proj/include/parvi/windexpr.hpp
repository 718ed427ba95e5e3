#pragma once

// Arithmetic expressions in x and y for user-defined wind components.
//
// Grammar (whitespace ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | tan | exp | log | sqrt | abs
//
// Numbers use '.' as decimal separator regardless of locale.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "parvi/autodiff.hpp"
#include "parvi/errors.hpp"
#include "parvi/geometry.hpp"
#include "parvi/linalg.hpp"

namespace parvi::expr {

enum class Op { Number, Pi, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Number;
  double number = 0.0;
  Func func = Func::Sin;
  NodePtr lhs;  // operand of Neg and Call
  NodePtr rhs;
  std::size_t offset = 0;
  bool varying = false;  // depends on x or y
};

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

// Structural equality; source offsets are ignored.
inline bool same_structure(const Node* a, const Node* b) {
  if (!a || !b) return a == b;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::Number: return a->number == b->number;
    case Op::Pi:
    case Op::VarX:
    case Op::VarY: return true;
    case Op::Neg: return same_structure(a->lhs.get(), b->lhs.get());
    case Op::Call: return a->func == b->func && same_structure(a->lhs.get(), b->lhs.get());
    default: return same_structure(a->lhs.get(), b->lhs.get()) && same_structure(a->rhs.get(), b->rhs.get());
  }
}

class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  bool varying() const { return root_->varying; }

  friend bool operator==(const Expr& a, const Expr& b) { return same_structure(a.root_.get(), b.root_.get()); }

 private:
  NodePtr root_;
};

namespace detail {

inline NodePtr leaf(Op op, std::size_t offset, double number = 0.0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->number = number;
  n->offset = offset;
  n->varying = op == Op::VarX || op == Op::VarY;
  return n;
}

inline NodePtr unary(Op op, NodePtr arg, std::size_t offset, Func f = Func::Sin) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->func = f;
  n->offset = offset;
  n->varying = arg->varying;
  n->lhs = std::move(arg);
  return n;
}

inline NodePtr binary(Op op, NodePtr lhs, NodePtr rhs, std::size_t offset) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->offset = offset;
  n->varying = lhs->varying || rhs->varying;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail({"operator", "end of input"});
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    skip_ws();
    std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw SyntaxError(found, pos_, std::move(expected));
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('+'))
        lhs = binary(Op::Add, lhs, parse_term(), at);
      else if (accept('-'))
        lhs = binary(Op::Sub, lhs, parse_term(), at);
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('*'))
        lhs = binary(Op::Mul, lhs, parse_unary(), at);
      else if (accept('/'))
        lhs = binary(Op::Div, lhs, parse_unary(), at);
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    const std::size_t at = pos_;
    if (accept('-')) return unary(Op::Neg, parse_unary(), at);
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_ws();
    const std::size_t at = pos_;
    if (accept('^')) return binary(Op::Pow, base, parse_unary(), at);
    return base;
  }

  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  NodePtr parse_primary() {
    skip_ws();
    const std::size_t at = pos_;
    if (pos_ >= src_.size()) fail({"number", "identifier", "'('", "'-'"});
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_expr();
      if (!accept(')')) fail({"')'"});
      return e;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_alpha(c)) {
      std::size_t end = pos_;
      while (end < src_.size() && (is_alpha(src_[end]) || is_digit(src_[end]))) ++end;
      const std::string_view name = src_.substr(pos_, end - pos_);
      pos_ = end;
      if (name == "x") return leaf(Op::VarX, at);
      if (name == "y") return leaf(Op::VarY, at);
      if (name == "pi") return leaf(Op::Pi, at);
      static constexpr std::pair<std::string_view, Func> funcs[] = {
          {"sin", Func::Sin}, {"cos", Func::Cos},   {"tan", Func::Tan}, {"exp", Func::Exp},
          {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"abs", Func::Abs}};
      for (const auto& [fname, f] : funcs) {
        if (name != fname) continue;
        if (!accept('(')) fail({"'('"});
        NodePtr arg = parse_expr();
        if (!accept(')')) fail({"')'"});
        return unary(Op::Call, std::move(arg), at, f);
      }
      throw UnknownIdentifier(std::string(name), at);
    }
    fail({"number", "identifier", "'('", "'-'"});
  }

  NodePtr parse_number() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && is_digit(src_[end])) ++end;
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && is_digit(src_[end])) ++end;
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
      if (e < src_.size() && is_digit(src_[e])) {
        while (e < src_.size() && is_digit(src_[e])) ++e;
        end = e;
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + at, src_.data() + end, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + end) fail({"number"});
    pos_ = end;
    return leaf(Op::Number, at, value);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline void render_into(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Number: {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, n.number);
      out.append(buf, res.ptr);
      return;
    }
    case Op::Pi: out += "pi"; return;
    case Op::VarX: out += "x"; return;
    case Op::VarY: out += "y"; return;
    case Op::Neg:
      out += "(-";
      render_into(*n.lhs, out);
      out += ")";
      return;
    case Op::Call:
      out += func_name(n.func);
      out += "(";
      render_into(*n.lhs, out);
      out += ")";
      return;
    default: break;
  }
  const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : n.op == Op::Div ? " / " : " ^ ";
  out += "(";
  render_into(*n.lhs, out);
  out += sym;
  render_into(*n.rhs, out);
  out += ")";
}

template <class S>
double value_of(const S& s) {
  if constexpr (std::is_same_v<S, double>)
    return s;
  else
    return s.value();
}

template <class S>
bool differentiating(const S& s) {
  if constexpr (std::is_same_v<S, double>)
    return false;
  else
    return s.degree() > 0;
}

template <class S>
S integer_power(const S& base, long long n) {
  if (n < 0) return 1.0 / integer_power(base, -n);
  S result = base * 0.0 + 1.0;
  S b = base;
  while (n > 0) {
    if (n & 1) result = result * b;
    n >>= 1;
    if (n) b = b * b;
  }
  return result;
}

template <class S>
S evaluate(const Node& n, const S& x, const S& y) {
  using std::cos, std::exp, std::log, std::sin, std::sqrt, std::tan, std::abs, std::pow;
  switch (n.op) {
    case Op::Number: return x * 0.0 + n.number;
    case Op::Pi: return x * 0.0 + std::numbers::pi;
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::Neg: return -evaluate(*n.lhs, x, y);
    case Op::Add: return evaluate(*n.lhs, x, y) + evaluate(*n.rhs, x, y);
    case Op::Sub: return evaluate(*n.lhs, x, y) - evaluate(*n.rhs, x, y);
    case Op::Mul: return evaluate(*n.lhs, x, y) * evaluate(*n.rhs, x, y);
    case Op::Div: {
      const S num = evaluate(*n.lhs, x, y);
      const S den = evaluate(*n.rhs, x, y);
      if (value_of(den) == 0.0) throw DomainError("division by zero", n.offset);
      return num / den;
    }
    case Op::Pow: {
      const S base = evaluate(*n.lhs, x, y);
      const double b = value_of(base);
      if (!n.rhs->varying) {
        const double p = evaluate(*n.rhs, 0.0, 0.0);
        if (p == std::trunc(p) && std::abs(p) <= 1024.0) {
          if (b == 0.0 && p < 0.0) throw DomainError("zero raised to a negative power", n.offset);
          return integer_power(base, static_cast<long long>(p));
        }
        if (b < 0.0) throw DomainError("negative base with non-integer exponent", n.offset);
        if (b == 0.0) {
          if (p < 0.0 || differentiating(base)) throw DomainError("non-integer power at zero", n.offset);
          return base * 0.0;
        }
        return pow(base, p);
      }
      if (b <= 0.0) throw DomainError("non-positive base with variable exponent", n.offset);
      return exp(evaluate(*n.rhs, x, y) * log(base));
    }
    case Op::Call: {
      const S a = evaluate(*n.lhs, x, y);
      const double v = value_of(a);
      switch (n.func) {
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Tan:
          if (std::cos(v) == 0.0) throw DomainError("tan at a pole", n.offset);
          return tan(a);
        case Func::Exp: return exp(a);
        case Func::Log:
          if (v <= 0.0) throw DomainError("log of non-positive value", n.offset);
          return log(a);
        case Func::Sqrt:
          if (v < 0.0 || (v == 0.0 && differentiating(a)))
            throw DomainError("sqrt outside its differentiable domain", n.offset);
          return sqrt(a);
        case Func::Abs:
          if (v == 0.0 && differentiating(a)) throw DomainError("abs is not differentiable at 0", n.offset);
          return abs(a);
      }
    }
  }
  throw DomainError("malformed expression", n.offset);
}

// First offset of an abs() whose argument depends on x or y, if any.
inline const Node* find_varying_abs(const Node& n) {
  if (n.op == Op::Call && n.func == Func::Abs && n.lhs->varying) return &n;
  for (const Node* c : {n.lhs.get(), n.rhs.get()})
    if (c)
      if (const Node* hit = find_varying_abs(*c)) return hit;
  return nullptr;
}

}  // namespace detail

inline Expr parse(std::string_view src) { return Expr(detail::Parser(src).parse_all()); }

inline std::string render(const Expr& e) {
  std::string out;
  detail::render_into(e.root(), out);
  return out;
}

inline double evaluate(const Expr& e, const Vec2& p) { return detail::evaluate(e.root(), p.x(), p.y()); }

// Value, gradient and (order 2) Hessian from forward differentiation.
struct DualValue {
  double value = 0.0;
  Vec2 gradient;
  Mat2 hessian;
};

inline DualValue eval_dual(const Expr& e, const Vec2& p, int order) {
  if (order != 1 && order != 2) throw InvalidArgument("eval_dual order must be 1 or 2");
  const BiTaylor t = detail::evaluate(e.root(), BiTaylor::variable(0, p.x(), order), BiTaylor::variable(1, p.y(), order));
  DualValue d;
  d.value = t.value();
  d.gradient = vec2(t.derivative(1, 0), t.derivative(0, 1));
  if (order == 2) {
    d.hessian(0, 0) = t.derivative(2, 0);
    d.hessian(0, 1) = d.hessian(1, 0) = t.derivative(1, 1);
    d.hessian(1, 1) = t.derivative(0, 2);
  }
  return d;
}

// Wind field whose components are user expressions. Rejects abs() of a
// varying argument since the solver differentiates the field.
class ExprWind final : public WindField {
 public:
  ExprWind(Expr w1, Expr w2) : w1_(std::move(w1)), w2_(std::move(w2)) {
    for (const Expr* e : {&w1_, &w2_})
      if (const Node* bad = detail::find_varying_abs(e->root()))
        throw DomainError("abs of a position-dependent argument cannot be differentiated", bad->offset);
  }

  std::array<BiTaylor, 2> expand(const Vec2& p, int degree) const override {
    const auto x = BiTaylor::variable(0, p.x(), degree);
    const auto y = BiTaylor::variable(1, p.y(), degree);
    return {detail::evaluate(w1_.root(), x, y), detail::evaluate(w2_.root(), x, y)};
  }
  Vec2 eval(const Vec2& p) const override { return vec2(evaluate(w1_, p), evaluate(w2_, p)); }
  std::string name() const override { return "expr(" + render(w1_) + "; " + render(w2_) + ")"; }

 private:
  Expr w1_;
  Expr w2_;
};

inline WindPtr expression_wind(std::string_view w1, std::string_view w2) {
  return std::make_shared<ExprWind>(parse(w1), parse(w2));
}

}  // namespace parvi::expr
