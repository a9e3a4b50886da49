#include "weingarten/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "weingarten/error.hpp"

namespace wg {

ExprPtr Expr::num(double v, std::string literal) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Number;
  e->number = v;
  e->literal = std::move(literal);
  return e;
}

ExprPtr Expr::variable(Var v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Variable;
  e->var = v;
  return e;
}

ExprPtr Expr::binary(Kind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

ExprPtr Expr::negate(ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Neg;
  e->lhs = std::move(a);
  return e;
}

ExprPtr Expr::func(Fn f, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Func;
  e->fn = f;
  e->lhs = std::move(a);
  return e;
}

const char* name(Var v) {
  switch (v) {
    case Var::R1: return "r1";
    case Var::R2: return "r2";
    case Var::K1: return "k1";
    case Var::K2: return "k2";
  }
  return "?";
}

namespace {

const char* fn_name(Fn f) {
  switch (f) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Ln: return "ln";
    case Fn::Exp: return "exp";
    case Fn::Abs: return "abs";
    case Fn::Sqrt: return "sqrt";
  }
  return "?";
}

Dual checked(Dual d) {
  if (std::isnan(d.value)) throw Error(ErrorKind::Domain, "expression undefined at this argument");
  if (std::isnan(d.deriv)) d.deriv = std::numeric_limits<double>::infinity();
  return d;
}

}  // namespace

Dual evaluate(const ExprPtr& e, Var var, double x) {
  using K = Expr::Kind;
  switch (e->kind) {
    case K::Number: return {e->number, 0.0};
    case K::Variable:
      if (e->var != var) throw Error(ErrorKind::Domain, std::string("unbound variable ") + name(e->var));
      return {x, 1.0};
    case K::Neg: {
      const Dual a = evaluate(e->lhs, var, x);
      return {-a.value, -a.deriv};
    }
    case K::Add: {
      const Dual a = evaluate(e->lhs, var, x), b = evaluate(e->rhs, var, x);
      return checked({a.value + b.value, a.deriv + b.deriv});
    }
    case K::Sub: {
      const Dual a = evaluate(e->lhs, var, x), b = evaluate(e->rhs, var, x);
      return checked({a.value - b.value, a.deriv - b.deriv});
    }
    case K::Mul: {
      const Dual a = evaluate(e->lhs, var, x), b = evaluate(e->rhs, var, x);
      return checked({a.value * b.value, a.deriv * b.value + a.value * b.deriv});
    }
    case K::Div: {
      const Dual a = evaluate(e->lhs, var, x), b = evaluate(e->rhs, var, x);
      if (b.value == 0) {
        if (a.value == 0) throw Error(ErrorKind::Domain, "0/0 in expression");
        return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      }
      return checked({a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)});
    }
    case K::Pow: {
      const Dual a = evaluate(e->lhs, var, x);
      const double p = e->rhs->number;
      const bool integral = std::floor(p) == p;
      if (a.value < 0 && !integral) throw Error(ErrorKind::Domain, "fractional power of a negative number");
      if (a.value == 0 && p < 0) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      const double v = std::pow(a.value, p);
      const double dv = p == 0 ? 0.0 : p * std::pow(a.value, p - 1) * a.deriv;
      return checked({v, dv});
    }
    case K::Func: {
      const Dual a = evaluate(e->lhs, var, x);
      switch (e->fn) {
        case Fn::Sin: return checked({std::sin(a.value), std::cos(a.value) * a.deriv});
        case Fn::Cos: return checked({std::cos(a.value), -std::sin(a.value) * a.deriv});
        case Fn::Exp: {
          const double v = std::exp(a.value);
          return checked({v, v * a.deriv});
        }
        case Fn::Ln:
          if (!(a.value > 0)) throw Error(ErrorKind::Domain, "ln of a non-positive number");
          return checked({std::log(a.value), a.deriv / a.value});
        case Fn::Abs:
          if (a.value == 0 && a.deriv != 0) throw Error(ErrorKind::Domain, "abs is not differentiable at 0");
          return {std::abs(a.value), a.value < 0 ? -a.deriv : a.deriv};
        case Fn::Sqrt:
          if (a.value < 0) throw Error(ErrorKind::Domain, "sqrt of a negative number");
          return checked({std::sqrt(a.value), a.deriv / (2 * std::sqrt(a.value))});
      }
    }
  }
  throw Error(ErrorKind::Domain, "malformed expression");
}

bool contains(const ExprPtr& e, Var v) {
  if (!e) return false;
  if (e->kind == Expr::Kind::Variable) return e->var == v;
  return contains(e->lhs, v) || contains(e->rhs, v);
}

ExprPtr substitute(const ExprPtr& e, Var v, const ExprPtr& by) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Variable) return e->var == v ? by : e;
  if (e->kind == Expr::Kind::Number) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->lhs = substitute(e->lhs, v, by);
  if (e->kind != Expr::Kind::Pow) copy->rhs = substitute(e->rhs, v, by);
  return copy;
}

namespace {

int precedence(Expr::Kind k) {
  using K = Expr::Kind;
  switch (k) {
    case K::Add:
    case K::Sub: return 1;
    case K::Mul:
    case K::Div: return 2;
    case K::Neg: return 3;
    case K::Pow: return 4;
    default: return 5;
  }
}

/// Shortest text that reads back to the same double.
std::string number_text(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string render_at(const ExprPtr& e, int min_prec, bool right_operand) {
  using K = Expr::Kind;
  std::string s;
  const int p = precedence(e->kind);
  switch (e->kind) {
    case K::Number:
      s = number_text(e->number);
      if (e->number < 0 || std::signbit(e->number)) s = "(" + s + ")";
      return s;
    case K::Variable: return name(e->var);
    case K::Func: return std::string(fn_name(e->fn)) + "(" + render_at(e->lhs, 0, false) + ")";
    case K::Neg: s = "-" + render_at(e->lhs, p, false); break;
    case K::Pow: s = render_at(e->lhs, p + 1, false) + "^" + number_text(e->rhs->number); break;
    case K::Add: s = render_at(e->lhs, p, false) + " + " + render_at(e->rhs, p, true); break;
    case K::Sub: s = render_at(e->lhs, p, false) + " - " + render_at(e->rhs, p + 1, true); break;
    case K::Mul: s = render_at(e->lhs, p, false) + "*" + render_at(e->rhs, p, true); break;
    case K::Div: s = render_at(e->lhs, p, false) + "/" + render_at(e->rhs, p + 1, true); break;
  }
  if (p < min_prec || (right_operand && p == min_prec && (e->kind == K::Sub || e->kind == K::Div)))
    return "(" + s + ")";
  return s;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Equation equation() {
    ExprPtr lhs = expr();
    skip();
    if (!eat('=')) fail("expected '='");
    ExprPtr rhs = expr();
    finish();
    return {lhs, rhs};
  }

  ExprPtr lone_expression() {
    ExprPtr e = expr();
    finish();
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void finish() {
    skip();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
  }

  ExprPtr expr() {
    ExprPtr e = term();
    for (;;) {
      if (eat('+')) e = Expr::binary(Expr::Kind::Add, e, term());
      else if (eat('-')) e = Expr::binary(Expr::Kind::Sub, e, term());
      else return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    for (;;) {
      if (eat('*')) e = Expr::binary(Expr::Kind::Mul, e, factor());
      else if (eat('/')) e = Expr::binary(Expr::Kind::Div, e, factor());
      else return e;
    }
  }

  ExprPtr factor() {
    if (eat('-')) return Expr::negate(factor());
    if (eat('+')) return factor();
    ExprPtr b = base();
    if (eat('^')) {
      skip();
      bool negative = false;
      if (eat('-')) negative = true;
      else eat('+');
      skip();
      if (pos_ >= text_.size() || !(std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        fail("exponent must be a number");
      ExprPtr n = number();
      if (negative) n = Expr::num(-n->number, "-" + n->literal);
      return Expr::binary(Expr::Kind::Pow, b, n);
    }
    return b;
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    const std::string lit = text_.substr(start, pos_ - start);
    if (lit.empty() || lit == ".") {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::num(std::strtod(lit.c_str(), nullptr), lit);
  }

  ExprPtr base() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string id = text_.substr(start, pos_ - start);
      if (id == "r1") return Expr::variable(Var::R1);
      if (id == "r2") return Expr::variable(Var::R2);
      if (id == "k1") return Expr::variable(Var::K1);
      if (id == "k2") return Expr::variable(Var::K2);
      if (id == "H") {
        auto sum = Expr::binary(Expr::Kind::Add, Expr::variable(Var::K1), Expr::variable(Var::K2));
        return Expr::binary(Expr::Kind::Div, sum, Expr::num(2.0, "2"));
      }
      if (id == "K") return Expr::binary(Expr::Kind::Mul, Expr::variable(Var::K1), Expr::variable(Var::K2));
      static const std::pair<const char*, Fn> funcs[] = {{"sin", Fn::Sin}, {"cos", Fn::Cos}, {"ln", Fn::Ln},
                                                         {"exp", Fn::Exp}, {"abs", Fn::Abs}, {"sqrt", Fn::Sqrt}};
      for (const auto& [fname, f] : funcs) {
        if (id == fname) {
          if (!eat('(')) fail("expected '(' after " + id);
          ExprPtr arg = expr();
          if (!eat(')')) fail("expected ')'");
          return Expr::func(f, arg);
        }
      }
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail(std::string("unexpected '") + c + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string render(const ExprPtr& e) { return render_at(e, 0, false); }

Equation parse_equation(const std::string& text) { return Parser(text).equation(); }

ExprPtr parse_expression(const std::string& text) { return Parser(text).lone_expression(); }

}  // namespace wg
