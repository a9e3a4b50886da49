#pragma once

#include <memory>
#include <string>

namespace wg {

enum class Var { R1, R2, K1, K2 };
enum class Fn { Sin, Cos, Ln, Exp, Abs, Sqrt };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Number, Variable, Add, Sub, Mul, Div, Pow, Neg, Func };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string literal;  // source text of a number, kept for exact coefficient detection
  Var var = Var::R1;
  Fn fn = Fn::Sin;
  ExprPtr lhs, rhs;  // Neg and Func use lhs only; Pow's exponent is rhs (a Number)

  static ExprPtr num(double v, std::string literal = {});
  static ExprPtr variable(Var v);
  static ExprPtr binary(Kind k, ExprPtr a, ExprPtr b);
  static ExprPtr negate(ExprPtr a);
  static ExprPtr func(Fn f, ExprPtr a);
};

struct Dual {
  double value, deriv;
};

/// Value and derivative with respect to `var` at the binding x (other
/// variables must not occur). Division by zero yields an infinite value;
/// 0/0, logs of non-positive numbers and similar throw ErrorKind::Domain.
Dual evaluate(const ExprPtr& e, Var var, double x);

bool contains(const ExprPtr& e, Var v);
/// Replaces every occurrence of `v` by `by`.
ExprPtr substitute(const ExprPtr& e, Var v, const ExprPtr& by);
std::string render(const ExprPtr& e);
const char* name(Var v);

struct Equation {
  ExprPtr lhs, rhs;
};

/// Recursive-descent parser for the relation grammar. H and K expand to
/// (k1+k2)/2 and k1*k2. Throws ParseError with a character position.
Equation parse_equation(const std::string& text);
ExprPtr parse_expression(const std::string& text);

}  // namespace wg
