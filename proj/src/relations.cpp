#include "weingarten/relations.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <utility>

#include "weingarten/error.hpp"
#include "weingarten/numerics/roots.hpp"

namespace wg {
namespace {

// ---- exact coefficients ------------------------------------------------------

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// Rational with overflow tracking; `ok` is false once exactness is lost.
struct Rational {
  i128 n = 0, d = 1;
  bool ok = true;

  static Rational fail() {
    Rational r;
    r.ok = false;
    return r;
  }
  Rational normalized() const {
    if (!ok) return *this;
    if (d == 0) return fail();
    Rational r = *this;
    if (r.d < 0) {
      r.n = -r.n;
      r.d = -r.d;
    }
    const i128 g = gcd128(r.n, r.d);
    if (g > 1) {
      r.n /= g;
      r.d /= g;
    }
    const i128 limit = static_cast<i128>(1) << 110;
    if (r.n > limit || r.n < -limit || r.d > limit) return fail();
    return r;
  }
  static bool mul(i128 a, i128 b, i128& out) { return !__builtin_mul_overflow(a, b, &out); }

  friend Rational operator*(const Rational& a, const Rational& b) {
    if (!a.ok || !b.ok) return fail();
    Rational r;
    if (!mul(a.n, b.n, r.n) || !mul(a.d, b.d, r.d)) return fail();
    return r.normalized();
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    if (!a.ok || !b.ok) return fail();
    i128 x, y, den;
    if (!mul(a.n, b.d, x) || !mul(b.n, a.d, y) || !mul(a.d, b.d, den)) return fail();
    Rational r;
    if (__builtin_add_overflow(x, y, &r.n)) return fail();
    r.d = den;
    return r.normalized();
  }
  Rational operator-() const {
    Rational r = *this;
    r.n = -r.n;
    return r;
  }
  Rational inverse() const {
    if (!ok || n == 0) return fail();
    Rational r;
    r.n = d;
    r.d = n;
    return r.normalized();
  }
};

Rational rational_from_literal(const std::string& lit) {
  if (lit.empty()) return Rational::fail();
  i128 mant = 0;
  int digits = 0, frac = 0;
  std::size_t i = 0;
  bool negative = false;
  if (lit[0] == '-') {
    negative = true;
    i = 1;
  }
  bool seen_dot = false;
  for (; i < lit.size() && lit[i] != 'e' && lit[i] != 'E'; ++i) {
    if (lit[i] == '.') {
      seen_dot = true;
      continue;
    }
    if (mant != 0 || lit[i] != '0') ++digits;
    if (digits > 33) return Rational::fail();
    mant = mant * 10 + (lit[i] - '0');
    if (seen_dot) ++frac;
  }
  int exp10 = -frac;
  if (i < lit.size()) exp10 += std::atoi(lit.c_str() + i + 1);
  if (exp10 > 30 || exp10 < -30) return Rational::fail();
  Rational r;
  r.n = negative ? -mant : mant;
  i128 p = 1;
  for (int k = 0; k < std::abs(exp10); ++k) p *= 10;
  if (exp10 >= 0) {
    if (!Rational::mul(r.n, p, r.n)) return Rational::fail();
  } else {
    r.d = p;
  }
  return r.normalized();
}

struct Coef {
  Rational q;
  double v = 0;

  bool is_zero() const { return q.ok ? q.n == 0 : v == 0; }
  friend Coef operator+(const Coef& a, const Coef& b) { return {a.q + b.q, a.v + b.v}; }
  friend Coef operator*(const Coef& a, const Coef& b) { return {a.q * b.q, a.v * b.v}; }
  Coef operator-() const { return {-q, -v}; }
};

Coef coef_of(double v, const std::string& literal) {
  Rational q = literal.empty() ? Rational::fail() : rational_from_literal(literal);
  if (!literal.empty() && q.ok) {
    // The exact value must agree with the double that strtod produced.
    const double back = static_cast<double>(static_cast<long double>(q.n) / static_cast<long double>(q.d));
    if (std::abs(back - v) > 1e-15 * std::abs(v)) q = Rational::fail();
  }
  return {q, v};
}

Coef unit() {
  Rational one;
  one.n = 1;
  return {one, 1.0};
}

// ---- Laurent polynomials in (r1, r2) and rational functions -------------------

using Monomial = std::pair<int, int>;
using Poly = std::map<Monomial, Coef>;

Poly prune(Poly p) {
  for (auto it = p.begin(); it != p.end();) it = it->second.is_zero() ? p.erase(it) : std::next(it);
  return p;
}

Poly add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, c] : b) {
    auto it = out.find(m);
    if (it == out.end()) out.emplace(m, c);
    else it->second = it->second + c;
  }
  return prune(out);
}

Poly negate(const Poly& a) {
  Poly out;
  for (const auto& [m, c] : a) out.emplace(m, -c);
  return out;
}

Poly mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      const Monomial m{ma.first + mb.first, ma.second + mb.second};
      auto it = out.find(m);
      if (it == out.end()) out.emplace(m, ca * cb);
      else it->second = it->second + ca * cb;
    }
  return prune(out);
}

Poly constant(const Coef& c) { return prune(Poly{{{0, 0}, c}}); }
Poly monomial(int e1, int e2) { return Poly{{{e1, e2}, unit()}}; }
bool is_one(const Poly& p) { return p.size() == 1 && p.begin()->first == Monomial{0, 0} && p.begin()->second.q.ok && p.begin()->second.q.n == 1 && p.begin()->second.q.d == 1; }

struct RatFn {
  Poly num, den;
};

std::optional<RatFn> to_ratfn(const ExprPtr& e) {
  using K = Expr::Kind;
  switch (e->kind) {
    case K::Number: return RatFn{constant(coef_of(e->number, e->literal)), monomial(0, 0)};
    case K::Variable:
      switch (e->var) {
        case Var::R1: return RatFn{monomial(1, 0), monomial(0, 0)};
        case Var::R2: return RatFn{monomial(0, 1), monomial(0, 0)};
        case Var::K1: return RatFn{monomial(-1, 0), monomial(0, 0)};
        case Var::K2: return RatFn{monomial(0, -1), monomial(0, 0)};
      }
      return std::nullopt;
    case K::Neg: {
      auto a = to_ratfn(e->lhs);
      if (!a) return std::nullopt;
      return RatFn{negate(a->num), a->den};
    }
    case K::Add:
    case K::Sub: {
      auto a = to_ratfn(e->lhs), b = to_ratfn(e->rhs);
      if (!a || !b) return std::nullopt;
      Poly bn = e->kind == K::Sub ? negate(b->num) : b->num;
      if (is_one(a->den) && is_one(b->den)) return RatFn{add(a->num, bn), a->den};
      return RatFn{add(mul(a->num, b->den), mul(bn, a->den)), mul(a->den, b->den)};
    }
    case K::Mul: {
      auto a = to_ratfn(e->lhs), b = to_ratfn(e->rhs);
      if (!a || !b) return std::nullopt;
      return RatFn{mul(a->num, b->num), mul(a->den, b->den)};
    }
    case K::Div: {
      auto a = to_ratfn(e->lhs), b = to_ratfn(e->rhs);
      if (!a || !b) return std::nullopt;
      if (b->num.empty()) throw Error(ErrorKind::Domain, "division by zero in relation");
      return RatFn{mul(a->num, b->den), mul(a->den, b->num)};
    }
    case K::Pow: {
      const double p = e->rhs->number;
      if (std::floor(p) != p || std::abs(p) > 16) return std::nullopt;
      auto a = to_ratfn(e->lhs);
      if (!a) return std::nullopt;
      RatFn out{monomial(0, 0), monomial(0, 0)};
      for (int k = 0; k < std::abs(static_cast<int>(p)); ++k) {
        out.num = mul(out.num, a->num);
        out.den = mul(out.den, a->den);
      }
      if (p < 0) {
        if (out.num.empty()) throw Error(ErrorKind::Domain, "negative power of zero in relation");
        std::swap(out.num, out.den);
      }
      return out;
    }
    case K::Func: return std::nullopt;
  }
  return std::nullopt;
}

/// Numerator with exponents shifted to be non-negative and minimal.
Poly numerator(const RatFn& f) {
  Poly p = f.num;
  if (p.empty()) return p;
  int m1 = 0, m2 = 0;
  bool first = true;
  for (const auto& [m, c] : p) {
    m1 = first ? m.first : std::min(m1, m.first);
    m2 = first ? m.second : std::min(m2, m.second);
    first = false;
  }
  Poly out;
  for (const auto& [m, c] : p) out.emplace(Monomial{m.first - m1, m.second - m2}, c);
  return out;
}

Coef coef(const Poly& p, int e1, int e2) {
  auto it = p.find({e1, e2});
  if (it == p.end()) return Coef{Rational{}, 0.0};
  return it->second;
}

ExprPtr poly_in_r1(const Poly& p, int e2) {
  ExprPtr sum;
  for (const auto& [m, c] : p) {
    if (m.second != e2) continue;
    ExprPtr term = Expr::num(c.v);
    if (m.first == 1) term = Expr::binary(Expr::Kind::Mul, term, Expr::variable(Var::R1));
    else if (m.first > 1)
      term = Expr::binary(Expr::Kind::Mul, term,
                          Expr::binary(Expr::Kind::Pow, Expr::variable(Var::R1), Expr::num(m.first)));
    sum = sum ? Expr::binary(Expr::Kind::Add, sum, term) : term;
  }
  return sum ? sum : Expr::num(0.0);
}

bool is_var(const ExprPtr& e, Var v) { return e->kind == Expr::Kind::Variable && e->var == v; }

/// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// " + c*x" / " - |c|*x" for the tail of a sum.
std::string signed_term(double c, const std::string& x) {
  const bool neg = std::signbit(c);
  std::string s = neg ? " - " : " + ";
  s += num(std::abs(c));
  if (!x.empty()) s += "*" + x;
  return s;
}

}  // namespace

WeingartenRelation parse_relation(const std::string& text) {
  const Equation eq = parse_equation(text);
  const ExprPtr diff = Expr::binary(Expr::Kind::Sub, eq.lhs, eq.rhs);
  const bool uses_r = contains(diff, Var::R1) || contains(diff, Var::R2);
  const bool uses_k = contains(diff, Var::K1) || contains(diff, Var::K2);
  const bool has_second = contains(diff, Var::R2) || contains(diff, Var::K2);

  if (auto rf = to_ratfn(diff)) {
    const Poly N = numerator(*rf);
    if (N.empty()) throw Error(ErrorKind::Parse, "relation is an identity");
    int max1 = 0, max2 = 0;
    for (const auto& [m, c] : N) {
      max1 = std::max(max1, m.first);
      max2 = std::max(max2, m.second);
    }
    if (max2 == 0 && max1 == 0) throw Error(ErrorKind::Parse, "relation has no solutions");
    if (max1 <= 1 && max2 <= 1) {
      const Coef A = coef(N, 1, 1), B = coef(N, 1, 0), C = coef(N, 0, 1), D = coef(N, 0, 0);
      const SemiQuadratic q{D.v, C.v, B.v, A.v};
      if (uses_r && !uses_k && A.is_zero() && !C.is_zero()) {
        const double lambda = -B.v / C.v, c0 = -D.v / C.v;
        const bool unit_slope = (B + C).is_zero();
        if (unit_slope && D.is_zero()) return PureKLinear{1.0};
        return LinearHopf{lambda, c0 == 0 ? 0.0 : c0};
      }
      if (uses_k && !uses_r && (is_var(eq.lhs, Var::K2) || is_var(eq.rhs, Var::K2)) && D.is_zero() &&
          A.is_zero() && !B.is_zero())
        return PureKLinear{-C.v / B.v};
      return q;
    }
    if (uses_r && !uses_k && N.size() == 2 && !coef(N, 0, 1).is_zero() && !coef(N, 3, 0).is_zero()) {
      const double g2 = -coef(N, 3, 0).v / coef(N, 0, 1).v;
      if (g2 > 0) return CubicRoC{std::sqrt(g2)};
    }
    if (max2 == 1) {
      // r2 * P1(r1) + P0(r1) = 0
      ExprPtr P1 = poly_in_r1(N, 1), P0 = poly_in_r1(N, 0);
      return ExplicitF{Expr::binary(Expr::Kind::Div, Expr::negate(P0), P1)};
    }
  }

  // Non-rational relations must isolate r2 or k2 on one side.
  for (const auto& [side, other] : {std::pair{eq.lhs, eq.rhs}, std::pair{eq.rhs, eq.lhs}}) {
    if (contains(other, Var::R2) || contains(other, Var::K2)) continue;
    const ExprPtr inv_r1 = Expr::binary(Expr::Kind::Div, Expr::num(1.0, "1"), Expr::variable(Var::R1));
    const ExprPtr body = substitute(other, Var::K1, inv_r1);
    if (is_var(side, Var::R2)) return ExplicitF{body};
    if (is_var(side, Var::K2)) return ExplicitF{Expr::binary(Expr::Kind::Div, Expr::num(1.0, "1"), body)};
  }
  if (!has_second) throw Error(ErrorKind::Parse, "ambiguous relation: r2/k2 does not occur");
  throw Error(ErrorKind::Parse, "ambiguous relation: neither solvable for r2 nor in k-coefficient form");
}

std::string render(const WeingartenRelation& rel) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearHopf>) {
          return "r2 = " + num(r.lambda) + "*r1" + signed_term(r.C, "");
        } else if constexpr (std::is_same_v<T, PureKLinear>) {
          return "k2 = " + num(r.lambda) + "*k1";
        } else if constexpr (std::is_same_v<T, SemiQuadratic>) {
          // Leading nonzero term unsigned, the rest as signed tails; zero terms dropped.
          const std::pair<double, const char*> terms[] = {
              {r.alpha, "k1*k2"}, {r.beta, "k1"}, {r.gamma, "k2"}, {r.delta, ""}};
          std::string s;
          for (const auto& [c, x] : terms) {
            if (c == 0) continue;
            if (s.empty()) {
              s = num(c);
              if (*x) s += std::string("*") + x;
            } else {
              s += signed_term(c, x);
            }
          }
          return (s.empty() ? std::string("0") : s) + " = 0";
        } else if constexpr (std::is_same_v<T, CubicRoC>) {
          return "r2 = (" + num(r.gamma) + ")^2*r1^3";
        } else {
          return "r2 = " + wg::render(r.expr);
        }
      },
      rel);
}

std::string family_name(const WeingartenRelation& rel) {
  static const char* names[] = {"LinearHopf", "PureKLinear", "SemiQuadratic", "CubicRoC", "ExplicitF"};
  return names[rel.index()];
}

bool same_relation(const WeingartenRelation& a, const WeingartenRelation& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ea = std::get_if<ExplicitF>(&a)) return render(ea->expr) == render(std::get<ExplicitF>(b).expr);
  return std::visit(
      [&b](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ExplicitF>) return false;
        else return x == std::get<T>(b);
      },
      a);
}

ExtReal eval_F(const WeingartenRelation& rel, ExtReal x) {
  return std::visit(
      [x](const auto& r) -> ExtReal {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearHopf>) {
          return fractional_linear(r.lambda, r.C, 0.0, 1.0, x);
        } else if constexpr (std::is_same_v<T, PureKLinear>) {
          if (r.lambda == 0) {
            if (x.is_finite() && x.value() == 0) throw Error(ErrorKind::Domain, "0*inf in k2 = 0*k1");
            return ExtReal::infinity();
          }
          return fractional_linear(1.0, 0.0, 0.0, r.lambda, x);
        } else if constexpr (std::is_same_v<T, SemiQuadratic>) {
          return fractional_linear(-r.gamma, -r.alpha, r.delta, r.beta, x);
        } else if constexpr (std::is_same_v<T, CubicRoC>) {
          if (x.is_infinite()) return r.gamma == 0 ? ExtReal(0.0) : ExtReal::infinity();
          return ExtReal(r.gamma * r.gamma * x.value() * x.value() * x.value());
        } else {
          if (x.is_infinite()) throw Error(ErrorKind::Domain, "explicit F is not defined at infinity");
          return ExtReal(evaluate(r.expr, Var::R1, x.value()).value);
        }
      },
      rel);
}

double eval_F_prime(const WeingartenRelation& rel, double u) {
  return std::visit(
      [u](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LinearHopf>) {
          return r.lambda;
        } else if constexpr (std::is_same_v<T, PureKLinear>) {
          if (r.lambda == 0) throw Error(ErrorKind::Domain, "F is identically infinite");
          return 1.0 / r.lambda;
        } else if constexpr (std::is_same_v<T, SemiQuadratic>) {
          const double den = r.delta * u + r.beta;
          if (den == 0) throw Error(ErrorKind::Singular, "F' at a vertical asymptote");
          return (r.alpha * r.delta - r.beta * r.gamma) / (den * den);
        } else if constexpr (std::is_same_v<T, CubicRoC>) {
          return 3 * r.gamma * r.gamma * u * u;
        } else {
          const Dual d = evaluate(r.expr, Var::R1, u);
          if (!std::isfinite(d.deriv)) throw Error(ErrorKind::Singular, "F' is not finite here");
          return d.deriv;
        }
      },
      rel);
}

double F_value(const WeingartenRelation& rel, double r1) {
  const ExtReal v = eval_F(rel, ExtReal(r1));
  if (v.is_infinite()) throw Error(ErrorKind::Singular, "F(r1) is infinite");
  return v.value();
}

std::vector<double> fixed_points(const WeingartenRelation& rel, double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo)) throw Error(ErrorKind::Precondition, "bracket must be a finite interval");
  auto g = [&rel](double u) { return F_value(rel, u) - u; };
  auto accept = [&rel](double u) {
    try {
      return std::abs(F_value(rel, u) - u) <= 1e-8 * (1 + std::abs(u));
    } catch (const Error&) {
      return false;
    }
  };
  return numerics::sign_scan_roots(g, lo, hi, 512, accept, 1e-12);
}

std::optional<SemiQuadratic> k_coefficients(const WeingartenRelation& rel) {
  if (const auto* h = std::get_if<LinearHopf>(&rel)) return SemiQuadratic{h->C, -1.0, h->lambda, 0.0};
  if (const auto* p = std::get_if<PureKLinear>(&rel)) return SemiQuadratic{0.0, p->lambda, -1.0, 0.0};
  if (const auto* q = std::get_if<SemiQuadratic>(&rel)) return *q;
  return std::nullopt;
}

WeingartenRelation canonical_from_coefficients(const SemiQuadratic& q, double rel_tol) {
  const double scale = std::max({std::abs(q.alpha), std::abs(q.beta), std::abs(q.gamma), std::abs(q.delta)});
  auto zero = [&](double x) { return std::abs(x) <= rel_tol * scale; };
  if (zero(q.alpha) && zero(q.delta) && !zero(q.gamma)) return PureKLinear{-q.beta / q.gamma};
  if (zero(q.delta) && !zero(q.beta)) return LinearHopf{-q.gamma / q.beta, -q.alpha / q.beta};
  return q;
}

}  // namespace wg
