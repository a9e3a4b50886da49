#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weingarten/expression.hpp"
#include "weingarten/ext_real.hpp"

namespace wg {

/// r2 = lambda r1 + C.
struct LinearHopf {
  double lambda, C;
  bool degenerate() const { return lambda == 1.0; }
  friend bool operator==(const LinearHopf&, const LinearHopf&) = default;
};

/// k2 = lambda k1.
struct PureKLinear {
  double lambda;
  friend bool operator==(const PureKLinear&, const PureKLinear&) = default;
};

/// alpha k1 k2 + beta k1 + gamma k2 + delta = 0.
struct SemiQuadratic {
  double alpha, beta, gamma, delta;
  friend bool operator==(const SemiQuadratic&, const SemiQuadratic&) = default;
};

/// r2 = gamma^2 r1^3.
struct CubicRoC {
  double gamma;
  friend bool operator==(const CubicRoC&, const CubicRoC&) = default;
};

/// r2 = F(r1) with F an expression tree in r1.
struct ExplicitF {
  ExprPtr expr;
};

using WeingartenRelation = std::variant<LinearHopf, PureKLinear, SemiQuadratic, CubicRoC, ExplicitF>;

/// Canonical family when the text matches one, otherwise ExplicitF.
WeingartenRelation parse_relation(const std::string& text);
/// Canonical text; parse_relation(render(rel)) reproduces the variant data.
std::string render(const WeingartenRelation& rel);
std::string family_name(const WeingartenRelation& rel);
bool same_relation(const WeingartenRelation& a, const WeingartenRelation& b);

ExtReal eval_F(const WeingartenRelation& rel, ExtReal r1);
double eval_F_prime(const WeingartenRelation& rel, double r1);
/// Shorthand for finite arguments; throws Singular if F(r1) is infinite.
double F_value(const WeingartenRelation& rel, double r1);

/// Umbilic radii F(r0) = r0 in [lo, hi]: sign scan on 512 cells plus bisection.
std::vector<double> fixed_points(const WeingartenRelation& rel, double lo, double hi);

/// Curvature-form coefficients for the families that have them.
std::optional<SemiQuadratic> k_coefficients(const WeingartenRelation& rel);

/// Tries the canonical families for a semi-quadratic relation in the order
/// PureKLinear (alpha = delta = 0), LinearHopf (delta = 0, beta != 0), and
/// falls back to SemiQuadratic.
WeingartenRelation canonical_from_coefficients(const SemiQuadratic& q, double rel_tol = 1e-12);

}  // namespace wg
