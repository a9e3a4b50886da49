#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weingarten/mobius.hpp"
#include "weingarten/relations.hpp"
#include "weingarten/roc_core.hpp"

namespace wg {

enum class QuadraticClass { Elliptic, Hyperbolic, Parabolic };
std::string to_string(QuadraticClass c);

struct SemiQuadraticInvariants {
  double lambda1 = 0;  // beta - gamma
  double lambda2 = 0;  // (beta + gamma)^2 - 4 alpha delta
  std::optional<double> ratio;  // lambda1^2 / lambda2
  QuadraticClass cls = QuadraticClass::Elliptic;
};

SemiQuadraticInvariants invariants(const SemiQuadratic& q);
/// Divides by sqrt(lambda2) so that lambda2 = 1.
SemiQuadratic normalize(const SemiQuadratic& q);

struct UmbilicCurvatures {
  std::vector<double> k;
  std::string reason;  // set when the list is empty
};
UmbilicCurvatures umbilic_curvatures(const SemiQuadratic& q);

struct UmbilicSlopes {
  double plus = 0, minus = 0;
  /// Parabolic case: plus = 0 and minus is undefined (NaN).
  bool degenerate = false;
};
UmbilicSlopes umbilic_slope_formula(const SemiQuadratic& q);

/// M in SL2(R) carrying `from` onto `to`; both must be normalized with equal
/// lambda1^2. The target's overall sign is flipped when lambda1 differs in sign.
Moebius transitivity_solve(const SemiQuadratic& from, const SemiQuadratic& to);

struct Reduction {
  bool parabolic = false;
  Moebius M;
  double lambda = 0;
  SemiQuadratic target{0, 0, 0, 0};
};

/// Transform onto k2 = lambda k1 with lambda in {lambda+, lambda-}. Parabolic
/// relations are flagged for canal_classify instead.
Reduction reduce_to_pure_linear(const SemiQuadratic& q);

enum class CanalClass { RoundSphere, Torus, Plane, Cone, Cylinder };
std::string to_string(CanalClass c);

/// Which principal curvature is constant along the diagram samples, and its value.
CanalClass canal_classify(const SemiQuadratic& q, std::span<const RoCPoint> samples, double rel_tol = 1e-6);
CanalClass canal_classify(const SemiQuadratic& q, const RoCProfile& p, double rel_tol = 1e-6);

}  // namespace wg
