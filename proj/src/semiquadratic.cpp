#include "weingarten/semiquadratic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weingarten/error.hpp"

namespace wg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double scale_of(const SemiQuadratic& q) {
  return std::max({std::abs(q.alpha), std::abs(q.beta), std::abs(q.gamma), std::abs(q.delta)});
}

double distance(const SemiQuadratic& x, const SemiQuadratic& y) {
  return std::max({std::abs(x.alpha - y.alpha), std::abs(x.beta - y.beta), std::abs(x.gamma - y.gamma),
                   std::abs(x.delta - y.delta)});
}

SemiQuadratic negated(const SemiQuadratic& q) { return {-q.alpha, -q.beta, -q.gamma, -q.delta}; }

double frobenius(double a, double b, double c, double d) { return std::sqrt(a * a + b * b + c * c + d * d); }

/// Candidates for the case delta' != 0, from the delta' and (beta' + gamma') equations.
std::vector<Moebius> target_delta_nonzero(const SemiQuadratic& f, const SemiQuadratic& t) {
  const double s = f.beta + f.gamma, s_t = t.beta + t.gamma;
  std::vector<Moebius> out;
  auto finish = [&](double c, double d) {
    const double a = (f.delta * d - c * (s + s_t) / 2) / t.delta;
    const double b = (a * d - 1) / c;
    if (std::isfinite(a) && std::isfinite(b)) {
      try {
        out.emplace_back(a, b, c, d);
      } catch (const Error&) {
      }
    }
  };
  if (f.delta == 0) {
    if (s == 0) throw Error(ErrorKind::Degenerate, "beta + gamma vanishes with delta = 0");
    const double c = 1;
    finish(c, (f.alpha * c * c - t.delta) / (s * c));
    return out;
  }
  double c = 1;
  while (c * c + 4 * f.delta * t.delta < 1) c *= 2;
  const double root = std::sqrt(c * c + 4 * f.delta * t.delta);
  for (double sign : {1.0, -1.0}) finish(c, (s * c + sign * root) / (2 * f.delta));
  return out;
}

/// Candidates when delta = delta' = 0.
std::vector<Moebius> both_delta_zero(const SemiQuadratic& f, const SemiQuadratic& t) {
  const double s = f.beta + f.gamma, s_t = t.beta + t.gamma;
  if (s == 0) throw Error(ErrorKind::Degenerate, "beta + gamma vanishes with delta = 0");
  std::vector<Moebius> out;
  if (std::abs(s - s_t) <= std::abs(s + s_t)) {
    // c = 0 keeps beta and gamma; a translation fixes alpha.
    out.emplace_back(1.0, (f.alpha - t.alpha) / s, 0.0, 1.0);
  } else {
    // c != 0 with d = alpha c / s flips beta + gamma.
    const double c = 1, a = t.alpha * c / s, d = f.alpha * c / s;
    out.emplace_back(a, (a * d - 1) / c, c, d);
  }
  return out;
}

}  // namespace

std::string to_string(QuadraticClass c) {
  switch (c) {
    case QuadraticClass::Elliptic: return "elliptic";
    case QuadraticClass::Hyperbolic: return "hyperbolic";
    case QuadraticClass::Parabolic: return "parabolic";
  }
  return "?";
}

std::string to_string(CanalClass c) {
  switch (c) {
    case CanalClass::RoundSphere: return "round sphere";
    case CanalClass::Torus: return "torus of revolution";
    case CanalClass::Plane: return "plane";
    case CanalClass::Cone: return "cone";
    case CanalClass::Cylinder: return "cylinder";
  }
  return "?";
}

SemiQuadraticInvariants invariants(const SemiQuadratic& q) {
  if (q.alpha == 0 && q.beta == 0 && q.gamma == 0 && q.delta == 0)
    throw Error(ErrorKind::Precondition, "semi-quadratic coefficients are all zero");
  SemiQuadraticInvariants inv;
  inv.lambda1 = q.beta - q.gamma;
  const double s = q.beta + q.gamma;
  inv.lambda2 = s * s - 4 * q.alpha * q.delta;
  if (inv.lambda2 != 0) inv.ratio = inv.lambda1 * inv.lambda1 / inv.lambda2;
  const double l1sq = inv.lambda1 * inv.lambda1;
  if (std::abs(inv.lambda2 - l1sq) <= 1e-12 * std::max(1.0, l1sq))
    inv.cls = QuadraticClass::Parabolic;
  else
    inv.cls = inv.lambda2 > l1sq ? QuadraticClass::Elliptic : QuadraticClass::Hyperbolic;
  return inv;
}

SemiQuadratic normalize(const SemiQuadratic& q) {
  const SemiQuadraticInvariants inv = invariants(q);
  if (!(inv.lambda2 > 0)) throw Error(ErrorKind::Domain, "normalization needs lambda2 > 0");
  const double r = std::sqrt(inv.lambda2);
  return {q.alpha / r, q.beta / r, q.gamma / r, q.delta / r};
}

UmbilicCurvatures umbilic_curvatures(const SemiQuadratic& q) {
  const SemiQuadraticInvariants inv = invariants(q);
  UmbilicCurvatures out;
  const double s = q.beta + q.gamma;
  if (q.alpha != 0) {
    if (inv.lambda2 < 0) {
      out.reason = "lambda2 < 0: no umbilic points";
      return out;
    }
    const double r = std::sqrt(inv.lambda2);
    out.k.push_back((-s + r) / (2 * q.alpha));
    if (r != 0) out.k.push_back((-s - r) / (2 * q.alpha));
    std::sort(out.k.begin(), out.k.end());
    return out;
  }
  if (s != 0) {
    out.k.push_back(q.delta == 0 ? 0.0 : -q.delta / s);
    return out;
  }
  out.reason = q.delta != 0 ? "alpha = 0 and beta + gamma = 0 with delta != 0: no umbilic points"
                            : "every point is umbilic";
  return out;
}

UmbilicSlopes umbilic_slope_formula(const SemiQuadratic& q) {
  const SemiQuadraticInvariants inv = invariants(q);
  if (inv.lambda2 < 0) throw Error(ErrorKind::Domain, "umbilic slopes need lambda2 >= 0");
  const double r = std::sqrt(inv.lambda2), l1 = inv.lambda1;
  UmbilicSlopes out;
  const double scale = std::max(1.0, std::abs(l1));
  if (std::abs(l1 - r) <= 1e-12 * scale || std::abs(l1 + r) <= 1e-12 * scale) {
    out.degenerate = true;
    out.plus = 0;
    out.minus = kNaN;
    return out;
  }
  out.plus = (l1 + r) / (l1 - r);
  out.minus = (l1 - r) / (l1 + r);
  return out;
}

Moebius transitivity_solve(const SemiQuadratic& from, const SemiQuadratic& to_in) {
  const SemiQuadraticInvariants fi = invariants(from), ti = invariants(to_in);
  if (std::abs(fi.lambda2 - 1) > 1e-10 || std::abs(ti.lambda2 - 1) > 1e-10)
    throw Error(ErrorKind::Precondition, "transitivity needs normalized relations (lambda2 = 1)");
  if (std::abs(fi.lambda1 * fi.lambda1 - ti.lambda1 * ti.lambda1) > 1e-10)
    throw Error(ErrorKind::Precondition, "lambda1^2 differs between the relations");
  SemiQuadratic to = to_in;
  if (fi.lambda1 * ti.lambda1 < 0) to = negated(to);
  if (distance(from, to) <= 1e-15 * scale_of(from)) return Moebius::identity();

  const double zero = 1e-14;
  std::vector<Moebius> candidates;
  const bool d_from = std::abs(from.delta) > zero, d_to = std::abs(to.delta) > zero;
  if (d_to) {
    candidates = target_delta_nonzero(from, to);
  } else if (d_from) {
    for (const Moebius& m : target_delta_nonzero(to, from)) candidates.push_back(m.inverse());
  } else {
    SemiQuadratic f = from, t = to;
    f.delta = t.delta = 0;
    candidates = both_delta_zero(f, t);
  }

  const Moebius* best = nullptr;
  double best_norm = std::numeric_limits<double>::infinity();
  for (const Moebius& m : candidates) {
    const SemiQuadratic img = transform_coefficients(m, from);
    const double err = std::min(distance(img, to), distance(img, negated(to)));
    if (err > 1e-8 * std::max(1.0, scale_of(to))) continue;
    const double norm = frobenius(m.a(), m.b(), m.c(), m.d());
    if (norm < best_norm) {
      best_norm = norm;
      best = &m;
    }
  }
  if (!best) throw Error(ErrorKind::Degenerate, "transitivity solve found no matching transform");
  return *best;
}

Reduction reduce_to_pure_linear(const SemiQuadratic& q) {
  const SemiQuadraticInvariants inv = invariants(q);
  if (!(inv.lambda2 > 0)) throw Error(ErrorKind::Domain, "reduction needs lambda2 > 0");
  Reduction out;
  if (inv.cls == QuadraticClass::Parabolic) {
    out.parabolic = true;
    return out;
  }
  const SemiQuadratic n = normalize(q);
  const double l1 = n.beta - n.gamma;
  double best_norm = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    const SemiQuadratic target{0.0, (l1 + sign) / 2, (-l1 + sign) / 2, 0.0};
    Moebius M;
    try {
      M = transitivity_solve(n, target);
    } catch (const Error&) {
      continue;
    }
    const double norm = frobenius(M.a(), M.b(), M.c(), M.d());
    if (norm < best_norm) {
      best_norm = norm;
      out.M = M;
      out.target = target;
      out.lambda = (l1 + sign) / (l1 - sign);
    }
  }
  if (!std::isfinite(best_norm)) throw Error(ErrorKind::Degenerate, "no reduction to a pure linear relation");
  return out;
}

CanalClass canal_classify(const SemiQuadratic& q, std::span<const RoCPoint> samples, double rel_tol) {
  if (invariants(q).cls != QuadraticClass::Parabolic)
    throw Error(ErrorKind::Precondition, "canal classification needs a parabolic relation");
  if (samples.empty()) throw Error(ErrorKind::Precondition, "no samples to classify");
  std::vector<double> k1, k2;
  for (const RoCPoint& p : samples) {
    k1.push_back(p.r1.is_infinite() ? 0.0 : (p.r1.value() == 0 ? kNaN : 1 / p.r1.value()));
    k2.push_back(p.r2.is_infinite() ? 0.0 : (p.r2.value() == 0 ? kNaN : 1 / p.r2.value()));
  }
  auto constant = [rel_tol](const std::vector<double>& k, double& value) {
    if (std::any_of(k.begin(), k.end(), [](double x) { return std::isnan(x); })) return false;
    const auto [lo, hi] = std::minmax_element(k.begin(), k.end());
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    value = (*lo + *hi) / 2;
    return *hi - *lo <= rel_tol * std::max(scale, 1e-300) || scale == 0;
  };
  double c1 = 0, c2 = 0;
  const bool k1_const = constant(k1, c1), k2_const = constant(k2, c2);
  const double scale = std::max({std::abs(c1), std::abs(c2), 1e-300});
  auto is_zero = [&](double v) { return std::abs(v) <= rel_tol * scale || v == 0; };
  if (k1_const && k2_const) {
    if (is_zero(c1) && is_zero(c2)) return CanalClass::Plane;
    if (std::abs(c1 - c2) <= rel_tol * scale) return CanalClass::RoundSphere;
    if (is_zero(c2)) return CanalClass::Cylinder;
  }
  if (k2_const) return is_zero(c2) ? CanalClass::Cone : CanalClass::Torus;
  if (k1_const && is_zero(c1)) return CanalClass::Plane;
  throw Error(ErrorKind::Integration, "profile matches no canal class within tolerance");
}

CanalClass canal_classify(const SemiQuadratic& q, const RoCProfile& p, double rel_tol) {
  std::vector<RoCPoint> pts;
  for (Eigen::Index i = 0; i < p.size(); ++i) pts.push_back(p.point(i));
  return canal_classify(q, std::span<const RoCPoint>(pts), rel_tol);
}

}  // namespace wg
