#include "weingarten/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "weingarten/integrator.hpp"
#include "weingarten/numerics/quadrature.hpp"

namespace wg {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPatchHalfWidth = 1e-3;

const numerics::GaussLegendre<double>& gl8() {
  static const numerics::GaussLegendre<double> rule(8);
  return rule;
}

/// Vertex of the parabola through three samples; falls back to the middle one.
std::pair<double, double> parabolic_peak(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double d0 = (y1 - y0) / (x1 - x0), d1 = (y2 - y1) / (x2 - x1);
  const double curv = (d1 - d0) / (x2 - x0);
  if (curv == 0) return {x1, y1};
  const double x = std::clamp((x0 + x1) / 2 - d0 / (2 * curv), x0, x2);
  const double y = y0 + d0 * (x - x0) + curv * (x - x0) * (x - x1);
  return {x, y};
}

/// Continuous M-image of a profile's diagram.
class ImageSource final : public ProfileSource {
 public:
  ImageSource(Moebius M, std::shared_ptr<const RoCProfile> p) : M_(M), p_(std::move(p)) {}
  double lower() const override { return p_->source() ? p_->source()->lower() : p_->grid()[0]; }
  double upper() const override {
    return p_->source() ? p_->source()->upper() : p_->grid()[p_->size() - 1];
  }
  RoCPoint at(double theta) const override { return apply_roc(M_, p_->at(theta)); }

 private:
  Moebius M_;
  std::shared_ptr<const RoCProfile> p_;
};

}  // namespace

RoCPoint apply_roc(const Moebius& M, const RoCPoint& p) { return {M(p.r1), M(p.r2)}; }

std::pair<ExtReal, ExtReal> apply_curvature(const Moebius& M, const std::pair<ExtReal, ExtReal>& k) {
  auto map = [&M](ExtReal x) { return fractional_linear(M.d(), M.c(), M.b(), M.a(), x); };
  return {map(k.first), map(k.second)};
}

Reparameterization reparameterize(const Moebius& M, const RoCProfile& p, std::optional<Calibration> cal,
                                  const ReparamOptions& options) {
  const Eigen::Index n = p.size();
  const Column& t = p.grid();
  if (n < 3) throw Error(ErrorKind::Precondition, "profile too short to reparameterize");
  if (!p.r1().isFinite().all()) throw Error(ErrorKind::Domain, "r1 must be finite on the grid");
  const double c = M.c(), d = M.d();
  Column base = t.sin() * (c * p.r1() + d);
  const double scale = std::max(1.0, p.r1().abs().maxCoeff());
  if ((c * p.r1() + d).abs().maxCoeff() <= 1e-12 * scale)
    throw Error(ErrorKind::Degenerate, "r1 is identically -d/c: the image is a plane");

  Eigen::Index imax;
  base.abs().maxCoeff(&imax);
  double peak_x = t[imax], peak_y = base[imax];
  if (imax > 0 && imax + 1 < n) {
    std::tie(peak_x, peak_y) =
        parabolic_peak(t[imax - 1], base[imax - 1], t[imax], base[imax], t[imax + 1], base[imax + 1]);
  }
  if (std::abs(peak_x - kPi / 2) < 4 * (t[std::min(imax + 1, n - 1)] - t[std::max<Eigen::Index>(imax - 1, 0)])) {
    // The extremum of sin(theta)(c r1 + d) sits at pi/2 unless c r2 + d vanishes.
    if (p.continuous_at(kPi / 2)) {
      const RoCPoint mid = p.at(kPi / 2);
      if (mid.r1.is_finite()) {
        peak_x = kPi / 2;
        peak_y = c * mid.r1.value() + d;
      }
    }
  }

  Reparameterization rp;
  rp.calibration = cal ? *cal : Calibration((peak_y >= 0 ? 1.0 : -1.0) / std::abs(peak_y));
  const double A = rp.calibration.value();
  rp.rhs = A * base;
  const bool interior_peak = peak_x > t[0] && peak_x < t[n - 1];
  const bool saturated = interior_peak && std::abs(A * peak_y - 1) <= 1e-8;
  if (saturated) rp.saturation = peak_x;

  rp.theta_tilde = Column::Constant(n, kNaN);
  rp.admissible.assign(n, false);
  Column cos_tilde = Column::Constant(n, kNaN);
  if (saturated) {
    // D = g(theta*) - g(theta) accumulated from g' = A cos(u)(c r2 + d) without cancellation.
    auto gprime = [&](double u) {
      const RoCPoint pt = p.at(u);
      return A * std::cos(u) * (c * pt.r2.value() + d);
    };
    Column D(n);
    const Eigen::Index k = std::upper_bound(t.data(), t.data() + n, peak_x) - t.data();
    if (k > 0) {
      D[k - 1] = gl8()(gprime, t[k - 1], peak_x);
      for (Eigen::Index i = k - 2; i >= 0; --i) D[i] = D[i + 1] + gl8()(gprime, t[i], t[i + 1]);
    }
    if (k < n) {
      D[k] = -gl8()(gprime, peak_x, t[k]);
      for (Eigen::Index i = k + 1; i < n; ++i) D[i] = D[i - 1] - gl8()(gprime, t[i - 1], t[i]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double Di = std::max(0.0, D[i]);
      cos_tilde[i] = (t[i] <= peak_x ? 1.0 : -1.0) * std::sqrt(std::max(0.0, Di * (2 - Di)));
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = rp.rhs[i];
    if (!(g >= 0) || g > 1 + 1e-12) continue;
    double tt;
    if (saturated) {
      tt = std::atan2(std::min(g, 1.0), cos_tilde[i]);
    } else {
      tt = t[i] <= kPi / 2 ? std::asin(std::min(g, 1.0)) : kPi - std::asin(std::min(g, 1.0));
    }
    if (options.reversed) tt = kPi - tt;
    rp.theta_tilde[i] = tt;
    rp.admissible[i] = true;
  }
  if (!saturated) {
    // Without saturation the two arcsine pieces do not join: keep the larger side.
    Eigen::Index left = 0, right = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (rp.admissible[i]) (t[i] <= kPi / 2 ? left : right)++;
    if (left > 0 && right > 0) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((t[i] <= kPi / 2) != (left >= right)) {
          rp.admissible[i] = false;
          rp.theta_tilde[i] = kNaN;
        }
      }
    }
  }

  // Longest run of admissible samples with strictly monotone theta~.
  Eigen::Index best_first = 0, best_len = 0;
  Eigen::Index i = 0;
  while (i < n) {
    if (!rp.admissible[i]) {
      ++i;
      continue;
    }
    Eigen::Index j = i + 1;
    int dir = 0;
    while (j < n && rp.admissible[j]) {
      const double step = rp.theta_tilde[j] - rp.theta_tilde[j - 1];
      const int s = step > 0 ? 1 : (step < 0 ? -1 : 0);
      if (s == 0 || (dir != 0 && s != dir)) break;
      dir = s;
      ++j;
    }
    if (j - i > best_len) {
      best_len = j - i;
      best_first = i;
    }
    i = j;
  }
  if (best_len == 0) throw Error(ErrorKind::EmptyDomain, "no admissible samples for the reparameterization");
  rp.first = best_first;
  rp.last = best_first + best_len - 1;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k < rp.first || k > rp.last) {
      rp.admissible[k] = false;
      rp.theta_tilde[k] = kNaN;
    }
  }
  return rp;
}

InducedSurface induced_surface(const Moebius& M, const RoCProfile& p, const ProfileCurve3D& curve,
                               std::optional<Calibration> cal, const ReparamOptions& options) {
  if (curve.grid.size() != p.size()) throw Error(ErrorKind::Precondition, "curve and profile grids differ");
  const double a = M.a(), b = M.b(), c = M.c(), d = M.d();
  InducedSurface out;
  const Column& t = p.grid();
  const Eigen::Index n = p.size();

  const double scale = std::max(1.0, p.r1().isFinite().select(p.r1().abs(), 0.0).maxCoeff());
  if (p.r1().isFinite().all() && (c * p.r1() + d).abs().maxCoeff() <= 1e-12 * scale) {
    out.kind = ImageKind::Plane;
    return out;
  }
  if (p.r2().isFinite().all() && (c * p.r2() + d).abs().maxCoeff() <= 1e-12 * scale) {
    out.kind = ImageKind::Cone;
    const double A = cal ? cal->value() : 1.0;
    const double g = A * std::sin(t[n / 2]) * (c * p.r1()[n / 2] + d);
    out.cone_angle = std::asin(std::clamp(g, -1.0, 1.0));
    return out;
  }

  out.reparam = reparameterize(M, p, cal, options);
  const Reparameterization& rp = out.reparam;
  const double A = rp.calibration.value();
  const Eigen::Index m = rp.last - rp.first + 1;
  if (m < 2) throw Error(ErrorKind::EmptyDomain, "admissible sub-domain has fewer than two samples");

  auto g_at = [&](double u) { return A * std::sin(u) * (c * p.at(u).r1.value() + d); };
  auto gprime = [&](double u) { return A * std::cos(u) * (c * p.at(u).r2.value() + d); };
  const bool centered = rp.saturation && *rp.saturation == kPi / 2;
  const double theta_star = rp.saturation.value_or(kNaN);

  // cos(theta) / cos(theta~) at u, using D relative to the tabulated sample i.
  Column D = Column::Constant(n, kNaN);
  if (rp.saturation) {
    for (Eigen::Index i = rp.first; i <= rp.last; ++i) {
      const double tt = rp.theta_tilde[i];
      const double s = options.reversed ? std::sin(kPi - tt) : std::sin(tt);
      D[i] = 1 - s;
    }
    // Recompute D without cancellation near the saturation angle.
    for (Eigen::Index i = rp.first; i <= rp.last; ++i)
      if (D[i] < 0.05) D[i] = t[i] <= theta_star ? gl8()(gprime, t[i], theta_star) : -gl8()(gprime, theta_star, t[i]);
  }
  auto raw_ratio = [&](double u, Eigen::Index i) {
    double ct;
    if (rp.saturation) {
      const double Du = D[i] - gl8()(gprime, t[i], u);
      ct = (u <= theta_star ? 1.0 : -1.0) * std::sqrt(std::max(0.0, Du * (2 - Du)));
    } else {
      const double g = g_at(u);
      ct = (u <= kPi / 2 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, 1 - g * g));
    }
    if (options.reversed) ct = -ct;
    return std::cos(u) / ct;
  };
  double patch_center = 0, patch_slope = 0;
  if (centered) {
    const RoCPoint mid = p.at(kPi / 2);
    const double lim = 1 / std::sqrt(std::abs(A * (c * mid.r2.value() + d)));
    const double sign = options.reversed ? -1.0 : 1.0;
    patch_center = sign * lim;
    const Eigen::Index k = std::upper_bound(t.data(), t.data() + n, kPi / 2) - t.data();
    const double lo = kPi / 2 - kPatchHalfWidth, hi = kPi / 2 + kPatchHalfWidth;
    if (k > 0 && k < n && lo >= t[rp.first] && hi <= t[rp.last]) {
      const Eigen::Index il = std::upper_bound(t.data(), t.data() + n, lo) - t.data() - 1;
      const Eigen::Index ih = std::upper_bound(t.data(), t.data() + n, hi) - t.data() - 1;
      patch_slope = (raw_ratio(hi, ih) - raw_ratio(lo, il)) / (2 * kPatchHalfWidth);
    }
  }
  auto ratio = [&](double u, Eigen::Index i) {
    if (centered && std::abs(u - kPi / 2) < kPatchHalfWidth) return patch_center + patch_slope * (u - kPi / 2);
    return raw_ratio(u, i);
  };
  auto dh = [&](double u, Eigen::Index i) {
    const double r2 = p.at(u).r2.value();
    return -A * (a * r2 + b) * g_at(u) * ratio(u, i);
  };

  Column tt(m), r1(m), r2(m), rho(m), h(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = rp.first + k;
    tt[k] = rp.theta_tilde[i];
    r1[k] = M(p.point(i).r1).raw();
    r2[k] = M(p.point(i).r2).raw();
    rho[k] = A * (a * curve.rho[i] + b * std::sin(t[i]));
    if (k == 0) {
      h[k] = A * (a * curve.h[i] + b * std::cos(t[i]));
    } else {
      const double lo = t[i - 1], hi = t[i];
      auto f = [&](double u) { return dh(u, i - 1); };
      h[k] = h[k - 1] + gl8()(f, lo, hi);
    }
  }
  if (tt[m - 1] < tt[0]) {
    tt.reverseInPlace();
    r1.reverseInPlace();
    r2.reverseInPlace();
    rho.reverseInPlace();
    h.reverseInPlace();
  }
  PoleValues poles;
  for (Pole side : {Pole::North, Pole::South}) {
    const auto r0 = p.poles().at(side);
    if (!r0) continue;
    const double src_edge = side == Pole::North ? t[0] : t[n - 1];
    const Eigen::Index idx = side == Pole::North ? rp.first : rp.last;
    if (std::abs(t[idx] - src_edge) > 0 || std::min(src_edge, kPi - src_edge) > 1e-4) continue;
    const double img = rp.theta_tilde[idx];
    const ExtReal mapped = M(*r0);
    (img < kPi / 2 ? poles.north : poles.south) = mapped;
  }
  out.profile.emplace(tt, r1, r2, poles, p.tolerance());
  out.profile->metadata = p.metadata;
  out.profile->metadata["calibration"] = to_string(ExtReal(A));
  out.curve = {tt, rho, h};
  return out;
}

ReciprocalImage reciprocal_transform_closed(const RoCProfile& p, const ProfileCurve3D& curve) {
  const auto north = p.poles().north, south = p.poles().south;
  const Column& t = p.grid();
  if (!north || !south || north->is_infinite() || south->is_infinite() || t[0] > 1e-3 ||
      t[p.size() - 1] < kPi - 1e-3)
    throw Error(ErrorKind::Precondition, "reciprocal transform needs a closed surface with finite pole radii");
  if (!p.r1().isFinite().all() || !p.r2().isFinite().all())
    throw Error(ErrorKind::Precondition, "reciprocal transform needs finite radii");
  const bool positive = (p.r1() > 0).all() && (p.r2() > 0).all();
  const bool negative = (p.r1() < 0).all() && (p.r2() < 0).all();
  if (!positive && !negative) throw Error(ErrorKind::Precondition, "surface is not strictly convex");
  const double rho_mid = p.at(kPi / 2).r1.value();
  ReciprocalImage out;
  out.surface = induced_surface(Moebius::reciprocal(), p, curve, Calibration(1 / rho_mid));
  const ProfileCurve3D& c = out.surface.curve;
  out.rho_north = std::abs(c.rho[0]);
  out.rho_south = std::abs(c.rho[c.rho.size() - 1]);
  return out;
}

Moebius Factor::matrix() const {
  switch (kind) {
    case Kind::Translation: return Moebius::translation(parameter);
    case Kind::Homothety: return Moebius::homothety(parameter);
    case Kind::Reciprocal: return Moebius::reciprocal();
  }
  return {};
}

std::string Factor::label() const {
  switch (kind) {
    case Kind::Translation: return "N(" + to_string(ExtReal(parameter)) + ")";
    case Kind::Homothety: return "A(" + to_string(ExtReal(parameter)) + ")";
    case Kind::Reciprocal: return "Q";
  }
  return "?";
}

FactorList decompose(const Moebius& M) {
  using K = Factor::Kind;
  const double a = M.a(), b = M.b(), c = M.c(), d = M.d();
  if (c == 0) return {{K::Translation, a * b}, {K::Homothety, a}};
  return {{K::Translation, a / c}, {K::Homothety, 1 / c}, {K::Reciprocal, 0}, {K::Translation, d / c}};
}

Moebius compose(const FactorList& factors) {
  Moebius::Matrix m = Moebius::Matrix::Identity();
  for (const Factor& f : factors) m = m * f.matrix().matrix();
  return Moebius(m);
}

SemiQuadratic transform_coefficients(const Moebius& M, const SemiQuadratic& q) {
  const double a = M.a(), b = M.b(), c = M.c(), d = M.d();
  const double s = q.beta + q.gamma;
  SemiQuadratic out{q.alpha * a * a - s * a * b + q.delta * b * b,
                    -q.alpha * a * c + q.beta * a * d + q.gamma * b * c - q.delta * b * d,
                    -q.alpha * a * c + q.beta * b * c + q.gamma * a * d - q.delta * b * d,
                    q.alpha * c * c - s * c * d + q.delta * d * d};
  if (out.alpha == 0 && out.beta == 0 && out.gamma == 0 && out.delta == 0)
    throw Error(ErrorKind::Degenerate, "image relation has all-zero coefficients");
  return out;
}

WeingartenRelation transform_relation(const Moebius& M, const WeingartenRelation& rel) {
  if (const auto* q = std::get_if<SemiQuadratic>(&rel)) return transform_coefficients(M, *q);
  if (auto q = k_coefficients(rel)) return canonical_from_coefficients(transform_coefficients(M, *q));

  using K = Expr::Kind;
  ExprPtr F;
  if (const auto* cubic = std::get_if<CubicRoC>(&rel)) {
    F = Expr::binary(K::Mul, Expr::num(cubic->gamma * cubic->gamma),
                     Expr::binary(K::Pow, Expr::variable(Var::R1), Expr::num(3.0)));
  } else {
    F = std::get<ExplicitF>(rel).expr;
  }
  auto affine = [](double p, ExprPtr x, double q) {
    return Expr::binary(K::Add, Expr::binary(K::Mul, Expr::num(p), std::move(x)), Expr::num(q));
  };
  const ExprPtr r1 = Expr::variable(Var::R1);
  const ExprPtr inverse = Expr::binary(K::Div, affine(M.d(), r1, -M.b()), affine(-M.c(), r1, M.a()));
  const ExprPtr inner = substitute(F, Var::R1, inverse);
  return ExplicitF{Expr::binary(K::Div, affine(M.a(), inner, M.b()), affine(M.c(), inner, M.d()))};
}

RoCProfile diagram_image(const Moebius& M, const RoCProfile& p) {
  auto shared = std::make_shared<const RoCProfile>(p);
  auto src = std::make_shared<ImageSource>(M, shared);
  Column r1(p.size()), r2(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const RoCPoint q = apply_roc(M, p.point(i));
    r1[i] = q.r1.raw();
    r2[i] = q.r2.raw();
  }
  PoleValues poles;
  if (p.poles().north) poles.north = M(*p.poles().north);
  if (p.poles().south) poles.south = M(*p.poles().south);
  const bool continuous = p.source() || p.continuous_at(p.grid()[0]);
  return RoCProfile(p.grid(), r1, r2, poles, p.tolerance(), continuous ? src : nullptr);
}

TransformReport verify_transform_properties(const Moebius& M, const RoCProfile& p, const WeingartenRelation& rel,
                                            Pole side, double slope_tolerance) {
  TransformReport rep;
  const WeingartenRelation image_rel = transform_relation(M, rel);
  auto ellipticity = [](const WeingartenRelation& r, double r1) -> int {
    const double fp = eval_F_prime(r, r1);
    if (!std::isfinite(fp) || std::abs(fp) < 1e-12) return 0;
    return fp > 0 ? -1 : 1;
  };
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const RoCPoint src = p.point(i);
    if (src.r1.is_infinite() || src.r2.is_infinite()) continue;
    const RoCPoint img = apply_roc(M, src);
    ++rep.samples;
    const bool u_src = src.is_umbilic(1e-9);
    bool u_img = img.is_umbilic(1e-9);
    if (u_src) ++rep.umbilic_source;
    if (u_img) ++rep.umbilic_image;
    if (u_src != u_img) ++rep.umbilic_mismatches;
    if (img.r1.is_infinite()) continue;
    try {
      const int e_src = ellipticity(rel, src.r1.value());
      const int e_img = ellipticity(image_rel, img.r1.value());
      if (e_src == 0 || e_img == 0) continue;
      ++rep.ellipticity_checked;
      if (e_src != e_img) ++rep.ellipticity_mismatches;
    } catch (const Error&) {
    }
  }

  UmbilicAnalysis before, after;
  try {
    before = umbilic_slope_estimate(p, side);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Degenerate || e.kind() == ErrorKind::Precondition) return rep;
    throw;
  }
  after = umbilic_slope_estimate(diagram_image(M, p), side);
  rep.slope_checked = true;
  rep.slope = before.curvature_slope;
  rep.slope_image = after.curvature_slope;
  rep.distance_same = std::abs(rep.slope_image - rep.slope);
  rep.distance_reciprocal = std::abs(rep.slope_image - 1 / rep.slope);
  rep.slope_match = rep.distance_same <= rep.distance_reciprocal ? "same" : "reciprocal";
  rep.slope_ok = std::min(rep.distance_same, rep.distance_reciprocal) <= slope_tolerance;
  return rep;
}

AdsInvariants ads_invariants(const RoCProfile& p) {
  const Eigen::Index n = p.size();
  const Column& t = p.grid();
  const Column dr2 = run_derivative(t, p.r2());
  std::vector<double> th, l1, l2, l3;
  Column psi_d(n), s_d(n);
  double norm_max = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    psi_d[i] = (p.dr1_sample(i) + dr2[i]) / 2;
    s_d[i] = (dr2[i] - p.dr1_sample(i)) / 2;
    const double q = std::abs(psi_d[i] * psi_d[i] - s_d[i] * s_d[i]);
    if (std::isfinite(q)) norm_max = std::max(norm_max, q);
  }
  AdsInvariants out;
  double prev_vp = 0, prev_vs = 0;
  bool have_prev = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r1 = p.r1()[i], r2 = p.r2()[i];
    const double pd = psi_d[i], sd = s_d[i];
    if (!std::isfinite(r1) || !std::isfinite(r2) || !std::isfinite(pd) || !std::isfinite(sd) ||
        std::min(t[i], kPi - t[i]) <= kPoleEpsilon) {
      ++out.skipped;
      continue;
    }
    const double psi = (r1 + r2) / 2, s = (r2 - r1) / 2;
    const double null = std::abs(pd * pd - sd * sd);
    if (std::abs(s) <= 1e-14 * std::max(1.0, std::abs(psi)) || null <= 1e-10 * norm_max) {
      ++out.skipped;
      continue;
    }
    const double speed = std::sqrt(null) / std::abs(s);
    double vp = pd / speed, vs = sd / speed;
    if (have_prev && vp * prev_vp + vs * prev_vs < 0) {
      vp = -vp;
      vs = -vs;
    }
    prev_vp = vp;
    prev_vs = vs;
    have_prev = true;
    th.push_back(t[i]);
    l1.push_back((psi * psi + s * s) / (s * s) * vp - 2 * psi / s * vs);
    l2.push_back(psi / (s * s) * vp - vs / s);
    l3.push_back(vp / (s * s));
  }
  auto column = [](const std::vector<double>& v) {
    return Column(Eigen::Map<const Column>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  out.theta = column(th);
  out.lambda1 = column(l1);
  out.lambda2 = column(l2);
  out.lambda3 = column(l3);
  if (th.empty()) return out;
  const double scale = std::max({out.lambda1.abs().mean(), out.lambda2.abs().mean(), out.lambda3.abs().mean(),
                                 std::numeric_limits<double>::min()});
  auto spread = [scale](const Column& c) { return (c.maxCoeff() - c.minCoeff()) / scale; };
  out.drift1 = spread(out.lambda1);
  out.drift2 = spread(out.lambda2);
  out.drift3 = spread(out.lambda3);
  return out;
}

}  // namespace wg
