#include "weingarten/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "weingarten/error.hpp"
#include "weingarten/numerics/quadrature.hpp"
#include "weingarten/numerics/rk45.hpp"

namespace wg {
namespace {

using numerics::OdeStop;
using numerics::OdeTrack;
constexpr double kPi = std::numbers::pi;

/// Dense output of the two half-solves, with r2 = F(r1) attached.
class OdeProfileSource final : public ProfileSource {
 public:
  OdeProfileSource(WeingartenRelation rel, OdeTrack<double> down, OdeTrack<double> up)
      : rel_(std::move(rel)), down_(std::move(down)), up_(std::move(up)) {}
  double lower() const override { return down_.t.size() > 1 ? down_.t.back() : up_.t.front(); }
  double upper() const override { return up_.t.size() > 1 ? up_.t.back() : down_.t.front(); }
  RoCPoint at(double theta) const override {
    const double r1 = (up_.t.size() > 1 && up_.covers(theta)) ? up_(theta) : down_(theta);
    return {ExtReal(r1), eval_F(rel_, ExtReal(r1))};
  }

 private:
  WeingartenRelation rel_;
  OdeTrack<double> down_, up_;
};

double pole_distance(double theta) { return std::min(theta, kPi - theta); }

/// Limit of r1 at the end of a half-solve that reached the pole margin.
ExtReal pole_limit(const WeingartenRelation& rel, const OdeTrack<double>& track) {
  const double t_end = track.t.back(), r_end = track.y.back();
  const double d_end = pole_distance(t_end);
  const double t_far = t_end + (track.t.front() > t_end ? 1 : -1) * 3 * d_end;
  if (track.covers(t_far)) {
    const double r_far = track(t_far);
    if (r_far != 0 && r_end != 0) {
      const double exponent = std::log(std::abs(r_end / r_far)) /
                              std::log(std::sin(pole_distance(t_end)) / std::sin(pole_distance(t_far)));
      if (exponent < -0.05) return ExtReal::infinity();
    }
  }
  const double w = 1e-3 * (1 + std::abs(r_end));
  std::vector<double> fps;
  try {
    fps = fixed_points(rel, r_end - w, r_end + w);
  } catch (const Error&) {
  }
  if (!fps.empty()) {
    return *std::min_element(fps.begin(), fps.end(), [r_end](double a, double b) {
      return std::abs(a - r_end) < std::abs(b - r_end);
    });
  }
  std::vector<double> q, d;
  for (int k = 10; k >= 0; --k) {
    const double dk = d_end * std::ldexp(1.0, k);
    const double tk = t_end < kPi / 2 ? dk : kPi - dk;
    if (!track.covers(tk)) continue;
    q.push_back(track(tk));
    d.push_back(dk);
  }
  if (q.size() < 3) return r_end;
  return numerics::extrapolate_limit(q, d).value;
}

struct HalfSolve {
  OdeTrack<double> track;
  SideReport report;
};

HalfSolve half_solve(const WeingartenRelation& rel, double theta0, double r1_0, double end, const StepControl& c) {
  auto rhs = [&rel](double t, double r1) { return (F_value(rel, r1) - r1) * std::cos(t) / std::sin(t); };
  std::vector<double> stops;
  if (end != theta0) {
    const Column g = uniform_grid(std::min(theta0, end), std::max(theta0, end), c.max_spacing);
    stops.assign(g.data(), g.data() + g.size());
    if (end < theta0) std::reverse(stops.begin(), stops.end());
    stops.erase(stops.begin());
  }
  numerics::OdeOptions<double> opt;
  opt.rtol = c.rtol;
  opt.atol = c.atol;
  opt.blow_up = c.blow_up;
  HalfSolve out;
  out.track = numerics::dormand_prince(rhs, theta0, r1_0, stops, opt);
  out.report.theta_end = out.track.t.back();
  out.report.detail = out.track.detail;
  switch (out.track.stop) {
    case OdeStop::Reached:
      out.report.stop = pole_distance(end) <= 2 * c.pole_epsilon ? StopReason::Pole : StopReason::Reached;
      break;
    case OdeStop::BlowUp: out.report.stop = StopReason::BlowUp; break;
    case OdeStop::DomainExit: out.report.stop = StopReason::DomainExit; break;
    case OdeStop::StepUnderflow:
      if (std::abs(out.track.y.back()) > 1e6) {
        out.report.stop = StopReason::BlowUp;
        break;
      }
      // Approaching a vertical asymptote of F: r1 stays finite while r2 and the slope diverge.
      const double r1 = out.track.y.back();
      if (const ExtReal f = eval_F(rel, ExtReal(r1)); f.is_infinite() || std::abs(f.value() - r1) > 1e6 * (1 + std::abs(r1))) {
        out.report.stop = StopReason::BlowUp;
        out.report.detail = "r2 = F(r1) diverges";
        break;
      }
      throw Error(ErrorKind::Integration, "step size underflow at theta = " + std::to_string(out.report.theta_end));
  }
  return out;
}

}  // namespace

std::string to_string(StopReason s) {
  switch (s) {
    case StopReason::Reached: return "reached";
    case StopReason::Pole: return "pole";
    case StopReason::BlowUp: return "blow-up";
    case StopReason::DomainExit: return "domain-exit";
  }
  return "unknown";
}

Integration integrate_cm(const WeingartenRelation& rel, double theta0, double r1_0, double lo, double hi,
                         const StepControl& control) {
  const double eps = control.pole_epsilon;
  lo = std::max(lo, eps);
  hi = std::min(hi, kPi - eps);
  if (!(lo < hi)) throw Error(ErrorKind::EmptyDomain, "integration interval is empty after pole clipping");
  if (!std::isfinite(r1_0)) throw Error(ErrorKind::Precondition, "initial r1 must be finite");

  PoleValues poles;
  double start = theta0, r_start = r1_0;
  const bool north_start = theta0 <= 0, south_start = theta0 >= kPi;
  if (north_start || south_start) {
    const ExtReal f0 = eval_F(rel, ExtReal(r1_0));
    if (f0.is_infinite() || std::abs(f0.value() - r1_0) > 1e-10 * (1 + std::abs(r1_0)))
      throw Error(ErrorKind::Precondition, "a pole start needs an umbilic radius, F(r1) = r1");
    const double mu = eval_F_prime(rel, r1_0);
    start = north_start ? eps : kPi - eps;
    r_start = r1_0 + control.pole_seed * std::pow(std::sin(eps), mu - 1);
    (north_start ? poles.north : poles.south) = ExtReal(r1_0);
  } else if (theta0 < lo || theta0 > hi) {
    throw Error(ErrorKind::Precondition, "theta0 must lie inside the integration interval");
  }
  if (north_start) lo = start;
  if (south_start) hi = start;

  HalfSolve down = half_solve(rel, start, r_start, lo, control);
  HalfSolve up = half_solve(rel, start, r_start, hi, control);
  if (north_start) {
    down.report.stop = StopReason::Pole;
    down.report.theta_end = 0;
  }
  if (south_start) {
    up.report.stop = StopReason::Pole;
    up.report.theta_end = kPi;
  }
  if (down.report.stop == StopReason::Pole && !north_start) poles.north = pole_limit(rel, down.track);
  if (up.report.stop == StopReason::Pole && !south_start) poles.south = pole_limit(rel, up.track);

  const double a = down.track.t.back(), b = up.track.t.back();
  auto span_grid = [&control](double x0, double x1) {
    return x1 > x0 ? uniform_grid(x0, x1, control.max_spacing) : Column::Constant(1, x0);
  };
  const Column full = span_grid(lo, start);
  std::vector<double> grid;
  for (Eigen::Index i = 0; i < full.size(); ++i)
    if (full[i] >= a) grid.push_back(full[i]);
  const Column upper_part = span_grid(start, hi);
  for (Eigen::Index i = 1; i < upper_part.size(); ++i)
    if (upper_part[i] <= b) grid.push_back(upper_part[i]);

  const std::size_t steps = down.track.t.size() + up.track.t.size() - 2;
  auto source = std::make_shared<OdeProfileSource>(rel, std::move(down.track), std::move(up.track));
  const Column g = Eigen::Map<const Column>(grid.data(), static_cast<Eigen::Index>(grid.size()));
  RoCProfile profile = RoCProfile::sample(source, g, poles, 1e-8);
  profile.metadata["relation"] = render(rel);
  profile.metadata["theta0"] = to_string(ExtReal(theta0));
  profile.metadata["r1_0"] = to_string(ExtReal(r1_0));
  profile.metadata["stop_lower"] = to_string(down.report.stop);
  profile.metadata["stop_upper"] = to_string(up.report.stop);
  Integration out{std::move(profile), down.report, up.report, theta0, r1_0, steps, 0.0, {}};
  const Column& og = out.profile.grid();
  const double margin = kBlowUpMargin * control.max_spacing;
  double w_lo = og[0], w_hi = og[og.size() - 1];
  if (down.report.stop == StopReason::BlowUp) w_lo = std::min(w_lo + margin, start);
  if (up.report.stop == StopReason::BlowUp) w_hi = std::max(w_hi - margin, start);
  out.residual_window = {w_lo, w_hi};
  out.residual_max = cm_residual_sup(out.profile, w_lo, w_hi);
  return out;
}

HopfPoint hopf_closed_form(double lambda, double C, double A0, double theta,
                           std::optional<std::pair<double, double>> anchor) {
  if (lambda == 1.0) throw Error(ErrorKind::Degenerate, "the closed form degenerates for lambda = 1");
  if (!(theta > 0 && theta < kPi)) throw Error(ErrorKind::Singular, "closed form needs an interior angle");
  auto r1_at = [&](double t) { return (C + A0 * std::pow(std::sin(t), lambda - 1)) / (1 - lambda); };
  const double theta1 = anchor ? anchor->first : kPi / 3;
  const double r_theta1 = anchor ? anchor->second : r1_at(theta1);
  if (std::abs(std::cos(theta1)) < 1e-12) throw Error(ErrorKind::Precondition, "support anchor at theta = pi/2");
  double integral = 0;
  if (A0 != 0) {
    numerics::QuadratureTolerance<double> tol{1e-14, 1e-13, 48};
    auto integrand = [lambda](double u) { return std::pow(std::sin(u), lambda - 2); };
    integral = numerics::integrate(integrand, theta1, theta, tol);
  }
  const double G = A0 * integral + (r_theta1 - r1_at(theta1)) / std::cos(theta1);
  const double s = std::sin(theta), c = std::cos(theta);
  const double r1 = r1_at(theta);
  return {r1, r1 + c * G, -s * G, -c * G - A0 * std::pow(s, lambda - 1)};
}

RoCProfile hopf_profile(double lambda, double C, double A0, const Column& grid) {
  if (lambda == 1.0) throw Error(ErrorKind::Degenerate, "the closed form degenerates for lambda = 1");
  auto r1 = [=](double t) { return (C + A0 * std::pow(std::sin(t), lambda - 1)) / (1 - lambda); };
  auto r2 = [=](double t) { return lambda * r1(t) + C; };
  auto dr1 = [=](double t) { return -A0 * std::pow(std::sin(t), lambda - 2) * std::cos(t); };
  PoleValues poles;
  const ExtReal limit = (lambda > 1 || A0 == 0) ? ExtReal(C / (1 - lambda)) : ExtReal::infinity();
  poles.north = poles.south = limit;
  auto src = std::make_shared<AnalyticProfile>(r1, r2, dr1, 0.0, kPi);
  RoCProfile p = RoCProfile::sample(src, grid, poles, 1e-12);
  p.metadata["relation"] = render(LinearHopf{lambda, C});
  return p;
}

InteriorUmbilics interior_umbilics(const RoCProfile& p) {
  InteriorUmbilics out;
  const Column& t = p.grid();
  std::vector<double> s;
  std::vector<double> th;
  double scale = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p.r1()[i]) || !std::isfinite(p.r2()[i])) continue;
    if (pole_distance(t[i]) <= kPoleEpsilon) continue;
    s.push_back(p.r2()[i] - p.r1()[i]);
    th.push_back(t[i]);
    scale = std::max({scale, std::abs(p.r1()[i]), std::abs(p.r2()[i])});
  }
  const double touch = 1e-9 * std::max(scale, 1.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    if ((s[i - 1] > 0 && s[i] < 0) || (s[i - 1] < 0 && s[i] > 0)) {
      out.crossings.push_back(th[i - 1] + (th[i] - th[i - 1]) * s[i - 1] / (s[i - 1] - s[i]));
    } else if (s[i] == 0 && i + 1 < s.size() && s[i - 1] * s[i + 1] < 0) {
      // The crossing sits exactly on a sample.
      out.crossings.push_back(th[i]);
    } else if (i + 1 < s.size() && std::abs(s[i]) <= touch && std::abs(s[i]) <= std::abs(s[i - 1]) &&
               std::abs(s[i]) <= std::abs(s[i + 1]) && (s[i - 1] > 0) == (s[i + 1] > 0) &&
               std::abs(s[i - 1]) > touch) {
      out.rings.push_back(th[i]);
    }
  }
  return out;
}

namespace {

struct LadderPoint {
  double d, r1, r2;
};

std::vector<LadderPoint> ladder(const RoCProfile& p, Pole side, const LadderOptions& o) {
  std::vector<LadderPoint> pts;
  for (int k = 0; k <= o.levels; ++k) {
    const double d = o.theta_ref * std::ldexp(1.0, -k);
    const double theta = side == Pole::North ? d : kPi - d;
    if (!p.continuous_at(theta)) {
      if (pts.empty()) continue;
      break;
    }
    const RoCPoint pt = p.at(theta);
    if (pt.r1.is_infinite() || pt.r2.is_infinite()) break;
    pts.push_back({d, pt.r1.value(), pt.r2.value()});
  }
  return pts;
}

double floor_of(const RoCProfile& p, const LadderOptions& o) {
  return std::isnan(o.noise_floor) ? 100 * p.tolerance() : o.noise_floor;
}

ExtReal require_pole(const RoCProfile& p, Pole side) {
  const auto r0 = p.poles().at(side);
  if (!r0) throw Error(ErrorKind::Precondition, "profile carries no limit at this pole");
  return *r0;
}

}  // namespace

VanishingRate vanishing_rate_estimate(const RoCProfile& p, double alpha, Pole side, const LadderOptions& o) {
  const ExtReal r0 = require_pole(p, side);
  const double floor = floor_of(p, o) * (r0.is_finite() ? std::max(1.0, std::abs(r0.value())) : 1.0);
  std::vector<double> q, d;
  for (const auto& pt : ladder(p, side, o)) {
    const double s = pt.r2 - pt.r1;
    if (r0.is_finite() && std::abs(pt.r1 - r0.value()) < floor && !q.empty()) break;
    q.push_back(s / std::pow(std::sin(pt.d), alpha));
    d.push_back(pt.d);
  }
  VanishingRate out;
  if (q.empty()) throw Error(ErrorKind::Domain, "no ladder samples near the pole");
  bool all_zero = std::all_of(q.begin(), q.end(), [](double v) { return v == 0; });
  if (all_zero) {
    out.growth = numerics::Growth::Zero;
    return out;
  }
  out.growth = numerics::classify_growth(q, d);
  if (out.growth == numerics::Growth::Zero) {
    out.value = 0;
    out.ci = std::abs(q.back());
  } else if (out.growth == numerics::Growth::Divergent) {
    out.value = std::copysign(std::numeric_limits<double>::infinity(), q.back());
    out.ci = 0;
  } else {
    const auto est = numerics::extrapolate_limit(q, d);
    out.value = est.value;
    out.ci = est.ci;
  }
  return out;
}

UmbilicAnalysis umbilic_slope_estimate(const RoCProfile& p, Pole side, const LadderOptions& o) {
  UmbilicAnalysis out;
  out.side = side;
  out.r0 = require_pole(p, side);
  const std::vector<LadderPoint> pts = ladder(p, side, o);
  if (pts.size() < 3) throw Error(ErrorKind::Domain, "too few ladder samples near the pole");

  const bool tail_umbilic = std::all_of(pts.begin(), pts.end(), [](const LadderPoint& pt) {
    return std::abs(pt.r2 - pt.r1) <= 1e-12 * std::max({1.0, std::abs(pt.r1), std::abs(pt.r2)});
  });
  if (tail_umbilic) throw Error(ErrorKind::Degenerate, "totally umbilic tail: the umbilic slope is undefined");

  const InteriorUmbilics interior = interior_umbilics(p);
  out.off_axis_umbilics = interior.crossings;
  out.umbilic_rings = interior.rings;
  if (!interior.crossings.empty()) {
    out.unbounded = true;
    out.slope_estimate = std::numeric_limits<double>::infinity();
    out.slope_ci = 0;
    return out;
  }

  const double floor = floor_of(p, o) * (out.r0.is_finite() ? std::max(1.0, std::abs(out.r0.value())) : 1.0);
  std::vector<double> q, d, a, da;
  double prev_ln_s = 0, prev_ln_x = 0;
  bool have_prev = false;
  for (const auto& pt : pts) {
    if (out.r0.is_finite()) {
      const double u1 = pt.r1 - out.r0.value(), u2 = pt.r2 - out.r0.value();
      if (std::abs(u1) < floor || u1 == 0) break;
      q.push_back(u2 / u1);
    } else {
      q.push_back(pt.r2 / pt.r1);
    }
    d.push_back(pt.d);
    const double s = std::abs(pt.r2 - pt.r1);
    if (s > 0) {
      const double ln_s = std::log(s), ln_x = std::log(std::sin(pt.d));
      if (have_prev) {
        a.push_back((ln_s - prev_ln_s) / (ln_x - prev_ln_x));
        da.push_back(pt.d);
      }
      prev_ln_s = ln_s;
      prev_ln_x = ln_x;
      have_prev = true;
    }
  }
  if (q.size() < 2) throw Error(ErrorKind::Domain, "pole approach is below the noise floor");
  const auto slope = numerics::extrapolate_limit(q, d);
  out.slope_estimate = slope.value;
  out.slope_ci = slope.ci;
  out.model = slope.model;
  out.levels_used = static_cast<int>(q.size());
  const bool reciprocal = out.r0.is_infinite() || out.r0.value() == 0;
  out.curvature_slope = reciprocal ? 1.0 / out.slope_estimate : out.slope_estimate;

  if (!a.empty()) {
    const auto alpha = numerics::extrapolate_limit(a, da);
    out.vanishing_exponent = alpha.value;
    out.vanishing_exponent_ci = alpha.ci;
    const VanishingRate rate = vanishing_rate_estimate(p, alpha.value, side, o);
    out.vanishing_coefficient = rate.value;
    out.coefficient_growth = rate.growth;
  }
  return out;
}

SlopeTheoremReport slope_theorem_check(const RoCProfile& p, Pole side, double tolerance, const LadderOptions& o) {
  SlopeTheoremReport rep;
  UmbilicAnalysis ua;
  try {
    ua = umbilic_slope_estimate(p, side, o);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    rep.vacuous = true;
    rep.note = "totally umbilic near the pole";
    return rep;
  }
  if (ua.unbounded) {
    rep.vacuous = true;
    rep.slope = ua.slope_estimate;
    rep.note = "off-axis umbilic: slope unbounded";
    return rep;
  }
  rep.slope = ua.slope_estimate;
  rep.slope_ci = ua.slope_ci;
  rep.alpha = ua.vanishing_exponent;
  rep.gamma = ua.vanishing_coefficient;
  rep.gamma_growth = ua.coefficient_growth;
  const double margin = std::max(ua.slope_ci, tolerance);
  const bool convex_umbilic = ua.r0.is_finite() && ua.r0.value() != 0;
  if (convex_umbilic && rep.slope < 1 - margin) {
    rep.pass = false;
    rep.note = "slope below 1";
  }
  switch (ua.coefficient_growth) {
    case numerics::Growth::Finite:
      if (std::abs(rep.slope - (rep.alpha + 1)) > margin + ua.vanishing_exponent_ci) {
        rep.pass = false;
        rep.note += rep.note.empty() ? "slope differs from alpha + 1" : "; slope differs from alpha + 1";
      }
      break;
    case numerics::Growth::Divergent:
      rep.alpha_lower_bound_only = true;
      break;
    case numerics::Growth::Zero:
      if (rep.slope < rep.alpha + 1 - margin - ua.vanishing_exponent_ci) {
        rep.pass = false;
        rep.note += rep.note.empty() ? "slope below alpha + 1" : "; slope below alpha + 1";
      }
      break;
  }
  return rep;
}

RoCProfile vanishing_fixture(double alpha, int delta, double r0, const Column& grid) {
  if (!(alpha > 0)) throw Error(ErrorKind::Precondition, "vanishing exponent must be positive");
  if (delta < -1 || delta > 1) throw Error(ErrorKind::Precondition, "log power must be -1, 0 or 1");
  auto gap = [=](double t) {
    const double x = std::sin(t);
    if (x <= 0) return 0.0;
    return std::pow(x, alpha) * std::pow(std::log(2 / x), delta);
  };
  auto r1 = [=](double t) {
    const double x = std::sin(t), L = std::log(2 / x);
    if (x <= 0) return r0;
    switch (delta) {
      case 0: return r0 + std::pow(x, alpha) / alpha;
      case 1: return r0 + std::pow(x, alpha) / alpha * (L + 1 / alpha);
      default: return r0 - std::pow(2.0, alpha) * std::expint(-alpha * L);
    }
  };
  auto r2 = [=](double t) { return r1(t) + gap(t); };
  auto dr1 = [=](double t) { return std::sin(t) > 0 ? gap(t) * std::cos(t) / std::sin(t) : 0.0; };
  PoleValues poles;
  poles.north = poles.south = ExtReal(r0);
  auto src = std::make_shared<AnalyticProfile>(r1, r2, dr1, 0.0, kPi);
  RoCProfile p = RoCProfile::sample(src, grid, poles, 1e-14);
  p.metadata["fixture"] = "vanishing alpha=" + to_string(ExtReal(alpha)) + " delta=" + std::to_string(delta);
  return p;
}

}  // namespace wg
