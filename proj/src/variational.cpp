#include "weingarten/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "weingarten/error.hpp"
#include "weingarten/numerics/finite_difference.hpp"
#include "weingarten/numerics/quadrature.hpp"
#include "weingarten/numerics/roots.hpp"

namespace wg {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Rule {
  Column x, w;
};

const Rule& gl_rule(int order) {
  static const Rule r20 = [] {
    auto [x, w] = numerics::gauss_legendre<double>(20);
    return Rule{x, w};
  }();
  static const Rule r32 = [] {
    auto [x, w] = numerics::gauss_legendre<double>(32);
    return Rule{x, w};
  }();
  return order == 32 ? r32 : r20;
}

using Panel = std::pair<double, double>;

/// Panels on [a, b] (a < b) refined toward the singular points until each panel
/// is shorter than `ratio` times its distance to them. With `scale` set, panels
/// are also kept below half the magnitude of their abscissae.
void graded(double a, double b, const std::vector<double>& singular, double ratio, bool scale, int depth,
            std::vector<Panel>& out) {
  double dist = kInf;
  for (double s : singular) {
    if (!std::isfinite(s)) continue;
    dist = std::min(dist, s < a ? a - s : (s > b ? s - b : 0.0));
  }
  const double len = b - a;
  const bool split = len > ratio * dist || (scale && len > 0.5 * (1 + std::min(std::abs(a), std::abs(b))));
  if (depth <= 0 || !split) {
    out.emplace_back(a, b);
    return;
  }
  const double m = a + len / 2;
  graded(a, m, singular, ratio, scale, depth - 1, out);
  graded(m, b, singular, ratio, scale, depth - 1, out);
}

double sum_panels(const std::vector<Panel>& panels, const std::function<double(double)>& f) {
  const Rule& rule = gl_rule(20);
  double total = 0;
  for (const auto& [a, b] : panels) {
    const double half = (b - a) / 2, mid = (a + b) / 2;
    double s = 0;
    for (Eigen::Index i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(mid + half * rule.x[i]);
    total += half * s;
  }
  return total;
}

double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double cot_of(double theta) { return std::cos(theta) / std::sin(theta); }

double tan_checked(double theta) {
  const double c = std::cos(theta);
  if (std::abs(c) < 1e-12) throw Error(ErrorKind::Singular, "tan(theta) is singular at pi/2");
  return std::sin(theta) / c;
}

double partial_h(double x) { return numerics::partial_step(x); }

/// Step for differentiating along theta and for second partials of a
/// Lagrangian value; large enough that cancellation stays near 1e-10.
double outer_h(double x) { return 1e-3 * (1 + std::abs(x)); }

double phi_general(const GeneralTerms& t, const Multiplier& m, double theta, double r, double rdot) {
  const VariationalState s(theta, r, rdot);
  const double I = first_integral_I(m, s);
  const double Q = t.uses_Q ? first_integral_Q(m, s, t.q) : kNaN;
  return t.f(I, Q) * m.phi0(s.r1());
}

struct HopfData {
  double lambda, C;
};

HopfData hopf_data(const Multiplier& m) {
  const WeingartenRelation& rel = m.relation();
  if (const auto* h = std::get_if<LinearHopf>(&rel)) return {h->lambda, h->C};
  if (const auto* p = std::get_if<PureKLinear>(&rel)) return {1 / p->lambda, 0.0};
  if (const auto* c = std::get_if<CubicRoC>(&rel); c && c->gamma == 0) return {0.0, 0.0};
  throw Error(ErrorKind::Precondition, "the Hopf Lagrangian needs a linear Hopf relation");
}

double cubic_gamma(const Multiplier& m) {
  const auto* c = std::get_if<CubicRoC>(&m.relation());
  if (!c || c->gamma == 0) throw Error(ErrorKind::Precondition, "the cubic Lagrangian needs a cubic relation");
  return c->gamma;
}

struct Quadratic {
  double theta, r, rdot, rddot;
  double at(double t) const { return r + rdot * (t - theta) + rddot * (t - theta) * (t - theta) / 2; }
  double slope(double t) const { return rdot + rddot * (t - theta); }
};

}  // namespace

VariationalState::VariationalState(double th, double r_, double rd) : theta(th), r(r_), rdot(rd) {
  if (!(th > 0 && th < kPi)) throw Error(ErrorKind::Precondition, "variational state needs an interior angle");
}

double VariationalState::r1() const { return rdot * cot_of(theta) + r; }

Multiplier::Multiplier(WeingartenRelation rel, double base_point, bool prefer_closed_form)
    : rel_(std::move(rel)), u0_(base_point), lo_(-kInf), hi_(kInf) {
  if (!std::isfinite(u0_)) throw Error(ErrorKind::Precondition, "base point must be finite");
  std::vector<double> ends;
  if (prefer_closed_form) {
    if (const auto* h = std::get_if<LinearHopf>(&rel_)) {
      lambda_ = h->lambda;
      C_ = h->C;
    } else if (const auto* p = std::get_if<PureKLinear>(&rel_)) {
      if (p->lambda == 0) throw Error(ErrorKind::Domain, "k2 = 0 has no finite F");
      lambda_ = 1 / p->lambda;
      C_ = 0;
    } else if (const auto* c = std::get_if<CubicRoC>(&rel_)) {
      gamma_ = c->gamma;
      kind_ = Kind::Cubic;
    } else {
      kind_ = Kind::Numeric;
    }
    if (std::holds_alternative<LinearHopf>(rel_) || std::holds_alternative<PureKLinear>(rel_) ||
        (kind_ == Kind::Cubic && gamma_ == 0)) {
      if (lambda_ == 1) {
        if (C_ == 0) throw Error(ErrorKind::Degenerate, "every radius is a fixed point of F");
        kind_ = Kind::HopfShift;
      } else {
        kind_ = Kind::Hopf;
        ends.push_back(C_ / (1 - lambda_));
      }
    } else if (kind_ == Kind::Cubic) {
      ends = {-1 / std::abs(gamma_), 0.0, 1 / std::abs(gamma_)};
    }
  }
  if (kind_ == Kind::Numeric) {
    // Both fixed points and poles of F change the sign of u - F(u).
    auto g = [this](double u) { return u - F_value(rel_, u); };
    auto all = [](double) { return true; };
    const double near = 1 + std::abs(u0_), wide = 100 * near;
    for (double w : {near, wide}) {
      for (double x : numerics::sign_scan_roots(g, u0_ - w, u0_ + w, 512, all, 1e-13)) ends.push_back(x);
    }
  }
  for (double e : ends) {
    if (std::abs(e - u0_) <= 1e-12 * (1 + std::abs(u0_)))
      throw Error(ErrorKind::Singular, "base point sits on a fixed point of F");
    if (e < u0_) lo_ = std::max(lo_, e);
    if (e > u0_) hi_ = std::min(hi_, e);
  }
}

double Multiplier::F(double u) const { return F_value(rel_, u); }

void Multiplier::check(double u) const {
  if (!(u > lo_ && u < hi_))
    throw Error(ErrorKind::Singular, "multiplier evaluated at or across a fixed point of F");
}

double Multiplier::numeric_integral(const std::function<double(double)>& f, double a, double b) const {
  if (a == b) return 0;
  const double sgn = a < b ? 1.0 : -1.0;
  std::vector<Panel> panels;
  graded(std::min(a, b), std::max(a, b), {lo_, hi_}, 0.25, true, 200, panels);
  return sgn * sum_panels(panels, f);
}

double Multiplier::exponent(double u) const {
  check(u);
  switch (kind_) {
    case Kind::Hopf: return std::log(std::abs((1 - lambda_) * u - C_)) / (1 - lambda_);
    case Kind::HopfShift: return -u / C_;
    case Kind::Cubic: return std::log(std::abs(u)) - 0.5 * std::log(std::abs(1 - gamma_ * gamma_ * u * u));
    case Kind::Numeric: break;
  }
  return numeric_integral([this](double x) { return 1 / (x - F(x)); }, u0_, u);
}

double Multiplier::exponent_slope(double u) const {
  check(u);
  return 1 / (u - F(u));
}

double Multiplier::phi0(double u) const {
  check(u);
  switch (kind_) {
    case Kind::Hopf: return std::pow(std::abs((1 - lambda_) * u - C_), lambda_ / (1 - lambda_));
    case Kind::HopfShift: return std::exp(-u / C_) / std::abs(C_);
    case Kind::Cubic: return std::pow(std::abs(1 - gamma_ * gamma_ * u * u), -1.5);
    case Kind::Numeric: break;
  }
  return std::exp(exponent(u)) / std::abs(u - F(u));
}

double Multiplier::inner(double u) const {
  check(u);
  if (kind_ == Kind::Numeric) return sign_of(u - F(u)) * std::exp(exponent(u));
  return (u - F(u)) * phi0(u);
}

double Multiplier::outer(double u) const {
  check(u);
  switch (kind_) {
    case Kind::Hopf: {
      const double w = std::abs((1 - lambda_) * u - C_);
      if (std::abs(2 - lambda_) <= 1e-9) return -std::log(w);
      return std::pow(w, (2 - lambda_) / (1 - lambda_)) / (2 - lambda_);
    }
    case Kind::HopfShift: return std::abs(C_) * std::exp(-u / C_);
    case Kind::Cubic: return -std::sqrt(std::abs(1 - gamma_ * gamma_ * u * u)) / (gamma_ * gamma_);
    case Kind::Numeric: break;
  }
  return numeric_integral([this](double x) { return inner(x); }, u0_, u);
}

double phi0(const Multiplier& m, double u) { return m.phi0(u); }

double first_integral_I(const Multiplier& m, const VariationalState& s) {
  return std::exp(-m.exponent(s.r1())) / std::sin(s.theta);
}

double implicit_r1(const Multiplier& m, double C, double theta, double guess) {
  if (!(C > 0)) throw Error(ErrorKind::Domain, "implicit r1 needs C > 0");
  const double sn = std::sin(theta);
  if (!(sn > 0)) throw Error(ErrorKind::Domain, "implicit r1 needs an interior angle");
  const double tau = std::log(C) + std::log(sn);
  auto phi = [&](double x) { return -m.exponent(x) - tau; };
  const auto [lo, hi] = m.interval();

  double x0 = guess;
  if (!(x0 > lo && x0 < hi)) {
    if (std::isfinite(lo) && std::isfinite(hi))
      x0 = (lo + hi) / 2;
    else if (std::isfinite(lo))
      x0 = lo + 1 + std::abs(lo);
    else if (std::isfinite(hi))
      x0 = hi - 1 - std::abs(hi);
    else
      x0 = 0;
  }
  double a = x0, fa = phi(x0);
  if (std::abs(fa) <= 4e-16 * (1 + std::abs(tau))) return x0;
  const double slope0 = -m.exponent_slope(x0);
  const double dir = ((fa > 0) == (slope0 > 0)) ? -1.0 : 1.0;
  double step = std::abs(fa / slope0) * 1.5;
  if (!std::isfinite(step) || step == 0) step = 1e-3 * (1 + std::abs(x0));
  step = std::max(step, 1e-14 * (1 + std::abs(x0)));

  double b = kNaN, fb = kNaN;
  for (int it = 0; it < 400; ++it) {
    const double boundary = dir > 0 ? hi : lo;
    double cand = a + dir * step;
    if (std::isfinite(boundary) && (dir > 0 ? cand >= boundary : cand <= boundary)) cand = a + (boundary - a) / 2;
    if (cand == a) {
      step *= 2;
      continue;
    }
    double fc;
    try {
      fc = phi(cand);
    } catch (const Error&) {
      step /= 2;
      continue;
    }
    if (std::isnan(fc)) {
      step /= 2;
      continue;
    }
    if (fc == 0) return cand;
    if ((fc > 0) != (fa > 0)) {
      b = cand;
      fb = fc;
      break;
    }
    a = cand;
    fa = fc;
    step *= 2;
  }
  if (std::isnan(b)) throw Error(ErrorKind::Domain, "root bracketing failure for r1(C, theta)");

  double x = std::abs(fa) < std::abs(fb) ? a : b;
  double fx = x == a ? fa : fb;
  for (int it = 0; it < 300; ++it) {
    const double lo_b = std::min(a, b), hi_b = std::max(a, b);
    const double newton = x - fx / (-m.exponent_slope(x));
    const double xn = (std::isfinite(newton) && newton > lo_b && newton < hi_b) ? newton : lo_b + (hi_b - lo_b) / 2;
    const double fn = phi(xn);
    if (fn == 0) return xn;
    if ((fn > 0) == (fa > 0)) {
      a = xn;
      fa = fn;
    } else {
      b = xn;
      fb = fn;
    }
    const bool small_step = std::abs(xn - x) <= 1e-15 * std::abs(xn);
    x = xn;
    fx = fn;
    if (small_step || std::abs(fn) <= 4e-16 * (1 + std::abs(tau)) ||
        std::abs(b - a) <= 4e-16 * std::max(std::abs(a), std::abs(b)))
      break;
  }
  return x;
}

double first_integral_Q(const Multiplier& m, const VariationalState& s, const QOptions& options) {
  const double theta = s.theta, c = std::cos(theta);
  if (std::abs(c) < 1e-12) throw Error(ErrorKind::Singular, "Q is singular at pi/2");
  double anchor = options.anchor;
  if (std::isnan(anchor)) anchor = theta < kPi / 2 ? 0.0 : kPi;
  if ((anchor - kPi / 2) * (theta - kPi / 2) < 0 || std::abs(anchor - kPi / 2) < 1e-12)
    throw Error(ErrorKind::Domain, "Q anchor must lie on the same side of pi/2 as theta");
  const double C = first_integral_I(m, s);
  const double lo = std::min(anchor, theta), hi = std::max(anchor, theta);
  if (lo == hi) return s.r / c;

  std::vector<Panel> panels;
  graded(lo, hi, {anchor, kPi / 2}, 0.5, false, 50, panels);
  const Rule& rule = gl_rule(20);
  struct Node {
    double u, w;
  };
  std::vector<Node> nodes;
  for (const auto& [a, b] : panels) {
    const double half = (b - a) / 2, mid = (a + b) / 2;
    for (Eigen::Index i = 0; i < rule.x.size(); ++i) nodes.push_back({mid + half * rule.x[i], half * rule.w[i]});
  }
  std::sort(nodes.begin(), nodes.end(),
            [theta](const Node& x, const Node& y) { return std::abs(x.u - theta) < std::abs(y.u - theta); });
  double guess = s.r1(), integral = 0;
  for (const Node& n : nodes) {
    if (n.u <= 0 || n.u >= kPi) continue;
    const double r1 = implicit_r1(m, C, n.u, guess);
    guess = r1;
    const double cu = std::cos(n.u);
    integral += n.w * r1 * std::sin(n.u) / (cu * cu);
  }
  if (theta < anchor) integral = -integral;
  return s.r / c - integral;
}

std::string to_string(LagrangianKind k) {
  switch (k) {
    case LagrangianKind::L0: return "L0";
    case LagrangianKind::HopfL1: return "HopfL1";
    case LagrangianKind::CubicL1: return "CubicL1";
    case LagrangianKind::General: return "General";
  }
  return "?";
}

LagrangianSpec LagrangianSpec::power(double k, std::function<double(double, double)> g1,
                                     std::function<double(double, double)> g2) {
  LagrangianSpec spec;
  spec.kind = LagrangianKind::General;
  spec.general.f = [k](double I, double) { return std::pow(I, k); };
  spec.general.power = k;
  spec.general.g1 = std::move(g1);
  spec.general.g2 = std::move(g2);
  return spec;
}

double lagrangian_eval(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s) {
  const double th = s.theta, sn = std::sin(th), cs = std::cos(th);
  switch (spec.kind) {
    case LagrangianKind::L0: {
      const double t = tan_checked(th);
      return t * t * m.outer(s.r1());
    }
    case LagrangianKind::HopfL1: {
      const HopfData h = hopf_data(m);
      return (2 * h.C * s.r - (1 - h.lambda) * s.r * s.r + s.rdot * s.rdot) / (2 * std::pow(sn, h.lambda));
    }
    case LagrangianKind::CubicL1: {
      const double g = cubic_gamma(m);
      const double D = s.rdot * cs + s.r * sn;
      if (std::abs(cs) < 1e-12 || D == 0) throw Error(ErrorKind::Singular, "cubic Lagrangian is singular here");
      return 1 / (2 * cs * cs * D) + g * g * s.r / (sn * sn * sn);
    }
    case LagrangianKind::General: break;
  }
  const GeneralTerms& t = spec.general;
  if (!t.f) throw Error(ErrorKind::Precondition, "general Lagrangian needs f(I, Q)");
  double K = 0;
  if (s.rdot != 0) {
    const Rule& rule = gl_rule(32);
    const double half = s.rdot / 2;
    for (Eigen::Index i = 0; i < rule.x.size(); ++i) {
      const double u = half + half * rule.x[i];
      K += rule.w[i] * (s.rdot - u) * phi_general(t, m, th, s.r, u);
    }
    K *= half;
  }
  if (t.g1) K += t.g1(th, s.r) * s.rdot;
  if (t.g2) K += t.g2(th, s.r);
  return K;
}

namespace {

/// dL/drdot of the general form: the integral's derivative is int_0^rdot Phi du
/// exactly, which spares one level of differencing.
double general_L_rdot(const GeneralTerms& t, const Multiplier& m, double th, double r, double rdot) {
  double out = 0;
  if (rdot != 0) {
    const Rule& rule = gl_rule(32);
    const double half = rdot / 2;
    for (Eigen::Index i = 0; i < rule.x.size(); ++i) out += rule.w[i] * phi_general(t, m, th, r, half + half * rule.x[i]);
    out *= half;
  }
  if (t.g1) out += t.g1(th, r);
  return out;
}

}  // namespace

double spec_multiplier(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s) {
  switch (spec.kind) {
    case LagrangianKind::L0: return m.phi0(s.r1());
    case LagrangianKind::HopfL1: return 1 / std::pow(std::sin(s.theta), hopf_data(m).lambda);
    case LagrangianKind::CubicL1: {
      cubic_gamma(m);
      const double D = s.rdot * std::cos(s.theta) + s.r * std::sin(s.theta);
      return 1 / (D * D * D);
    }
    case LagrangianKind::General: break;
  }
  return phi_general(spec.general, m, s.theta, s.r, s.rdot);
}

SecondPartials second_partials(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s) {
  const double th = s.theta, sn = std::sin(th), cs = std::cos(th);
  switch (spec.kind) {
    case LagrangianKind::L0: {
      const double t = tan_checked(th), p = m.phi0(s.r1());
      return {t * t * p, t * p, p};
    }
    case LagrangianKind::HopfL1: {
      const HopfData h = hopf_data(m);
      const double w = 1 / std::pow(sn, h.lambda);
      return {-(1 - h.lambda) * w, 0.0, w};
    }
    case LagrangianKind::CubicL1: {
      cubic_gamma(m);
      const double D = s.rdot * cs + s.r * sn, D3 = D * D * D;
      return {sn * sn / (cs * cs * D3), sn / (cs * D3), 1 / D3};
    }
    case LagrangianKind::General: break;
  }
  auto L = [&](double r, double rd) { return lagrangian_eval(spec, m, VariationalState(th, r, rd)); };
  const double hr = outer_h(s.r), hd = outer_h(s.rdot);
  const double rr = numerics::second_derivative([&](double r) { return L(r, s.rdot); }, s.r, hr);
  const double dd = numerics::second_derivative([&](double rd) { return L(s.r, rd); }, s.rdot, hd);
  auto mixed = [&](double a, double b) {
    return (L(s.r + a, s.rdot + b) - L(s.r + a, s.rdot - b) - L(s.r - a, s.rdot + b) + L(s.r - a, s.rdot - b)) /
           (4 * a * b);
  };
  const double rd = (4 * mixed(hr / 2, hd / 2) - mixed(hr, hd)) / 3;
  return {rr, rd, dd};
}

ElValue euler_lagrange_at(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s, double rddot,
                          Partials mode) {
  const double th = s.theta, sn = std::sin(th), cs = std::cos(th), r1 = s.r1();
  ElValue out;
  out.multiplier_form = spec_multiplier(spec, m, s) * (rddot + s.r - m.F(r1));

  if (mode == Partials::Analytic && spec.kind != LagrangianKind::General) {
    double L_dd = 0, L_rd = 0, L_thd = 0, L_r = 0;
    switch (spec.kind) {
      case LagrangianKind::L0: {
        const double t = tan_checked(th), p = m.phi0(r1), w1 = m.inner(r1);
        L_dd = p;
        L_rd = t * p;
        L_thd = w1 / (cs * cs) - t * p * s.rdot / (sn * sn);
        L_r = t * t * w1;
        break;
      }
      case LagrangianKind::HopfL1: {
        const HopfData h = hopf_data(m);
        const double w = 1 / std::pow(sn, h.lambda);
        L_dd = w;
        L_rd = 0;
        L_thd = -h.lambda * cs / sn * w * s.rdot;
        L_r = (h.C - (1 - h.lambda) * s.r) * w;
        break;
      }
      case LagrangianKind::CubicL1: {
        const double g = cubic_gamma(m);
        const double D = s.rdot * cs + s.r * sn, D_th = -s.rdot * sn + s.r * cs;
        L_dd = 1 / (D * D * D);
        L_rd = sn / (cs * D * D * D);
        L_thd = -sn / (2 * cs * cs * D * D) + D_th / (cs * D * D * D);
        L_r = -sn / (2 * cs * cs * D * D) + g * g / (sn * sn * sn);
        break;
      }
      case LagrangianKind::General: break;
    }
    out.el = L_dd * rddot + L_rd * s.rdot + L_thd - L_r;
    return out;
  }

  const Quadratic q{th, s.r, s.rdot, rddot};
  auto L = [&](double t, double r, double rd) { return lagrangian_eval(spec, m, VariationalState(t, r, rd)); };
  auto L_rdot = [&](double t) {
    const double r = q.at(t), rd = q.slope(t);
    if (spec.kind == LagrangianKind::General) return general_L_rdot(spec.general, m, t, r, rd);
    return numerics::derivative([&](double x) { return L(t, r, x); }, rd, partial_h(rd));
  };
  const double dG = numerics::derivative(L_rdot, th, outer_h(0));
  const double L_r = numerics::derivative([&](double x) { return L(th, x, s.rdot); }, s.r, partial_h(s.r));
  out.el = dG - L_r;
  return out;
}

ElResidual euler_lagrange_residual(const LagrangianSpec& spec, const Multiplier& m, const SupportProfile& trajectory,
                                   const Column& thetas, Partials mode) {
  const Eigen::Index n = thetas.size();
  ElResidual out;
  out.theta = thetas;
  out.el = Column::Constant(n, kNaN);
  out.multiplier_form = Column::Constant(n, kNaN);
  out.difference = Column::Constant(n, kNaN);
  out.skipped.assign(n, true);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      const SupportJet j = trajectory.jet(thetas[i]);
      const ElValue v = euler_lagrange_at(spec, m, VariationalState(thetas[i], j.r, j.rdot), j.rddot, mode);
      if (!std::isfinite(v.el) || !std::isfinite(v.multiplier_form)) continue;
      out.el[i] = v.el;
      out.multiplier_form[i] = v.multiplier_form;
      out.difference[i] = v.difference();
      out.skipped[i] = false;
      out.max_difference = std::max(out.max_difference, std::abs(v.difference()));
    } catch (const Error&) {
    }
  }
  return out;
}

double helmholtz_residual(const Multiplier& m, const StateFn& phi, const VariationalState& s, double rddot) {
  auto E = [&](double t, double r, double rd, double rdd) {
    return phi(t, r, rd) * (rdd + r - m.F(rd * cot_of(t) + r));
  };
  const Quadratic q{s.theta, s.r, s.rdot, rddot};
  // E is affine in rddot with slope phi, so dE/drddot needs no differencing and
  // the outer derivative can afford a finer step.
  auto E_rddot = [&](double t) { return phi(t, q.at(t), q.slope(t)); };
  const double total = numerics::derivative(E_rddot, s.theta, 1e-4);
  const double E_rdot =
      numerics::derivative([&](double x) { return E(s.theta, s.r, x, rddot); }, s.rdot, partial_h(s.rdot));
  return total - E_rdot;
}

double helmholtz_residual(const Multiplier& m, const LagrangianSpec& spec, const VariationalState& s, double rddot) {
  StateFn phi = [&](double t, double r, double rd) { return spec_multiplier(spec, m, VariationalState(t, r, rd)); };
  return helmholtz_residual(m, phi, s, rddot);
}

double jlm_pde_residual(const Multiplier& m, const StateFn& phi, const VariationalState& s) {
  const double th = s.theta, r = s.r, rd = s.rdot;
  const double p_th = numerics::derivative([&](double t) { return phi(t, r, rd); }, th, partial_h(th));
  const double p_r = numerics::derivative([&](double x) { return phi(th, x, rd); }, r, partial_h(r));
  const double flux = numerics::derivative(
      [&](double x) { return (m.F(x * cot_of(th) + r) - r) * phi(th, r, x); }, rd, partial_h(rd));
  const double R = p_th + rd * p_r + flux;
  const double scale = std::max({std::abs(p_th) + std::abs(rd * p_r) + std::abs(flux), std::abs(phi(th, r, rd)),
                                 std::numeric_limits<double>::min()});
  return std::abs(R) / scale;
}

RatioDrift jlm_ratio_check(const StateFn& phi_a, const StateFn& phi_b, const SupportProfile& trajectory,
                           const Column& thetas) {
  Column lr = Column::Constant(thetas.size(), kNaN);
  for (Eigen::Index i = 0; i < thetas.size(); ++i) {
    try {
      const SupportJet j = trajectory.jet(thetas[i]);
      const double a = phi_a(thetas[i], j.r, j.rdot), b = phi_b(thetas[i], j.r, j.rdot);
      lr[i] = std::log(std::abs(a / b));
    } catch (const Error&) {
    }
  }
  RatioDrift out;
  double lo = kInf, hi = -kInf;
  for (double v : lr) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi >= lo) out.spread = hi - lo;
  if (thetas.size() >= 2) {
    const Column rate = run_derivative(thetas, lr);
    for (double v : rate)
      if (std::isfinite(v)) out.max_rate = std::max(out.max_rate, std::abs(v));
  }
  return out;
}

std::vector<Perturbation> perturbation_suite(double a, double b, int basis, int random, std::uint64_t seed) {
  if (!(b > a)) throw Error(ErrorKind::Precondition, "perturbation interval must be nonempty");
  const double k = kPi / (b - a);
  std::vector<Perturbation> out;
  for (int n = 1; n <= basis; ++n) {
    out.push_back({[=](double t) { return std::sin(n * k * (t - a)); },
                   [=](double t) { return n * k * std::cos(n * k * (t - a)); }, "sin " + std::to_string(n)});
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int j = 0; j < random; ++j) {
    std::vector<double> c(basis);
    for (int n = 0; n < basis; ++n) c[n] = normal(rng) / (n + 1);
    out.push_back({[=](double t) {
                     double s = 0;
                     for (int n = 0; n < basis; ++n) s += c[n] * std::sin((n + 1) * k * (t - a));
                     return s;
                   },
                   [=](double t) {
                     double s = 0;
                     for (int n = 0; n < basis; ++n) s += c[n] * (n + 1) * k * std::cos((n + 1) * k * (t - a));
                     return s;
                   },
                   "random " + std::to_string(j + 1)});
  }
  return out;
}

SecondVariation second_variation(const LagrangianSpec& spec, const Multiplier& m, const SupportProfile& r_star,
                                 const Perturbation& v, double theta1, double theta2) {
  if (!(theta2 > theta1)) throw Error(ErrorKind::Precondition, "second variation needs theta1 < theta2");
  if (spec.kind == LagrangianKind::L0 && theta1 <= kPi / 2 && theta2 >= kPi / 2)
    throw Error(ErrorKind::Domain, "L0 interval must not contain pi/2");
  const Rule& rule = gl_rule(20);
  constexpr int panels = 32;
  const double width = (theta2 - theta1) / panels;
  SecondVariation out;
  double identity = 0;
  for (int p = 0; p < panels; ++p) {
    const double a = theta1 + p * width, half = width / 2, mid = a + half;
    for (Eigen::Index i = 0; i < rule.x.size(); ++i) {
      const double t = mid + half * rule.x[i], w = half * rule.w[i];
      const SupportJet j = r_star.jet(t);
      const VariationalState s(t, j.r, j.rdot);
      const SecondPartials f = second_partials(spec, m, s);
      const double x = v.v(t), dx = v.vdot(t);
      out.value += w * (f.rr * x * x + 2 * f.rrdot * x * dx + f.rdotrdot * dx * dx);
      if (spec.kind == LagrangianKind::L0) {
        const double q = std::tan(t) * x + dx;
        identity += w * m.phi0(s.r1()) * q * q;
      }
    }
  }
  if (spec.kind == LagrangianKind::L0) out.l0_identity = identity;
  return out;
}

StabilityReport stability_suite(const LagrangianSpec& spec, const Multiplier& m, const SupportProfile& r_star,
                                double theta1, double theta2, std::uint64_t seed) {
  StabilityReport out;
  out.min = kInf;
  const std::vector<Perturbation> suite = perturbation_suite(theta1, theta2, 10, 40, seed);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const SecondVariation sv = second_variation(spec, m, r_star, suite[i], theta1, theta2);
    out.values.push_back(sv.value);
    if (sv.value < out.min) {
      out.min = sv.value;
      out.argmin = i;
    }
    if (sv.l0_identity) out.identity_gap = std::max(out.identity_gap, std::abs(sv.value - *sv.l0_identity));
  }
  return out;
}

DriftReport conservation_drift(const Multiplier& m, const SupportProfile& trajectory, const Column& thetas,
                               const QOptions& options) {
  DriftReport out;
  std::vector<double> I;
  // Q per side of pi/2, with the terms r/cos(theta) as the scale.
  std::vector<double> Q[2], scale[2];
  for (Eigen::Index i = 0; i < thetas.size(); ++i) {
    const double t = thetas[i];
    if (t <= kPoleEpsilon || t >= kPi - kPoleEpsilon) continue;
    const SupportJet j = trajectory.jet(t);
    const VariationalState s(t, j.r, j.rdot);
    I.push_back(first_integral_I(m, s));
    ++out.samples;
    if (std::abs(std::cos(t)) < 0.05) continue;
    const int side = t < kPi / 2 ? 0 : 1;
    QOptions q = options;
    if (std::isnan(q.anchor)) {
      // The sample of this side nearest to its pole keeps r1(C, u) on the trajectory.
      double best = kNaN;
      for (double u : thetas) {
        if (u <= kPoleEpsilon || u >= kPi - kPoleEpsilon || (u < kPi / 2) != (side == 0)) continue;
        if (std::isnan(best) || (side == 0 ? u < best : u > best)) best = u;
      }
      q.anchor = best;
    }
    Q[side].push_back(first_integral_Q(m, s, q));
    scale[side].push_back(std::abs(j.r / std::cos(t)));
  }
  auto spread = [](const std::vector<double>& x, double denom) {
    if (x.size() < 2) return 0.0;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return (*hi - *lo) / denom;
  };
  auto mean_abs = [](const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += std::abs(v);
    return x.empty() ? 0.0 : s / x.size();
  };
  out.I_drift = spread(I, std::max(mean_abs(I), std::numeric_limits<double>::min()));
  for (int side = 0; side < 2; ++side) {
    const double denom = std::max({mean_abs(Q[side]), mean_abs(scale[side]), std::numeric_limits<double>::min()});
    out.Q_drift = std::max(out.Q_drift, spread(Q[side], denom));
  }
  return out;
}

GeneralLagrangianReport general_lagrangian(const Multiplier& m, GeneralTerms terms, const SupportProfile& trajectory,
                                           const Column& thetas, double tolerance) {
  if (!terms.f) throw Error(ErrorKind::Precondition, "general Lagrangian needs f(I, Q)");
  GeneralLagrangianReport out;
  if (terms.power && !terms.g1 && !terms.g2) {
    const double k = *terms.power;
    const WeingartenRelation& rel = m.relation();
    if (std::holds_alternative<LinearHopf>(rel) || std::holds_alternative<PureKLinear>(rel)) {
      const HopfData h = hopf_data(m);
      if (std::abs(k - h.lambda) <= 1e-12) {
        terms.g1 = [](double, double) { return 0.0; };
        terms.g2 = [h](double t, double r) {
          return (2 * h.C * r - (1 - h.lambda) * r * r) / (2 * std::pow(std::sin(t), h.lambda));
        };
      }
    } else if (const auto* c = std::get_if<CubicRoC>(&rel); c && c->gamma != 0 && k == 3) {
      const double g = c->gamma;
      terms.g1 = [](double t, double r) {
        const double sn = std::sin(t);
        return -1 / (2 * std::cos(t) * r * r * sn * sn);
      };
      terms.g2 = [g](double t, double r) {
        const double sn = std::sin(t), cs = std::cos(t);
        return 1 / (2 * cs * cs * r * sn) + g * g * r / (sn * sn * sn);
      };
    }
  }
  out.registered = static_cast<bool>(terms.g1) || static_cast<bool>(terms.g2);

  GeneralTerms bare = terms;
  bare.g1 = {};
  bare.g2 = {};
  const LagrangianSpec bare_spec{LagrangianKind::General, bare};
  out.spec = LagrangianSpec{LagrangianKind::General, terms};
  const StateFn phi = [&](double t, double r, double rd) { return phi_general(terms, m, t, r, rd); };

  out.defect = Column::Constant(thetas.size(), kNaN);
  double el_max = 0;
  for (Eigen::Index i = 0; i < thetas.size(); ++i) {
    const SupportJet j = trajectory.jet(thetas[i]);
    const VariationalState s(thetas[i], j.r, j.rdot);
    out.pde_residual_max = std::max(out.pde_residual_max, jlm_pde_residual(m, phi, s));
    const ElValue bare_el = euler_lagrange_at(bare_spec, m, s, j.rddot, Partials::Numeric);
    out.defect[i] = bare_el.multiplier_form - bare_el.el;
    if (out.registered) {
      const ElValue v = euler_lagrange_at(out.spec, m, s, j.rddot, Partials::Numeric);
      el_max = std::max(el_max, std::abs(v.difference()));
    }
  }
  out.is_jlm = out.pde_residual_max <= tolerance;
  if (out.registered) out.el_residual_max = el_max;
  return out;
}

}  // namespace wg
