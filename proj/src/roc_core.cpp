#include "weingarten/roc_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "weingarten/numerics/quadrature.hpp"

namespace wg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool near_pole(double theta) {
  return theta < kPoleEpsilon || theta > std::numbers::pi - kPoleEpsilon;
}

bool all_finite(const Column& c) { return c.isFinite().all(); }

void check_grid(const Column& grid) {
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0 || grid[i] > std::numbers::pi)
      throw Error(ErrorKind::Domain, "Gauss angle outside [0, pi]");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw Error(ErrorKind::Precondition, "grid must be strictly increasing");
  }
}

numerics::QuadratureTolerance<double> fine_tolerance() { return {1e-13, 1e-12, 40}; }

}  // namespace

Column run_derivative(const Column& x, const Column& y) {
  Column out = Column::Constant(x.size(), kNaN);
  Eigen::Index start = 0;
  while (start < x.size()) {
    if (!std::isfinite(y[start])) {
      ++start;
      continue;
    }
    Eigen::Index end = start;
    while (end < x.size() && std::isfinite(y[end])) ++end;
    if (end - start >= 2) {
      Column d1, d2;
      numerics::nodal_derivatives<double>(x.segment(start, end - start), y.segment(start, end - start),
                                          d1, d2);
      out.segment(start, end - start) = d1;
    }
    start = end;
  }
  return out;
}

std::string to_string(ExtReal x) {
  if (x.is_infinite()) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x.value());
  return buf;
}

GaussAngle::GaussAngle(double value) : value_(value) {
  if (!(value >= 0.0 && value <= std::numbers::pi))
    throw Error(ErrorKind::Domain, "Gauss angle outside [0, pi]");
}

double GaussAngle::cot() const {
  if (near_pole(value_)) throw Error(ErrorKind::Singular, "cot evaluated at a pole");
  return std::cos(value_) / std::sin(value_);
}

double ProfileSource::dr1(double) const {
  throw Error(ErrorKind::Precondition, "profile source has no analytic derivative");
}

double AnalyticProfile::dr1(double theta) const {
  if (!dr1_) return ProfileSource::dr1(theta);
  return dr1_(theta);
}

RoCProfile::RoCProfile(Column grid, Column r1, Column r2, PoleValues poles, double tolerance,
                       std::shared_ptr<const ProfileSource> source)
    : grid_(std::move(grid)),
      r1_(std::move(r1)),
      r2_(std::move(r2)),
      poles_(std::move(poles)),
      tolerance_(tolerance),
      source_(std::move(source)) {
  if (grid_.size() != r1_.size() || grid_.size() != r2_.size())
    throw Error(ErrorKind::Precondition, "profile columns differ in length");
  check_grid(grid_);
  r1_ = r1_.isInf().select(std::numeric_limits<double>::infinity(), r1_);
  r2_ = r2_.isInf().select(std::numeric_limits<double>::infinity(), r2_);
  if (r1_.isNaN().any() || r2_.isNaN().any())
    throw Error(ErrorKind::Domain, "profile contains NaN radii");

  if (source_ && source_->has_analytic_derivative()) {
    dr1_.resize(grid_.size());
    for (Eigen::Index i = 0; i < grid_.size(); ++i)
      dr1_[i] = r1_[i] == std::numeric_limits<double>::infinity() ? kNaN : source_->dr1(grid_[i]);
  } else {
    dr1_ = run_derivative(grid_, r1_);
  }
  if (grid_.size() >= 2 && all_finite(r1_)) {
    Column d1 = dr1_, d2, unused;
    if (d1.isNaN().any()) numerics::nodal_derivatives<double>(grid_, r1_, d1, d2);
    else numerics::nodal_derivatives<double>(grid_, r1_, unused, d2);
    interp_r1_ = numerics::QuinticHermite<double>(grid_, r1_, d1, d2);
  }
  if (grid_.size() >= 2 && all_finite(r2_)) interp_r2_ = numerics::QuinticHermite<double>::from_samples(grid_, r2_);
}

RoCProfile RoCProfile::sample(std::shared_ptr<const ProfileSource> source, const Column& grid,
                              PoleValues poles, double tolerance) {
  Column r1(grid.size()), r2(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const RoCPoint p = source->at(grid[i]);
    r1[i] = p.r1.raw();
    r2[i] = p.r2.raw();
  }
  return RoCProfile(grid, r1, r2, std::move(poles), tolerance, std::move(source));
}

bool RoCProfile::continuous_at(double theta) const {
  if (source_ && theta >= source_->lower() && theta <= source_->upper()) return true;
  return !interp_r1_.empty() && !interp_r2_.empty() && theta >= grid_[0] &&
         theta <= grid_[grid_.size() - 1];
}

RoCPoint RoCProfile::at(double theta) const {
  if (source_ && theta >= source_->lower() && theta <= source_->upper()) return source_->at(theta);
  const double* hit = std::lower_bound(grid_.data(), grid_.data() + grid_.size(), theta);
  if (hit != grid_.data() + grid_.size() && *hit == theta) return point(hit - grid_.data());
  if (interp_r1_.empty() || interp_r2_.empty())
    throw Error(ErrorKind::Domain, "profile has no continuous representation at this angle");
  return {ExtReal(interp_r1_(theta).value), ExtReal(interp_r2_(theta).value)};
}

double RoCProfile::dr1(double theta) const {
  if (source_ && source_->has_analytic_derivative() && theta >= source_->lower() &&
      theta <= source_->upper())
    return source_->dr1(theta);
  if (interp_r1_.empty()) throw Error(ErrorKind::Domain, "profile has no continuous representation");
  return interp_r1_(theta).d1;
}

SupportProfile::SupportProfile(Column grid, Column r) : grid_(std::move(grid)), r_(std::move(r)) {
  check_grid(grid_);
  if (grid_.size() != r_.size()) throw Error(ErrorKind::Precondition, "support columns differ in length");
  if (!all_finite(r_)) throw Error(ErrorKind::Domain, "support samples must be finite");
  interp_ = numerics::QuinticHermite<double>::from_samples(grid_, r_);
}

SupportProfile::SupportProfile(Column grid, JetFn jet, std::optional<RoCPoint> north,
                               std::optional<RoCPoint> south)
    : north_limit(north), south_limit(south), grid_(std::move(grid)), jet_fn_(std::move(jet)) {
  check_grid(grid_);
  r_.resize(grid_.size());
  for (Eigen::Index i = 0; i < grid_.size(); ++i) r_[i] = jet_fn_(grid_[i]).r;
}

SupportJet SupportProfile::jet(double theta) const {
  if (jet_fn_) return jet_fn_(theta);
  const auto j = interp_(theta);
  return {j.value, j.d1, j.d2};
}

namespace {

class SupportCurvatureSource final : public ProfileSource {
 public:
  SupportCurvatureSource(SupportProfile s) : s_(std::move(s)) {}
  double lower() const override { return std::max(s_.grid()[0], kPoleEpsilon); }
  double upper() const override {
    return std::min(s_.grid()[s_.grid().size() - 1], std::numbers::pi - kPoleEpsilon);
  }
  RoCPoint at(double theta) const override {
    const SupportJet j = s_.jet(theta);
    return {ExtReal(j.r + j.rdot * GaussAngle(theta).cot()), ExtReal(j.r + j.rddot)};
  }

 private:
  SupportProfile s_;
};

}  // namespace

RoCProfile curvatures_from_support(const SupportProfile& s) {
  const Column& g = s.grid();
  Column r1(g.size()), r2(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (near_pole(g[i])) {
      const auto& lim = g[i] < 1.0 ? s.north_limit : s.south_limit;
      if (!lim) throw Error(ErrorKind::Singular, "pole sample without an analytic limit");
      r1[i] = lim->r1.raw();
      r2[i] = lim->r2.raw();
      continue;
    }
    const SupportJet j = s.jet(g[i]);
    r1[i] = j.r + j.rdot * GaussAngle(g[i]).cot();
    r2[i] = j.r + j.rddot;
  }
  PoleValues poles;
  if (s.north_limit) poles.north = s.north_limit->r1;
  if (s.south_limit) poles.south = s.south_limit->r1;
  std::shared_ptr<const ProfileSource> source;
  if (s.is_analytic()) source = std::make_shared<SupportCurvatureSource>(s);
  return RoCProfile(g, r1, r2, poles, 1e-8, source);
}

namespace {

/// J(theta) = int_{theta0}^{theta} (r2 - r1)/sin u du, tabulated on the grid.
struct SupportIntegral {
  std::shared_ptr<const RoCProfile> profile;
  double theta0;
  Column nodes, values;

  double integrand(double u) const {
    const RoCPoint p = profile->at(u);
    return (p.r2.value() - p.r1.value()) / std::sin(u);
  }
  double segment(double a, double b) const {
    return numerics::integrate([this](double u) { return integrand(u); }, a, b, fine_tolerance());
  }
  double operator()(double theta) const {
    const double* it = std::lower_bound(nodes.data(), nodes.data() + nodes.size(), theta);
    Eigen::Index i = it - nodes.data();
    if (i == nodes.size()) --i;
    if (i > 0 && std::abs(nodes[i - 1] - theta) < std::abs(nodes[i] - theta)) --i;
    return nodes[i] == theta ? values[i] : values[i] + segment(nodes[i], theta);
  }
};

}  // namespace

SupportProfile support_from_r1(const RoCProfile& p, double anchor_angle, double anchor_value) {
  if (near_pole(anchor_angle)) throw Error(ErrorKind::Precondition, "support anchor must be interior");
  const double c_anchor = std::cos(anchor_angle);
  if (std::abs(c_anchor) < 1e-12) throw Error(ErrorKind::Precondition, "support anchor at theta = pi/2");
  if (!all_finite(p.r1())) throw Error(ErrorKind::Domain, "support recovery needs finite r1");
  if (!all_finite(p.r2())) throw Error(ErrorKind::Domain, "support recovery needs finite r2");
  if (!p.continuous_at(anchor_angle)) throw Error(ErrorKind::Domain, "support anchor outside the profile");

  auto J = std::make_shared<SupportIntegral>();
  J->profile = std::make_shared<RoCProfile>(p);
  J->theta0 = anchor_angle;
  J->nodes = p.grid();
  J->values.resize(p.size());
  const Eigen::Index n = p.size();
  Eigen::Index k = std::lower_bound(p.grid().data(), p.grid().data() + n, anchor_angle) - p.grid().data();
  if (k < n) {
    J->values[k] = J->segment(anchor_angle, p.grid()[k]);
    for (Eigen::Index i = k + 1; i < n; ++i)
      J->values[i] = J->values[i - 1] + J->segment(p.grid()[i - 1], p.grid()[i]);
  }
  if (k > 0) {
    J->values[k - 1] = -J->segment(p.grid()[k - 1], anchor_angle);
    for (Eigen::Index i = k - 2; i >= 0; --i)
      J->values[i] = J->values[i + 1] - J->segment(p.grid()[i], p.grid()[i + 1]);
  }
  const double c0 = (anchor_value - p.at(anchor_angle).r1.value()) / c_anchor;

  auto jet = [J, c0](double theta) {
    const RoCPoint q = J->profile->at(theta);
    const double r1 = q.r1.value(), r2 = q.r2.value();
    const double w = (*J)(theta) - c0;
    const double s = std::sin(theta), c = std::cos(theta);
    return SupportJet{r1 - c * w, s * w, c * w + (r2 - r1)};
  };
  std::optional<RoCPoint> north, south;
  if (p.poles().north) north = RoCPoint{*p.poles().north, *p.poles().north};
  if (p.poles().south) south = RoCPoint{*p.poles().south, *p.poles().south};
  return SupportProfile(p.grid(), jet, north, south);
}

ProfileCurve3D embed_profile(const RoCProfile& p, double h_anchor) {
  if (!all_finite(p.r1())) throw Error(ErrorKind::Domain, "embedding needs finite r1");
  if (!all_finite(p.r2())) throw Error(ErrorKind::Domain, "flat point: r2 is infinite, use the RoC representation");
  ProfileCurve3D out{p.grid(), p.r1() * p.grid().sin(), Column(p.size())};
  out.h[0] = h_anchor;
  auto integrand = [&p](double u) { return p.at(u).r2.value() * std::sin(u); };
  for (Eigen::Index i = 1; i < p.size(); ++i)
    out.h[i] = out.h[i - 1] - numerics::integrate(integrand, p.grid()[i - 1], p.grid()[i], fine_tolerance());
  return out;
}

ProfileCurve3D embed_support(const SupportProfile& s) {
  ProfileCurve3D out{s.grid(), Column(s.grid().size()), Column(s.grid().size())};
  for (Eigen::Index i = 0; i < s.grid().size(); ++i) {
    const double t = s.grid()[i];
    const SupportJet j = s.jet(t);
    out.rho[i] = j.r * std::sin(t) + j.rdot * std::cos(t);
    out.h[i] = j.r * std::cos(t) - j.rdot * std::sin(t);
  }
  return out;
}

Column cm_residual(const RoCProfile& p) {
  Column res(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double t = p.grid()[i];
    const double r1 = p.r1()[i], r2 = p.r2()[i], d = p.dr1_sample(i);
    if (near_pole(t) || !std::isfinite(r1) || !std::isfinite(r2) || !std::isfinite(d)) {
      res[i] = kNaN;
      continue;
    }
    res[i] = d - (r2 - r1) * std::cos(t) / std::sin(t);
  }
  return res;
}

double cm_residual_sup(const RoCProfile& p, double lo, double hi) {
  const Column res = cm_residual(p);
  double worst = 0;
  for (Eigen::Index i = 0; i < res.size(); ++i)
    if (p.grid()[i] >= lo && p.grid()[i] <= hi && std::isfinite(res[i]))
      worst = std::max(worst, std::abs(res[i]));
  return worst;
}

double integrated_cm_check(const RoCProfile& p, double theta_a, double theta_b) {
  if (near_pole(theta_a) || near_pole(theta_b))
    throw Error(ErrorKind::Precondition, "integrated check needs an interior interval");
  auto integrand = [&p](double u) {
    const RoCPoint q = p.at(u);
    return (q.r2.value() - q.r1.value()) * std::cos(u) / std::sin(u);
  };
  return p.at(theta_b).r1.value() - p.at(theta_a).r1.value() -
         numerics::integrate(integrand, theta_a, theta_b, fine_tolerance());
}

Column uniform_grid(double lo, double hi, double max_spacing) {
  if (!(hi > lo) || !(max_spacing > 0)) throw Error(ErrorKind::Precondition, "bad grid request");
  const auto n = static_cast<Eigen::Index>(std::ceil((hi - lo) / max_spacing - 1e-9));
  Column g(n + 1);
  for (Eigen::Index k = 0; k <= n; ++k) g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
  g[n] = hi;
  return g;
}

}  // namespace wg
