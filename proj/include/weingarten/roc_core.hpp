#pragma once

#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "weingarten/ext_real.hpp"
#include "weingarten/numerics/interpolant.hpp"

namespace wg {

using Column = Eigen::ArrayXd;

inline constexpr double kPoleEpsilon = 1e-6;

class GaussAngle {
 public:
  explicit GaussAngle(double value);
  double value() const { return value_; }
  bool is_north_pole() const { return value_ == 0.0; }
  bool is_south_pole() const { return value_ == std::numbers::pi; }
  bool is_pole() const { return is_north_pole() || is_south_pole(); }
  /// Throws Singular within kPoleEpsilon of a pole.
  double cot() const;

 private:
  double value_;
};

struct RoCPoint {
  ExtReal r1, r2;

  bool is_umbilic(double tol = 0.0) const {
    return r1.is_finite() && r2.is_finite() &&
           std::abs(r1.value() - r2.value()) <= tol * std::max(1.0, std::abs(r1.value()));
  }
  bool is_flat() const { return r2.is_infinite(); }
};

enum class Pole { North, South };

struct PoleValues {
  std::optional<ExtReal> north, south;
  std::optional<ExtReal> at(Pole p) const { return p == Pole::North ? north : south; }
};

/// Continuous access to a profile beyond its samples.
class ProfileSource {
 public:
  virtual ~ProfileSource() = default;
  virtual double lower() const = 0;
  virtual double upper() const = 0;
  virtual RoCPoint at(double theta) const = 0;
  virtual bool has_analytic_derivative() const { return false; }
  virtual double dr1(double theta) const;
};

class AnalyticProfile final : public ProfileSource {
 public:
  using Fn = std::function<double(double)>;
  AnalyticProfile(Fn r1, Fn r2, Fn dr1 = {}, double lower = 0.0, double upper = std::numbers::pi)
      : r1_(std::move(r1)), r2_(std::move(r2)), dr1_(std::move(dr1)), lower_(lower), upper_(upper) {}
  double lower() const override { return lower_; }
  double upper() const override { return upper_; }
  RoCPoint at(double theta) const override { return {ExtReal(r1_(theta)), ExtReal(r2_(theta))}; }
  bool has_analytic_derivative() const override { return static_cast<bool>(dr1_); }
  double dr1(double theta) const override;

 private:
  Fn r1_, r2_, dr1_;
  double lower_, upper_;
};

/// Sampled theta -> (r1, r2). Infinite radii are stored as +inf.
class RoCProfile {
 public:
  RoCProfile(Column grid, Column r1, Column r2, PoleValues poles = {}, double tolerance = 1e-8,
             std::shared_ptr<const ProfileSource> source = nullptr);

  /// Samples a continuous source on a grid.
  static RoCProfile sample(std::shared_ptr<const ProfileSource> source, const Column& grid,
                           PoleValues poles = {}, double tolerance = 1e-8);

  const Column& grid() const { return grid_; }
  const Column& r1() const { return r1_; }
  const Column& r2() const { return r2_; }
  Eigen::Index size() const { return grid_.size(); }
  RoCPoint point(Eigen::Index i) const { return {ExtReal(r1_[i]), ExtReal(r2_[i])}; }
  const PoleValues& poles() const { return poles_; }
  double tolerance() const { return tolerance_; }
  const ProfileSource* source() const { return source_.get(); }
  std::shared_ptr<const ProfileSource> shared_source() const { return source_; }

  /// Continuous evaluation: the source if any, otherwise the interpolant.
  RoCPoint at(double theta) const;
  bool continuous_at(double theta) const;
  /// dr1/dtheta at sample i from the declared scheme (NaN where undefined).
  double dr1_sample(Eigen::Index i) const { return dr1_[i]; }
  double dr1(double theta) const;

  std::map<std::string, std::string> metadata;

 private:
  Column grid_, r1_, r2_, dr1_;
  PoleValues poles_;
  double tolerance_;
  std::shared_ptr<const ProfileSource> source_;
  numerics::QuinticHermite<double> interp_r1_, interp_r2_;
};

struct SupportJet {
  double r, rdot, rddot;
};

class SupportProfile {
 public:
  using JetFn = std::function<SupportJet(double)>;

  /// Interpolated support; derivatives come from the quintic interpolant.
  SupportProfile(Column grid, Column r);
  /// Support with analytic derivative access.
  SupportProfile(Column grid, JetFn jet, std::optional<RoCPoint> north_limit = {},
                 std::optional<RoCPoint> south_limit = {});

  const Column& grid() const { return grid_; }
  const Column& r() const { return r_; }
  bool is_analytic() const { return static_cast<bool>(jet_fn_); }
  SupportJet jet(double theta) const;
  std::optional<RoCPoint> north_limit, south_limit;

 private:
  Column grid_, r_;
  JetFn jet_fn_;
  numerics::QuinticHermite<double> interp_;
};

struct ProfileCurve3D {
  Column grid, rho, h;
};

RoCProfile curvatures_from_support(const SupportProfile& s);

SupportProfile support_from_r1(const RoCProfile& p, double anchor_angle, double anchor_value);

ProfileCurve3D embed_profile(const RoCProfile& p, double h_anchor);
/// rho and h straight from a support profile (rho = r sin + rdot cos, h = r cos - rdot sin).
ProfileCurve3D embed_support(const SupportProfile& s);

/// dr1/dtheta - (r2 - r1) cot theta per sample; NaN where a radius is
/// infinite or the sample lies within kPoleEpsilon of a pole.
Column cm_residual(const RoCProfile& p);
/// Largest finite |residual| over samples in [lo, hi].
double cm_residual_sup(const RoCProfile& p, double lo = 0.0, double hi = std::numbers::pi);

double integrated_cm_check(const RoCProfile& p, double theta_a, double theta_b);

/// Uniform grid on [lo, hi] with spacing at most `max_spacing`.
/// Nodal dy/dx on each maximal run of finite samples, NaN elsewhere.
Column run_derivative(const Column& x, const Column& y);

Column uniform_grid(double lo, double hi, double max_spacing);

}  // namespace wg
