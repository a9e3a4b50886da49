#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "weingarten/numerics/extrapolation.hpp"
#include "weingarten/relations.hpp"
#include "weingarten/roc_core.hpp"

namespace wg {

enum class StopReason { Reached, Pole, BlowUp, DomainExit };
std::string to_string(StopReason s);

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Output grid spacing; integration steps land on every grid point.
  double max_spacing = 2.5e-4;
  double pole_epsilon = kPoleEpsilon;
  double blow_up = 1e12;
  /// Coefficient c1 of the linearized seed r1 = r0 + c1 sin^(mu-1) when starting at a pole.
  double pole_seed = 0.0;
};

struct SideReport {
  StopReason stop = StopReason::Reached;
  double theta_end = 0;
  std::string detail;
};

struct Integration {
  RoCProfile profile;
  SideReport lower, upper;
  double theta0, r1_0;
  std::size_t accepted_steps = 0;
  double residual_max = 0;
  /// Where residual_max was measured. A blow-up end is pulled in by
  /// kBlowUpMargin grid spacings: the slope there grows faster than sampled
  /// differences can follow.
  std::pair<double, double> residual_window{0.0, 0.0};
};

inline constexpr int kBlowUpMargin = 128;

/// Solves dr1/dtheta = (F(r1) - r1) cot theta from (theta0, r1_0) in both
/// directions over [lo, hi] (clipped to the pole margins), attaching r2 = F(r1).
/// theta0 in {0, pi} starts at an isolated umbilic and requires F(r1_0) = r1_0.
Integration integrate_cm(const WeingartenRelation& rel, double theta0, double r1_0, double lo, double hi,
                         const StepControl& control = {});

struct HopfPoint {
  double r1, r, rdot, rddot;
};

/// Closed-form member of r2 = lambda r1 + C with constant A0. The support is
/// anchored by r(pi/3) = r1(pi/3), unless `anchor` overrides (theta1, r(theta1)).
HopfPoint hopf_closed_form(double lambda, double C, double A0, double theta,
                           std::optional<std::pair<double, double>> anchor = {});
/// The closed-form member as an analytic RoC profile on `grid`.
RoCProfile hopf_profile(double lambda, double C, double A0, const Column& grid);

struct LadderOptions {
  double theta_ref = 0.5;
  int levels = 20;
  /// Ladder stops once |r1 - r0| falls below this times max(|r0|, 1); NaN picks
  /// 100x the profile tolerance.
  double noise_floor = std::numeric_limits<double>::quiet_NaN();
};

struct UmbilicAnalysis {
  Pole side = Pole::North;
  ExtReal r0;
  /// Limit of (r2 - r0)/(r1 - r0), or of r2/r1 when r0 is infinite.
  double slope_estimate = 0;
  double slope_ci = 0;
  /// The same limit read in curvature space, k2 - k0 over k1 - k0.
  double curvature_slope = 0;
  double vanishing_exponent = 0;
  double vanishing_exponent_ci = 0;
  double vanishing_coefficient = 0;
  numerics::Growth coefficient_growth = numerics::Growth::Finite;
  bool unbounded = false;
  std::vector<double> off_axis_umbilics, umbilic_rings;
  numerics::LimitModel model = numerics::LimitModel::Insufficient;
  int levels_used = 0;
};

/// Zeros of r2 - r1 strictly inside the profile: sign changes and tangential touches.
struct InteriorUmbilics {
  std::vector<double> crossings, rings;
};
InteriorUmbilics interior_umbilics(const RoCProfile& p);

/// Umbilic slope at a pole from a geometric ladder of pole distances. The pole
/// limit r0 is read from the profile. Throws Degenerate for a totally umbilic tail.
UmbilicAnalysis umbilic_slope_estimate(const RoCProfile& p, Pole side = Pole::North,
                                       const LadderOptions& options = {});

struct VanishingRate {
  double value = 0;
  double ci = 0;
  numerics::Growth growth = numerics::Growth::Finite;
};

/// Limit of (r2 - r1)/sin^alpha theta at the pole.
VanishingRate vanishing_rate_estimate(const RoCProfile& p, double alpha, Pole side = Pole::North,
                                      const LadderOptions& options = {});

struct SlopeTheoremReport {
  bool pass = true;
  bool vacuous = false;
  bool alpha_lower_bound_only = false;
  double slope = 0, slope_ci = 0, alpha = 0;
  numerics::Growth gamma_growth = numerics::Growth::Finite;
  double gamma = 0;
  std::string note;
};

SlopeTheoremReport slope_theorem_check(const RoCProfile& p, Pole side = Pole::North, double tolerance = 5e-2,
                                       const LadderOptions& options = {});

/// Analytic profile with r2 - r1 = sin^alpha theta ln(2 csc theta)^delta near the
/// north pole and r1(0) = r0, for delta in {-1, 0, 1}.
RoCProfile vanishing_fixture(double alpha, int delta, double r0, const Column& grid);

}  // namespace wg
