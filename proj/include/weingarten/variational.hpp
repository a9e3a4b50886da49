#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weingarten/relations.hpp"
#include "weingarten/roc_core.hpp"

namespace wg {

/// (theta, r, rdot) with theta away from the poles.
struct VariationalState {
  double theta, r, rdot;
  VariationalState(double theta, double r, double rdot);
  double r1() const;
};

/// Phi0 and its antiderivatives for r2 = F(r1). Linear Hopf, k2 = lambda k1 and
/// the cubic family use closed forms; everything else is integrated numerically
/// from the base point. Values are only defined on the fixed-point-free interval
/// containing the base point.
class Multiplier {
 public:
  Multiplier(WeingartenRelation rel, double base_point, bool prefer_closed_form = true);

  const WeingartenRelation& relation() const { return rel_; }
  double base_point() const { return u0_; }
  bool closed_form() const { return kind_ != Kind::Numeric; }
  /// Fixed-point-free interval around the base point (ends may be infinite).
  std::pair<double, double> interval() const { return {lo_, hi_}; }

  /// E(u) = int^u dxi / (xi - F(xi)).
  double exponent(double u) const;
  /// Phi0(u) = exp(E(u)) / |u - F(u)|.
  double phi0(double u) const;
  /// (u - F(u)) Phi0(u); the inner antiderivative of Phi0.
  double inner(double u) const;
  /// Antiderivative of inner().
  double outer(double u) const;
  /// dE/du = 1/(u - F(u)).
  double exponent_slope(double u) const;
  double F(double u) const;

 private:
  enum class Kind { Hopf, HopfShift, Cubic, Numeric };
  void check(double u) const;
  double numeric_integral(const std::function<double(double)>& f, double a, double b) const;

  WeingartenRelation rel_;
  double u0_;
  Kind kind_ = Kind::Numeric;
  double lambda_ = 0, C_ = 0, gamma_ = 0;
  double lo_, hi_;
};

double phi0(const Multiplier& m, double u);

/// I = exp(-E(r1)) / sin(theta).
double first_integral_I(const Multiplier& m, const VariationalState& s);

struct QOptions {
  /// Lower limit of the inner theta integral; NaN picks 0 on the northern half
  /// and pi on the southern one.
  double anchor = std::numeric_limits<double>::quiet_NaN();
};

/// Q = r/cos(theta) - int_anchor^theta r1(I, u) sin u / cos^2 u du, with r1(C, u)
/// solved from C sin u = exp(-E(r1)) on the multiplier's interval.
double first_integral_Q(const Multiplier& m, const VariationalState& s, const QOptions& options = {});
/// The implicit r1(C, theta), started from `guess`.
double implicit_r1(const Multiplier& m, double C, double theta, double guess);

enum class LagrangianKind { L0, HopfL1, CubicL1, General };
std::string to_string(LagrangianKind k);

using StateFn = std::function<double(double theta, double r, double rdot)>;

struct GeneralTerms {
  /// f(I, Q). Q is NaN when uses_Q is false.
  std::function<double(double, double)> f;
  bool uses_Q = false;
  std::function<double(double, double)> g1, g2;
  /// Set for f = I^k so the registered (g1, g2) pairs can be recognized.
  std::optional<double> power;
  QOptions q;
};

struct LagrangianSpec {
  LagrangianKind kind = LagrangianKind::L0;
  GeneralTerms general;

  static LagrangianSpec l0() { return {}; }
  static LagrangianSpec hopf_l1() { return {LagrangianKind::HopfL1, {}}; }
  static LagrangianSpec cubic_l1() { return {LagrangianKind::CubicL1, {}}; }
  /// f = I^k with optional (g1, g2).
  static LagrangianSpec power(double k, std::function<double(double, double)> g1 = {},
                              std::function<double(double, double)> g2 = {});
};

/// L(theta, r, rdot). L0 = tan^2(theta) outer(r1); General is
/// int_0^rdot (rdot - u) Phi(theta, r, u) du + g1 rdot + g2.
double lagrangian_eval(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s);
/// d2L/drdot2, the multiplier belonging to the spec.
double spec_multiplier(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s);

struct SecondPartials {
  double rr, rrdot, rdotrdot;
};
/// Closed forms for L0, HopfL1 and CubicL1, centered differences for General.
SecondPartials second_partials(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s);

enum class Partials { Analytic, Numeric };

struct ElValue {
  double el = 0, multiplier_form = 0;
  double difference() const { return el - multiplier_form; }
};

/// Euler-Lagrange expression at a state with a given second derivative, and
/// Phi (rddot + r - F(r1)). Numeric mode differentiates lagrangian_eval along
/// the quadratic through the state; analytic mode uses the expanded form.
ElValue euler_lagrange_at(const LagrangianSpec& spec, const Multiplier& m, const VariationalState& s, double rddot,
                          Partials mode = Partials::Analytic);

struct ElResidual {
  Column theta, el, multiplier_form, difference;
  std::vector<bool> skipped;
  double max_difference = 0;
};

ElResidual euler_lagrange_residual(const LagrangianSpec& spec, const Multiplier& m, const SupportProfile& trajectory,
                                   const Column& thetas, Partials mode = Partials::Analytic);

/// d/dtheta (dE/drddot) - dE/drdot for E = Phi (rddot + r - F(r1)), by
/// differences. Equals the left side of the linear multiplier PDE.
double helmholtz_residual(const Multiplier& m, const StateFn& phi, const VariationalState& s, double rddot);
double helmholtz_residual(const Multiplier& m, const LagrangianSpec& spec, const VariationalState& s, double rddot);

/// Multiplier PDE: Phi_theta + rdot Phi_r + d/drdot((F - r) Phi), relative to
/// the size of its terms.
double jlm_pde_residual(const Multiplier& m, const StateFn& phi, const VariationalState& s);

struct RatioDrift {
  double spread = 0;  // max - min of log(Phi_a/Phi_b)
  double max_rate = 0;  // max |d/dtheta log(Phi_a/Phi_b)|
};
RatioDrift jlm_ratio_check(const StateFn& phi_a, const StateFn& phi_b, const SupportProfile& trajectory,
                           const Column& thetas);

struct Perturbation {
  std::function<double(double)> v, vdot;
  std::string label;
};

/// sin(n pi (theta - a)/(b - a)) for n = 1..basis, then `random` combinations of
/// them with normal coefficients drawn from `seed`.
std::vector<Perturbation> perturbation_suite(double a, double b, int basis = 10, int random = 40,
                                             std::uint64_t seed = 1);

struct SecondVariation {
  double value = 0;
  /// L0 only: int Phi0(r1) (tan(theta) v + vdot)^2.
  std::optional<double> l0_identity;
};

SecondVariation second_variation(const LagrangianSpec& spec, const Multiplier& m, const SupportProfile& r_star,
                                 const Perturbation& v, double theta1, double theta2);

struct StabilityReport {
  std::vector<double> values;
  double min = 0;
  std::size_t argmin = 0;
  double identity_gap = 0;  // L0: max |value - l0_identity|
};
StabilityReport stability_suite(const LagrangianSpec& spec, const Multiplier& m, const SupportProfile& r_star,
                                double theta1, double theta2, std::uint64_t seed = 1);

struct DriftReport {
  double I_drift = 0, Q_drift = 0;
  std::size_t samples = 0;
};

/// Relative spread of I and Q over the samples of one side of pi/2.
DriftReport conservation_drift(const Multiplier& m, const SupportProfile& trajectory, const Column& thetas,
                               const QOptions& options = {});

struct GeneralLagrangianReport {
  LagrangianSpec spec;
  double pde_residual_max = 0;
  bool is_jlm = false;
  bool registered = false;
  /// With a registered pair: max |EL - Phi (rddot + r - F)| along the trajectory.
  std::optional<double> el_residual_max;
  /// Phi (rddot + r - F) - EL(double integral part) at the samples; the value
  /// dg1/dtheta - dg2/dr has to take.
  Column defect;
};

/// Builds Phi = f(I, Q) Phi0, checks the multiplier PDE along the trajectory
/// states and attaches the registered (g1, g2) for f = I^lambda (linear Hopf)
/// and f = I^3 (cubic).
GeneralLagrangianReport general_lagrangian(const Multiplier& m, GeneralTerms terms, const SupportProfile& trajectory,
                                           const Column& thetas, double tolerance = 1e-6);

}  // namespace wg
