#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "weingarten/error.hpp"
#include "weingarten/ext_real.hpp"
#include "weingarten/relations.hpp"
#include "weingarten/roc_core.hpp"

namespace wg {

/// Element of SL2(R). Construction divides by sqrt(det) when the determinant is
/// positive and rejects the rest.
template <typename Scalar>
class MoebiusElement {
 public:
  using Matrix = Eigen::Matrix<Scalar, 2, 2>;

  MoebiusElement() : m_(Matrix::Identity()) {}
  MoebiusElement(Scalar a, Scalar b, Scalar c, Scalar d) {
    m_ << a, b, c, d;
    normalize();
  }
  explicit MoebiusElement(const Matrix& m) : m_(m) { normalize(); }

  static MoebiusElement identity() { return {}; }
  /// N(v): parallel translation by v.
  static MoebiusElement translation(Scalar v) { return {Scalar(1), v, Scalar(0), Scalar(1)}; }
  /// A(w): homothety.
  static MoebiusElement homothety(Scalar w) { return {w, Scalar(0), Scalar(0), Scalar(1) / w}; }
  /// Q: reciprocal map r -> -1/r.
  static MoebiusElement reciprocal() { return {Scalar(0), Scalar(-1), Scalar(1), Scalar(0)}; }

  Scalar a() const { return m_(0, 0); }
  Scalar b() const { return m_(0, 1); }
  Scalar c() const { return m_(1, 0); }
  Scalar d() const { return m_(1, 1); }
  const Matrix& matrix() const { return m_; }
  Scalar determinant() const { return m_.determinant(); }

  MoebiusElement inverse() const { return MoebiusElement(d(), -b(), -c(), a()); }
  friend MoebiusElement operator*(const MoebiusElement& x, const MoebiusElement& y) {
    return MoebiusElement(Matrix(x.m_ * y.m_));
  }

  /// r -> (a r + b)/(c r + d).
  ExtReal operator()(ExtReal r) const { return fractional_linear(a(), b(), c(), d(), r); }

 private:
  void normalize() {
    const Scalar det = m_.determinant();
    if (!(det > 0)) throw Error(ErrorKind::Precondition, "matrix determinant must be positive");
    if (std::abs(det - 1) > Scalar(1e-15)) m_ /= std::sqrt(det);
  }

  Matrix m_;
};

using Moebius = MoebiusElement<double>;

RoCPoint apply_roc(const Moebius& M, const RoCPoint& p);
/// k -> (d k + c)/(b k + a) on both curvatures.
std::pair<ExtReal, ExtReal> apply_curvature(const Moebius& M, const std::pair<ExtReal, ExtReal>& k);

class Calibration {
 public:
  explicit Calibration(double A) : A_(A) {
    if (A == 0 || !std::isfinite(A)) throw Error(ErrorKind::Precondition, "calibration constant must be nonzero");
  }
  double value() const { return A_; }

 private:
  double A_;
};

struct ReparamOptions {
  /// Use theta~ -> pi - theta~ (the orientation-reversed branch).
  bool reversed = false;
};

struct Reparameterization {
  Calibration calibration{1.0};
  /// Right-hand side A sin(theta) (c r1 + d) at every source sample.
  Column rhs;
  /// theta~ per source sample, NaN outside the admissible sub-domain.
  Column theta_tilde;
  std::vector<bool> admissible;
  /// Contiguous admissible run [first, last] of source indices.
  Eigen::Index first = 0, last = -1;
  /// Source angle where |rhs| reaches 1 (theta~ = pi/2), if inside the profile.
  std::optional<double> saturation;
};

/// theta~ from sin theta~ = A sin theta (c r1 + d); without a calibration A is
/// set to 1/max|sin theta (c r1 + d)| with the sign making the maximum positive.
Reparameterization reparameterize(const Moebius& M, const RoCProfile& p, std::optional<Calibration> cal = {},
                                  const ReparamOptions& options = {});

enum class ImageKind { Regular, Plane, Cone };

struct InducedSurface {
  ImageKind kind = ImageKind::Regular;
  Reparameterization reparam;
  std::optional<RoCProfile> profile;
  ProfileCurve3D curve;
  /// Gauss angle of a cone image.
  double cone_angle = 0;
};

/// Surface whose RoC diagram is the M-image of the source's. `curve` embeds
/// the source with the same grid as `p`.
InducedSurface induced_surface(const Moebius& M, const RoCProfile& p, const ProfileCurve3D& curve,
                               std::optional<Calibration> cal = {}, const ReparamOptions& options = {});

struct ReciprocalImage {
  InducedSurface surface;
  double rho_north = 0, rho_south = 0;
};

/// The Q-image of a closed strictly convex surface with A = 1/rho(pi/2).
ReciprocalImage reciprocal_transform_closed(const RoCProfile& p, const ProfileCurve3D& curve);

struct Factor {
  enum class Kind { Translation, Homothety, Reciprocal };
  Kind kind;
  double parameter = 0;
  Moebius matrix() const;
  std::string label() const;
};

using FactorList = std::vector<Factor>;

/// c = 0: [N(ab), A(a)]; otherwise [N(a/c), A(1/c), Q, N(d/c)]. The product of
/// the list, left to right, is M.
FactorList decompose(const Moebius& M);
Moebius compose(const FactorList& factors);

/// Semi-quadratic coefficients of the image relation under M.
SemiQuadratic transform_coefficients(const Moebius& M, const SemiQuadratic& q);
/// Relation satisfied by the image surface. Semi-quadratic families map through
/// their coefficients; the rest become explicit F = m o F o m^-1.
WeingartenRelation transform_relation(const Moebius& M, const WeingartenRelation& rel);

struct TransformReport {
  std::size_t samples = 0, umbilic_source = 0, umbilic_image = 0, umbilic_mismatches = 0;
  std::size_t ellipticity_checked = 0, ellipticity_mismatches = 0;
  bool slope_checked = false;
  double slope = 0, slope_image = 0;
  double distance_same = 0, distance_reciprocal = 0;
  bool slope_ok = true;
  std::string slope_match;
  bool pass() const { return umbilic_mismatches == 0 && ellipticity_mismatches == 0 && slope_ok; }
};

/// Umbilic correspondence, ellipticity sign and the umbilic slope (curvature
/// plane) before and after M, using the profile's pole limit on `side`.
TransformReport verify_transform_properties(const Moebius& M, const RoCProfile& p, const WeingartenRelation& rel,
                                            Pole side = Pole::North, double slope_tolerance = 5e-2);

/// The RoC diagram of p pushed through M, parameterized by the source angle.
/// Suitable for diagram properties such as slopes, not for the CM equation.
RoCProfile diagram_image(const Moebius& M, const RoCProfile& p);

struct AdsInvariants {
  Column theta, lambda1, lambda2, lambda3;
  double drift1 = 0, drift2 = 0, drift3 = 0;
  std::size_t skipped = 0;
  double max_drift() const { return std::max({drift1, drift2, drift3}); }
};

/// Killing invariants of the RoC curve in psi = (r1 + r2)/2, s = (r2 - r1)/2,
/// with the tangent normalized to unit speed in the metric (dpsi^2 - ds^2)/s^2.
AdsInvariants ads_invariants(const RoCProfile& p);

}  // namespace wg
